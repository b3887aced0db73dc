"""Measure-valued initial data and its mollification.

A non-negative measure is stored as point masses (``atoms``) plus an optional
absolutely continuous density sampled on the grid.  Regularization follows

    u_{0,eps} = 1{ |u0| < 1/eps } (u0 * eta_eps) + eps

with ``eta_eps`` the periodic heat kernel at time ``eps**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .grid import TorusGrid, check_finite

WRAP_TERMS = 3


def _periodic_distance(x, center):
    d = np.asarray(x, dtype=float) - center
    return d - np.round(d)


def heat_kernel(x, eps: float):
    """Wrapped Gaussian ``sum_{|m|<=3} (4 pi eps^2)^-1/2 exp(-(x+m)^2 / (4 eps^2))``."""
    x = np.asarray(x, dtype=float)
    norm = 1.0 / math.sqrt(4 * math.pi * eps * eps)
    out = np.zeros_like(x)
    for m in range(-WRAP_TERMS, WRAP_TERMS + 1):
        out += np.exp(-((x + m) ** 2) / (4 * eps * eps))
    return norm * out


@dataclass(frozen=True)
class MollifierSpec:
    eps: float
    kind: str = "heat"

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("mollifier width must be positive")
        if self.kind != "heat":
            raise ValueError(f"unsupported mollifier kind {self.kind!r}")


def _require_resolved(eps: float, grid: TorusGrid):
    if grid.N < 4.0 / eps:
        raise ValueError(
            f"grid with N={grid.N} does not resolve a mollifier of width {eps}; need N >= {4.0 / eps:g}"
        )


def mollifier_field(spec: MollifierSpec, grid: TorusGrid) -> np.ndarray:
    """Heat kernel sampled at the nodes, centered at x = 0."""
    _require_resolved(spec.eps, grid)
    x = _periodic_distance(grid.nodes, 0.0)
    return check_finite(heat_kernel(x, spec.eps))


# -- density presets ----------------------------------------------------------


def _bump(x, center, width):
    r = np.abs(_periodic_distance(x, center)) / width
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def density_preset(cfg: Mapping, grid: TorusGrid) -> np.ndarray:
    """Sample a named density: ``constant``, ``cosine`` or ``bump``.

    ``bump`` is the smooth compactly supported profile ``exp(-1/(1-r^2))``
    of half-width ``width`` scaled so its grid integral equals ``mass``.
    """
    cfg = dict(cfg)
    kind = cfg.pop("preset")
    x = grid.nodes
    if kind == "constant":
        (c,) = _take(cfg, "c")
        values = np.full(grid.N, float(c))
    elif kind == "cosine":
        mean, amp, k = _take(cfg, "mean", "amp", "k")
        if not mean >= amp >= 0:
            raise ValueError("cosine density needs mean >= amp >= 0")
        values = mean + amp * np.cos(2 * np.pi * int(k) * x)
    elif kind == "bump":
        center, width, mass = _take(cfg, "center", "width", "mass")
        if not 0 < width <= 0.5:
            raise ValueError("bump width must lie in (0, 0.5]")
        shape = _bump(x, float(center), float(width))
        total = grid.integrate(shape)
        if total <= 0:
            raise ValueError("bump is not resolved by the grid")
        values = float(mass) * shape / total
    else:
        raise ValueError(f"unknown density preset {kind!r}")
    return values


def _take(cfg: dict, *keys):
    missing = [k for k in keys if k not in cfg]
    extra = set(cfg) - set(keys)
    if missing or extra:
        raise ValueError(f"density preset expects keys {list(keys)}; missing {missing}, unexpected {sorted(extra)}")
    return tuple(float(cfg[k]) for k in keys)


# -- measures ---------------------------------------------------------------


@dataclass(frozen=True)
class MeasureIC:
    """Non-negative measure: atoms ``(x_j, m_j)`` plus an optional nodal density."""

    atoms: Sequence[tuple[float, float]] = ()
    density: np.ndarray | None = None
    grid: TorusGrid | None = field(default=None, compare=False)

    def __post_init__(self):
        atoms = tuple((float(x), float(m)) for x, m in self.atoms)
        for x, m in atoms:
            if not 0.0 <= x < 1.0:
                raise ValueError(f"atom location {x} outside [0, 1)")
            if not (m >= 0 and math.isfinite(m)):
                raise ValueError(f"atom mass {m} must be finite and non-negative")
        object.__setattr__(self, "atoms", atoms)
        if self.density is not None:
            if self.grid is None:
                raise ValueError("a density needs the grid it is sampled on")
            d = check_finite(np.asarray(self.density, dtype=float), "density")
            if d.shape != (self.grid.N,):
                raise ValueError("density length does not match the grid")
            if np.any(d < 0):
                raise ValueError("density must be non-negative")
            object.__setattr__(self, "density", d)

    @property
    def total_mass(self) -> float:
        mass = sum(m for _, m in self.atoms)
        if self.density is not None:
            mass += self.grid.integrate(self.density)
        return mass

    def scaled(self, factor: float) -> "MeasureIC":
        density = None if self.density is None else factor * self.density
        return MeasureIC([(x, factor * m) for x, m in self.atoms], density, self.grid)


def measure_from_config(cfg: Mapping, grid: TorusGrid) -> MeasureIC:
    """``{"atoms": [[0.5, 1.0]], "density": {"preset": "cosine", ...}}`` -> ``MeasureIC``."""
    atoms = [tuple(a) for a in cfg.get("atoms", [])]
    density = None
    if cfg.get("density") is not None:
        density = density_preset(cfg["density"], grid)
    return MeasureIC(atoms, density, grid if density is not None else None)


def regularize(u0: MeasureIC, eps: float, grid: TorusGrid) -> np.ndarray:
    """Strictly positive smooth approximation of ``u0`` on ``grid``."""
    if not 0.0 < eps < 1.0:
        raise ValueError("regularization parameter must lie in (0, 1)")
    _require_resolved(eps, grid)
    smooth = np.zeros(grid.N)
    if u0.total_mass < 1.0 / eps:
        x = grid.nodes
        for xj, mj in u0.atoms:
            smooth += mj * heat_kernel(_periodic_distance(x, xj), eps)
        if u0.density is not None:
            if u0.grid.N != grid.N:
                raise ValueError("density was sampled on a different grid")
            kernel = mollifier_field(MollifierSpec(eps), grid)
            conv = np.fft.ifft(np.fft.fft(u0.density) * np.fft.fft(kernel)).real * grid.h
            smooth += conv
    return check_finite(smooth + eps)


def vague_pairing(u0: MeasureIC, phi: Callable | np.ndarray) -> float:
    """``<u0, phi>``: exact point evaluation at atoms plus grid quadrature of the density."""
    total = 0.0
    if callable(phi):
        for x, m in u0.atoms:
            total += m * float(phi(x))
        if u0.density is not None:
            total += u0.grid.integrate(u0.density * u0.grid.sample(phi))
        return total
    phi = np.asarray(phi, dtype=float)
    if u0.atoms:
        raise ValueError("a sampled test function cannot be evaluated at atoms; pass a callable")
    if u0.density is None:
        return 0.0
    return u0.grid.integrate(u0.density * phi)
