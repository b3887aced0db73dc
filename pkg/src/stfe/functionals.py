"""Monitored quantities of a film-height path.

Pointwise functionals (mass, alpha-entropy, dissipation, energy), space-time
and fractional-in-time norms of sampled paths, the residual of the weak
solution identity, and a contact-angle diagnostic.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .grid import TorusGrid
from .noise import NoiseSpec, eigenfunction, eigenfunction_derivative
from .stepper import SimParams, q, q_prime

log = logging.getLogger(__name__)


# -- exponents attached to an entropy parameter ------------------------------


@dataclass(frozen=True)
class AlphaSpec:
    """Entropy parameter alpha with the dissipation exponents ``(alpha+n+1)/4`` and ``/2``."""

    alpha: float
    n: float

    def __post_init__(self):
        if not -1.0 < self.alpha < 2.0 - self.n:
            raise ValueError(f"alpha={self.alpha} outside (-1, 2-n) = (-1, {2.0 - self.n:g})")

    @property
    def e4(self) -> float:
        return (self.alpha + self.n + 1.0) / 4.0

    @property
    def e2(self) -> float:
        return (self.alpha + self.n + 1.0) / 2.0


# -- pointwise functionals ----------------------------------------------------


def mass(grid: TorusGrid, u) -> float:
    return grid.integrate(u)


def g_alpha(u, alpha: float, delta: float = 0.0):
    """``G_alpha(u) = u^(alpha+1) / (alpha (alpha+1))``, evaluated at ``|u| + delta``.

    ``delta > 0`` gives the shifted variant ``G_alpha(u + delta)``.
    """
    if not alpha > -1.0 or alpha == 0.0:
        raise ValueError(f"G_alpha needs alpha in (-1, 0) or (0, inf), got {alpha}")
    base = np.abs(u) + delta
    return base ** (alpha + 1.0) / (alpha * (alpha + 1.0))


def entropy_alpha(grid: TorusGrid, u, alpha: float, delta: float = 0.0) -> float:
    u = np.asarray(u, dtype=float)
    neg = int(np.count_nonzero(u < 0))
    if neg:
        log.debug("alpha-entropy evaluated with %d negative nodes (|u| used)", neg)
    return grid.integrate(g_alpha(u, alpha, delta))


def dissipation_terms(grid: TorusGrid, u, spec: AlphaSpec) -> tuple[float, float]:
    """``(||d_x u^e4||_4^4, ||d_x^2 u^e2||_2^2)`` through the powered variables."""
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    w = a ** spec.e4
    v = a ** spec.e2
    diss1 = grid.h * float(np.sum(grid.diff_face(w) ** 4))
    diss2 = grid.h * float(np.sum(grid.deriv2(v) ** 2))
    return diss1, diss2


def energy(grid: TorusGrid, u) -> float:
    """Surface energy ``1/2 int (d_x u)^2`` with face differences."""
    return 0.5 * grid.h * float(np.sum(grid.diff_face(u) ** 2))


def classical_entropy(grid: TorusGrid, u, n: float) -> float:
    """``int G(u)`` with ``G = G_{1-n}``; ``inf`` as soon as a node is <= 0."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        return math.inf
    # G_alpha at alpha = 1 - n < -1, outside the alpha-entropy window but finite for u > 0
    return grid.integrate(u ** (2.0 - n) / ((1.0 - n) * (2.0 - n)))


def l2_norm(grid: TorusGrid, u) -> float:
    return math.sqrt(grid.integrate(np.asarray(u, dtype=float) ** 2))


# -- diagnostics records --------------------------------------------------------


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    min_u: float
    energy: float
    l2_norm: float
    entropy: list[float] = field(default_factory=list)
    diss1: list[float] = field(default_factory=list)
    diss2: list[float] = field(default_factory=list)

    def row(self) -> list[float]:
        out = [self.t, self.mass, self.min_u, self.energy, self.l2_norm]
        for e, d1, d2 in zip(self.entropy, self.diss1, self.diss2):
            out += [e, d1, d2]
        return out


def diagnostics_header(n_alpha: int) -> list[str]:
    cols = ["t", "mass", "min_u", "energy", "l2_norm"]
    for i in range(n_alpha):
        cols += [f"entropy_a{i}", f"diss1_a{i}", f"diss2_a{i}"]
    return cols


def diagnostics(grid: TorusGrid, t: float, u, alphas: Sequence[AlphaSpec]) -> DiagnosticsRecord:
    u = np.asarray(u, dtype=float)
    rec = DiagnosticsRecord(t, mass(grid, u), float(np.min(u)), energy(grid, u), l2_norm(grid, u))
    for spec in alphas:
        rec.entropy.append(entropy_alpha(grid, u, spec.alpha))
        d1, d2 = dissipation_terms(grid, u, spec)
        rec.diss1.append(d1)
        rec.diss2.append(d2)
    return rec


def diagnostics_callback(grid: TorusGrid, alphas: Sequence[AlphaSpec]) -> Callable:
    return lambda t, u: diagnostics(grid, t, u, alphas)


# -- paths ----------------------------------------------------------------------


@dataclass
class Trajectory:
    """Snapshots ``fields[i]`` at ``times[i]``; optional per-step Brownian increments."""

    times: np.ndarray
    fields: np.ndarray
    dt: float | None = None
    increments: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.fields = np.asarray(self.fields, dtype=float)
        if self.times.size == 0:
            raise ValueError("empty trajectory")
        if self.fields.shape[0] != self.times.size:
            raise ValueError("one snapshot per time is required")


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.size == 1:
        return np.zeros(1)
    dt = np.diff(times)
    w = np.zeros(times.size)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def spacetime_lp(grid: TorusGrid, traj: Trajectory, p: float) -> float:
    """``||u||_{L^p([0,T] x T)}`` by trapezoid in time and the grid rule in space."""
    w = trapezoid_weights(traj.times)
    inner = grid.h * np.sum(np.abs(traj.fields) ** p, axis=1)
    return float(np.dot(w, inner)) ** (1.0 / p)


def spacetime_w1r(grid: TorusGrid, traj: Trajectory, r: float) -> float:
    """``||d_x u||_{L^r([0,T] x T)}`` with face differences."""
    w = trapezoid_weights(traj.times)
    grads = (np.roll(traj.fields, -1, axis=1) - traj.fields) / grid.h
    inner = grid.h * np.sum(np.abs(grads) ** r, axis=1)
    return float(np.dot(w, inner)) ** (1.0 / r)


def slobodeckij_norm(times, values, kappa: float, p: float) -> float:
    """Fractional-in-time norm of a sampled path.

    ``values`` is either a scalar series (shape (M,)) or an array (M, d) whose
    rows live in a space where the norm is Euclidean (see
    ``TorusGrid.hk_embedding``).  Computes

        ( int |f|^p dt + sum_{i != j} w_i w_j |f_i - f_j|^p / |t_i - t_j|^(1 + kappa p) )^(1/p)

    with trapezoid weights.  Dropping the diagonal biases the estimate low.
    """
    times = np.asarray(times, dtype=float)
    vals = np.asarray(values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if times.size < 8:
        raise ValueError("at least 8 time samples are needed")
    if not 0.0 < kappa < 1.0 or p < 1.0:
        raise ValueError("need kappa in (0, 1) and p >= 1")
    if vals.shape[0] != times.size:
        raise ValueError("one value per sample time is required")
    w = trapezoid_weights(times)
    lp = float(np.dot(w, np.linalg.norm(vals, axis=1) ** p))
    dist = pdist(vals)
    tdist = pdist(times[:, None])
    i, j = np.triu_indices(times.size, k=1)
    semi = 2.0 * float(np.sum(w[i] * w[j] * dist**p / tdist ** (1.0 + kappa * p)))
    return (lp + semi) ** (1.0 / p)


def neg_sobolev_path_norm(grid: TorusGrid, traj: Trajectory, gamma: float, p_time: float,
                          kappa: float = -3.0) -> float:
    """Fractional-in-time norm of the path measured in ``H^kappa`` (p = 2 surrogate for ``W^{-3,mu}``)."""
    return slobodeckij_norm(traj.times, grid.hk_embedding(traj.fields, kappa), gamma, p_time)


# -- weak form ------------------------------------------------------------------


def fourier_test_function(m: int):
    """``f_m`` and its first three derivatives as callables."""
    w = 2 * np.pi * m

    def derivs(x):
        x = np.asarray(x, dtype=float)
        f0 = eigenfunction(m, x)
        f1 = eigenfunction_derivative(m, x)
        # second and third derivatives of cos/sin modes
        f2 = -(w**2) * f0
        f3 = -(w**2) * f1
        return f0, f1, f2, f3

    return derivs


def weak_form_residual(grid: TorusGrid, traj: Trajectory, spec: NoiseSpec, params: SimParams,
                       phi: int | Callable) -> float:
    """``|R(T)|`` for the tested solution identity.

    ``R = <u(T),phi> - <u(0),phi> - sum_m dt [ D(u^m) - C(u^m) ] + sum_m S(u^m, dbeta^m)`` with

    * ``D`` the three-term weak thin-film pairing,
    * ``C = 1/2 <Bc q q' + A q'^2 u_x, phi'>`` the correction pairing,
    * ``S = <q(u) dB, phi'>`` the stochastic pairing,

    all evaluated at left endpoints, nodal centered derivatives of ``u`` and
    exact derivatives of ``phi``.  The trajectory must hold every step and its
    Brownian increments.
    """
    if traj.increments is None:
        raise ValueError("trajectory has no stored noise increments")
    steps = traj.fields.shape[0] - 1
    if traj.increments.shape[0] != steps:
        raise ValueError("need one snapshot per step to evaluate the residual")
    derivs = fourier_test_function(phi) if isinstance(phi, (int, np.integer)) else phi
    x = grid.nodes
    f0, f1, f2, f3 = derivs(x)
    n = params.n
    basis = spec.basis(x)
    dbasis = spec.basis_derivative(x)
    A = np.sum(basis * basis, axis=0)
    Bc = np.sum(basis * dbasis, axis=0)

    U = traj.fields[:-1]
    a = np.abs(U)
    ux = (np.roll(U, -1, axis=1) - np.roll(U, 1, axis=1)) / (2 * grid.h)
    D = (
        0.5 * n * (n - 1) * (a ** (n - 2) * ux**3) @ f1
        + 1.5 * n * (a ** (n - 1) * ux**2) @ f2
        + (a**n * ux) @ f3
    ) * grid.h
    qu, qpu = q(U, n), q_prime(U, n)
    C = 0.5 * ((Bc * qu * qpu + A * qpu**2 * ux) @ f1) * grid.h
    dB = traj.increments @ basis  # (steps, N)
    S = np.sum(qu * dB * f1, axis=1) * grid.h
    dts = np.diff(traj.times)
    lhs = grid.h * (traj.fields[-1] @ f0 - traj.fields[0] @ f0)
    res = lhs - np.dot(dts, D - C) + np.sum(S)
    return abs(float(res))


# -- contact line ---------------------------------------------------------------


@dataclass(frozen=True)
class ContactAngleReport:
    zero_set_nodes: np.ndarray
    max_abs_slope_at_zero_set: float


def contact_angle_diag(grid: TorusGrid, u, threshold: float) -> ContactAngleReport:
    """Largest one-sided slope ``|diff_face|`` on the faces touching nodes with ``u < threshold``."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    u = np.asarray(u, dtype=float)
    zero = np.flatnonzero(u < threshold)
    if zero.size == 0:
        return ContactAngleReport(zero, 0.0)
    g = np.abs(grid.diff_face(u))
    faces = np.concatenate([zero, (zero - 1) % grid.N])
    return ContactAngleReport(zero, float(np.max(g[faces])))
