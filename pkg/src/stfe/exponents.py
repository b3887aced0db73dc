"""Exponent algebra of the alpha-entropy estimate.

Windows for the mobility exponent ``n`` in (2, 3), the (alpha, theta)
admissibility condition, the affine map ``p = alpha + n + 5`` and the
interpolation identities used to bound the higher space-time norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


def _check_n(n: float):
    if not 2.0 < n < 3.0:
        raise ValueError(f"mobility exponent n={n} outside (2, 3)")


@dataclass(frozen=True)
class ExponentWindows:
    """Open parameter windows; every bound is a function of ``n`` alone."""

    n: float
    alpha: tuple[float, float]
    alpha_theta: tuple[float, float]
    p: tuple[float, float]
    r: tuple[float, float]
    mu: tuple[float, float]
    nu: tuple[float, float]
    gamma: tuple[float, float]
    nu5: tuple[float, float]

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("alpha", "alpha_theta", "p", "r", "mu", "nu", "gamma", "nu5")}


def windows(n: float) -> ExponentWindows:
    _check_n(n)
    return ExponentWindows(
        n=n,
        alpha=(-1.0, 2.0 - n),
        alpha_theta=(0.5 - n, 2.0 - n),
        p=(n + 4.0, 7.0),
        r=((n + 4.0) / 2.0, 3.5),
        mu=((n + 4.0) / (n + 2.0), 7.0 / (n + 2.0)),
        nu=(1.0, 7.0 / (n + 4.0)),
        gamma=(0.0, 0.5),
        nu5=(2.0 * (n + 4.0) / n, 14.0 / n),
    )


class Flagged(NamedTuple):
    """A value together with its position relative to an open window."""

    value: float
    status: str  # "interior", "boundary" or "outside"

    @property
    def in_window(self) -> bool:
        return self.status == "interior"


def _classify(x: float, window: tuple[float, float], tol: float = 1e-12) -> str:
    lo, hi = window
    if abs(x - lo) <= tol or abs(x - hi) <= tol:
        return "boundary"
    return "interior" if lo < x < hi else "outside"


# -- (alpha, theta) condition ----------------------------------------------------


def theta_lhs(alpha, n, theta):
    """``(1/3)(alpha+n-2)(2 theta - 1 - (alpha+n)) - (theta-1)^2``; vectorized."""
    beta = np.asarray(alpha) + n
    theta = np.asarray(theta)
    return (beta - 2.0) * (2.0 * theta - 1.0 - beta) / 3.0 - (theta - 1.0) ** 2


def theta_condition(alpha: float, n: float, theta: float) -> tuple[float, bool]:
    if not theta > 0:
        raise ValueError("theta must be positive")
    value = float(theta_lhs(alpha, n, theta))
    return value, value > 0.0


def admissible_theta_interval(alpha: float, n: float) -> tuple[float, float] | None:
    """Open interval of theta > 0 with a positive left-hand side, or ``None``.

    With ``a = alpha + n - 2`` the left-hand side is the concave quadratic
    ``-(s - a/3)^2 - (a/3)(1 + 2a/3)`` in ``s = theta - 1``, so the interval is
    ``1 + a/3 -+ sqrt(-(a/3)(1 + 2a/3))``.
    """
    a = alpha + n - 2.0
    peak = -(a / 3.0) * (1.0 + 2.0 * a / 3.0)
    if not peak > 0:
        return None
    half = math.sqrt(peak)
    lo, hi = 1.0 + a / 3.0 - half, 1.0 + a / 3.0 + half
    lo = max(lo, 0.0)
    if hi <= lo:
        return None
    return lo, hi


# -- p <-> alpha ----------------------------------------------------------------


def p_from_alpha(alpha: float, n: float) -> Flagged:
    p = alpha + n + 5.0
    return Flagged(p, _classify(p, windows(n).p))


def alpha_from_p(p: float, n: float) -> Flagged:
    alpha = p - n - 5.0
    return Flagged(alpha, _classify(alpha, windows(n).alpha))


# -- interpolation identities ---------------------------------------------------


@dataclass(frozen=True)
class HolderResiduals:
    r_identity: float
    nu_identities: tuple[float, ...]

    @property
    def max(self) -> float:
        return max(self.r_identity, *self.nu_identities)


def holder_identity_check(alpha: float, n: float) -> HolderResiduals:
    """Residuals of ``1/r = 1/4 + (3-(alpha+n))/(4p)`` and ``(n-2+l)/p + (3-l)/r = 1/nu_l``.

    Here ``p = alpha + n + 5``, ``r = p/2`` and ``nu_l = p/(n+4-l)`` for l = 0, 1, 2, 3.
    """
    p = alpha + n + 5.0
    r = p / 2.0
    res_r = abs(1.0 / r - (0.25 + (3.0 - (alpha + n)) / (4.0 * p)))
    res_nu = []
    for l in range(4):
        nu = p / (n + 4.0 - l)
        res_nu.append(abs((n - 2.0 + l) / p + (3.0 - l) / r - 1.0 / nu))
    return HolderResiduals(res_r, tuple(res_nu))


def nu_lemma_window(l: int, n: float) -> tuple[float, float]:
    if l in (0, 1, 2):
        d = n + 4.0 - l
    elif l in (3, 4):
        d = n + 3.0 - l
    elif l == 5:
        return windows(n).nu5
    else:
        raise ValueError(f"no exponent nu_{l}")
    return (n + 4.0) / d, 7.0 / d


def nu_table(p: float, n: float) -> dict[int, Flagged]:
    lo, hi = windows(n).p
    if not lo < p < hi:
        raise ValueError(f"p={p} outside ({lo:g}, {hi:g})")
    out = {}
    for l in range(6):
        if l <= 2:
            nu = p / (n + 4.0 - l)
        elif l <= 4:
            nu = p / (n + 3.0 - l)
        else:
            nu = 2.0 * p / n
        out[l] = Flagged(nu, _classify(nu, nu_lemma_window(l, n), tol=0.0))
    return out


# -- parabolas --------------------------------------------------------------------


def parabolas(x, p: float):
    x = np.asarray(x, dtype=float)
    g1 = np.ones_like(x)
    g2 = x - 1.0 - x * x / p
    g3 = x / 2.0 - x * x / (2.0 * p)
    return g1, g2, g3


@dataclass(frozen=True)
class ParabolaReport:
    holds: bool
    vertex_values: tuple[float, float, float]  # (g2, g3, g1) at x = p/2
    min_gap_13: float
    min_gap_32: float


def parabola_ordering(p: float, x_max: float = 10.0, step: float = 1e-3, tol: float = 1e-12) -> ParabolaReport:
    """Check ``g1 >= g3 >= g2`` on a grid of [0, x_max] and at the common vertex ``p/2``."""
    x = np.arange(0.0, x_max + 0.5 * step, step)
    g1, g2, g3 = parabolas(x, p)
    gap13 = float(np.min(g1 - g3))
    gap32 = float(np.min(g3 - g2))
    v2, v3 = p / 4.0 - 1.0, p / 8.0
    holds = gap13 >= -tol and gap32 >= -tol and v2 <= v3 + tol and v3 <= 1.0 + tol
    return ParabolaReport(holds, (v2, v3, 1.0), gap13, gap32)


# -- region scan -------------------------------------------------------------------


@dataclass(frozen=True)
class RegionScan:
    alpha: np.ndarray
    theta: np.ndarray
    lhs: np.ndarray  # shape (len(alpha), len(theta))

    @property
    def admissible(self) -> np.ndarray:
        return self.lhs > 0

    def admissible_alpha_extent(self) -> tuple[float, float] | None:
        ok = np.any(self.admissible, axis=1)
        if not np.any(ok):
            return None
        a = self.alpha[ok]
        return float(a[0]), float(a[-1])

    def rows(self):
        A, Th = np.meshgrid(self.alpha, self.theta, indexing="ij")
        return np.column_stack([A.ravel(), Th.ravel(), self.lhs.ravel(), self.admissible.ravel()])


def region_scan(n: float, alpha_step: float = 1e-3, theta_step: float = 1e-2) -> RegionScan:
    """``theta_lhs`` on ``(1/2-n-0.2, 2-n+0.2) x (0.01, 3]``.

    Alpha samples sit at cell centres, so the window endpoints (where the
    condition degenerates to equality) are never sampled and the scanned
    admissible extent lies within half a step of them.
    """
    _check_n(n)
    lo, hi = 0.5 - n - 0.2, 2.0 - n + 0.2
    m = int(round((hi - lo) / alpha_step))
    alpha = lo + alpha_step * (np.arange(m) + 0.5)
    theta = theta_step * np.arange(1, int(round(3.0 / theta_step)) + 1)
    return RegionScan(alpha, theta, theta_lhs(alpha[:, None], n, theta[None, :]))
