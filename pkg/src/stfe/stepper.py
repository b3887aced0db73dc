"""Time stepping for the stochastic thin-film equation in Ito form

    du = -d_x(m(u) d_x^3 u) dt
         + 1/2 d_x[ Bc q(u) q'(u) + A q'(u)^2 d_x u ] dt
         + d_x(q(u) dB)

with ``m(u) = |u|^n`` and ``q(u) = |u|^(n/2)``.  Every term is a divergence of
face fluxes, so the discrete mass is conserved up to roundoff.

Schemes
-------
semi_implicit
    Linearly implicit in the fourth-order term (mobility frozen at the old
    state), explicit in the correction drift and the noise.
explicit
    Euler-Maruyama on all three terms.
heun_stratonovich
    Stochastic Heun predictor-corrector on the Stratonovich form (thin-film
    drift plus noise, no correction drift).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .banded import CyclicPentaSolver, LinearSolveError, condition_estimate
from .grid import TorusGrid, shift_next, shift_prev
from .noise import CorrectionFields, IncrementSampler, NoiseRealization, NoiseSpec, NoiseStream, correction_fields

log = logging.getLogger(__name__)

SCHEMES = ("semi_implicit", "explicit", "heun_stratonovich")
FACE_MEANS = ("arithmetic", "harmonic")
CORRECTIONS = ("discrete", "face_average")
N_DEFAULT_WINDOW = (8.0 / 3.0, 3.0)
# forward Euler / Heun limit for the biharmonic stencil: dt * 16 max(m) / h^4 <= 2
EXPLICIT_STABILITY = 1.0 / 8.0


class SimulationError(RuntimeError):
    """Numerical failure of a path, with the step it happened at."""

    def __init__(self, reason: str, step: int = -1, t: float = float("nan"), min_u: float = float("nan")):
        self.reason, self.step, self.t, self.min_u = reason, step, t, min_u
        super().__init__(f"step {step}, t={t:.6g}: {reason} (min u = {min_u:.3e})")

    def record(self) -> dict:
        return {"step": self.step, "t": self.t, "reason": self.reason, "min_u": self.min_u}


class StabilityError(SimulationError):
    pass


@dataclass(frozen=True)
class SimParams:
    n: float = 8.0 / 3.0
    T: float = 0.01
    dt: float | None = None
    dt_safety: float = 0.1
    scheme: str = "semi_implicit"
    face_mean: str = "arithmetic"
    correction: str = "discrete"
    solver_tol: float = 1e-12
    clip_report: bool = False

    def __post_init__(self):
        lo, hi = N_DEFAULT_WINDOW
        if not 2.0 < self.n < 3.0:
            raise ValueError(f"mobility exponent n={self.n} outside (2, 3)")
        if not lo <= self.n < hi:
            log.warning("mobility exponent n=%g outside [8/3, 3); accepted as n in (2, 3)", self.n)
        if not self.T > 0:
            raise ValueError("time horizon must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("fixed time step must be positive")
        if not self.dt_safety > 0:
            raise ValueError("dt safety factor must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.face_mean not in FACE_MEANS:
            raise ValueError(f"unknown face mean {self.face_mean!r}")
        if self.correction not in CORRECTIONS:
            raise ValueError(f"unknown correction form {self.correction!r}; choose from {CORRECTIONS}")
        if not self.solver_tol > 0:
            raise ValueError("solver tolerance must be positive")


@dataclass
class State:
    t: float
    u: np.ndarray
    step_index: int = 0
    min_u_so_far: float = field(default=math.inf)
    negative_nodes: int = 0

    def __post_init__(self):
        self.min_u_so_far = min(self.min_u_so_far, float(np.min(self.u)))


# -- nonlinearities -----------------------------------------------------------


def mobility(u, n: float):
    return np.abs(u) ** n


def q(u, n: float):
    return np.abs(u) ** (n / 2)


def q_prime(u, n: float):
    # n/2 - 1 > 0 for n > 2, so this vanishes continuously at u = 0
    return (n / 2) * np.abs(u) ** (n / 2 - 1) * np.sign(u)


def face_mobility(grid: TorusGrid, u: np.ndarray, n: float, mean: str = "arithmetic") -> np.ndarray:
    m = mobility(u, n)
    m_right = shift_next(m)
    if mean == "arithmetic":
        return 0.5 * (m + m_right)
    s = m + m_right
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(s > 0, 2.0 * m * m_right / np.where(s > 0, s, 1.0), 0.0)
    return out


# -- drift and noise terms ----------------------------------------------------


def drift_thin_film(grid: TorusGrid, u: np.ndarray, params: SimParams) -> np.ndarray:
    """``-div_face(m_face(u) * third_face(u))``."""
    mf = face_mobility(grid, u, params.n, params.face_mean)
    return -grid.dminus(mf * _third(grid, u))


def _third(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    return grid.dplus(grid.dminus(grid.dplus(u)))


def drift_stratonovich(grid: TorusGrid, u: np.ndarray, corr: CorrectionFields, params: SimParams) -> np.ndarray:
    """Ito correction drift.

    ``correction="discrete"`` (default) is the exact Ito-Stratonovich
    correction of the space-discrete system ``du = sum_k G_k(u) o dbeta_k``
    with ``G_k(u) = div_face(q_face(u) sigma_k)``::

        1/2 sum_k DG_k(u) G_k(u) = 1/2 div_face( sum_k sigma_k avg(q'(u) G_k(u)) )

    It is consistent with ``1/2 d_x(A q'^2 d_x u + Bc q q')`` and makes the
    corrected Ito scheme and the Stratonovich Heun scheme share one limit.
    ``correction="face_average"`` discretizes that continuum form directly:
    ``1/2 div_face(A q'_face^2 diff_face(u) + Bc (q q')_face)``.
    """
    n = params.n
    qp_nodes = q_prime(u, n)
    if params.correction == "discrete":
        sig = corr.sigma_faces
        if sig is None or sig.shape[0] == 0:
            return np.zeros_like(u)
        qf = grid.avg(q(u, n))
        G = (sig * qf - np.roll(sig * qf, 1, axis=1)) * grid.N
        qG = qp_nodes * G
        flux = np.sum(sig * 0.5 * (qG + np.roll(qG, -1, axis=1)), axis=0)
        return 0.5 * grid.dminus(flux)
    qp = grid.avg(qp_nodes)
    qqp = grid.avg(q(u, n) * qp_nodes)
    flux = corr.A * qp * qp * grid.dplus(u) + corr.Bc * qqp
    return 0.5 * grid.dminus(flux)


def noise_term(grid: TorusGrid, u: np.ndarray, dB: NoiseRealization, n: float) -> np.ndarray:
    """``div_face(q_face(u) * dB_faces)``."""
    return grid.dminus(grid.avg(q(u, n)) * dB.dB_faces)


def thin_film_matrix(grid: TorusGrid, u: np.ndarray, params: SimParams, dt: float,
                     mf: np.ndarray | None = None) -> np.ndarray:
    """Diagonals (offsets -2..2) of ``I + dt L`` with ``L v = div_face(m_face(u) third_face(v))``."""
    if mf is None:
        mf = face_mobility(grid, u, params.n, params.face_mean)
    a = mf  # face i+1/2
    b = shift_prev(mf)  # face i-1/2
    s = dt / grid.h**4
    diags = np.empty((5, grid.N))
    diags[0] = s * b
    diags[1] = s * (-a - 3.0 * b)
    diags[2] = 1.0 + s * (3.0 * a + 3.0 * b)
    diags[3] = s * (-3.0 * a - b)
    diags[4] = s * a
    return diags


# -- steppers -----------------------------------------------------------------


def _finish(state: State, u_new: np.ndarray, dt: float, params: SimParams) -> State:
    if not np.all(np.isfinite(u_new)):
        raise SimulationError("non-finite values", state.step_index + 1, state.t + dt, float(np.nanmin(state.u)))
    neg = state.negative_nodes + (int(np.count_nonzero(u_new < 0)) if params.clip_report else 0)
    return State(state.t + dt, u_new, state.step_index + 1, state.min_u_so_far, neg)


def explicit_dt_limit(grid: TorusGrid, u: np.ndarray, n: float, c: float) -> float:
    return c * grid.h**4 / max(float(np.max(mobility(u, n))), 1e-12)


def _check_explicit(grid, state, params, dt):
    limit = explicit_dt_limit(grid, state.u, params.n, EXPLICIT_STABILITY)
    if dt > limit:
        raise StabilityError(
            f"dt={dt:.3e} exceeds the explicit stability limit {limit:.3e}",
            state.step_index, state.t, float(np.min(state.u)),
        )


def step_semi_implicit(grid: TorusGrid, state: State, params: SimParams, corr: CorrectionFields,
                       dB: NoiseRealization) -> State:
    """Solve ``(I + dt L^m) u^{m+1} = u^m + dt strat(u^m) + noise(u^m)``.

    The system is solved for the increment ``u^{m+1} - u^m``; the update is
    then assembled from the face fluxes of the solution, so the mass change
    telescopes regardless of the solver residual.
    """
    dt = dB.dt
    u = state.u
    mf = face_mobility(grid, u, params.n, params.face_mean)
    explicit_part = dt * drift_stratonovich(grid, u, corr, params) + noise_term(grid, u, dB, params.n)
    diags = thin_film_matrix(grid, u, params, dt, mf)
    rhs = -dt * grid.dminus(mf * _third(grid, u)) + explicit_part
    try:
        solver = CyclicPentaSolver(diags)
        delta = solver.solve(rhs)
    except LinearSolveError as exc:
        raise SimulationError(str(exc), state.step_index, state.t, float(np.min(u))) from exc
    err = solver.backward_error(delta, rhs)
    if not np.isfinite(err) or err > params.solver_tol:
        raise SimulationError(
            f"linear solve backward error {err:.2e} above {params.solver_tol:.1e} "
            f"(condition estimate {condition_estimate(diags):.3e})",
            state.step_index, state.t, float(np.min(u)),
        )
    u_implicit = u + delta
    u_new = u - dt * grid.dminus(mf * _third(grid, u_implicit)) + explicit_part
    return _finish(state, u_new, dt, params)


def step_explicit(grid: TorusGrid, state: State, params: SimParams, corr: CorrectionFields,
                  dB: NoiseRealization) -> State:
    dt = dB.dt
    _check_explicit(grid, state, params, dt)
    u = state.u
    u_new = (u + dt * (drift_thin_film(grid, u, params) + drift_stratonovich(grid, u, corr, params))
             + noise_term(grid, u, dB, params.n))
    return _finish(state, u_new, dt, params)


def step_heun_stratonovich(grid: TorusGrid, state: State, params: SimParams, corr: CorrectionFields,
                           dB: NoiseRealization) -> State:
    """Predictor ``u + F(u)dt + G(u)dB``, corrector with ``F`` at the midpoint and averaged ``G``."""
    dt = dB.dt
    _check_explicit(grid, state, params, dt)
    u = state.u
    g0 = noise_term(grid, u, dB, params.n)
    pred = u + dt * drift_thin_film(grid, u, params) + g0
    mid = 0.5 * (u + pred)
    u_new = u + dt * drift_thin_film(grid, mid, params) + 0.5 * (g0 + noise_term(grid, pred, dB, params.n))
    return _finish(state, u_new, dt, params)


STEPPERS: dict[str, Callable] = {
    "semi_implicit": step_semi_implicit,
    "explicit": step_explicit,
    "heun_stratonovich": step_heun_stratonovich,
}


# -- paths ------------------------------------------------------------------


def choose_dt(grid: TorusGrid, u0: np.ndarray, params: SimParams) -> float:
    if params.dt is not None:
        return params.dt
    if params.scheme == "semi_implicit":
        return params.dt_safety * grid.h**2
    return explicit_dt_limit(grid, u0, params.n, params.dt_safety)


@dataclass
class PathResult:
    final: State
    dt: float
    n_steps: int
    diagnostics: list = field(default_factory=list)
    snapshot_times: np.ndarray | None = None
    snapshots: np.ndarray | None = None
    increments: np.ndarray | None = None  # per-step Brownian increments sqrt(dt) xi, shape (steps, modes)
    mass_initial: float = float("nan")

    @property
    def min_u_so_far(self) -> float:
        return self.final.min_u_so_far

    @property
    def trajectory(self):
        from .functionals import Trajectory

        if self.snapshots is None:
            raise ValueError("path was run without snapshots")
        return Trajectory(self.snapshot_times, self.snapshots, self.dt, self.increments)


def run_path(
    grid: TorusGrid,
    u0: np.ndarray,
    params: SimParams,
    spec: NoiseSpec,
    seed: int,
    *,
    replicate: int = 0,
    diagnostics: Callable[[float, np.ndarray], object] | None = None,
    diag_every: int = 1,
    snapshot_every: int = 0,
    store_increments: bool = False,
    noise_substeps: int = 1,
    max_steps: int | None = None,
) -> PathResult:
    """Integrate one path from ``u0`` to ``params.T``.

    The step count is ``ceil(T/dt)`` with ``dt`` shrunk to land exactly on
    ``T``.  Each step consumes the stream block ``step`` of
    ``NoiseStream(seed, replicate)``; with ``noise_substeps = r`` a step
    aggregates ``r`` consecutive base blocks, which keeps the Brownian path
    identical across step-size refinements.  ``max_steps`` truncates the run.
    """
    u0 = np.asarray(u0, dtype=float).copy()
    if u0.shape != (grid.N,):
        raise ValueError("initial field does not match the grid")
    if spec.grid.N != grid.N:
        raise ValueError("noise spec was built on a different grid")
    dt_target = choose_dt(grid, u0, params)
    n_steps = max(1, math.ceil(params.T / dt_target - 1e-9))
    dt = params.T / n_steps
    if max_steps is not None:
        n_steps = min(n_steps, max_steps)
    stepper = STEPPERS[params.scheme]
    corr = correction_fields(spec)
    sampler = IncrementSampler(spec)
    stream = NoiseStream(seed, replicate)

    state = State(0.0, u0)
    result = PathResult(state, dt, n_steps, mass_initial=grid.integrate(u0))
    if diagnostics is not None:
        result.diagnostics.append(diagnostics(0.0, u0))
    snaps, times, incs = [], [], []
    if snapshot_every:
        snaps.append(u0.copy())
        times.append(0.0)
    for m in range(n_steps):
        dB = sampler.sample(dt, stream, m, noise_substeps)
        if store_increments:
            incs.append(dB.dbeta)
        try:
            state = stepper(grid, state, params, corr, dB)
        except SimulationError as exc:
            if exc.step < 0:
                exc.step, exc.t = m, state.t
            raise
        k = m + 1
        if diagnostics is not None and (k % diag_every == 0 or k == n_steps):
            result.diagnostics.append(diagnostics(state.t, state.u))
        if snapshot_every and (k % snapshot_every == 0 or k == n_steps):
            snaps.append(state.u.copy())
            times.append(state.t)
    result.final = state
    if snapshot_every:
        result.snapshots = np.array(snaps)
        result.snapshot_times = np.array(times)
    if store_increments:
        result.increments = np.array(incs).reshape(len(incs), sampler.n_modes)
    return result


def with_scheme(params: SimParams, scheme: str, **changes) -> SimParams:
    return replace(params, scheme=scheme, **changes)
