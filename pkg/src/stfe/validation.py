"""Acceptance checks at desk scale.

Each ``check_*`` function runs one experiment, compares the measurement with
its threshold and returns a ``CheckResult``.  ``SUITES`` groups them under the
names accepted by ``stfe validate``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import exponents as ex
from .ensemble import EnsembleConfig, mass_scaling_report
from .functionals import AlphaSpec, entropy_alpha, slobodeckij_norm, weak_form_residual
from .grid import TorusGrid
from .initial import MeasureIC, regularize, vague_pairing
from .noise import NoiseSpec, NoiseStream, correction_fields, preset_lambdas
from .stepper import SimParams, run_path

N_DEFAULT = 8.0 / 3.0


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    threshold: str = ""
    seconds: float = 0.0
    budget: float = math.inf

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] {self.number:>2} {self.name}: {vals} | need {self.threshold} | {self.seconds:.1f}s"


def _fmt(v) -> str:
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.4g}"


def _timed(number: int, name: str, budget: float):
    def wrap(fn: Callable[..., CheckResult]):
        def run(**kw) -> CheckResult:
            t0 = time.perf_counter()
            res = fn(**kw)
            res.number, res.name, res.budget = number, name, budget
            res.seconds = time.perf_counter() - t0
            if res.seconds > budget:
                res.passed = False
                res.measured["over_budget_s"] = res.seconds
            return res

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


def _l2(grid: TorusGrid, f) -> float:
    return math.sqrt(grid.h * float(np.sum(np.asarray(f) ** 2)))


def _cosine_ic(grid: TorusGrid, mean=0.5, amp=0.25) -> np.ndarray:
    return mean + amp * np.cos(2 * np.pi * grid.nodes)


def _orders(errors) -> list[float]:
    e = np.asarray(errors, dtype=float)
    return list(np.log2(e[:-1] / e[1:]))


# -- 1 ----------------------------------------------------------------------------


@_timed(1, "mass conservation", 30.0)
def check_conservation(N=256, T=0.05, lam=0.2, eps=0.05, explicit_steps=3000, seed=1) -> CheckResult:
    """Noisy semi-implicit run to ``T`` and a fixed-length explicit run from a mollified Dirac mass."""
    grid = TorusGrid(N)
    u0 = regularize(MeasureIC([(0.5, 1.0)]), eps, grid)
    spec = NoiseSpec(grid, preset_lambdas("pair", k=1, lam=lam), cutoff=eps)
    semi = run_path(grid, u0, SimParams(T=T), spec, seed)
    m0 = grid.integrate(u0)
    drift_semi = abs(grid.integrate(semi.final.u) - m0) / m0
    p_exp = SimParams(T=T, scheme="explicit")
    expl = run_path(grid, u0, p_exp, spec, seed, max_steps=explicit_steps)
    drift_exp = abs(grid.integrate(expl.final.u) - m0) / m0
    ok = drift_semi <= 1e-8 and drift_exp <= 1e-11
    return CheckResult(0, "", ok, {"semi_drift": drift_semi, "semi_steps": semi.n_steps,
                                   "explicit_drift": drift_exp, "explicit_steps": expl.final.step_index},
                       "semi <= 1e-8, explicit <= 1e-11")


# -- 2 ----------------------------------------------------------------------------


@_timed(2, "deterministic self-convergence", 120.0)
def check_convergence(T=0.01, dt=2e-5, levels=(128, 256, 512), ref=1024, N_time=128,
                      dts=(4e-4, 2e-4, 1e-4, 5e-5), T_time=0.02) -> CheckResult:
    """Spatial order against a fine reference at fixed dt; temporal order from successive differences."""
    spec_for = lambda g: NoiseSpec(g, {})
    params = SimParams(T=T, dt=dt)
    g_ref = TorusGrid(ref)
    u_ref = run_path(g_ref, _cosine_ic(g_ref), params, spec_for(g_ref), 0).final.u
    errs = []
    for N in levels:
        g = TorusGrid(N)
        u = run_path(g, _cosine_ic(g), params, spec_for(g), 0).final.u
        errs.append(_l2(g, u - u_ref[:: ref // N]))
    space = _orders(errs)
    g = TorusGrid(N_time)
    finals = [run_path(g, _cosine_ic(g), SimParams(T=T_time, dt=d), spec_for(g), 0).final.u for d in dts]
    diffs = [_l2(g, a - b) for a, b in zip(finals[:-1], finals[1:])]
    tord = _orders(diffs)
    ok = min(space) >= 1.8 and min(tord) >= 0.9
    return CheckResult(0, "", ok, {"space_errors": errs, "space_orders": space, "time_orders": tord},
                       "space order >= 1.8, time order >= 0.9")


# -- 3 ----------------------------------------------------------------------------


@_timed(3, "deterministic alpha-entropy decay", 30.0)
def check_entropy(N=128, T=0.05, dt=1e-4, alphas=(-0.9, -0.8, -0.7), slack=1e-6) -> CheckResult:
    grid = TorusGrid(N)
    diag = lambda t, u: [entropy_alpha(grid, u, a) for a in alphas]
    res = run_path(grid, _cosine_ic(grid), SimParams(T=T, dt=dt), NoiseSpec(grid, {}), 0, diagnostics=diag)
    series = np.array(res.diagnostics)  # (steps+1, len(alphas))
    increase = np.max(np.diff(series, axis=0), axis=0)
    drop = series[0] - series[-1]
    ok = bool(np.all(increase <= slack))
    return CheckResult(0, "", ok, {"max_increase": increase, "total_decrease": drop, "steps": res.n_steps},
                       f"max step increase <= {slack:g}")


# -- 4 ----------------------------------------------------------------------------


def ito_stratonovich_errors(N=16, T=1e-4, base_steps=500, lam=0.25, paths=16, seed=11,
                            halvings=3, correction="discrete") -> np.ndarray:
    """L2 distance at ``T`` between the corrected Ito and Heun paths, shape (paths, halvings+1).

    Level ``j`` uses ``dt = T/(base_steps 2^j)``; every level consumes the
    same finest-level Brownian path through stream aggregation.
    """
    grid = TorusGrid(N)
    u0 = _cosine_ic(grid)
    spec = NoiseSpec(grid, {1: 0.5 * lam, 2: 0.3 * lam, -1: 0.2 * lam})
    finest = 2**halvings
    out = np.zeros((paths, halvings + 1))
    for p in range(paths):
        for j in range(halvings + 1):
            dt = T / (base_steps * 2**j)
            r = finest // 2**j
            a = run_path(grid, u0, SimParams(T=T, dt=dt, correction=correction), spec, seed,
                         replicate=p, noise_substeps=r).final.u
            b = run_path(grid, u0, SimParams(T=T, dt=dt, scheme="heun_stratonovich"), spec, seed,
                         replicate=p, noise_substeps=r).final.u
            out[p, j] = _l2(grid, a - b)
    return out


@_timed(4, "Ito-Stratonovich cross-validation", 120.0)
def check_ito_stratonovich(**kw) -> CheckResult:
    err = ito_stratonovich_errors(**kw).mean(axis=0)
    ratios = list(err[:-1] / err[1:])
    ok = all(1.2 <= r <= 2.8 for r in ratios)
    return CheckResult(0, "", ok, {"mean_errors": err, "ratios": ratios}, "every ratio in [1.2, 2.8]")


# -- 5 ----------------------------------------------------------------------------


def weak_form_rms(N=128, T=0.01, base_dt=1e-4, halvings=3, lam=0.2, paths=32, modes=(1, 2, 3),
                  seed=5, u0=None) -> np.ndarray:
    """RMS over paths of the weak-form residual, shape (len(modes), halvings+1)."""
    grid = TorusGrid(N)
    if u0 is None:
        u0 = 1.0 + 0.3 * np.cos(2 * np.pi * grid.nodes) + 0.1 * np.sin(4 * np.pi * grid.nodes)
    spec = NoiseSpec(grid, preset_lambdas("pair", k=1, lam=lam) | preset_lambdas("pair", k=2, lam=lam / 2))
    params0 = SimParams(T=T)
    finest = 2**halvings
    res = np.zeros((len(modes), halvings + 1, paths))
    for p in range(paths):
        for j in range(halvings + 1):
            dt = base_dt / 2**j
            path = run_path(grid, u0, SimParams(T=T, dt=dt, n=params0.n), spec, seed, replicate=p,
                            snapshot_every=1, store_increments=True, noise_substeps=finest // 2**j)
            traj = path.trajectory
            for i, m in enumerate(modes):
                res[i, j, p] = weak_form_residual(grid, traj, spec, params0, m)
    return np.sqrt(np.mean(res**2, axis=2))


@_timed(5, "weak-form residual", 120.0)
def check_weak_form(**kw) -> CheckResult:
    rms = weak_form_rms(**kw)
    ratios = rms[:, :-1] / rms[:, 1:]
    ok = bool(np.all(ratios >= 1.25))
    return CheckResult(0, "", ok, {f"ratios_f{i + 1}": r for i, r in enumerate(ratios)} | {"rms_f1": rms[0]},
                       "every ratio >= 1.25")


# -- 6 ----------------------------------------------------------------------------


@_timed(6, "noise statistics", 10.0)
def check_noise(draws=100_000, dt=1e-3, N=64, seed=3) -> CheckResult:
    grid = TorusGrid(N)
    probes = np.array([0.0, 0.13, 0.37, 0.5, 0.81])
    spec = NoiseSpec(grid, {1: 0.5, 2: 0.3, -1: 0.2, -3: 0.1})
    stream = NoiseStream(seed)
    xi = np.stack([stream.normals(m, spec.active_modes.size) for m in range(draws)])
    dB = math.sqrt(dt) * xi @ spec.basis(probes)
    basis = spec.basis(probes)
    expected = dt * np.sum(basis * basis, axis=0)
    var = np.mean(dB**2, axis=0)
    se = np.std(dB**2, axis=0, ddof=1) / math.sqrt(draws)
    z = np.abs(var - expected) / se
    pair = correction_fields(NoiseSpec(grid, preset_lambdas("pair", k=2, lam=0.7)))
    A_all = np.concatenate([pair.A, pair.A_nodes])
    a_spread = float(np.max(A_all) - np.min(A_all))
    bc_max = float(max(np.max(np.abs(pair.Bc)), np.max(np.abs(pair.Bc_nodes))))
    ok = bool(np.all(z <= 4.0)) and a_spread <= 1e-12 and bc_max <= 1e-12
    return CheckResult(0, "", ok, {"z_scores": z, "pair_A_spread": a_spread, "pair_Bc_max": bc_max},
                       "z <= 4, A spread <= 1e-12, |Bc| <= 1e-12")


# -- 7 ----------------------------------------------------------------------------


@_timed(7, "exponent algebra", 10.0)
def check_exponents(samples=1000, seed=7) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n = rng.uniform(2.0, 3.0)
        lo, hi = ex.windows(n).alpha
        a = rng.uniform(lo, hi)
        worst = max(worst, ex.holder_identity_check(a, n).max)
    # theta = 1 admissible iff alpha in (1-n, 2-n), on a 1e-4 grid
    n = N_DEFAULT
    alphas = np.arange(-1.0 + 1e-4, 2.0 - n, 1e-4)
    vals = ex.theta_lhs(alphas, n, 1.0)
    inside = (alphas > 1.0 - n) & (alphas < 2.0 - n)
    theta1_ok = bool(np.all((vals > 0) == inside))
    scan = ex.region_scan(n)
    extent = scan.admissible_alpha_extent()
    lo_err, hi_err = abs(extent[0] - (0.5 - n)), abs(extent[1] - (2.0 - n))
    plo, phi = ex.windows(n).p
    ps = np.linspace(plo, phi, 102)[1:-1]
    parab_ok = all(ex.parabola_ordering(p).holds for p in ps)
    ok = worst <= 1e-14 and theta1_ok and max(lo_err, hi_err) <= 1e-3 and parab_ok
    return CheckResult(0, "", ok, {"max_identity_residual": worst, "theta1_iff": theta1_ok,
                                   "endpoint_errors": (lo_err, hi_err), "parabolas": parab_ok},
                       "residual <= 1e-14, endpoints within 1e-3, ordering holds")


# -- 8 ----------------------------------------------------------------------------


@_timed(8, "mollified Dirac vague convergence", 5.0)
def check_vague(N=1024, eps_list=(0.08, 0.04, 0.02, 0.01), x0=0.3) -> CheckResult:
    grid = TorusGrid(N)
    phi = lambda x: np.cos(2 * np.pi * x)
    u0 = MeasureIC([(x0, 1.0)])
    errs = []
    for eps in eps_list:
        field_ = regularize(u0, eps, grid)
        target = vague_pairing(u0, phi) + eps * grid.integrate(grid.sample(phi))
        errs.append(abs(grid.integrate(field_ * grid.sample(phi)) - target))
    factors = [a / b for a, b in zip(errs[:-1], errs[1:])]
    return CheckResult(0, "", min(factors) >= 3.0, {"errors": errs, "factors": factors}, "factor >= 3")


# -- 9 ----------------------------------------------------------------------------


@_timed(9, "norm estimators", 5.0)
def check_norms() -> CheckResult:
    t = np.linspace(0.0, 1.0, 512)
    exact = math.sqrt(1.0 / 3.0 + 8.0 / 15.0)
    rel = abs(slobodeckij_norm(t, t, 0.25, 2.0) - exact) / exact
    grid = TorusGrid(64)
    c = np.cos(2 * np.pi * grid.nodes)
    hk_errs = [
        abs(grid.hk_norm(np.ones(64), -3.0) - 1.0),
        abs(grid.hk_norm(c, 0.0) - math.sqrt(0.5)),
        abs(grid.hk_norm(c, -3.0) - math.sqrt(0.5 * (1 + 4 * math.pi**2) ** -3)),
    ]
    ok = rel <= 0.02 and max(hk_errs) <= 1e-9
    return CheckResult(0, "", ok, {"slobodeckij_rel_err": rel, "hk_errors": hk_errs},
                       "relative <= 2%, hk <= 1e-9")


# -- 10 ---------------------------------------------------------------------------


@_timed(10, "mass-scaling trend", 300.0)
def check_scaling(N=64, T=0.05, replicates=64, alpha=-0.8, lam=0.2, scalings=(0.5, 1.0, 2.0),
                  diag_every=8, seed=2024) -> CheckResult:
    grid = TorusGrid(N)
    n = N_DEFAULT
    u0 = _cosine_ic(grid, 1.0, 0.5)
    cfg = EnsembleConfig(
        grid=grid, sim=SimParams(n=n, T=T), noise=NoiseSpec(grid, preset_lambdas("pair", k=1, lam=lam)),
        ic=MeasureIC(), eps=0.05, replicates=replicates, base_seed=seed, alphas=[AlphaSpec(alpha, n)],
        mass_scalings=scalings, diag_every=diag_every, u0=u0,
    )
    rep = mass_scaling_report(cfg, ["diss_integral_a0", "mass_final"])
    bound = alpha + n - 1.0 + 0.5
    s_diss, s_mass = rep.slopes["diss_integral_a0"], rep.slopes["mass_final"]
    failures = sum(len(r.failures) for r in rep.results.values())
    ok = s_diss <= bound and abs(s_mass - 1.0) <= 1e-10
    return CheckResult(0, "", ok, {"diss_slope": s_diss, "mass_slope_minus_1": s_mass - 1.0,
                                   "failed_paths": failures},
                       f"diss slope <= {bound:.4f}, mass slope = 1")


SUITES: dict[str, list[Callable[..., CheckResult]]] = {
    "conservation": [check_conservation],
    "convergence": [check_convergence],
    "entropy": [check_entropy],
    "ito-stratonovich": [check_ito_stratonovich],
    "weakform": [check_weak_form],
    "noise": [check_noise],
    "exponents": [check_exponents],
    "ic": [check_vague],
    "norms": [check_norms],
    "scaling": [check_scaling],
}

ALL_CHECKS = [fn for fns in SUITES.values() for fn in fns]
