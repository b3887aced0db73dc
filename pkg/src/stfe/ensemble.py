"""Replicated paths and Monte Carlo estimates.

Each replicate runs on its own counter-based noise stream keyed by a seed
derived from ``(base_seed, replicate)``.  Per-path summaries are reduced in
replicate order, so aggregates do not depend on how the work was scheduled.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .functionals import AlphaSpec, diagnostics_callback, trapezoid_weights
from .grid import TorusGrid
from .initial import MeasureIC, regularize
from .noise import NoiseSpec
from .stepper import SimParams, SimulationError, run_path

log = logging.getLogger(__name__)

FAILURE_LIMIT = 0.5


def derive_seed(base_seed: int, replicate: int) -> int:
    """64-bit seed mixed from the base seed and the replicate index."""
    ss = np.random.SeedSequence([int(base_seed) & (2**64 - 1), int(replicate)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def derive_seeds(base_seed: int, replicates: int) -> list[int]:
    seeds = [derive_seed(base_seed, r) for r in range(replicates)]
    if len(set(seeds)) != len(seeds):
        raise RuntimeError("replicate seed collision")
    return seeds


def functional_names(n_alpha: int) -> list[str]:
    names = ["mass_final", "min_u_final", "min_u_so_far", "energy_final", "l2_final"]
    for i in range(n_alpha):
        names += [f"entropy_final_a{i}", f"diss1_integral_a{i}", f"diss2_integral_a{i}", f"diss_integral_a{i}"]
    return names


@dataclass
class EnsembleConfig:
    grid: TorusGrid
    sim: SimParams
    noise: NoiseSpec
    ic: MeasureIC
    eps: float
    replicates: int = 8
    base_seed: int = 0
    alphas: Sequence[AlphaSpec] = ()
    monitored: Sequence[str] | None = None
    mass_scalings: Sequence[float] = ()
    diag_every: int = 10
    jobs: int = 1
    u0: np.ndarray | None = None  # overrides the regularized measure when given

    def __post_init__(self):
        if int(self.replicates) < 1:
            raise ValueError("need at least one replicate")
        if self.diag_every < 1 or self.jobs < 1:
            raise ValueError("diag_every and jobs must be positive")
        if any(not s > 0 for s in self.mass_scalings):
            raise ValueError("mass scalings must be positive")
        known = functional_names(len(self.alphas))
        if self.monitored is not None:
            bad = [m for m in self.monitored if m not in known]
            if bad:
                raise ValueError(f"unknown functionals {bad}; available: {known}")

    @property
    def selected(self) -> list[str]:
        return list(self.monitored) if self.monitored is not None else functional_names(len(self.alphas))

    def initial_field(self) -> np.ndarray:
        if self.u0 is not None:
            return np.asarray(self.u0, dtype=float)
        return regularize(self.ic, self.eps, self.grid)


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    se: float  # nan for a single replicate
    n: int
    min: float
    max: float

    @classmethod
    def from_samples(cls, values) -> "MomentEstimate":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return cls(math.nan, math.nan, 0, math.nan, math.nan)
        se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
        return cls(float(np.mean(v)), se, int(v.size), float(np.min(v)), float(np.max(v)))


@dataclass
class PathSummary:
    replicate: int
    seed: int
    values: dict[str, float] = field(default_factory=dict)
    failure: dict | None = None
    mass_drift: float = math.nan


@dataclass
class EnsembleResult:
    estimates: dict[str, MomentEstimate]
    paths: list[PathSummary]

    @property
    def failures(self) -> list[PathSummary]:
        return [p for p in self.paths if p.failure is not None]

    @property
    def negative_paths(self) -> int:
        """Paths whose running minimum dropped below zero."""
        return sum(1 for p in self.paths if p.failure is None and p.values["min_u_so_far"] < 0)


class EnsembleFailure(RuntimeError):
    def __init__(self, failures: list[PathSummary], total: int):
        self.failures = failures
        super().__init__(f"{len(failures)} of {total} paths failed: "
                         + "; ".join(f"replicate {p.replicate} (seed {p.seed}): {p.failure['reason']}"
                                     for p in failures[:5]))


def _summarize(cfg: EnsembleConfig, u0: np.ndarray, replicate: int, seed: int) -> PathSummary:
    summary = PathSummary(replicate, seed)
    alphas = list(cfg.alphas)
    try:
        res = run_path(cfg.grid, u0, cfg.sim, cfg.noise, seed, replicate=0,
                       diagnostics=diagnostics_callback(cfg.grid, alphas), diag_every=cfg.diag_every)
    except SimulationError as exc:
        summary.failure = {**exc.record(), "seed": seed, "replicate": replicate}
        return summary
    recs = res.diagnostics
    last = recs[-1]
    times = np.array([r.t for r in recs])
    w = trapezoid_weights(times)
    vals = {
        "mass_final": last.mass,
        "min_u_final": last.min_u,
        "min_u_so_far": res.min_u_so_far,
        "energy_final": last.energy,
        "l2_final": last.l2_norm,
    }
    for i in range(len(alphas)):
        d1 = float(np.dot(w, [r.diss1[i] for r in recs]))
        d2 = float(np.dot(w, [r.diss2[i] for r in recs]))
        vals[f"entropy_final_a{i}"] = last.entropy[i]
        vals[f"diss1_integral_a{i}"] = d1
        vals[f"diss2_integral_a{i}"] = d2
        vals[f"diss_integral_a{i}"] = d1 + d2
    summary.values = vals
    summary.mass_drift = abs(last.mass - res.mass_initial) / abs(res.mass_initial)
    return summary


def _worker(args):
    return _summarize(*args)


def run_ensemble(cfg: EnsembleConfig) -> EnsembleResult:
    """Run all replicates and reduce them in replicate order."""
    u0 = cfg.initial_field()
    seeds = derive_seeds(cfg.base_seed, cfg.replicates)
    tasks = [(cfg, u0, r, s) for r, s in enumerate(seeds)]
    if cfg.jobs > 1 and cfg.replicates > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, cfg.replicates)) as pool:
            paths = list(pool.map(_worker, tasks))
    else:
        paths = [_worker(t) for t in tasks]
    paths.sort(key=lambda p: p.replicate)
    failed = [p for p in paths if p.failure is not None]
    if failed:
        log.warning("%d of %d paths failed", len(failed), len(paths))
    if len(failed) > FAILURE_LIMIT * len(paths):
        raise EnsembleFailure(failed, len(paths))
    ok = [p for p in paths if p.failure is None]
    estimates = {name: MomentEstimate.from_samples([p.values[name] for p in ok]) for name in cfg.selected}
    return EnsembleResult(estimates, paths)


# -- mass scaling -----------------------------------------------------------------


@dataclass(frozen=True)
class ScalingRow:
    scale: float
    functional: str
    mean: float
    se: float
    slope: float  # least-squares log-log slope over all scalings


@dataclass
class ScalingReport:
    rows: list[ScalingRow]
    slopes: dict[str, float]
    predicted: dict[str, tuple[float, float]]  # exponent bracket per functional
    results: dict[float, EnsembleResult]


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(y <= 0):
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def mass_scaling_report(cfg: EnsembleConfig, functionals: Sequence[str] | None = None) -> ScalingReport:
    """Rerun the ensemble with the initial field multiplied by each scaling.

    The regularized field itself is scaled (not the measure before adding
    the positivity shift), so the initial mass scales exactly linearly.
    Predicted brackets: ``(alpha+1, alpha+n-1)`` for the dissipation
    integrals and ``(1, 1)`` for the final mass.
    """
    scalings = sorted(cfg.mass_scalings)
    if len(scalings) < 2:
        raise ValueError("need at least two mass scalings")
    if len(scalings) < 3:
        log.warning("fewer than three mass scalings; the slope is a two-point estimate")
    names = list(functionals) if functionals is not None else cfg.selected
    base = cfg.initial_field()
    results = {}
    for lam in scalings:
        results[lam] = run_ensemble(replace(cfg, u0=lam * base, mass_scalings=()))
    slopes = {name: loglog_slope(scalings, [results[s].estimates[name].mean for s in scalings]) for name in names}
    predicted: dict[str, tuple[float, float]] = {"mass_final": (1.0, 1.0)}
    n = cfg.sim.n
    for i, a in enumerate(cfg.alphas):
        br = (a.alpha + 1.0, a.alpha + n - 1.0)
        for key in ("diss1_integral", "diss2_integral", "diss_integral"):
            predicted[f"{key}_a{i}"] = br
    rows = [
        ScalingRow(s, name, results[s].estimates[name].mean, results[s].estimates[name].se, slopes[name])
        for s in scalings for name in names
    ]
    return ScalingReport(rows, slopes, {k: v for k, v in predicted.items() if k in names}, results)
