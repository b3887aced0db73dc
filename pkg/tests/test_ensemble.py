import math

import numpy as np
import pytest

from stfe.ensemble import (
    EnsembleConfig,
    EnsembleFailure,
    MomentEstimate,
    derive_seed,
    derive_seeds,
    functional_names,
    loglog_slope,
    mass_scaling_report,
    run_ensemble,
)
from stfe.functionals import AlphaSpec, dissipation_terms
from stfe.grid import TorusGrid
from stfe.initial import MeasureIC
from stfe.noise import NoiseSpec, preset_lambdas
from stfe.stepper import SimParams

N83 = 8.0 / 3.0
G = TorusGrid(32)
U0 = 1 + 0.5 * np.cos(2 * np.pi * G.nodes)


def _cfg(noise=None, **kw):
    base = dict(grid=G, sim=SimParams(T=2e-3), noise=noise or NoiseSpec(G, {}), ic=MeasureIC(), eps=0.2,
                replicates=4, alphas=[AlphaSpec(-0.8, N83)], u0=U0, diag_every=4)
    base.update(kw)
    return EnsembleConfig(**base)


def test_seed_derivation():
    assert derive_seed(5, 3) == derive_seed(5, 3)
    assert derive_seed(5, 3) != derive_seed(5, 4) != derive_seed(6, 3)
    seeds = derive_seeds(0, 10_000)
    assert len(set(seeds)) == 10_000 and all(0 <= s < 2**64 for s in seeds)


def test_config_validation():
    with pytest.raises(ValueError):
        _cfg(replicates=0)
    with pytest.raises(ValueError):
        _cfg(mass_scalings=[1.0, -2.0])
    with pytest.raises(ValueError):
        _cfg(monitored=["nope"])
    assert _cfg().selected == functional_names(1)


def test_moment_estimate():
    m = MomentEstimate.from_samples([1.0, 2.0, 3.0])
    assert m.mean == 2.0 and m.se == pytest.approx(1 / math.sqrt(3)) and (m.min, m.max, m.n) == (1.0, 3.0, 3)
    single = MomentEstimate.from_samples([4.0])
    assert single.mean == 4.0 and math.isnan(single.se)


def test_zero_noise_has_zero_standard_error():
    res = run_ensemble(_cfg())
    for name, est in res.estimates.items():
        assert est.se == 0.0, name
    assert res.estimates["mass_final"].mean == pytest.approx(G.integrate(U0), rel=1e-12)
    assert res.failures == [] and res.negative_paths == 0


def test_single_replicate():
    res = run_ensemble(_cfg(noise=NoiseSpec(G, preset_lambdas("pair", k=1, lam=0.2)), replicates=1))
    est = res.estimates["energy_final"]
    assert est.mean == res.paths[0].values["energy_final"] and math.isnan(est.se)


def test_parallel_matches_serial_bitwise():
    noise = NoiseSpec(G, preset_lambdas("pair", k=1, lam=0.3))
    a = run_ensemble(_cfg(noise=noise, jobs=1))
    b = run_ensemble(_cfg(noise=noise, jobs=2))
    assert a.estimates == b.estimates
    assert [p.seed for p in a.paths] == [p.seed for p in b.paths]


def test_replicates_differ_and_conserve_mass():
    res = run_ensemble(_cfg(noise=NoiseSpec(G, preset_lambdas("pair", k=1, lam=0.3))))
    energies = [p.values["energy_final"] for p in res.paths]
    assert len(set(energies)) == 4
    assert all(p.mass_drift <= 1e-12 for p in res.paths)


def test_failures_are_itemized():
    # explicit dt far above the stability limit fails every path
    with pytest.raises(EnsembleFailure) as exc:
        run_ensemble(_cfg(sim=SimParams(T=1e-3, dt=1e-4, scheme="explicit")))
    assert len(exc.value.failures) == 4
    assert {"seed", "replicate", "step", "reason"} <= set(exc.value.failures[0].failure)


def test_loglog_slope():
    x = np.array([0.5, 1, 2])
    assert loglog_slope(x, 3 * x**1.7) == pytest.approx(1.7)
    assert math.isnan(loglog_slope(x, [1, 0, 2]))


def test_instantaneous_dissipation_homogeneity():
    spec = AlphaSpec(-0.8, N83)
    base = sum(dissipation_terms(G, U0, spec))
    vals = [sum(dissipation_terms(G, s * U0, spec)) for s in (0.5, 1, 2)]
    assert vals[1] == base
    assert loglog_slope([0.5, 1, 2], vals) == pytest.approx(spec.alpha + N83 + 1, abs=1e-12)


def test_mass_scaling_report_zero_noise():
    cfg = _cfg(mass_scalings=[2.0, 0.5, 1.0], replicates=2)
    rep = mass_scaling_report(cfg, ["mass_final", "diss_integral_a0"])
    assert rep.slopes["mass_final"] == pytest.approx(1.0, abs=1e-12)
    assert rep.predicted["diss_integral_a0"] == pytest.approx((0.2, -0.8 + N83 - 1))
    # degenerate mobility makes larger films relax faster, so the slope sits below the static power
    assert rep.slopes["diss_integral_a0"] < -0.8 + N83 + 1
    assert [r.scale for r in rep.rows][::2] == [0.5, 1.0, 2.0]
    with pytest.raises(ValueError):
        mass_scaling_report(_cfg(mass_scalings=[1.0]))
