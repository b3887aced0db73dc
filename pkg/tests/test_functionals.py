import math

import numpy as np
import pytest

from stfe.functionals import (
    AlphaSpec,
    Trajectory,
    classical_entropy,
    contact_angle_diag,
    diagnostics,
    diagnostics_header,
    dissipation_terms,
    energy,
    entropy_alpha,
    g_alpha,
    l2_norm,
    mass,
    neg_sobolev_path_norm,
    slobodeckij_norm,
    spacetime_lp,
    spacetime_w1r,
    weak_form_residual,
)
from stfe.grid import TorusGrid
from stfe.initial import MeasureIC, regularize
from stfe.noise import NoiseSpec, preset_lambdas
from stfe.stepper import SimParams, run_path

N83 = 8.0 / 3.0
SLOB_T = math.sqrt(1 / 3 + 8 / 15)  # f(t) = t, kappa = 1/4, p = 2, T = 1


def test_alpha_spec_window():
    a = AlphaSpec(-0.8, N83)
    assert a.e4 == pytest.approx((-0.8 + N83 + 1) / 4)
    assert a.e2 == pytest.approx((-0.8 + N83 + 1) / 2)
    for bad in (-1.0, 2 - N83, 0.0):
        with pytest.raises(ValueError):
            AlphaSpec(bad, N83)


def test_mass_examples():
    g = TorusGrid(512)
    assert mass(g, np.full(512, 2.0)) == pytest.approx(2.0, abs=1e-14)
    assert mass(g, regularize(MeasureIC([(0.5, 1.0)]), 0.01, g)) == pytest.approx(1.01, abs=1e-9)
    assert mass(g, 0.5 + 0.25 * np.cos(2 * np.pi * g.nodes)) == pytest.approx(0.5, abs=1e-13)


def test_g_alpha_examples():
    assert g_alpha(0.0, -0.5) == 0.0
    assert g_alpha(1.0, -0.5) == pytest.approx(-4.0)
    g = TorusGrid(32)
    assert entropy_alpha(g, np.ones(32), -0.5) == pytest.approx(-4.0)
    for bad in (0.0, -1.0, -1.5):
        with pytest.raises(ValueError):
            g_alpha(1.0, bad)
    # shifted evaluation mode
    assert g_alpha(0.0, -0.5, delta=1.0) == pytest.approx(-4.0)


def test_dissipation_constant_and_homogeneity():
    g = TorusGrid(128)
    spec = AlphaSpec(-0.8, N83)
    assert dissipation_terms(g, np.full(128, 0.3), spec) == (0.0, 0.0)
    u = 1 + 0.5 * np.cos(2 * np.pi * g.nodes)
    lam = 1.7
    d1, d2 = dissipation_terms(g, u, spec)
    s1, s2 = dissipation_terms(g, lam * u, spec)
    power = spec.alpha + N83 + 1
    assert s1 == pytest.approx(lam**power * d1, rel=1e-12)
    assert s2 == pytest.approx(lam**power * d2, rel=1e-12)
    e = entropy_alpha(g, u, spec.alpha)
    assert entropy_alpha(g, lam * u, spec.alpha) == pytest.approx(lam ** (spec.alpha + 1) * e, rel=1e-12)


def test_dissipation_refined_oracle():
    spec = AlphaSpec(-0.8, N83)

    def at(N):
        g = TorusGrid(N)
        return dissipation_terms(g, 1 + 0.5 * np.cos(2 * np.pi * g.nodes), spec)

    ref = at(8192)
    for got, want in zip(at(512), ref):
        assert got == pytest.approx(want, rel=5e-3)


def test_quadrature_consistency_second_order():
    spec = AlphaSpec(-0.7, N83)
    vals = []
    for N in (64, 128, 256):
        g = TorusGrid(N)
        u = 1 + 0.5 * np.cos(2 * np.pi * g.nodes) + 0.1 * np.sin(4 * np.pi * g.nodes)
        vals.append(np.array([energy(g, u), *dissipation_terms(g, u, spec)]))
    e1, e2 = np.abs(vals[0] - vals[2]), np.abs(vals[1] - vals[2])
    # error at N is C N^-2, so |f_N - f_4N| / |f_2N - f_4N| = (1 - 1/16) / (1/4 - 1/16) = 5
    assert np.all(e1 / e2 > 4)


def test_energy_and_classical_entropy():
    g = TorusGrid(256)
    assert energy(g, np.full(256, 1.3)) == 0.0
    assert energy(g, np.cos(2 * np.pi * g.nodes)) == pytest.approx(math.pi**2, rel=1e-3)
    u = 1 + 0.5 * np.cos(2 * np.pi * g.nodes)
    assert math.isfinite(classical_entropy(g, u, N83))
    # G(1) = 1 / ((1 - n)(2 - n)) = 9/10 at n = 8/3
    assert classical_entropy(g, np.ones(256), N83) == pytest.approx(0.9, rel=1e-12)
    u[10] = 0.0
    assert classical_entropy(g, u, N83) == math.inf
    assert l2_norm(g, np.full(256, 2.0)) == pytest.approx(2.0)


def test_spacetime_norms():
    g = TorusGrid(16)
    t = np.linspace(0, 1, 2001)
    const = Trajectory(t, np.full((t.size, 16), 0.5))
    assert spacetime_lp(g, const, 3.0) == pytest.approx(0.5, rel=1e-12)
    assert spacetime_w1r(g, const, 2.0) == 0.0
    lin = Trajectory(t, (1 + t)[:, None] * np.ones(16))
    # trapezoid error for int (1+t)^2 is h^2/6 = 4e-8
    assert spacetime_lp(g, lin, 2.0) == pytest.approx(math.sqrt(7 / 3), abs=1e-7)
    half = Trajectory(t[:1001], np.full((1001, 16), 2.0))
    assert spacetime_lp(g, half, 2.0) == pytest.approx(2.0 * 0.5**0.5, rel=1e-12)


def test_slobodeckij_oracles():
    t = np.linspace(0, 1, 512)
    assert slobodeckij_norm(t, t, 0.25, 2.0) == pytest.approx(SLOB_T, rel=0.02)
    assert slobodeckij_norm(t, np.full(512, 3.0), 0.25, 2.0) == pytest.approx(3.0, rel=1e-12)
    assert slobodeckij_norm(t, 2.5 * t, 0.25, 2.0) == pytest.approx(2.5 * slobodeckij_norm(t, t, 0.25, 2.0), rel=1e-12)
    with pytest.raises(ValueError):
        slobodeckij_norm(t[:7], t[:7], 0.25, 2.0)
    with pytest.raises(ValueError):
        slobodeckij_norm(t, t, 1.0, 2.0)


def test_slobodeckij_monotone_in_increments():
    t = np.linspace(0, 1, 64)
    rng = np.random.default_rng(0)
    a = np.cumsum(rng.normal(size=64))
    # b has every increment |b_i - b_j| <= |a_i - a_j| and equal zero-time values
    b = 0.5 * a
    norm = lambda f: slobodeckij_norm(t, f, 0.3, 2.0) ** 2 - np.trapezoid(f**2, t)
    assert norm(b) <= norm(a)


def test_neg_sobolev_path_norm():
    g = TorusGrid(32)
    t = np.linspace(0, 1, 512)
    c = np.cos(2 * np.pi * g.nodes)
    traj = Trajectory(t, t[:, None] * c)
    want = SLOB_T * g.hk_norm(c, -3.0)
    assert neg_sobolev_path_norm(g, traj, 0.25, 2.0) == pytest.approx(want, rel=0.02)
    ones = Trajectory(t, np.ones((512, 32)))
    assert neg_sobolev_path_norm(g, ones, 0.25, 2.0) == pytest.approx(1.0, rel=1e-12)
    scaled = Trajectory(t, 3 * t[:, None] * c)
    assert neg_sobolev_path_norm(g, scaled, 0.25, 2.0) == pytest.approx(3 * neg_sobolev_path_norm(g, traj, 0.25, 2.0))


def _traj(g, u0, T, dt, spec):
    return run_path(g, u0, SimParams(T=T, dt=dt), spec, 2, snapshot_every=1, store_increments=True).trajectory


def test_weak_form_constant_path():
    g = TorusGrid(32)
    spec = NoiseSpec(g, {})
    traj = _traj(g, np.full(32, 0.7), 1e-3, 1e-4, spec)
    for m in range(-4, 5):
        assert weak_form_residual(g, traj, spec, SimParams(), m) <= 1e-12


def test_weak_form_first_order_without_noise():
    g = TorusGrid(64)
    spec = NoiseSpec(g, {})
    u0 = 1 + 0.3 * np.cos(2 * np.pi * g.nodes)
    res = [weak_form_residual(g, _traj(g, u0, 4e-3, dt, spec), spec, SimParams(), 1) for dt in (4e-4, 2e-4, 1e-4)]
    assert res[0] / res[1] >= 1.8 and res[1] / res[2] >= 1.8


def test_weak_form_needs_increments():
    g = TorusGrid(16)
    with pytest.raises(ValueError):
        weak_form_residual(g, Trajectory([0, 1], np.ones((2, 16))), NoiseSpec(g, {}), SimParams(), 1)


def test_weak_form_noisy_path_is_small():
    g = TorusGrid(64)
    spec = NoiseSpec(g, preset_lambdas("pair", k=1, lam=0.2))
    u0 = 1 + 0.3 * np.cos(2 * np.pi * g.nodes)
    traj = _traj(g, u0, 1e-3, 1e-5, spec)
    drift = abs(g.h * np.sum((traj.fields[-1] - traj.fields[0]) * np.cos(2 * np.pi * g.nodes)))
    assert weak_form_residual(g, traj, spec, SimParams(), 1) <= 0.1 * drift


def test_contact_angle():
    g = TorusGrid(256)
    x = g.nodes
    rep = contact_angle_diag(g, 1 - np.cos(2 * np.pi * x), 1e-6)
    assert list(rep.zero_set_nodes) == [0]
    # one-sided slope next to a quadratic tangency: (1 - cos(2 pi h)) / h = 2 pi^2 h + O(h^3)
    assert rep.max_abs_slope_at_zero_set == pytest.approx((1 - math.cos(2 * math.pi * g.h)) / g.h, rel=1e-12)
    assert rep.max_abs_slope_at_zero_set < 0.08
    empty = contact_angle_diag(g, np.full(256, 0.5), 1e-6)
    assert empty.zero_set_nodes.size == 0 and empty.max_abs_slope_at_zero_set == 0.0
    wedge = contact_angle_diag(g, np.minimum(x, 1 - x), 1e-6)
    assert wedge.max_abs_slope_at_zero_set == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        contact_angle_diag(g, x, 0.0)


def test_diagnostics_record_and_header():
    g = TorusGrid(64)
    alphas = [AlphaSpec(-0.9, N83), AlphaSpec(-0.7, N83)]
    rec = diagnostics(g, 0.5, 1 + 0.2 * np.cos(2 * np.pi * g.nodes), alphas)
    header = diagnostics_header(2)
    assert header[:5] == ["t", "mass", "min_u", "energy", "l2_norm"]
    assert len(rec.row()) == len(header) == 11
    assert all(d >= 0 for d in rec.diss1 + rec.diss2)
