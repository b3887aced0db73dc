import math

import numpy as np
import pytest

from stfe.grid import TorusGrid
from stfe.initial import (
    MeasureIC,
    MollifierSpec,
    density_preset,
    heat_kernel,
    measure_from_config,
    mollifier_field,
    regularize,
    vague_pairing,
)

G256 = TorusGrid(256)


def test_mollifier_normalized_positive_symmetric():
    f = mollifier_field(MollifierSpec(0.05), G256)
    assert G256.integrate(f) == pytest.approx(1.0, abs=1e-10)
    assert np.all(f > 0)
    # node i sits at i h, so x and 1 - x are nodes i and N - i
    assert np.max(np.abs(f[1:] - f[1:][::-1])) <= 1e-14


def test_mollifier_peak():
    f = mollifier_field(MollifierSpec(0.05), G256)
    assert f[0] == pytest.approx(1 / math.sqrt(4 * math.pi * 0.05**2), abs=1e-6)
    assert f[0] == pytest.approx(5.6419, abs=1e-4)


def test_mollifier_rejects_unresolved_or_bad_width():
    with pytest.raises(ValueError):
        mollifier_field(MollifierSpec(0.01), TorusGrid(128))
    with pytest.raises(ValueError):
        MollifierSpec(0.0)
    with pytest.raises(ValueError):
        MollifierSpec(0.1, kind="box")


def test_heat_kernel_wraps_periodically():
    x = np.array([0.1, 0.4])
    assert np.allclose(heat_kernel(x, 0.2), heat_kernel(x - 1.0, 0.2), rtol=1e-6)


def test_regularize_dirac_mass():
    g = TorusGrid(512)
    u = regularize(MeasureIC([(0.5, 1.0)]), 0.01, g)
    assert g.integrate(u) == pytest.approx(1.01, abs=1e-9)
    assert np.min(u) >= 0.01


def test_regularize_indicator_cuts_large_mass():
    g = TorusGrid(512)
    u = regularize(MeasureIC([(0.5, 200.0)]), 0.01, g)
    assert np.all(u == 0.01)


def test_regularize_zero_measure():
    u = regularize(MeasureIC(), 0.05, G256)
    assert np.all(u == 0.05)


@pytest.mark.parametrize("density", [
    {"preset": "constant", "c": 0.7},
    {"preset": "cosine", "mean": 0.5, "amp": 0.25, "k": 2},
    {"preset": "bump", "center": 0.3, "width": 0.2, "mass": 0.8},
])
def test_regularize_mass_for_presets(density):
    u0 = measure_from_config({"atoms": [[0.1, 0.5]], "density": density}, G256)
    u = regularize(u0, 0.05, G256)
    assert G256.integrate(u) == pytest.approx(u0.total_mass + 0.05, abs=1e-9)
    assert np.min(u) >= 0.05


def test_regularize_rejects_bad_eps():
    for eps in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            regularize(MeasureIC(), eps, G256)


def test_measure_validation():
    with pytest.raises(ValueError):
        MeasureIC([(1.2, 1.0)])
    with pytest.raises(ValueError):
        MeasureIC([(0.2, -1.0)])
    with pytest.raises(ValueError):
        MeasureIC(density=-np.ones(256), grid=G256)
    with pytest.raises(ValueError):
        density_preset({"preset": "cosine", "mean": 0.1, "amp": 0.25, "k": 1}, G256)
    with pytest.raises(ValueError):
        density_preset({"preset": "constant"}, G256)
    with pytest.raises(ValueError):
        density_preset({"preset": "spline"}, G256)


def test_vague_pairing_examples():
    cos = lambda x: np.cos(2 * np.pi * x)
    assert vague_pairing(MeasureIC([(0.5, 1.0)]), cos) == pytest.approx(-1.0, abs=1e-15)
    ones = MeasureIC(density=np.ones(256), grid=G256)
    assert vague_pairing(ones, np.ones(256)) == pytest.approx(1.0, abs=1e-14)
    sin = lambda x: np.sin(2 * np.pi * x)
    assert vague_pairing(MeasureIC([(0.25, 2.0)]), sin) == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(ValueError):
        vague_pairing(MeasureIC([(0.25, 2.0)]), np.ones(256))


def test_vague_convergence_second_order():
    # <u_eps, cos> - cos(2 pi x0) - eps * 0 = (exp(-4 pi^2 eps^2) - 1) cos(2 pi x0)
    x0 = 0.3
    g = TorusGrid(1024)
    phi = np.cos(2 * np.pi * g.nodes)
    errs = []
    for eps in (0.08, 0.04, 0.02, 0.01):
        u = regularize(MeasureIC([(x0, 1.0)]), eps, g)
        err = abs(g.integrate(u * phi) - math.cos(2 * np.pi * x0))
        assert err == pytest.approx(abs(math.expm1(-4 * math.pi**2 * eps**2) * math.cos(2 * math.pi * x0)), rel=1e-6)
        errs.append(err)
    assert all(a / b >= 3 for a, b in zip(errs, errs[1:]))


def test_scaled_measure():
    u0 = MeasureIC([(0.2, 1.0)], np.full(256, 0.5), G256)
    assert u0.scaled(2.0).total_mass == pytest.approx(3.0)
