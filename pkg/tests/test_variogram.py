import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracsgs.kriging import covariance_matrix
from fracsgs.variogram import (
    EmpiricalVariogram, SphericalModel, VariogramError, covariance, empirical_variogram, fit_spherical,
    spherical_gamma,
)
from oracles import gaussian_field, spherical_gamma_exact

M = SphericalModel(1.0, 2.0, 50.0)


@pytest.mark.parametrize("h", [0.0, 5.0, 25.0, 49.9, 50.0, 80.0])
def test_gamma_matches_exact_oracle(h):
    assert spherical_gamma(M, h) == pytest.approx(float(spherical_gamma_exact(1, 2, 50, h)), abs=1e-12)


def test_gamma_and_covariance_examples():
    assert spherical_gamma(M, 0.0) == 0.0
    assert spherical_gamma(M, 50.0) == 3.0
    assert spherical_gamma(M, 25.0) == pytest.approx(2.375, abs=1e-12)
    assert covariance(M, 0.0) == 3.0
    assert covariance(M, 25.0) == pytest.approx(0.625, abs=1e-12)
    assert covariance(M, 50.0) == 0.0 and covariance(M, 1e6) == 0.0


@pytest.mark.parametrize("args", [(-1, 1, 1), (0, -1, 1), (1, 1, 0), (0, 0, 1)])
def test_model_validation(args):
    with pytest.raises(ValueError):
        SphericalModel(*args)


@given(st.floats(0, 5), st.floats(0, 5), st.floats(0.1, 100), st.floats(1e-6, 300), st.floats(0, 300))
def test_monotone_and_complementary(c0, c, a, h1, dh):
    if c0 + c <= 0:
        return
    m = SphericalModel(c0, c, a)
    h2 = h1 + dh
    assert spherical_gamma(m, h2) >= spherical_gamma(m, h1) - 1e-12
    assert covariance(m, h2) <= covariance(m, h1) + 1e-12
    assert covariance(m, h1) + spherical_gamma(m, h1) == pytest.approx(c0 + c)


def test_empirical_two_points():
    ev = empirical_variogram([[0, 0], [10, 0]], [1.0, 1.0], bin_width=5.0, max_lag=20.0)
    k = np.flatnonzero(ev.npairs)[0]
    assert ev.gamma[k] == 0.0 and ev.lags[k] == pytest.approx(10.0)
    ev = empirical_variogram([[0, 0], [10, 0]], [0.0, 2.0], bin_width=5.0, max_lag=20.0)
    assert ev.gamma[ev.npairs > 0].tolist() == [2.0]


def test_empirical_all_pairs_beyond_max_lag():
    with pytest.raises(VariogramError):
        empirical_variogram([[0, 0], [100, 0]], [0.0, 1.0], bin_width=5.0, max_lag=20.0)


def test_empirical_invariants():
    rng = np.random.default_rng(0)
    ev = empirical_variogram(rng.uniform(0, 100, (80, 2)), rng.standard_normal(80), 7.0, 60.0)
    assert np.all(np.diff(ev.lags) > 0)
    assert np.all(ev.npairs >= 1) and np.all(ev.gamma >= 0)
    assert ev.to_csv().splitlines()[0] == "h,gamma,npairs"


def test_fit_recovers_exact_samples():
    h = np.arange(5.0, 61.0, 5.0)
    ev = EmpiricalVariogram(h, spherical_gamma(M, h), np.full(h.size, 100), 60.0)
    m = fit_spherical(ev)
    assert (m.nugget, m.sill, m.range) == pytest.approx((1.0, 2.0, 50.0), abs=1e-3)


def test_fit_flat_is_pure_nugget():
    h = np.arange(5.0, 61.0, 5.0)
    ev = EmpiricalVariogram(h, np.full(h.size, 1.5), np.full(h.size, 50), 60.0)
    m = fit_spherical(ev)
    assert m.sill == pytest.approx(0.0, abs=1e-6)
    assert m.nugget == pytest.approx(1.5, rel=1e-6)


def test_fit_gaussian_field_oracle_range_within_20_percent():
    model = SphericalModel(0.0, 1.0, 50.0)
    ranges = []
    for seed in range(5):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 200, (400, 2))
        ev = empirical_variogram(pts, gaussian_field(pts, model, rng), bin_width=5.0, max_lag=100.0)
        ranges.append(fit_spherical(ev).range)
    assert np.median(ranges) == pytest.approx(50.0, rel=0.2)


def test_covariance_matrix_spd_1000_trials():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 17))
        m = SphericalModel(rng.uniform(0, 2), rng.uniform(0, 3) + 1e-3, rng.uniform(1, 100))
        pts = rng.uniform(0, 100, (n, 2))
        if rng.random() < 0.2 and n > 1:
            pts[1] = pts[0]  # exact duplicate
        c = covariance_matrix(pts, m)
        assert np.allclose(c, c.T)
        np.linalg.cholesky(c)


def test_to_toml_snippet():
    assert 'model = "spherical"' in M.to_toml() and "range = 50.0" in M.to_toml()
