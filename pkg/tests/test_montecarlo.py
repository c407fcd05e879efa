import math

import numpy as np
import pytest
from statsmodels.stats.proportion import proportion_confint

from cfas.analytic import closed_form_value
from cfas.correlation import JAKES, CorrelationModel, bessel_j0
from cfas.geometry import DomainBox
from cfas.montecarlo import (
    CapacityError,
    ConditioningError,
    EmpiricalCcdf,
    GridSpec,
    ModelValidityError,
    build_grid,
    covariance_factor,
    covariance_matrix,
    estimate_hsp,
    replicate_rng,
    sample_field,
    sample_sup_chi2,
    sampler_for,
    simulate_sups,
    wilson_interval,
)

from conftest import E_32

J0_PI = -0.30424217764409386420


def point_spec():
    return GridSpec(DomainBox(), 0.01)


# ---- lattice --------------------------------------------------------------------

def test_grid_segment():
    pts = build_grid(GridSpec(DomainBox((0.25,)), 0.05))
    assert pts.shape == (6, 1)
    assert pts[:, 0] == pytest.approx([0, 0.05, 0.1, 0.15, 0.2, 0.25])


def test_grid_square_row_major():
    pts = build_grid(GridSpec(DomainBox((0.1, 0.1)), 0.05))
    assert pts.shape == (9, 2)
    np.testing.assert_allclose(pts[:3], [[0, 0], [0, 0.05], [0, 0.1]])


def test_grid_reference_spacing():
    assert len(build_grid(GridSpec(DomainBox((0.25,)), 0.01))) == 26


def test_grid_point():
    assert build_grid(point_spec()).shape == (1, 0)


def test_grid_capacity():
    with pytest.raises(CapacityError, match="1030301"):
        build_grid(GridSpec(DomainBox((1, 1, 1)), 0.01))


def test_grid_rejects_bad_spacing():
    with pytest.raises(ValueError):
        GridSpec(DomainBox((1,)), 0.0)


# ---- covariance and factor ------------------------------------------------------------

def test_covariance_single_point():
    assert covariance_matrix(np.zeros((1, 0)), JAKES).tolist() == [[1.0]]


def test_covariance_half_wavelength():
    cov = covariance_matrix(np.array([[0.0], [0.5]]), JAKES)
    assert cov[0, 1] == pytest.approx(J0_PI, abs=1e-12)
    assert np.all(np.diag(cov) == 1.0)


def test_covariance_collinear_toeplitz():
    d = 0.07
    cov = covariance_matrix(np.array([[0.0, 0.0], [d, 0.0], [2 * d, 0.0]]), JAKES)
    assert cov[0, 1] == cov[1, 2]
    assert cov[0, 2] == pytest.approx(bessel_j0(4 * math.pi * d), abs=1e-15)
    assert np.array_equal(cov, cov.T)


def test_covariance_rejects_quadratic_model():
    with pytest.raises(ModelValidityError):
        covariance_matrix(np.zeros((2, 1)), CorrelationModel.quadratic(1.0))


def test_factor_identity():
    sampler = covariance_factor(np.eye(4))
    assert np.array_equal(sampler.factor, np.eye(4))
    assert sampler.clamped_mass == 0.0


def test_factor_two_by_two():
    rho = 0.3
    cov = np.array([[1.0, rho], [rho, 1.0]])
    b = covariance_factor(cov).factor
    assert b @ b.T == pytest.approx(cov, abs=1e-15)


def test_factor_fine_jakes_grid():
    pts = build_grid(GridSpec(DomainBox((0.25,)), 0.01))
    sampler = covariance_factor(covariance_matrix(pts, JAKES))
    assert sampler.clamped_mass <= 0.01
    assert sampler.reconstruction_error <= 1e-6


def test_factor_rejects_indefinite_matrix():
    with pytest.raises(ConditioningError):
        covariance_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))


# ---- sampling -------------------------------------------------------------------

def test_single_point_is_exponential_mean_two():
    sampler = sampler_for(point_spec(), JAKES)
    rng = replicate_rng(5, 0)
    draws = np.array([sample_sup_chi2(sampler, rng) for _ in range(100_000)])
    assert draws.min() >= 0
    assert abs(draws.mean() - 2) <= 0.03
    assert abs(np.mean(draws >= 2) - math.exp(-1)) <= 0.005


def test_marginal_tail_at_each_lattice_point():
    sampler = sampler_for(GridSpec(DomainBox((0.25,)), 0.05), JAKES)
    n = 40_000
    fields = np.array([sample_field(sampler, replicate_rng(9, r)) for r in range(n)])
    for u0 in (1, 2, 4, 8):
        p = math.exp(-u0 / 2)
        sigma = math.sqrt(p * (1 - p) / n)
        for col in (0, 3, 5):
            assert abs(np.mean(fields[:, col] >= u0) - p) <= 3 * sigma


def test_pair_correlation_matches_jakes():
    tau = 0.2
    cov = covariance_matrix(np.array([[0.0], [tau]]), JAKES)
    sampler = covariance_factor(cov)
    n = 50_000
    rng = replicate_rng(3, 0)
    z = rng.standard_normal((n, 2)) @ sampler.factor.T
    r = np.corrcoef(z[:, 0], z[:, 1])[0, 1]
    target = bessel_j0(2 * math.pi * tau)
    assert abs(r - target) <= 3 * (1 - target**2) / math.sqrt(n - 1)


def test_domain_monotonicity_with_coupled_field():
    big = GridSpec(DomainBox((0.3, 0.3)), 0.05)
    pts = build_grid(big)
    inner = np.all(pts <= 0.15 + 1e-12, axis=1)
    sampler = sampler_for(big, JAKES)
    for r in range(500):
        x = sample_field(sampler, replicate_rng(1, r))
        assert x.max() >= x[inner].max()


def test_replicate_streams_are_distinct():
    a = replicate_rng(1, 0).standard_normal(8)
    b = replicate_rng(1, 1).standard_normal(8)
    c = replicate_rng(2, 0).standard_normal(8)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.array_equal(a, replicate_rng(1, 0).standard_normal(8))


def test_chunked_sups_match_single_replicates():
    sampler = sampler_for(GridSpec(DomainBox((0.2,)), 0.02), JAKES)
    sups = simulate_sups(sampler, 50, seed=4)
    single = [sample_sup_chi2(sampler, replicate_rng(4, r)) for r in range(50)]
    assert sups == pytest.approx(single, rel=1e-12)


# ---- estimate_hsp ------------------------------------------------------------------

def test_point_hsp():
    ccdf = estimate_hsp(point_spec(), JAKES, [6.4], 100_000, seed=1)
    assert abs(ccdf.probabilities[0] - E_32) <= 0.002


def test_single_replicate():
    ccdf = estimate_hsp(GridSpec(DomainBox((0.1,)), 0.01), JAKES, [0.5, 1, 2, 4, 8], 1, seed=7)
    assert set(ccdf.exceed_counts) <= {0, 1}
    assert list(ccdf.exceed_counts) == sorted(ccdf.exceed_counts, reverse=True)


def test_segment_matches_analytic_in_tail(lam):
    spec = GridSpec(DomainBox((0.25,)), 0.01)
    # u0 at which the closed form equals 0.05
    from scipy.optimize import brentq
    u0 = brentq(lambda u: closed_form_value((0.25,), lam, u) - 0.05, 4, 20)
    ccdf = estimate_hsp(spec, JAKES, [u0], 100_000, seed=1)
    p = ccdf.probabilities[0]
    sigma = math.sqrt(0.05 * 0.95 / 100_000)
    assert abs(p - 0.05) <= max(0.1 * 0.05, 3 * sigma)


def test_seed_determinism_and_worker_independence():
    spec = GridSpec(DomainBox((0.2, 0.2)), 0.05)
    th = [2, 4, 6, 8]
    a = estimate_hsp(spec, JAKES, th, 5000, seed=123)
    b = estimate_hsp(spec, JAKES, th, 5000, seed=123, workers=4)
    c = estimate_hsp(spec, JAKES, th, 5000, seed=124)
    assert a.exceed_counts == b.exceed_counts
    assert a.exceed_counts != c.exceed_counts


def test_thresholds_must_ascend():
    with pytest.raises(ValueError):
        estimate_hsp(point_spec(), JAKES, [3, 2], 10, seed=1)


def test_empirical_ccdf_invariants():
    with pytest.raises(ValueError):
        EmpiricalCcdf((1.0, 2.0), (3, 5), 10, 1)
    with pytest.raises(ValueError):
        EmpiricalCcdf((1.0,), (11,), 10, 1)


@pytest.mark.parametrize("k, n", [(0, 10), (3, 10), (408, 10000), (10, 10), (1, 1)])
def test_wilson_interval_matches_statsmodels(k, n):
    lo, hi = wilson_interval(k, n)
    ref = proportion_confint(k, n, alpha=0.05, method="wilson")
    assert (lo, hi) == pytest.approx(ref, abs=1e-12)
