import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commgate.distributions import QuadratureSpec, RewardDistribution, integrate
from commgate.errors import DistributionError, QuadratureError

KINDS = {
    "uniform": RewardDistribution.uniform(),
    "beta": RewardDistribution.beta(2.0, 5.0),
    "empirical": RewardDistribution.empirical(
        [0.0, 0.2, 0.5, 0.8, 1.0], [0.05, 0.2, 0.6, 0.9, 1.0]
    ),
}


def test_uniform_cdf_identity():
    assert KINDS["uniform"].cdf(0.3) == pytest.approx(0.3, abs=1e-15)


@pytest.mark.parametrize("kind", list(KINDS))
def test_cdf_normalization(kind):
    assert KINDS[kind].cdf(1.0) == pytest.approx(1.0, abs=1e-12)


def test_cdf_domain_error():
    with pytest.raises(DistributionError):
        KINDS["beta"].cdf(1.5)
    with pytest.raises(DistributionError):
        KINDS["uniform"].cdf(-0.1)


def test_means_trivial():
    assert KINDS["uniform"].mean() == pytest.approx(0.5)
    assert RewardDistribution.beta(1, 1).mean() == pytest.approx(0.5)


def test_mean_matched_betas():
    # the two Beta priors used in the window-structure experiments
    assert RewardDistribution.beta_with_mean(0.024).mean() == pytest.approx(0.024, abs=1e-12)
    assert RewardDistribution.beta_with_mean(0.33).mean() == pytest.approx(0.33, abs=1e-12)


@pytest.mark.parametrize("kind", list(KINDS))
def test_mean_cache_equals_tail_integral(kind):
    d = KINDS[kind]
    spec = QuadratureSpec()
    recomputed = integrate(d, lambda r: 1.0 - d.cdf(r), 0.0, 1.0, spec)
    assert abs(recomputed - d.mean_cache) <= 10 * spec.abs_tol


@pytest.mark.parametrize("kind", list(KINDS))
def test_tail_mean_excess_matches_quadrature(kind):
    d = KINDS[kind]
    for u in (0.0, 0.3, 0.77, 1.0):
        quad = integrate(d, lambda r: 1.0 - d.cdf(r), u, 1.0)
        assert d.tail_mean_excess(u) == pytest.approx(quad, abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(
    r1=st.floats(0.0, 1.0),
    r2=st.floats(0.0, 1.0),
    kind=st.sampled_from(list(KINDS)),
)
def test_cdf_monotone(r1, r2, kind):
    lo, hi = min(r1, r2), max(r1, r2)
    d = KINDS[kind]
    assert d.cdf(lo) <= d.cdf(hi) + 1e-12


def test_uniform_inverse_is_identity():
    u = KINDS["uniform"]
    q = np.linspace(0, 1, 11)
    assert np.allclose(u.ppf(q), q)


def test_sampling_deterministic():
    d = KINDS["empirical"]
    a = d.sample(np.random.Generator(np.random.Philox(7)), 100)
    b = d.sample(np.random.Generator(np.random.Philox(7)), 100)
    assert np.array_equal(a, b)


def test_empirical_sample_mean_lln(rng):
    # law-of-large-numbers oracle: 1e6 draws within 3 standard errors
    d = KINDS["empirical"]
    n = 1_000_000
    draws = d.sample(rng, n)
    se = draws.std(ddof=1) / np.sqrt(n)
    assert abs(draws.mean() - d.mean()) < 3 * se


@pytest.mark.parametrize("kind", list(KINDS))
def test_sampling_ks_statistic(kind, rng):
    d = KINDS[kind]
    n = 100_000
    draws = np.sort(d.sample(rng, n))
    cdf_vals = d.cdf(draws)
    # the only possible atom is at 0 (cdf(0) may exceed 0); the lower-side
    # statistic compares against the left limit there
    cdf_left = np.where(draws == 0.0, 0.0, cdf_vals)
    i = np.arange(1, n + 1)
    ks = max(np.max(i / n - cdf_vals), np.max(cdf_left - (i - 1) / n))
    critical_1pct = 1.63 / np.sqrt(n)
    assert ks < critical_1pct


def test_integrate_polynomial_exact():
    u = KINDS["uniform"]
    assert integrate(u, lambda r: 1.0 - r, 0.5, 1.0) == pytest.approx(0.125, abs=1e-12)
    assert integrate(u, lambda r: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_integrate_scalar_integrand_fallback():
    import math

    u = KINDS["uniform"]
    val = integrate(u, lambda r: math.exp(r), 0.0, 1.0)
    assert val == pytest.approx(math.e - 1.0, abs=1e-8)


def test_integrate_matches_riemann_oracle():
    # the window-loss integrand for uniform F, N=3, second blocked slot
    u = KINDS["uniform"]
    N, i, mu = 3, 2, 0.5
    fmu = 0.5

    def integrand(r):
        a1 = (r - fmu) / (1 - fmu) + fmu**i * (1 - r) / (1 - fmu)
        an = (r**N - fmu**N) / (1 - fmu**N) + fmu ** (i * N) * (1 - r**N) / (1 - fmu**N)
        return a1 - an

    grid = np.linspace(mu, 1.0, 1_000_001)
    mids = 0.5 * (grid[:-1] + grid[1:])
    oracle = float(np.sum(integrand(mids)) * (grid[1] - grid[0]))
    assert integrate(u, integrand, mu, 1.0) == pytest.approx(oracle, abs=1e-7)


def test_integrate_additive_over_subintervals():
    d = KINDS["beta"]
    spec = QuadratureSpec()
    f = lambda r: d.cdf(r) ** 3 * (1 - d.cdf(r))
    whole = integrate(d, f, 0.1, 0.9, spec)
    parts = integrate(d, f, 0.1, 0.45, spec) + integrate(d, f, 0.45, 0.9, spec)
    assert abs(whole - parts) <= 2 * spec.abs_tol


def test_integrate_convergence_error_carries_estimate():
    u = KINDS["uniform"]
    spec = QuadratureSpec(abs_tol=1e-14, max_depth=2)
    with pytest.raises(QuadratureError) as err:
        integrate(u, lambda r: np.sin(40 * r) ** 2, 0.0, 1.0, spec)
    assert np.isfinite(err.value.estimate)
    assert err.value.error_bound > 0


def test_integrate_splits_at_breakpoints():
    u = KINDS["uniform"]
    kink = 0.37

    def f(r):
        return np.where(r < kink, 0.0, 1.0)

    spec = QuadratureSpec(breakpoints=(kink,))
    assert integrate(u, f, 0.0, 1.0, spec) == pytest.approx(1 - kink, abs=1e-9)


def test_empirical_validation_errors():
    with pytest.raises(DistributionError):
        RewardDistribution.empirical([0.0, 0.5], [0.0, 0.9])  # cdf(1) != 1
    with pytest.raises(DistributionError):
        RewardDistribution.empirical([0.1, 1.0], [0.0, 1.0])  # grid must start at 0
    with pytest.raises(DistributionError):
        RewardDistribution.empirical([0.0, 0.5, 1.0], [0.0, 0.8, 0.5])  # decreasing cdf
    with pytest.raises(DistributionError):
        RewardDistribution.beta(-1.0, 2.0)


def test_empirical_csv_roundtrip(tmp_path):
    d = KINDS["empirical"]
    path = tmp_path / "dist.csv"
    d.to_csv(path)
    back = RewardDistribution.from_csv(path)
    assert np.array_equal(back.grid, d.grid)
    assert np.array_equal(back.cdf_values, d.cdf_values)
    assert back.mean() == d.mean()


def test_empirical_point_mass_at_zero():
    # cdf(0) > 0 is allowed: the inverse maps low quantiles to 0
    d = KINDS["empirical"]
    assert d.cdf(0.0) == pytest.approx(0.05)
    assert d.ppf(0.01) == 0.0
