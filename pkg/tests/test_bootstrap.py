import numpy as np
import pytest

from reliakit import BootstrapFailureError, EstimatorError, pearson
from reliakit.bootstrap import (
    bca_interval,
    bootstrap_estimate,
    derive_entropy,
    jackknife_values,
    one_sided_p,
    replicate_rng,
    resample_statistic,
)

from conftest import gauss_pairs, make_sample


def mean_x1(sample):
    return float(np.mean(sample.x1))


def test_entropy_frozen_value():
    assert (
        derive_entropy(42, "m1", "k4_pearson_nmin10")
        == 337220426253822842314995371046025233930
    )


def test_entropy_separates_all_components():
    base = derive_entropy(42, "m1", "s1")
    assert derive_entropy(43, "m1", "s1") != base
    assert derive_entropy(42, "m2", "s1") != base
    assert derive_entropy(42, "m1", "s2") != base
    # the two string fields are not interchangeable
    assert derive_entropy(42, "a", "b") != derive_entropy(42, "b", "a")


def test_entropy_fits_in_128_bits():
    for seed in (0, 1, 2**31):
        assert 0 <= derive_entropy(seed, "m", "s") < 2**128


def test_replicate_rng_reproducible_and_independent():
    e = derive_entropy(7, "m", "s")
    a = replicate_rng(e, 3).integers(0, 1000, size=8)
    b = replicate_rng(e, 3).integers(0, 1000, size=8)
    c = replicate_rng(e, 4).integers(0, 1000, size=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_resample_bitwise_deterministic():
    rng = np.random.default_rng(3)
    s = gauss_pairs(rng, 25, rho=0.5)
    e = derive_entropy(42, "m", "spec")
    first, drop1 = resample_statistic(s, mean_x1, 40, e)
    second, drop2 = resample_statistic(s, mean_x1, 40, e)
    assert np.array_equal(first, second)
    assert drop1 == drop2 == 0


def test_resample_prefix_stable_under_budget():
    # replicate r depends only on (entropy, r), so a bigger budget extends
    # the sequence instead of reshuffling it
    rng = np.random.default_rng(4)
    s = gauss_pairs(rng, 20, rho=0.3)
    e = derive_entropy(1, "m", "s")
    small, _ = resample_statistic(s, mean_x1, 10, e)
    large, _ = resample_statistic(s, mean_x1, 50, e)
    assert np.array_equal(large[:10], small)


def test_resample_needs_two_pairs_and_budget():
    with pytest.raises(BootstrapFailureError):
        resample_statistic(make_sample([1.0], [2.0]), mean_x1, 10, 0)
    with pytest.raises(BootstrapFailureError):
        resample_statistic(make_sample([1.0, 2.0], [3.0, 4.0]), mean_x1, 0, 0)


def test_resample_all_degenerate_raises():
    s = make_sample([3.0, 3.0, 3.0, 3.0], [5.0, 5.0, 5.0, 5.0])
    with pytest.raises(BootstrapFailureError):
        resample_statistic(s, pearson, 20, 0)


def test_resample_drop_accounting():
    rng = np.random.default_rng(9)
    s = gauss_pairs(rng, 12, rho=0.2)

    def picky(sample):
        # reject low-diversity draws; at n = 12 roughly half the resamples
        # keep 7 or fewer distinct subjects, so both branches are exercised
        if np.unique(sample.x1).size <= 7:
            raise EstimatorError("too few distinct subjects")
        return float(np.mean(sample.x1))

    values, dropped = resample_statistic(s, picky, 200, 5)
    assert dropped > 0
    assert 0 < values.size < 200
    assert values.size + dropped == 200
    assert np.isfinite(values).all()


def test_resample_drops_nonfinite_values():
    s = make_sample([1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0])

    def sometimes_nan(sample):
        return np.nan if sample.x1[0] == 1.0 else float(np.mean(sample.x1))

    values, dropped = resample_statistic(s, sometimes_nan, 100, 11)
    assert dropped > 0
    assert values.size + dropped == 100


def test_jackknife_leaves_one_out():
    s = make_sample([1.0, 2.0, 3.0, 10.0], [0.0, 0.0, 0.0, 0.0])
    got = jackknife_values(s, mean_x1)
    want = np.array([15.0, 14.0, 13.0, 6.0]) / 3.0
    assert np.allclose(got, want, atol=1e-15)


def test_bca_frozen_oracle_case():
    reps = np.array([-0.5, -0.2, -0.1, 0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.9])
    jack = np.array([0.1, 0.15, 0.2, 0.12, 0.3, 0.25, 0.05, 0.18])
    interval = bca_interval(reps, point=0.18, jackknife=jack)
    assert interval.method == "bca"
    assert interval.params.z0 == 0.0
    assert interval.params.a == pytest.approx(-0.01176183230352536, abs=1e-15)
    assert interval.ci_low == pytest.approx(-0.43947470061265526, abs=1e-12)
    assert interval.ci_high == pytest.approx(0.825222661703247, abs=1e-12)


def test_bca_extreme_bias_falls_back_to_percentile():
    reps = np.linspace(1.0, 2.0, 40)  # every replicate above the point
    jack = np.array([0.1, 0.2, 0.3, 0.15])
    interval = bca_interval(reps, point=0.5, jackknife=jack)
    assert interval.method == "percentile_fallback"
    assert interval.params.z0 == -np.inf
    lo, hi = np.quantile(reps, [0.025, 0.975], method="linear")
    assert (interval.ci_low, interval.ci_high) == (float(lo), float(hi))

    flipped = bca_interval(reps, point=3.0, jackknife=jack)
    assert flipped.params.z0 == np.inf
    assert flipped.method == "percentile_fallback"


def test_bca_flat_jackknife_falls_back():
    rng = np.random.default_rng(15)
    reps = rng.normal(size=200)
    interval = bca_interval(reps, point=0.0, jackknife=np.full(10, 0.4))
    assert interval.method == "percentile_fallback"
    assert np.isfinite(interval.params.z0)
    assert interval.params.a == 0.0
    lo, hi = np.quantile(reps, [0.025, 0.975], method="linear")
    assert (interval.ci_low, interval.ci_high) == (float(lo), float(hi))


def test_bca_tiny_jackknife_falls_back():
    reps = np.linspace(-1.0, 1.0, 50)
    interval = bca_interval(reps, point=0.0, jackknife=np.array([0.3]))
    assert interval.method == "percentile_fallback"


def test_bca_empty_replicates():
    with pytest.raises(BootstrapFailureError):
        bca_interval(np.array([]), point=0.0, jackknife=np.array([0.1, 0.2]))


def test_one_sided_p_counting():
    assert one_sided_p(np.array([0.5, 0.2, 0.9])) == pytest.approx(1.0 / 4.0)
    assert one_sided_p(np.array([-1.0, 0.0, -0.5])) == 1.0
    reps = np.concatenate([np.full(50, -1.0), np.full(50, 1.0)])
    assert one_sided_p(reps) == pytest.approx(51.0 / 101.0)
    with pytest.raises(BootstrapFailureError):
        one_sided_p(np.array([]))


def test_bootstrap_estimate_fields():
    rng = np.random.default_rng(21)
    s = gauss_pairs(rng, 30, rho=0.6)
    e = derive_entropy(42, "m", "s")
    result = bootstrap_estimate(s, pearson, b=400, entropy=e)
    assert result.point == pearson(s)
    assert result.b_requested == 400
    assert 0 < result.b_effective <= 400
    assert result.ci_low <= result.ci_high
    assert 0.0 < result.p_one_sided <= 1.0
    assert result.level == 0.95
    assert result.method in ("bca", "percentile_fallback")
    again = bootstrap_estimate(s, pearson, b=400, entropy=e)
    assert result == again


def test_bootstrap_estimate_interval_covers_truth_mostly():
    # 95% BCa interval for a normal mean at n = 60: nominal coverage is
    # 0.95 with the usual finite-n, finite-B shortfall. The seeds are fixed
    # so this is a deterministic regression (realization 0.927); the band
    # is wide enough for the sampling noise of 1000 trials but would catch
    # a mis-set alpha or broken endpoint transform outright.
    hits = 0
    trials = 1000
    for t in range(trials):
        rng = np.random.default_rng(50_000 + t)
        x = rng.normal(loc=0.3, scale=1.0, size=60)
        s = make_sample(x, np.zeros_like(x))
        result = bootstrap_estimate(s, mean_x1, b=500, entropy=t)
        if result.ci_low <= 0.3 <= result.ci_high:
            hits += 1
    coverage = hits / trials
    assert 0.91 <= coverage <= 0.97, f"coverage {coverage}"
