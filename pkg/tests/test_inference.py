import numpy as np
import pytest

from reliakit import (
    ClaimTierViolationError,
    InvalidPValueError,
    ReliabilityEstimate,
    UnknownMeasureError,
    apply_primary_inference,
    bh_adjust,
    headline_pass,
)
from reliakit.inference import STATUS_DEGENERATE, STATUS_INSUFFICIENT_N, STATUS_OK
from reliakit.registry import parse_contract


def bh_oracle(p):
    """Literal step-up definition: q_(i) = min_{j>=i} p_(j) * m / j, cap 1."""
    m = len(p)
    order = sorted(range(m), key=lambda i: p[i])
    q = [0.0] * m
    for pos, idx in enumerate(order):
        candidates = [
            p[order[j]] * m / (j + 1) for j in range(pos, m)
        ]
        q[idx] = min(1.0, min(candidates))
    return q


@pytest.fixture
def registry(tmp_path):
    doc = """{
  "version": "1",
  "declared_counts": {"primary": 3, "descriptive": 1},
  "entries": [
    {"measure_id": "m1", "dataset_id": "a:t", "tier": "primary",
     "aggregation": {"outcome": "mean_rt", "condition_a": "c", "unit": "ms"},
     "description": ""},
    {"measure_id": "m2", "dataset_id": "a:t", "tier": "primary",
     "aggregation": {"outcome": "mean_rt", "condition_a": "c", "unit": "ms"},
     "description": ""},
    {"measure_id": "m3", "dataset_id": "a:t", "tier": "primary",
     "aggregation": {"outcome": "mean_rt", "condition_a": "c", "unit": "ms"},
     "description": ""},
    {"measure_id": "d1", "dataset_id": "a:t", "tier": "descriptive",
     "aggregation": {"outcome": "mean_rt", "condition_a": "c", "unit": "ms"},
     "description": ""}
  ]
}"""
    path = tmp_path / "measures.json"
    path.write_text(doc, encoding="utf-8")
    return parse_contract(path)


def ok_estimate(measure_id, p, ci_low, ci_high=1.0, **kw):
    return ReliabilityEstimate(
        measure_id=measure_id,
        spec_id="k4_pearson_nmin10",
        n=20,
        status=STATUS_OK,
        rho=0.5,
        mi_ksg=0.3,
        mi_gauss=0.14,
        nlr_delta=0.16,
        ci_low=ci_low,
        ci_high=ci_high,
        method="bca",
        p=p,
        icc_2_1=0.6,
        icc_2_1_low=0.3,
        icc_2_1_high=0.8,
        icc_3_1=0.65,
        **kw,
    )


def test_headline_rule_boundary():
    assert headline_pass(0.01)
    assert not headline_pass(0.0)
    assert not headline_pass(-0.1)
    assert not headline_pass(None)


def test_bh_worked_example():
    # ranks: 0.005*3/1 = 0.015, 0.03*3/2 = 0.045, 0.04*3/3 = 0.04; the
    # step-up minimum pulls the middle rank down to 0.04
    q = bh_adjust([0.005, 0.04, 0.03])
    assert q == pytest.approx([0.015, 0.04, 0.04], abs=1e-12)


def test_bh_single_p_is_identity():
    assert bh_adjust([0.37]) == pytest.approx([0.37])


def test_bh_all_ones():
    assert bh_adjust([1.0, 1.0, 1.0]) == pytest.approx([1.0, 1.0, 1.0])


def test_bh_empty():
    assert bh_adjust([]).size == 0


def test_bh_matches_oracle_on_random_vectors():
    rng = np.random.default_rng(55)
    for _ in range(200):
        m = int(rng.integers(1, 30))
        p = rng.uniform(0.0, 1.0, size=m)
        if rng.uniform() < 0.3:
            p = np.round(p, 1)  # force ties
        q = bh_adjust(p)
        assert q == pytest.approx(bh_oracle(list(p)), abs=1e-12)
        # step-up outputs never fall below their inputs
        assert (q >= p - 1e-15).all()
        assert (q <= 1.0).all()


def test_bh_monotone_in_p():
    rng = np.random.default_rng(77)
    p = np.sort(rng.uniform(size=12))
    q = bh_adjust(p)
    assert (np.diff(q) >= -1e-15).all()


def test_bh_permutation_equivariant():
    rng = np.random.default_rng(78)
    p = rng.uniform(size=15)
    perm = rng.permutation(15)
    assert bh_adjust(p[perm]) == pytest.approx(bh_adjust(p)[perm], abs=1e-15)


@pytest.mark.parametrize("bad", [[-0.1], [1.0001], [np.nan], [np.inf]])
def test_bh_rejects_invalid(bad):
    with pytest.raises(InvalidPValueError):
        bh_adjust(bad)


def test_inference_single_estimate(registry):
    annotated, summary = apply_primary_inference(
        [ok_estimate("m1", p=0.01, ci_low=0.05)], registry
    )
    assert annotated[0].q == pytest.approx(0.01)
    assert annotated[0].headline_pass
    assert summary["pass_count"] == 1
    assert summary["min_q"] == pytest.approx(0.01)
    assert summary["n_primary"] == 1
    assert summary["counts"] == {"ok": 1, "insufficient_n": 0, "degenerate": 0}


def test_inference_mixed_statuses(registry):
    estimates = [
        ok_estimate("m1", p=0.005, ci_low=0.02),
        ReliabilityEstimate(
            measure_id="m2", spec_id="s", n=4, status=STATUS_INSUFFICIENT_N
        ),
        ReliabilityEstimate(
            measure_id="m3", spec_id="s", n=15, status=STATUS_DEGENERATE
        ),
    ]
    annotated, summary = apply_primary_inference(estimates, registry)
    assert annotated[0].q == pytest.approx(0.005)  # pool of one
    assert annotated[1].q is None and annotated[2].q is None
    assert not annotated[1].headline_pass and not annotated[2].headline_pass
    assert summary["counts"] == {"ok": 1, "insufficient_n": 1, "degenerate": 1}
    assert summary["n_primary"] == 3
    assert summary["nlr_delta_median"] == pytest.approx(0.16)


def test_inference_pool_excludes_non_ok(registry):
    # the BH denominator is the estimable pool, not the roster size
    estimates = [
        ok_estimate("m1", p=0.03, ci_low=0.01),
        ok_estimate("m2", p=0.04, ci_low=-0.2),
        ReliabilityEstimate(
            measure_id="m3", spec_id="s", n=2, status=STATUS_INSUFFICIENT_N
        ),
    ]
    annotated, summary = apply_primary_inference(estimates, registry)
    want = bh_adjust([0.03, 0.04])
    assert annotated[0].q == pytest.approx(want[0])
    assert annotated[1].q == pytest.approx(want[1])
    assert annotated[0].headline_pass
    assert not annotated[1].headline_pass  # ci_low < 0
    assert summary["pass_count"] == 1


def test_inference_headline_boundary_zero(registry):
    annotated, _ = apply_primary_inference(
        [ok_estimate("m1", p=0.01, ci_low=0.0)], registry
    )
    assert not annotated[0].headline_pass


def test_inference_rejects_non_primary(registry):
    with pytest.raises(ClaimTierViolationError):
        apply_primary_inference([ok_estimate("d1", p=0.5, ci_low=0.0)], registry)


def test_inference_rejects_unknown_measure(registry):
    with pytest.raises(UnknownMeasureError):
        apply_primary_inference([ok_estimate("nope", p=0.5, ci_low=0.0)], registry)


def test_inference_rejects_ok_without_p(registry):
    broken = ReliabilityEstimate(
        measure_id="m1", spec_id="s", n=20, status=STATUS_OK, ci_low=0.1
    )
    with pytest.raises(InvalidPValueError):
        apply_primary_inference([broken], registry)


def test_inference_empty_pool(registry):
    estimates = [
        ReliabilityEstimate(
            measure_id="m1", spec_id="s", n=2, status=STATUS_INSUFFICIENT_N
        )
    ]
    annotated, summary = apply_primary_inference(estimates, registry)
    assert annotated[0].q is None
    assert summary["min_q"] is None
    assert summary["nlr_delta_median"] is None
    assert summary["nlr_delta_iqr"] is None
    assert summary["mde_median"] is None
    assert summary["pass_count"] == 0


def test_inference_summary_statistics(registry):
    estimates = [
        ok_estimate("m1", p=0.01, ci_low=0.1, ci_high=0.5),
        ok_estimate("m2", p=0.02, ci_low=-0.1, ci_high=0.3),
        ok_estimate("m3", p=0.03, ci_low=0.2, ci_high=0.8),
    ]
    _, summary = apply_primary_inference(estimates, registry)
    assert summary["ci_width_median"] == pytest.approx(0.4)
    assert summary["mde_median"] == pytest.approx(0.2)
    assert summary["icc_2_1_median"] == pytest.approx(0.6)
    assert summary["q_star"] == 0.05
