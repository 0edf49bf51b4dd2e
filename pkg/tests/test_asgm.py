import numpy as np
import pytest

from cceval.asgm import (
    DATASET_TABLE,
    AsgmSpec,
    Family,
    SynthDatasetSpec,
    dataset_from_name,
    generate_labels,
    generate_scores,
)
from cceval.core import InvalidInput

from .oracles import runs


def anomaly_runs(y):
    return [(a, b) for a, b, k in runs(y) if k == 1]


def test_table_example():
    spec = dataset_from_name("10k-2seg-500L", seed=3)
    y = generate_labels(spec)
    rs = anomaly_runs(y)
    assert y.size == 10_000 and len(rs) == 2
    assert all(450 <= b - a <= 550 for a, b in rs)
    assert y[0] == 0 and y[-1] == 0


@pytest.mark.parametrize("name", sorted(DATASET_TABLE))
def test_every_table_row_is_feasible(name):
    spec = dataset_from_name(name)
    y = generate_labels(spec)
    rs = anomaly_runs(y)
    assert len(rs) == spec.segments
    assert all(spec.seg_len_min <= b - a <= spec.seg_len_max for a, b in rs)


def test_zero_segments():
    y = generate_labels(SynthDatasetSpec(100, 0, 1, 1))
    assert not y.any()


def test_tight_packing():
    # 3 runs of length 2 plus 4 separators fill 10 points exactly
    y = generate_labels(SynthDatasetSpec(10, 3, 2, 2))
    assert y.tolist() == [0, 1, 1, 0, 1, 1, 0, 1, 1, 0]


def test_infeasible_spec():
    with pytest.raises(InvalidInput, match="need"):
        generate_labels(SynthDatasetSpec(100, 10, 10, 10))


def test_labels_deterministic_and_seed_dependent():
    base = dataset_from_name("10k-20seg-50H")
    first = generate_labels(base)
    assert np.array_equal(first, generate_labels(dataset_from_name("10k-20seg-50H")))
    distinct = {generate_labels(dataset_from_name("10k-20seg-50H", seed=s)).tobytes() for s in range(100)}
    assert len(distinct) == 100


def test_name_parsing():
    spec = dataset_from_name("1000k-3seg-40H")
    assert (spec.ts_length, spec.segments, spec.seg_len_min, spec.seg_len_max) == (1_000_000, 3, 1, 79)
    assert dataset_from_name("10k-1seg-100L").seg_len_min == 90
    with pytest.raises(InvalidInput):
        dataset_from_name("ten-k")


def test_model_name():
    assert AsgmSpec("PreQNegP", 0.9, 0.05, 0.1).name == "PreQNegP-q0.9-p0.05-R0.1"
    assert AsgmSpec("AccQ", 0.3).name == "AccQ-q0.3"


@pytest.mark.parametrize("kwargs", [{"q": 0.0}, {"q": 1.2}, {"q": 0.5, "p": -0.1}, {"q": 0.5, "sigma": -1}])
def test_bad_model(kwargs):
    with pytest.raises(InvalidInput):
        AsgmSpec(Family.ACCQ, **kwargs)


@pytest.fixture(scope="module")
def big_labels():
    return generate_labels(SynthDatasetSpec(100_000, 500, 20, 100))


@pytest.mark.parametrize("family, hi, lo", [("AccQ", (0.9, 1.0), (0.0, 0.05)), ("LowDisAccQ", (0.6, 0.7), (0.0, 0.4))])
def test_bands_without_noise(big_labels, family, hi, lo):
    s = generate_scores(AsgmSpec(family, 0.5), big_labels)
    high = s >= hi[0]
    assert np.all((s[high] <= hi[1]))
    assert np.all((s[~high] >= lo[0]) & (s[~high] <= lo[1]))


@pytest.mark.parametrize("q", [0.1, 0.5, 0.9])
def test_accq_rate(big_labels, q):
    s = generate_scores(AsgmSpec("AccQ", q), big_labels)
    correct = (s >= 0.5) == big_labels.astype(bool)
    se = np.sqrt(q * (1 - q) / s.size)
    assert abs(correct.mean() - q) <= 3 * se


def test_preqnegp_rates(big_labels):
    q, p = 0.7, 0.05
    s = generate_scores(AsgmSpec("PreQNegP", q, p), big_labels)
    y = big_labels.astype(bool)
    raised = s >= 0.1
    for rate, mask in ((q, y), (p, ~y)):
        se = np.sqrt(rate * (1 - rate) / mask.sum())
        assert abs(raised[mask].mean() - rate) <= 3 * se
    assert np.all(s[~raised] < 0.1)


def test_noise_is_gaussian_and_unclipped(big_labels):
    clean = generate_scores(AsgmSpec("AccQ", 0.5, sigma=0.0), big_labels)
    noisy = generate_scores(AsgmSpec("AccQ", 0.5, sigma=0.2), big_labels)
    assert noisy.min() < 0.0 and noisy.max() > 1.0
    # band widths are known, so the added variance is sigma^2 up to sampling error
    assert np.var(noisy) - np.var(clean) == pytest.approx(0.04, abs=0.004)


def test_scores_deterministic(big_labels):
    spec = AsgmSpec("LowDisAccQ", 0.4, sigma=0.1, seed=9)
    a = generate_scores(spec, big_labels, dataset="d")
    assert np.array_equal(a, generate_scores(spec, big_labels, dataset="d"))
    assert not np.array_equal(a, generate_scores(spec, big_labels, dataset="e"))


def test_common_random_numbers(big_labels):
    # raising q can only turn wrong points into correct ones
    lo = generate_scores(AsgmSpec("AccQ", 0.3), big_labels)
    hi = generate_scores(AsgmSpec("AccQ", 0.6), big_labels)
    y = big_labels.astype(bool)
    ok_lo = (lo >= 0.5) == y
    ok_hi = (hi >= 0.5) == y
    assert np.all(ok_hi[ok_lo])
    independent = generate_scores(AsgmSpec("AccQ", 0.6), big_labels, coupled=False)
    assert not np.array_equal(independent, hi)
