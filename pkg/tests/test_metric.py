import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from cceval.core import Event, EventKind, InvalidInput, extract_events
from cceval.metric import (
    CceConfig,
    anomaly_confidence,
    cce,
    consistency,
    event_level_score,
    global_score,
    normal_confidence,
)

from .conftest import random_labels
from .oracles import cce_reference

STRICT = CceConfig(mode="strict")
RELAXED = CceConfig(mode="relaxed")

A = EventKind.ANOMALY
N = EventKind.NORMAL


@st.composite
def scored_series(draw, min_n=2, max_n=120):
    n = draw(st.integers(min_n, max_n))
    labels = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    scores = draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n))
    return np.array(scores), np.array(labels)


class TestConfidence:
    def test_perfect_anomaly(self):
        assert anomaly_confidence([1.0, 1.0], Event(0, 2, A), 0.5, "strict") == 0.5

    def test_clamp_vs_signed(self):
        s = [0.3, 0.3]
        assert anomaly_confidence(s, Event(0, 2, A), 0.5, "strict") == 0.0
        assert anomaly_confidence(s, Event(0, 2, A), 0.5, "relaxed") == pytest.approx(-0.2)

    def test_threshold_boundary(self):
        for mode in ("strict", "relaxed"):
            assert anomaly_confidence([0.5], Event(0, 1, A), 0.5, mode) == 0.0
            assert normal_confidence([0.5], Event(0, 1, N), 0.5, mode) == 0.0

    def test_perfect_normal(self):
        assert normal_confidence([0.0, 0.0], Event(0, 2, N), 0.5) == 0.5

    def test_false_positive_mass(self):
        assert normal_confidence([0.8], Event(0, 1, N), 0.5, "relaxed") == pytest.approx(-0.3)

    def test_kind_mismatch(self):
        with pytest.raises(InvalidInput):
            anomaly_confidence([0.1], Event(0, 1, N))
        with pytest.raises(InvalidInput):
            normal_confidence([0.1], Event(0, 1, A))


class TestConsistency:
    def test_constant(self):
        assert consistency([0.4] * 5, Event(0, 5, A)) == 1.0

    def test_beta_example(self):
        assert consistency([0.2, 0.4, 0.6, 0.8], Event(0, 4, A)) == pytest.approx(math.exp(-0.05), rel=1e-12)
        assert math.exp(-0.05) == pytest.approx(0.951229, abs=1e-6)

    def test_maximal_spread(self):
        assert consistency([0.0, 1.0], Event(0, 2, N)) == pytest.approx(math.exp(-0.25), rel=1e-12)


class TestScores:
    labels = np.array([0, 0, 1, 1, 1, 0, 0, 1, 0])

    def perfect(self):
        return self.labels.astype(float)

    def test_event_level_perfect(self):
        p = extract_events(self.labels)
        s_event, _ = event_level_score(self.perfect(), p, STRICT)
        assert s_event == 0.5

    def test_event_level_all_half(self):
        p = extract_events(self.labels)
        assert event_level_score(np.full(9, 0.5), p, RELAXED)[0] == 0.0

    def test_event_level_normal_only_reassigns_weight(self):
        p = extract_events([0, 0, 0, 0])
        assert event_level_score(np.zeros(4), p, RELAXED)[0] == 0.5

    def test_global_perfect(self):
        p = extract_events(self.labels)
        assert global_score(self.perfect(), p, RELAXED)[0] == 0.5

    def test_global_all_half(self):
        p = extract_events(self.labels)
        assert global_score(np.full(9, 0.5), p, RELAXED)[0] == 0.0

    def test_global_anomaly_pool_at_threshold(self):
        # anomaly pool [0.2, 0.4, 0.6, 0.8]: mean exactly tau, so conf = 0
        y = np.array([1, 1, 0, 1, 1, 0])
        s = np.array([0.2, 0.4, 0.0, 0.6, 0.8, 0.0])
        p = extract_events(y)
        for mode in ("strict", "relaxed"):
            cfg = CceConfig(global_anomaly_weight=1.0, mode=mode)
            total, anom, _ = global_score(s, p, cfg)
            assert anom == pytest.approx(0.0, abs=1e-15)
            assert total == pytest.approx(0.0, abs=1e-15)

    def test_cce_perfect(self):
        for mode in ("strict", "relaxed"):
            assert cce(self.perfect(), self.labels, CceConfig(mode=mode)).s_cce == 1.0

    def test_cce_constant(self):
        for mode in ("strict", "relaxed"):
            assert cce(np.full(9, 0.5), self.labels, CceConfig(mode=mode)).s_cce == 0.0

    def test_cce_inverted_relaxed(self):
        assert cce(1.0 - self.perfect(), self.labels, RELAXED).s_cce == -1.0

    def test_cce_inverted_strict(self):
        assert cce(1.0 - self.perfect(), self.labels, STRICT).s_cce == 0.0

    def test_breakdown_fields(self):
        out = cce(self.perfect() * 3 + 1, self.labels)
        assert out.s_cce == out.s_event + out.s_global
        assert len(out.per_event_scores) == 5
        ev, conf, cons, prod = out.per_event_scores[1]
        assert (ev.start, ev.end, ev.kind) == (2, 5, A)
        assert (conf, cons, prod) == (0.5, 1.0, 0.5)
        assert not out.single_class

    def test_single_class_flag(self):
        out = cce([0.1, 0.2, 0.3], [0, 0, 0])
        assert out.single_class

    def test_fallback_counted(self):
        # [0, 1] event sits on the moment-matching boundary
        out = cce([0.0, 1.0, 0.5, 0.6], [1, 1, 0, 0])
        assert out.fallback_events >= 1

    @pytest.mark.parametrize(
        "scores, labels",
        [([0.1, 0.2], [0, 1, 0]), ([], []), ([0.1], [2])],
    )
    def test_bad_inputs(self, scores, labels):
        with pytest.raises(InvalidInput):
            cce(scores, labels)

    def test_normalize_off_requires_unit_range(self):
        with pytest.raises(InvalidInput):
            cce([0.2, 1.5], [0, 1], CceConfig(normalize=False))

    @pytest.mark.parametrize("kwargs", [{"tau": 0.0}, {"tau": 1.0}, {"anomaly_event_weight": 1.5}, {"mode": "loose"}])
    def test_bad_config(self, kwargs):
        with pytest.raises((InvalidInput, ValueError)):
            CceConfig(**kwargs)


class TestAgainstReference:
    @given(scored_series(), st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]), st.booleans())
    def test_matches_definitions(self, data, tau, strict):
        s, y = data
        got = cce(s, y, CceConfig(tau=tau, mode="strict" if strict else "relaxed")).s_cce
        assert got == pytest.approx(cce_reference(s, y, tau=tau, strict=strict), rel=1e-9, abs=1e-12)

    @given(scored_series(), st.floats(0, 1), st.floats(0, 1))
    def test_weights(self, data, alpha, eta):
        s, y = data
        cfg = CceConfig(anomaly_event_weight=alpha, global_anomaly_weight=eta)
        assert cce(s, y, cfg).s_cce == pytest.approx(cce_reference(s, y, alpha=alpha, eta=eta), rel=1e-9, abs=1e-12)


class TestProperties:
    @given(scored_series())
    def test_bounds(self, data):
        s, y = data
        strict = cce(s, y, STRICT)
        relaxed = cce(s, y, RELAXED)
        assert 0.0 <= strict.s_cce <= 1.0
        assert 0.0 <= strict.s_event <= 0.5 and 0.0 <= strict.s_global <= 0.5
        assert np.all((strict.confidence >= 0) & (strict.confidence <= 0.5))
        assert -1.0 <= relaxed.s_cce <= 1.0
        assert np.all((relaxed.confidence >= -0.5) & (relaxed.confidence <= 0.5))
        for out in (strict, relaxed):
            assert np.all((out.consistency >= math.exp(-0.25)) & (out.consistency <= 1.0))

    @given(scored_series(), st.floats(0.01, 100), st.floats(-100, 100))
    def test_affine_invariance(self, data, a, b):
        s, y = data
        assume(np.ptp(s) > 1e-6)
        assert cce(a * s + b, y).s_cce == pytest.approx(cce(s, y).s_cce, abs=1e-9)

    @given(scored_series())
    def test_label_score_swap_symmetry(self, data):
        s, y = data
        for mode in ("strict", "relaxed"):
            cfg = CceConfig(mode=mode)
            assert cce(-s, 1 - y, cfg).s_cce == pytest.approx(cce(s, y, cfg).s_cce, abs=1e-12)

    @given(scored_series(), st.integers(0, 2**32 - 1))
    def test_raising_anomaly_scores_never_hurts(self, data, seed):
        s, y = data
        s = (s + 5) / 10  # inside [0, 1], normalization disabled below
        cfg = CceConfig(normalize=False)
        bump = np.random.default_rng(seed).random(s.size) * (1 - s) * (y == 1)
        assert cce(s + bump, y, cfg).s_cce >= cce(s, y, cfg).s_cce - 1e-12


class TestPerturbation:
    """Sensitivity to bounded per-point perturbations of normalized scores."""

    cfg = CceConfig(normalize=False)

    @staticmethod
    def proven_bound(delta):
        # per piece: |d conf| <= delta, |conf| <= 1/2, |d U| <= |2 cov| + var <= delta + delta^2;
        # event and global parts each contribute one weighted average of pieces
        return 2 * (delta + 0.5 * (delta + delta * delta))

    def test_coherent_shift_reaches_twice_delta(self):
        # pushing every anomaly point down and every normal point up by delta
        # moves both the event-level and global parts by delta each
        y = np.array([1] * 10 + [0] * 10)
        s = np.r_[np.full(10, 0.9), np.full(10, 0.1)]
        delta = 0.05
        moved = np.r_[s[:10] - delta, s[10:] + delta]
        change = abs(cce(s, y, self.cfg).s_cce - cce(moved, y, self.cfg).s_cce)
        assert change == pytest.approx(2 * delta, rel=1e-12)
        assert change > (1 + 0.75 / 10) * delta

    @pytest.mark.parametrize("delta", [0.01, 0.05, 0.2])
    @pytest.mark.parametrize("scheme", ["uniform", "signs", "coherent"])
    def test_proven_bound_holds(self, rng, delta, scheme):
        for _ in range(300):
            n = int(rng.integers(2, 200))
            y = random_labels(rng, n)
            s = rng.random(n)
            if scheme == "uniform":
                d = rng.uniform(-delta, delta, n)
            elif scheme == "signs":
                d = delta * rng.choice([-1.0, 1.0], n)
            else:
                d = np.where(y == 1, -delta, delta)
            moved = np.clip(s + d, 0.0, 1.0)
            for mode in ("strict", "relaxed"):
                cfg = CceConfig(normalize=False, mode=mode)
                change = abs(cce(s, y, cfg).s_cce - cce(moved, y, cfg).s_cce)
                assert change <= self.proven_bound(delta) * (1 + 1e-9)
