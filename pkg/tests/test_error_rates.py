import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdcf.error_rates import (
    EerMethod,
    ErrorProfile,
    ProfileRole,
    asv_rates_at,
    asv_spoof_miss_at,
    build_profile,
    cm_rates_at,
    estimate_eer,
    rocch,
)

from conftest import make_set
from oracles import brute_rocch_eer, count_rates, normal_cdf, step_region_thresholds

INF = math.inf


class TestRatesAt:
    def test_hand_count(self):
        asv = make_set("asv", [1.0, 2.0, 3.0], [-1.0, 0.5])
        assert asv_rates_at(asv, 0.0) == (0.0, 0.5)

    def test_plus_inf(self):
        asv = make_set("asv", [1.0, 2.0, 3.0], [-1.0, 0.5])
        assert asv_rates_at(asv, INF) == (1.0, 0.0)
        assert asv_rates_at(asv, -INF) == (0.0, 1.0)

    def test_tie_is_rejected(self):
        asv = make_set("asv", [1.0], [1.0])
        assert asv_rates_at(asv, 1.0) == (1.0, 0.0)

    def test_spoof_miss(self):
        asv = make_set("asv", [1.0], [0.0], [-2.0, 0.1, 5.0])
        assert asv_spoof_miss_at(asv, 0.0) == pytest.approx(1 / 3, abs=0)
        assert asv_spoof_miss_at(asv, -INF) == 0.0
        ties = make_set("asv", [1.0], [0.0], [0.7, 0.7])
        assert asv_spoof_miss_at(ties, 0.7) == 1.0

    def test_spoof_miss_needs_spoofs(self):
        with pytest.raises(ValueError, match="worst-case"):
            asv_spoof_miss_at(make_set("asv", [1.0], [0.0]), 0.0)

    def test_cm_rates(self):
        cm = make_set("cm", tar=[0.9], non=[1.1], spoof=[-0.5, 0.2])
        assert cm_rates_at(cm, 0.5) == (0.0, 0.0)
        assert cm_rates_at(cm, -INF) == (0.0, 1.0)
        assert cm_rates_at(cm, INF) == (1.0, 0.0)

    def test_kind_checked(self):
        cm = make_set("cm", tar=[0.9], non=[1.1], spoof=[-0.5])
        with pytest.raises(ValueError):
            asv_rates_at(cm, 0.0)
        with pytest.raises(ValueError):
            cm_rates_at(make_set("asv", [1.0], [0.0]), 0.0)


class TestProfile:
    def test_two_point_profile(self):
        prof = build_profile(make_set("asv", [1.0], [0.0]))
        assert prof.thresholds.tolist() == [-INF, 0.0, 1.0, INF]
        assert prof.p_miss.tolist() == [0, 0, 1, 1]
        assert prof.p_fa.tolist() == [1, 0, 0, 0]

    def test_single_score_degenerate(self):
        prof = build_profile(make_set("asv", [0.0], [0.0]))
        assert prof.thresholds.tolist() == [-INF, 0.0, INF]
        assert prof.p_miss.tolist() == [0, 1, 1]
        assert prof.p_fa.tolist() == [1, 0, 0]
        # miss and false alarm swap sides at t = 0; the interpolated crossing is 0.5
        assert estimate_eer(prof, EerMethod.LINEAR_MIDPOINT).value == 0.5
        assert estimate_eer(prof, EerMethod.ROCCH).value == 0.5

    def test_cm_role_pools_human(self):
        cm = make_set("cm", tar=[2.0], non=[0.0], spoof=[1.0])
        prof = build_profile(cm, ProfileRole.CM_HUMAN_SPOOF)
        assert prof.positive_count == 2 and prof.negative_count == 1
        assert prof.rates_at(1.5) == (0.5, 0.0)

    def test_empty_class(self):
        with pytest.raises(ValueError):
            ErrorProfile.from_scores([], [1.0])


score_lists = st.lists(
    st.floats(-50, 50, allow_nan=False).map(lambda x: round(x, 1)), min_size=1, max_size=30
)


@settings(max_examples=150, deadline=None)
@given(score_lists, score_lists, st.randoms(use_true_random=False))
def test_profile_properties(pos, neg, rnd):
    asv = make_set("asv", pos, neg)
    prof = build_profile(asv)
    # sentinels
    assert (prof.p_miss[0], prof.p_fa[0]) == (0.0, 1.0)
    assert (prof.p_miss[-1], prof.p_fa[-1]) == (1.0, 0.0)
    # monotone
    assert np.all(np.diff(prof.p_miss) >= 0)
    assert np.all(np.diff(prof.p_fa) <= 0)
    # granularity
    for rates, n in ((prof.p_miss, len(pos)), (prof.p_fa, len(neg))):
        scaled = rates * n
        assert np.all(np.abs(scaled - np.round(scaled)) < 1e-9)
    # step-function consistency against explicit counting at every region
    for t in step_region_thresholds(pos, neg) + sorted(set(pos + neg)):
        assert prof.rates_at(t) == count_rates(pos, neg, t) == asv_rates_at(asv, t)
    # permutation invariance
    pos2, neg2 = pos[:], neg[:]
    rnd.shuffle(pos2)
    rnd.shuffle(neg2)
    prof2 = build_profile(make_set("asv", pos2, neg2))
    assert np.array_equal(prof.p_miss, prof2.p_miss) and np.array_equal(prof.p_fa, prof2.p_fa)
    for method in EerMethod:
        assert estimate_eer(prof, method).value == estimate_eer(prof2, method).value


@settings(max_examples=150, deadline=None)
@given(score_lists, score_lists)
def test_rocch_eer_matches_pairwise_oracle(pos, neg):
    prof = ErrorProfile.from_scores(pos, neg)
    rocch_eer = estimate_eer(prof, EerMethod.ROCCH).value
    assert rocch_eer == pytest.approx(brute_rocch_eer(pos, neg), abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(score_lists, score_lists)
def test_eer_bounds(pos, neg):
    prof = ErrorProfile.from_scores(pos, neg)
    r = estimate_eer(prof, EerMethod.ROCCH).value
    lin = estimate_eer(prof, EerMethod.LINEAR_MIDPOINT).value
    assert 0.0 <= r <= 1.0 and 0.0 <= lin <= 1.0
    assert r <= lin + 1.0 / min(len(pos), len(neg)) + 1e-12
    # the hull never lies above the empirical curve
    assert r <= lin + 1e-12


def test_separable_eer_zero():
    prof = ErrorProfile.from_scores([3.0, 4.0, 5.0], [-1.0, 0.0, 2.9])
    for method in EerMethod:
        assert estimate_eer(prof, method).value == 0.0


def test_gaussian_eer(rng):
    n = 100_000
    prof = ErrorProfile.from_scores(rng.normal(1, 1, n), rng.normal(-1, 1, n))
    expected = normal_cdf(-1.0)
    for method in EerMethod:
        assert abs(estimate_eer(prof, method).value - expected) < 0.005


def test_rocch_vertices():
    # points (fa, miss): (0,1) (0.5,0.5) (0.5,0) ... hull cuts the inner corner
    fa, miss = rocch([0.0, 0.5, 0.0, 1.0], [1.0, 0.5, 0.0, 0.0])
    assert list(zip(fa, miss)) == [(0.0, 0.0), (1.0, 0.0)]
    fa, miss = rocch([0.0, 0.2, 1.0], [1.0, 0.2, 0.0])
    assert list(zip(fa, miss)) == [(0.0, 1.0), (0.2, 0.2), (1.0, 0.0)]


def test_threshold_hint_near_crossing():
    prof = ErrorProfile.from_scores([1.0, 2.0, 3.0, 4.0], [0.0, 1.5, -1.0, -2.0])
    est = estimate_eer(prof, EerMethod.LINEAR_MIDPOINT)
    assert est.threshold_hint in prof.thresholds
    assert est.value == pytest.approx(0.25)
