import math

import numpy as np
import pytest

from tdcf.cost_model import CostModel, banking_priors
from tdcf.engine import SpoofMode, min_tdcf_over_cm
from tdcf.error_rates import asv_rates_at, build_profile, estimate_eer
from tdcf.synthetic import (
    GaussianScoreModel,
    analytic_cm_rates,
    analytic_rates,
    analytic_tdcf,
    sample_scores,
    tdcf_standard_error,
)
from tdcf.trial_data import ScoreKind, TrialLabel

from oracles import normal_cdf

MODEL = CostModel(1, 10, 1, 10, banking_priors(0.05))


def test_counts_and_ids():
    m = GaussianScoreModel(n_tar=3, n_non=3, n_spoof=3, seed=7)
    ss = sample_scores(m, ScoreKind.ASV)
    assert ss.counts == (3, 3, 3)
    assert ss.trial_ids[:4] == ("target0", "target1", "target2", "nontarget0")


def test_deterministic():
    m = GaussianScoreModel(n_tar=50, n_non=40, n_spoof=30, seed=123)
    assert sample_scores(m, ScoreKind.CM) == sample_scores(m, ScoreKind.CM)


def test_streams_independent_of_other_counts():
    a = sample_scores(GaussianScoreModel(n_tar=20, n_non=5, n_spoof=5, seed=9), ScoreKind.ASV)
    b = sample_scores(GaussianScoreModel(n_tar=20, n_non=500, n_spoof=1, seed=9), ScoreKind.ASV)
    assert np.array_equal(a.select(TrialLabel.TARGET), b.select(TrialLabel.TARGET))
    # prefix property within one class
    c = sample_scores(GaussianScoreModel(n_tar=30, n_non=5, n_spoof=5, seed=9), ScoreKind.ASV)
    assert np.array_equal(c.select(TrialLabel.TARGET)[:20], a.select(TrialLabel.TARGET))


def test_seeds_differ():
    seen = set()
    for seed in range(100):
        ss = sample_scores(GaussianScoreModel(n_tar=5, n_non=5, n_spoof=5, seed=seed), ScoreKind.ASV)
        seen.add(tuple(sorted(ss.scores.tolist())))
    assert len(seen) == 100


def test_sample_moments():
    m = GaussianScoreModel(mu_tar=2.0, sigma_tar=0.5, n_tar=200_000, n_non=10, n_spoof=10, seed=3)
    tar = sample_scores(m, ScoreKind.ASV).select(TrialLabel.TARGET)
    assert abs(tar.mean() - 2.0) < 4 * 0.5 / math.sqrt(tar.size)
    assert abs(tar.std() - 0.5) < 0.005


def test_invalid_models():
    with pytest.raises(ValueError):
        GaussianScoreModel(sigma_non=0.0)
    with pytest.raises(ValueError):
        GaussianScoreModel(n_spoof=0)
    with pytest.raises(ValueError):
        GaussianScoreModel(seed=-1)


class TestAnalytic:
    def test_median(self):
        m = GaussianScoreModel(mu_tar=0.7, sigma_tar=2.0)
        assert analytic_rates(m, 0.7)[0] == 0.5

    def test_standard_table(self):
        m = GaussianScoreModel(mu_tar=1, mu_non=-1)
        p_miss, p_fa, _ = analytic_rates(m, 0.0)
        assert p_miss == pytest.approx(normal_cdf(-1), abs=1e-15)
        assert p_fa == pytest.approx(normal_cdf(-1), abs=1e-15)
        assert p_miss == pytest.approx(0.1587, abs=5e-5)

    def test_worst_case_model(self):
        m = GaussianScoreModel(mu_tar=0.3, sigma_tar=1.7, mu_spoof=0.3, sigma_spoof=1.7)
        for t in np.linspace(-5, 5, 21):
            r = analytic_rates(m, t)
            assert r[2] == r[0]

    def test_perfect_cm_collapse(self):
        asv = GaussianScoreModel(mu_tar=2, mu_non=-2, mu_spoof=1.5)
        cm = GaussianScoreModel(mu_tar=10, mu_non=10, mu_spoof=-10, sigma_tar=0.1, sigma_non=0.1, sigma_spoof=0.1)
        p_miss, p_fa, _ = analytic_rates(asv, 0.0)
        expected = MODEL.c_miss_asv * MODEL.pi_tar * p_miss + MODEL.c_fa_asv * MODEL.pi_non * p_fa
        assert analytic_tdcf(asv, cm, MODEL, 0.0, 0.0) == pytest.approx(expected, abs=1e-9)

    def test_accept_all_limit(self):
        asv = GaussianScoreModel(mu_tar=2, mu_non=-2, mu_spoof=2)
        cm = GaussianScoreModel()
        p_miss, p_fa, _ = analytic_rates(asv, 0.0)
        expected = (
            MODEL.c_miss_asv * MODEL.pi_tar * p_miss
            + MODEL.c_fa_asv * MODEL.pi_non * p_fa
            + MODEL.c_fa_cm * MODEL.pi_spoof * (1 - p_miss)
        )
        assert analytic_tdcf(asv, cm, MODEL, -math.inf, 0.0) == pytest.approx(expected, rel=1e-14)

    def test_cm_mixture(self):
        cm = GaussianScoreModel(mu_tar=1, mu_non=3, n_tar=100, n_non=300)
        p_miss, _ = analytic_cm_rates(cm, 2.0)
        assert p_miss == pytest.approx((100 * normal_cdf(1) + 300 * normal_cdf(-1)) / 400, rel=1e-14)

    def test_standard_error_positive(self):
        asv = GaussianScoreModel(n_tar=100, n_non=100, n_spoof=100)
        cm = GaussianScoreModel(mu_spoof=-1, n_tar=100, n_non=100, n_spoof=100)
        se100 = tdcf_standard_error(asv, cm, MODEL, 0.0, 0.0)
        big = GaussianScoreModel(n_tar=10_000, n_non=10_000, n_spoof=10_000)
        bigcm = GaussianScoreModel(mu_spoof=-1, n_tar=10_000, n_non=10_000, n_spoof=10_000)
        se10k = tdcf_standard_error(big, bigcm, MODEL, 0.0, 0.0)
        assert se100 > 0
        assert se10k == pytest.approx(se100 / 10, rel=1e-9)


def test_rates_converge_with_n():
    deviations = []
    for n in (1_000, 10_000, 100_000):
        m = GaussianScoreModel(mu_tar=1, mu_non=-1, n_tar=n, n_non=n, n_spoof=1, seed=11)
        ss = sample_scores(m, ScoreKind.ASV)
        emp = np.array(asv_rates_at(ss, 0.3))
        exact = np.array(analytic_rates(m, 0.3)[:2])
        dev = np.abs(emp - exact).max()
        # within 4 binomial standard errors at every size
        assert dev < 4 * math.sqrt(0.25 / n)
        deviations.append(dev)
    assert deviations[2] < deviations[0]


def test_eer_converges():
    m = GaussianScoreModel(mu_tar=0.5, mu_non=-0.5, sigma_tar=1, sigma_non=1,
                           n_tar=100_000, n_non=100_000, n_spoof=1, seed=5)
    eer = estimate_eer(build_profile(sample_scores(m, ScoreKind.ASV))).value
    assert eer == pytest.approx(normal_cdf(-0.5), abs=0.005)


def test_empirical_min_not_below_analytic_min():
    asv = GaussianScoreModel(mu_tar=2, mu_non=-2, mu_spoof=1, n_tar=20_000, n_non=20_000, n_spoof=20_000, seed=1)
    cm = GaussianScoreModel(mu_tar=1, mu_non=1, mu_spoof=-1, n_tar=10_000, n_non=10_000, n_spoof=20_000, seed=2)
    asv_set = sample_scores(asv, ScoreKind.ASV)
    cm_set = sample_scores(cm, ScoreKind.CM)
    emp_min, _ = min_tdcf_over_cm(asv_set, cm_set, MODEL, 0.0, spoof_mode=SpoofMode.EMPIRICAL)
    grid = np.linspace(-6, 6, 2401)
    analytic_min = min(analytic_tdcf(asv, cm, MODEL, s, 0.0) for s in grid)
    tol = 4 * tdcf_standard_error(asv, cm, MODEL, 0.0, 0.0)
    assert emp_min >= analytic_min - tol
    assert emp_min <= analytic_min + tol
