"""Tandem detection cost of a countermeasure combined with an ASV system.

The two detectors are treated as statistically independent, so every joint
error probability is a product of per-system rates.  Four error events feed
the cost:

a. bona fide target passes the CM, ASV rejects it
b. nontarget passes the CM, ASV accepts it
c. spoof passes the CM, ASV accepts it
d. CM rejects a bona fide target
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize, special

from .cost_model import CostModel, effective_prior
from .error_rates import asv_rates_at, asv_spoof_miss_at, count_at_or_below
from .trial_data import ScoreKind, ScoreSet, TrialLabel

__all__ = [
    "Action",
    "TandemArchitecture",
    "SpoofMode",
    "TandemOperatingPoint",
    "AsvRates",
    "TdcfBreakdown",
    "joint_actions",
    "action_probabilities",
    "tandem_error_terms",
    "tdcf_from_rates",
    "asv_rates",
    "default_spoof_mode",
    "tdcf_at",
    "tdcf_curve",
    "min_tdcf_over_cm",
    "PolarityWarning",
    "CalibrationError",
    "Calibration",
    "calibrate_affine",
]


class Action(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    SLEEP = "sleep"


class TandemArchitecture(enum.Enum):
    CM_THEN_ASV = "cm-asv"
    ASV_THEN_CM = "asv-cm"
    PARALLEL = "parallel"


class SpoofMode(enum.Enum):
    WORST_CASE = "worst"
    EMPIRICAL = "empirical"


_A, _R, _S = Action.ACCEPT, Action.REJECT, Action.SLEEP

# (CM action, ASV action) pairs reachable in each combination
_JOINT_ACTIONS = {
    TandemArchitecture.CM_THEN_ASV: ((_A, _R), (_A, _A), (_R, _S)),
    TandemArchitecture.ASV_THEN_CM: ((_S, _R), (_A, _A), (_R, _A)),
    TandemArchitecture.PARALLEL: ((_A, _R), (_A, _A), (_R, _R), (_R, _A)),
}


def joint_actions(arch: TandemArchitecture) -> tuple[tuple[Action, Action], ...]:
    return _JOINT_ACTIONS[TandemArchitecture(arch)]


class AsvRates(NamedTuple):
    p_miss: float
    p_fa: float
    p_miss_spoof: float


def _action_prob(reject_prob: float, action: Action) -> float:
    if action is Action.REJECT:
        return reject_prob
    if action is Action.ACCEPT:
        return 1.0 - reject_prob
    return 1.0


def action_probabilities(
    arch: TandemArchitecture, asv: AsvRates, p_miss_cm: float, p_fa_cm: float
) -> dict[tuple[Action, Action], tuple[float, float, float]]:
    """Probability of each joint action given target, nontarget and spoof trials.

    Keys are the (CM, ASV) action pairs of the architecture.  A SLEEP action
    means that system never sees the trial; the other system alone decides.
    For each trial class the probabilities over the pairs sum to one.
    """
    arch = TandemArchitecture(arch)
    # probability that each system rejects a trial of the class
    cm_reject = (p_miss_cm, p_miss_cm, 1.0 - p_fa_cm)
    asv_reject = (asv.p_miss, 1.0 - asv.p_fa, asv.p_miss_spoof)
    out = {}
    for cm_act, asv_act in joint_actions(arch):
        probs = []
        for c in range(3):
            p_cm = _action_prob(cm_reject[c], cm_act)
            p_asv = _action_prob(asv_reject[c], asv_act)
            probs.append(p_cm * p_asv)
        out[(cm_act, asv_act)] = tuple(probs)
    return out


def tandem_error_terms(
    asv: AsvRates,
    p_miss_cm: float,
    p_fa_cm: float,
    arch: TandemArchitecture = TandemArchitecture.CM_THEN_ASV,
) -> tuple[float, float, float, float]:
    """Probabilities ``(p_a, p_b, p_c, p_d)`` of the four tandem error events.

    A rejected target is charged to the CM whenever the CM rejects it, and to
    the ASV otherwise.  For the ASV-first cascade the CM never sees trials
    the ASV has rejected, so by independence the share of those on which
    the CM would also have rejected is charged to the CM.  With this
    attribution all three architectures give identical terms, the cascade
    CM -> ASV included.
    """
    arch = TandemArchitecture(arch)
    pass_cm = 1.0 - p_miss_cm
    p_b = pass_cm * asv.p_fa
    p_c = p_fa_cm * (1.0 - asv.p_miss_spoof)
    if arch is TandemArchitecture.CM_THEN_ASV:
        p_a = pass_cm * asv.p_miss
        p_d = p_miss_cm
    elif arch is TandemArchitecture.PARALLEL:
        # (REJECT, REJECT) and (REJECT, ACCEPT) together make up the CM miss
        p_a = pass_cm * asv.p_miss
        p_d = p_miss_cm * asv.p_miss + p_miss_cm * (1.0 - asv.p_miss)
    else:
        # (SLEEP, REJECT) split into CM-would-pass and CM-would-reject parts
        p_a = asv.p_miss * pass_cm
        p_d = (1.0 - asv.p_miss) * p_miss_cm + asv.p_miss * p_miss_cm
    return p_a, p_b, p_c, p_d


@dataclass(frozen=True)
class TandemOperatingPoint:
    s: float
    t: float
    spoof_mode: SpoofMode = SpoofMode.WORST_CASE


@dataclass(frozen=True)
class TdcfBreakdown:
    p_a: float
    p_b: float
    p_c: float
    p_d: float
    term_a: float
    term_b: float
    term_c: float
    term_d: float

    @property
    def total(self) -> float:
        return self.term_a + self.term_b + self.term_c + self.term_d

    @property
    def terms(self) -> tuple[float, float, float, float]:
        return self.term_a, self.term_b, self.term_c, self.term_d


def tdcf_from_rates(
    asv: AsvRates,
    p_miss_cm: float,
    p_fa_cm: float,
    model: CostModel,
    arch: TandemArchitecture = TandemArchitecture.CM_THEN_ASV,
) -> TdcfBreakdown:
    p_a, p_b, p_c, p_d = tandem_error_terms(asv, p_miss_cm, p_fa_cm, arch)
    return TdcfBreakdown(
        p_a,
        p_b,
        p_c,
        p_d,
        term_a=model.c_miss_asv * model.pi_tar * p_a,
        term_b=model.c_fa_asv * model.pi_non * p_b,
        term_c=model.c_fa_cm * model.pi_spoof * p_c,
        term_d=model.c_miss_cm * model.pi_tar * p_d,
    )


def default_spoof_mode(asv_set: ScoreSet) -> SpoofMode:
    """Empirical when the ASV scores include spoof trials, worst case otherwise."""
    return SpoofMode.EMPIRICAL if asv_set.counts[2] > 0 else SpoofMode.WORST_CASE


def asv_rates(asv_set: ScoreSet, t: float, spoof_mode: SpoofMode) -> AsvRates:
    p_miss, p_fa = asv_rates_at(asv_set, t)
    if SpoofMode(spoof_mode) is SpoofMode.WORST_CASE:
        p_miss_spoof = p_miss
    else:
        p_miss_spoof = asv_spoof_miss_at(asv_set, t)
    return AsvRates(p_miss, p_fa, p_miss_spoof)


def _cm_counts(cm_set: ScoreSet, thresholds):
    if cm_set.kind is not ScoreKind.CM:
        raise ValueError("expected a CM score set")
    human = np.sort(cm_set.select(TrialLabel.TARGET, TrialLabel.NONTARGET))
    spoof = np.sort(cm_set.select(TrialLabel.SPOOF))
    miss = count_at_or_below(human, thresholds)
    fa = spoof.size - count_at_or_below(spoof, thresholds)
    return miss / human.size, fa / spoof.size


def tdcf_at(
    asv_set: ScoreSet,
    cm_set: ScoreSet,
    model: CostModel,
    op: TandemOperatingPoint,
    arch: TandemArchitecture = TandemArchitecture.CM_THEN_ASV,
) -> TdcfBreakdown:
    asv = asv_rates(asv_set, op.t, op.spoof_mode)
    p_miss_cm, p_fa_cm = _cm_counts(cm_set, [op.s])
    return tdcf_from_rates(asv, float(p_miss_cm[0]), float(p_fa_cm[0]), model, arch)


def tdcf_curve(
    asv: AsvRates,
    cm_set: ScoreSet,
    model: CostModel,
    arch: TandemArchitecture = TandemArchitecture.CM_THEN_ASV,
) -> tuple[np.ndarray, np.ndarray]:
    """t-DCF at every candidate CM threshold with the ASV rates held fixed.

    Candidates are ``-inf``, each distinct CM score and ``+inf``; the cost is
    constant between consecutive candidates.
    """
    s = np.concatenate([[-np.inf], np.unique(cm_set.scores), [np.inf]])
    p_miss_cm, p_fa_cm = _cm_counts(cm_set, s)
    # same operation order as tdcf_from_rates so values agree bit for bit
    p_a, p_b, p_c, p_d = tandem_error_terms(asv, p_miss_cm, p_fa_cm, arch)
    total = (
        model.c_miss_asv * model.pi_tar * p_a
        + model.c_fa_asv * model.pi_non * p_b
        + model.c_fa_cm * model.pi_spoof * p_c
        + model.c_miss_cm * model.pi_tar * p_d
    )
    return s, total


def min_tdcf_over_cm(
    asv_set: ScoreSet,
    cm_set: ScoreSet,
    model: CostModel,
    t_fixed: float = 0.0,
    arch: TandemArchitecture = TandemArchitecture.CM_THEN_ASV,
    spoof_mode: SpoofMode | None = None,
) -> tuple[float, float]:
    """Minimum t-DCF over the CM threshold, ASV threshold fixed at ``t_fixed``.

    Returns ``(min_value, s_star)`` with ``s_star`` the smallest minimizing
    candidate threshold.
    """
    if spoof_mode is None:
        spoof_mode = default_spoof_mode(asv_set)
    asv = asv_rates(asv_set, t_fixed, spoof_mode)
    s, total = tdcf_curve(asv, cm_set, model, arch)
    k = int(np.argmin(total))
    return float(total[k]), float(s[k])


# --- ASV score calibration ------------------------------------------------


class PolarityWarning(UserWarning):
    """Target scores tend to fall below nontarget scores."""


class CalibrationError(RuntimeError):
    pass


class Calibration(NamedTuple):
    a: float
    b: float
    calibrated: ScoreSet


def calibrate_affine(asv_set: ScoreSet, model: CostModel, max_iter: int = 500) -> Calibration:
    """Fit ``r' = a * r + b`` so that thresholding ``r'`` at 0 is Bayes-optimal.

    The fit minimizes prior-weighted logistic loss over target and nontarget
    trials, weighting the classes by the effective prior of the ASV costs
    and the target share of bona fide trials.  The calibrated scores are
    posterior log-odds at that prior.  Spoof trials are transformed but do
    not take part in the fit.  ``a`` is kept positive so score order is
    preserved.
    """
    tar = asv_set.select(TrialLabel.TARGET)
    non = asv_set.select(TrialLabel.NONTARGET)
    if tar.size < 2 or non.size < 2:
        raise CalibrationError("calibration needs at least two target and two nontarget scores")
    both = np.concatenate([tar, non])
    scale = float(np.std(both))
    if not scale > 0:
        raise CalibrationError("all target and nontarget scores are equal")
    center = float(np.mean(both))
    x_tar = (tar - center) / scale
    x_non = (non - center) / scale

    p_eff = effective_prior(model.c_miss_asv, model.c_fa_asv, model.priors.bona_fide_target)
    if not 0.0 < p_eff < 1.0:
        raise CalibrationError(f"effective prior {p_eff!r} leaves nothing to calibrate")
    w_tar, w_non = p_eff / tar.size, (1.0 - p_eff) / non.size

    def loss(params):
        a, b = params
        z_tar = a * x_tar + b
        z_non = a * x_non + b
        # log(1 + exp(-z)) for targets, log(1 + exp(z)) for nontargets
        value = w_tar * np.logaddexp(0.0, -z_tar).sum() + w_non * np.logaddexp(0.0, z_non).sum()
        g_tar = -w_tar * special.expit(-z_tar)
        g_non = w_non * special.expit(z_non)
        grad = np.array(
            [g_tar @ x_tar + g_non @ x_non, g_tar.sum() + g_non.sum()]
        )
        return value, grad

    a_floor = 1e-6
    res = optimize.minimize(
        loss,
        x0=np.array([1.0, special.logit(p_eff)]),
        jac=True,
        method="L-BFGS-B",
        bounds=[(a_floor, None), (None, None)],
        options={"maxiter": max_iter, "gtol": 1e-10, "ftol": 1e-15},
    )
    if not res.success and res.nit >= max_iter:
        raise CalibrationError(f"calibration did not converge in {max_iter} iterations")
    a_std, b_std = (float(v) for v in res.x)
    if a_std <= 2 * a_floor or float(np.mean(tar)) < float(np.mean(non)):
        warnings.warn(
            "ASV target scores fall below nontarget scores; calibration slope "
            "pinned near zero",
            PolarityWarning,
            stacklevel=2,
        )
    a = a_std / scale
    b = b_std - a * center
    if not (math.isfinite(a) and math.isfinite(b)):
        raise CalibrationError("calibration produced non-finite parameters")
    return Calibration(a, b, asv_set.with_scores(a * asv_set.scores + b))
