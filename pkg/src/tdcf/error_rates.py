"""Empirical miss / false-alarm rates and EER estimation.

A trial is accepted when its score is strictly greater than the threshold;
scores equal to the threshold are rejected.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .trial_data import ScoreKind, ScoreSet, TrialLabel

__all__ = [
    "ProfileRole",
    "EerMethod",
    "ErrorProfile",
    "EerEstimate",
    "count_at_or_below",
    "asv_rates_at",
    "asv_spoof_miss_at",
    "cm_rates_at",
    "build_profile",
    "estimate_eer",
    "rocch",
]

_HUMAN = (TrialLabel.TARGET, TrialLabel.NONTARGET)


class ProfileRole(enum.Enum):
    ASV_TARGET_NONTARGET = "asv"
    CM_HUMAN_SPOOF = "cm"


class EerMethod(enum.Enum):
    ROCCH = "rocch"
    LINEAR_MIDPOINT = "linear"


def count_at_or_below(sorted_scores: np.ndarray, thresholds) -> np.ndarray:
    """Number of scores ``<= t`` for every ``t`` in ``thresholds``."""
    return np.searchsorted(sorted_scores, thresholds, side="right")


def _miss_fa(positives: np.ndarray, negatives: np.ndarray, t: float) -> tuple[float, float]:
    n_pos, n_neg = positives.size, negatives.size
    miss = int(np.count_nonzero(positives <= t))
    fa = int(np.count_nonzero(negatives > t))
    return miss / n_pos, fa / n_neg


def asv_rates_at(asv: ScoreSet, t: float) -> tuple[float, float]:
    """ASV ``(p_miss, p_fa)`` at threshold ``t``."""
    if asv.kind is not ScoreKind.ASV:
        raise ValueError("asv_rates_at needs an ASV score set")
    return _miss_fa(asv.select(TrialLabel.TARGET), asv.select(TrialLabel.NONTARGET), t)


def asv_spoof_miss_at(asv: ScoreSet, t: float) -> float:
    """Fraction of spoof trials the ASV rejects at ``t``.

    One minus this value is the rate at which spoofs pass the ASV.
    """
    if asv.kind is not ScoreKind.ASV:
        raise ValueError("asv_spoof_miss_at needs an ASV score set")
    spoof = asv.select(TrialLabel.SPOOF)
    if spoof.size == 0:
        raise ValueError("ASV score set has no spoof trials; use worst-case spoof mode")
    return int(np.count_nonzero(spoof <= t)) / spoof.size


def cm_rates_at(cm: ScoreSet, s: float) -> tuple[float, float]:
    """CM ``(p_miss, p_fa)`` at threshold ``s``: bona fide rejected, spoof accepted."""
    if cm.kind is not ScoreKind.CM:
        raise ValueError("cm_rates_at needs a CM score set")
    return _miss_fa(cm.select(*_HUMAN), cm.select(TrialLabel.SPOOF), s)


@dataclass(frozen=True, eq=False)
class ErrorProfile:
    """Miss and false-alarm rates as step functions of the threshold.

    ``thresholds`` starts at ``-inf`` and ends at ``+inf``; the rates at
    ``thresholds[i]`` hold for every threshold in ``[thresholds[i], thresholds[i+1])``.
    """

    thresholds: np.ndarray
    p_miss: np.ndarray
    p_fa: np.ndarray
    positive_count: int
    negative_count: int

    @classmethod
    def from_scores(cls, positives, negatives) -> "ErrorProfile":
        pos = np.sort(np.asarray(positives, dtype=np.float64))
        neg = np.sort(np.asarray(negatives, dtype=np.float64))
        if pos.size == 0 or neg.size == 0:
            raise ValueError("both classes need at least one score")
        distinct = np.unique(np.concatenate([pos, neg]))
        thresholds = np.concatenate([[-np.inf], distinct, [np.inf]])
        miss = count_at_or_below(pos, thresholds)
        fa = neg.size - count_at_or_below(neg, thresholds)
        return cls(
            thresholds=thresholds,
            p_miss=miss / pos.size,
            p_fa=fa / neg.size,
            positive_count=int(pos.size),
            negative_count=int(neg.size),
        )

    def __len__(self):
        return int(self.thresholds.size)

    def rates_at(self, t: float) -> tuple[float, float]:
        """Step-function lookup of ``(p_miss, p_fa)`` at any threshold."""
        i = int(np.searchsorted(self.thresholds, t, side="right")) - 1
        i = max(i, 0)
        return float(self.p_miss[i]), float(self.p_fa[i])


def build_profile(score_set: ScoreSet, role: ProfileRole | None = None) -> ErrorProfile:
    if role is None:
        role = (
            ProfileRole.ASV_TARGET_NONTARGET
            if score_set.kind is ScoreKind.ASV
            else ProfileRole.CM_HUMAN_SPOOF
        )
    role = ProfileRole(role)
    if role is ProfileRole.ASV_TARGET_NONTARGET:
        pos = score_set.select(TrialLabel.TARGET)
        neg = score_set.select(TrialLabel.NONTARGET)
    else:
        pos = score_set.select(*_HUMAN)
        neg = score_set.select(TrialLabel.SPOOF)
    return ErrorProfile.from_scores(pos, neg)


@dataclass(frozen=True)
class EerEstimate:
    value: float
    method: EerMethod
    threshold_hint: float


def rocch(p_miss, p_fa) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the lower convex hull of the ``(p_fa, p_miss)`` points.

    Returned ordered by increasing ``p_fa``, from ``(0, 1)`` to ``(1, 0)``.
    """
    pts = set(zip(np.asarray(p_fa, float).tolist(), np.asarray(p_miss, float).tolist()))
    # (0, 1) and (1, 0) are always attainable operating points
    pts = sorted(pts | {(0.0, 1.0), (1.0, 0.0)})
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless the turn is strictly counter-clockwise
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    fa, miss = zip(*hull)
    return np.array(fa), np.array(miss)


def _cross_diagonal(x0, y0, x1, y1) -> float:
    """Where the segment (x0,y0)-(x1,y1) meets y == x; assumes it does."""
    d0, d1 = y0 - x0, y1 - x1
    if d0 == d1:
        return x0
    lam = d0 / (d0 - d1)
    return x0 + lam * (x1 - x0)


def estimate_eer(profile: ErrorProfile, method: EerMethod = EerMethod.ROCCH) -> EerEstimate:
    method = EerMethod(method)
    if method is EerMethod.ROCCH:
        fa, miss = rocch(profile.p_miss, profile.p_fa)
        d = miss - fa
        # d runs from +1 at (0, 1) down to -1 at (1, 0)
        k = int(np.flatnonzero(d <= 0)[0])
        if d[k] == 0:
            value = float(fa[k])
        else:
            value = _cross_diagonal(fa[k - 1], miss[k - 1], fa[k], miss[k])
        # nearest profile threshold to the crossing, for reference only
        gap = np.abs(profile.p_miss - value) + np.abs(profile.p_fa - value)
        hint = float(profile.thresholds[int(np.argmin(gap))])
    else:
        d = profile.p_miss - profile.p_fa
        k = int(np.flatnonzero(d >= 0)[0])
        if d[k] == 0:
            value = float(profile.p_miss[k])
        else:
            value = _cross_diagonal(
                profile.p_fa[k - 1], profile.p_miss[k - 1], profile.p_fa[k], profile.p_miss[k]
            )
        hint = float(profile.thresholds[k])
    return EerEstimate(value=float(min(max(value, 0.0), 1.0)), method=method, threshold_hint=hint)
