"""Gaussian score generators with closed-form error rates.

Each trial class draws from its own random stream, derived from the model
seed with :class:`numpy.random.SeedSequence` spawn keys (0 = target,
1 = nontarget, 2 = spoof), so changing one class count never perturbs the
draws of another class.  Uniforms on the open unit interval come from 53-bit
integers of a PCG64 generator and are mapped to normals by the inverse CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .cost_model import CostModel
from .engine import AsvRates, TandemArchitecture, tdcf_from_rates, tandem_error_terms
from .trial_data import ScoreKind, ScoreSet, TrialLabel

__all__ = [
    "GaussianScoreModel",
    "class_stream",
    "sample_scores",
    "analytic_rates",
    "analytic_cm_rates",
    "analytic_tdcf",
    "tdcf_standard_error",
]

_MANTISSA = 2.0**53


@dataclass(frozen=True)
class GaussianScoreModel:
    mu_tar: float = 1.0
    mu_non: float = -1.0
    mu_spoof: float = 1.0
    sigma_tar: float = 1.0
    sigma_non: float = 1.0
    sigma_spoof: float = 1.0
    n_tar: int = 1000
    n_non: int = 1000
    n_spoof: int = 1000
    seed: int = 0

    def __post_init__(self):
        for name in ("sigma_tar", "sigma_non", "sigma_spoof"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        for name in ("mu_tar", "mu_non", "mu_spoof"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("n_tar", "n_non", "n_spoof"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def params(self, label: TrialLabel) -> tuple[float, float, int]:
        """``(mu, sigma, n)`` of one trial class."""
        name = TrialLabel(label).token
        if name == "nontarget":
            name = "non"
        elif name == "target":
            name = "tar"
        return getattr(self, f"mu_{name}"), getattr(self, f"sigma_{name}"), int(getattr(self, f"n_{name}"))


def class_stream(seed: int, label: TrialLabel) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(label),))
    return np.random.Generator(np.random.PCG64(ss))


def _normals(rng: np.random.Generator, n: int) -> np.ndarray:
    k = rng.integers(0, 2**53, size=n, dtype=np.uint64)
    u = (k.astype(np.float64) + 0.5) / _MANTISSA
    return special.ndtri(u)


def sample_scores(model: GaussianScoreModel, kind: ScoreKind) -> ScoreSet:
    scores, labels = [], []
    for label in TrialLabel:
        mu, sigma, n = model.params(label)
        z = _normals(class_stream(model.seed, label), n)
        scores.append(mu + sigma * z)
        labels.append(np.full(n, int(label), dtype=np.int8))
    return ScoreSet(np.concatenate(scores), np.concatenate(labels), ScoreKind(kind))


def _phi(x: float) -> float:
    return float(special.ndtr(x))


def analytic_rates(model: GaussianScoreModel, t: float) -> tuple[float, float, float]:
    """Population ``(p_miss, p_fa, p_miss_spoof)`` at threshold ``t``."""
    p_miss = _phi((t - model.mu_tar) / model.sigma_tar)
    p_fa = 1.0 - _phi((t - model.mu_non) / model.sigma_non)
    p_miss_spoof = _phi((t - model.mu_spoof) / model.sigma_spoof)
    return p_miss, p_fa, p_miss_spoof


def analytic_cm_rates(model: GaussianScoreModel, s: float) -> tuple[float, float]:
    """Population CM ``(p_miss, p_fa)`` for bona fide versus spoof.

    Bona fide scores are the count-weighted mixture of the target and
    nontarget components, matching what pooled counting estimates.
    """
    miss_tar = _phi((s - model.mu_tar) / model.sigma_tar)
    miss_non = _phi((s - model.mu_non) / model.sigma_non)
    n_hum = model.n_tar + model.n_non
    p_miss = (model.n_tar * miss_tar + model.n_non * miss_non) / n_hum
    p_fa = 1.0 - _phi((s - model.mu_spoof) / model.sigma_spoof)
    return p_miss, p_fa


def analytic_tdcf(
    model: GaussianScoreModel,
    cm_model: GaussianScoreModel,
    costmodel: CostModel,
    s: float,
    t: float,
    arch: TandemArchitecture = TandemArchitecture.CM_THEN_ASV,
) -> float:
    """t-DCF with population Gaussian rates: ``model`` for ASV, ``cm_model`` for CM."""
    asv = AsvRates(*analytic_rates(model, t))
    p_miss_cm, p_fa_cm = analytic_cm_rates(cm_model, s)
    return tdcf_from_rates(asv, p_miss_cm, p_fa_cm, costmodel, arch).total


def tdcf_standard_error(
    model: GaussianScoreModel,
    cm_model: GaussianScoreModel,
    costmodel: CostModel,
    s: float,
    t: float,
) -> float:
    """Delta-method standard error of the counted t-DCF at ``(s, t)``.

    The five counted rates come from disjoint trial sets and are treated
    as independent binomial proportions.
    """
    asv = AsvRates(*analytic_rates(model, t))
    p_miss_cm, p_fa_cm = analytic_cm_rates(cm_model, s)
    rates = np.array([asv.p_miss, asv.p_fa, asv.p_miss_spoof, p_miss_cm, p_fa_cm])
    counts = np.array(
        [model.n_tar, model.n_non, model.n_spoof, cm_model.n_tar + cm_model.n_non, cm_model.n_spoof],
        dtype=np.float64,
    )

    def total(r):
        terms = tandem_error_terms(AsvRates(r[0], r[1], r[2]), r[3], r[4])
        weights = (
            costmodel.c_miss_asv * costmodel.pi_tar,
            costmodel.c_fa_asv * costmodel.pi_non,
            costmodel.c_fa_cm * costmodel.pi_spoof,
            costmodel.c_miss_cm * costmodel.pi_tar,
        )
        return sum(w * p for w, p in zip(weights, terms))

    # the cost is multilinear in the rates, so a unit step gives the exact partial
    base = total(rates)
    grad = np.empty(5)
    for k in range(5):
        bumped = rates.copy()
        bumped[k] += 1.0
        grad[k] = total(bumped) - base
    variance = np.sum(grad**2 * rates * (1.0 - rates) / counts)
    return float(math.sqrt(variance))
