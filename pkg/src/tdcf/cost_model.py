"""Costs, priors and the classical detection cost functions."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "SIMPLEX_TOL",
    "CostModelError",
    "PriorTriple",
    "CostModel",
    "GenericCostSpec",
    "banking_priors",
    "generic_dcf",
    "nist_dcf",
    "effective_prior",
    "read_config",
    "cost_model_from_mapping",
    "load_cost_model",
]

SIMPLEX_TOL = 1e-12

TARGET_SHARE = 0.99
NONTARGET_SHARE = 0.01


class CostModelError(ValueError):
    """Invalid cost or prior parameter.  ``key`` names the offending setting."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def _check_probability(value: float, key: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise CostModelError(f"{key} must lie in [0, 1], got {value!r}", key)
    return value


def _check_cost(value: float, key: str) -> float:
    value = float(value)
    if not (math.isfinite(value) and value >= 0.0):
        raise CostModelError(f"{key} must be a finite nonnegative cost, got {value!r}", key)
    return value


@dataclass(frozen=True)
class PriorTriple:
    pi_tar: float
    pi_non: float
    pi_spoof: float

    def __post_init__(self):
        vals = [
            _check_probability(getattr(self, k), k) for k in ("pi_tar", "pi_non", "pi_spoof")
        ]
        total = math.fsum(vals)
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise CostModelError(f"priors sum to {total!r}, not 1", "pi_tar")
        if total != 1.0:
            # absorb rounding into the largest component
            i = int(np.argmax(vals))
            vals[i] = 1.0 - math.fsum(v for j, v in enumerate(vals) if j != i)
        for k, v in zip(("pi_tar", "pi_non", "pi_spoof"), vals):
            object.__setattr__(self, k, v)

    def as_tuple(self) -> tuple[float, float, float]:
        return self.pi_tar, self.pi_non, self.pi_spoof

    @property
    def bona_fide_target(self) -> float:
        """Target prior among bona fide trials, ``pi_tar / (pi_tar + pi_non)``."""
        return self.pi_tar / (self.pi_tar + self.pi_non)


def banking_priors(pi_spoof: float) -> PriorTriple:
    """Authentication-style priors: 99% of bona fide trials are targets."""
    pi_spoof = float(pi_spoof)
    if not (0.0 <= pi_spoof < 1.0):
        raise CostModelError(f"pi_spoof must lie in [0, 1), got {pi_spoof!r}", "pi_spoof")
    bona_fide = 1.0 - pi_spoof
    return PriorTriple(bona_fide * TARGET_SHARE, bona_fide * NONTARGET_SHARE, pi_spoof)


@dataclass(frozen=True)
class CostModel:
    c_miss_asv: float = 1.0
    c_fa_asv: float = 10.0
    c_miss_cm: float = 1.0
    c_fa_cm: float = 10.0
    priors: PriorTriple = field(default_factory=lambda: banking_priors(0.05))

    def __post_init__(self):
        costs = [
            _check_cost(getattr(self, k), k)
            for k in ("c_miss_asv", "c_fa_asv", "c_miss_cm", "c_fa_cm")
        ]
        if not any(c > 0 for c in costs):
            raise CostModelError("at least one cost must be positive", "c_miss_asv")
        for k, v in zip(("c_miss_asv", "c_fa_asv", "c_miss_cm", "c_fa_cm"), costs):
            object.__setattr__(self, k, v)

    @property
    def pi_tar(self) -> float:
        return self.priors.pi_tar

    @property
    def pi_non(self) -> float:
        return self.priors.pi_non

    @property
    def pi_spoof(self) -> float:
        return self.priors.pi_spoof

    def with_pi_spoof(self, pi_spoof: float) -> "CostModel":
        """Same costs, banking priors for ``pi_spoof``."""
        return CostModel(
            self.c_miss_asv, self.c_fa_asv, self.c_miss_cm, self.c_fa_cm, banking_priors(pi_spoof)
        )


@dataclass(frozen=True)
class GenericCostSpec:
    """Priors over M propositions with L x M cost and error matrices.

    ``cost[j][i]`` is the cost of action j when proposition i holds and
    ``err[j][i]`` the probability of that error.
    """

    priors: Sequence[float]
    cost: Sequence[Sequence[float]]
    err: Sequence[Sequence[float]]

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=np.float64)
        cost = np.asarray(self.cost, dtype=np.float64)
        err = np.asarray(self.err, dtype=np.float64)
        if priors.ndim != 1 or cost.ndim != 2 or err.ndim != 2:
            raise CostModelError("priors must be a vector, cost and err matrices")
        if cost.shape != err.shape or cost.shape[1] != priors.size:
            raise CostModelError(
                f"dimension mismatch: priors {priors.shape}, cost {cost.shape}, err {err.shape}"
            )
        if np.any(priors < 0) or abs(math.fsum(priors.tolist()) - 1.0) > SIMPLEX_TOL:
            raise CostModelError("priors must lie on the probability simplex")
        if np.any(cost < 0):
            raise CostModelError("costs must be nonnegative")
        if np.any((err < 0) | (err > 1)):
            raise CostModelError("error probabilities must lie in [0, 1]")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "err", err)


def generic_dcf(spec: GenericCostSpec) -> float:
    """Prior-weighted total cost summed over actions and propositions."""
    total = 0.0
    n_actions, n_props = spec.cost.shape
    for j in range(n_actions):
        for i in range(n_props):
            total += spec.priors[i] * spec.cost[j, i] * spec.err[j, i]
    return float(total)


def nist_dcf(c_miss: float, c_fa: float, pi_tar: float, p_miss: float, p_fa: float) -> float:
    _check_cost(c_miss, "c_miss")
    _check_cost(c_fa, "c_fa")
    _check_probability(pi_tar, "pi_tar")
    _check_probability(p_miss, "p_miss")
    _check_probability(p_fa, "p_fa")
    return c_miss * pi_tar * p_miss + c_fa * (1.0 - pi_tar) * p_fa


def effective_prior(c_miss: float, c_fa: float, pi_tar: float) -> float:
    """Single-parameter equivalent of ``(c_miss, c_fa, pi_tar)``.

    The DCF with unit costs at this prior is a positive multiple of the
    original DCF, so both rank thresholds and systems identically.
    """
    _check_cost(c_miss, "c_miss")
    _check_cost(c_fa, "c_fa")
    _check_probability(pi_tar, "pi_tar")
    weighted_miss = pi_tar * c_miss
    denom = weighted_miss + (1.0 - pi_tar) * c_fa
    if denom <= 0.0:
        raise CostModelError("c_miss * pi_tar + c_fa * (1 - pi_tar) must be positive")
    return weighted_miss / denom


# --- config files -----------------------------------------------------------

_COST_KEYS = ("c_miss_asv", "c_fa_asv", "c_miss_cm", "c_fa_cm")
_PRIOR_KEYS = ("pi_tar", "pi_non", "pi_spoof")
CONFIG_KEYS = _COST_KEYS + _PRIOR_KEYS


def read_config(path) -> dict[str, float]:
    """Parse a ``key = value`` (or ``key: value``) file into floats.

    ``#`` starts a comment.  Unknown keys are an error.
    """
    path = os.fspath(path)
    out: dict[str, float] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CostModelError(f"{path}: {exc.strerror or exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = (p.strip() for p in line.split(sep, 1))
                break
        else:
            parts = line.split()
            if len(parts) != 2:
                raise CostModelError(f"{path}:{lineno}: expected 'key = value'")
            key, value = parts
        if key not in CONFIG_KEYS:
            raise CostModelError(f"{path}:{lineno}: unknown key {key!r}", key)
        try:
            out[key] = float(value)
        except ValueError:
            raise CostModelError(f"{path}:{lineno}: {key} is not a number: {value!r}", key) from None
    return out


def cost_model_from_mapping(values: Mapping[str, float]) -> CostModel:
    """Build a CostModel from config values.

    Missing costs take the banking defaults (1, 10, 1, 10).  With only
    ``pi_spoof`` given the banking prior recipe applies; ``pi_tar`` and
    ``pi_non`` must then both be given or both be absent.
    """
    for key in _PRIOR_KEYS:
        if key in values:
            _check_probability(values[key], key)
    for key in _COST_KEYS:
        if key in values:
            _check_cost(values[key], key)
    explicit = [k for k in ("pi_tar", "pi_non") if k in values]
    if len(explicit) == 1:
        raise CostModelError(
            f"{explicit[0]} given without {'pi_non' if explicit[0] == 'pi_tar' else 'pi_tar'}",
            explicit[0],
        )
    if explicit:
        pi_spoof = values.get("pi_spoof", 1.0 - values["pi_tar"] - values["pi_non"])
        priors = PriorTriple(values["pi_tar"], values["pi_non"], max(pi_spoof, 0.0))
    else:
        priors = banking_priors(values.get("pi_spoof", 0.05))
    defaults = CostModel()
    return CostModel(
        values.get("c_miss_asv", defaults.c_miss_asv),
        values.get("c_fa_asv", defaults.c_fa_asv),
        values.get("c_miss_cm", defaults.c_miss_cm),
        values.get("c_fa_cm", defaults.c_fa_cm),
        priors,
    )


def load_cost_model(path=None, overrides: Mapping[str, float | None] | None = None) -> CostModel:
    values = read_config(path) if path is not None else {}
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return cost_model_from_mapping(values)
