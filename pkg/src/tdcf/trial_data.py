"""Trial labels, score sets and the plain-text score file format.

A score file holds one trial per line::

    <trial_id> <score> <label>

Lines starting with ``#`` and blank lines are skipped.  ASV files accept the
labels ``target``, ``nontarget`` and ``spoof``; CM files additionally accept
``bonafide`` and ``human``, both stored as :attr:`TrialLabel.TARGET`.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "TrialLabel",
    "ScoreKind",
    "TrialRecord",
    "ScoreSet",
    "ScoreFileError",
    "parse_score_file",
    "read_score_lines",
    "write_score_file",
    "format_score_set",
    "subset_by_label",
]


class ScoreFileError(ValueError):
    """Raised for malformed score files or invalid score sets."""


class TrialLabel(enum.IntEnum):
    TARGET = 0
    NONTARGET = 1
    SPOOF = 2

    @property
    def token(self) -> str:
        return self.name.lower()


class ScoreKind(enum.Enum):
    ASV = "asv"
    CM = "cm"


_ASV_TOKENS = {
    "target": TrialLabel.TARGET,
    "nontarget": TrialLabel.NONTARGET,
    "spoof": TrialLabel.SPOOF,
}
_CM_TOKENS = dict(_ASV_TOKENS, bonafide=TrialLabel.TARGET, human=TrialLabel.TARGET)


@dataclass(frozen=True)
class TrialRecord:
    trial_id: str
    score: float
    label: TrialLabel

    def __post_init__(self):
        if not self.trial_id:
            raise ScoreFileError("trial_id must be non-empty")
        if not math.isfinite(self.score):
            raise ScoreFileError(f"trial {self.trial_id!r}: non-finite score {self.score!r}")


class ScoreSet:
    """Immutable collection of scored trials of one kind (ASV or CM).

    Scores and labels are held as read-only numpy arrays.  Trial ids may be
    omitted, in which case they are synthesized on demand as
    ``<label><index>`` with a per-label running index.
    """

    __slots__ = ("kind", "scores", "labels", "_ids")

    def __init__(
        self,
        scores,
        labels,
        kind: ScoreKind,
        trial_ids: Sequence[str] | None = None,
    ):
        scores = np.array(scores, dtype=np.float64).reshape(-1)
        labels = np.array(labels, dtype=np.int8).reshape(-1)
        if scores.shape != labels.shape:
            raise ScoreFileError("scores and labels differ in length")
        if scores.size == 0:
            raise ScoreFileError("empty score set")
        if not np.all(np.isfinite(scores)):
            bad = int(np.flatnonzero(~np.isfinite(scores))[0])
            raise ScoreFileError(f"non-finite score at record {bad}")
        if labels.min() < 0 or labels.max() > 2:
            raise ScoreFileError("label codes must be 0, 1 or 2")
        if trial_ids is not None:
            trial_ids = tuple(trial_ids)
            if len(trial_ids) != scores.size:
                raise ScoreFileError("trial_ids and scores differ in length")
            if any(not tid for tid in trial_ids):
                raise ScoreFileError("empty trial_id")
            if len(set(trial_ids)) != len(trial_ids):
                seen = set()
                dup = next(t for t in trial_ids if t in seen or seen.add(t))
                raise ScoreFileError(f"duplicate trial_id {dup!r}")
        kind = ScoreKind(kind)
        n_tar, n_non, n_spoof = np.bincount(labels, minlength=3).tolist()
        if kind is ScoreKind.ASV and (n_tar < 1 or n_non < 1):
            raise ScoreFileError(
                f"ASV scores need target and nontarget trials (got {n_tar}, {n_non})"
            )
        if kind is ScoreKind.CM and (n_tar + n_non < 1 or n_spoof < 1):
            raise ScoreFileError(
                f"CM scores need bona fide and spoof trials (got {n_tar + n_non}, {n_spoof})"
            )
        scores.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_ids", trial_ids)

    def __setattr__(self, name, value):
        raise AttributeError("ScoreSet is immutable")

    @classmethod
    def from_records(cls, records: Iterable[TrialRecord], kind: ScoreKind) -> "ScoreSet":
        records = list(records)
        return cls(
            [r.score for r in records],
            [int(r.label) for r in records],
            kind,
            trial_ids=[r.trial_id for r in records],
        )

    @property
    def trial_ids(self) -> tuple[str, ...]:
        if self._ids is not None:
            return self._ids
        counters = [0, 0, 0]
        ids = []
        for code in self.labels.tolist():
            ids.append(f"{TrialLabel(code).token}{counters[code]}")
            counters[code] += 1
        return tuple(ids)

    @property
    def records(self) -> list[TrialRecord]:
        return list(self)

    def __iter__(self) -> Iterator[TrialRecord]:
        for tid, score, code in zip(self.trial_ids, self.scores.tolist(), self.labels.tolist()):
            yield TrialRecord(tid, score, TrialLabel(code))

    def __len__(self) -> int:
        return int(self.scores.size)

    @property
    def counts(self) -> tuple[int, int, int]:
        """Trial counts ``(n_tar, n_non, n_spoof)``."""
        return tuple(np.bincount(self.labels, minlength=3).tolist())

    @property
    def n_human(self) -> int:
        n_tar, n_non, _ = self.counts
        return n_tar + n_non

    def select(self, *labels: TrialLabel) -> np.ndarray:
        """Scores of all records carrying any of ``labels``, in record order."""
        mask = np.isin(self.labels, [int(lab) for lab in labels])
        return self.scores[mask]

    def with_scores(self, scores) -> "ScoreSet":
        """Copy of this set with every score replaced, ids and labels kept."""
        return ScoreSet(scores, self.labels, self.kind, trial_ids=self._ids)

    def __eq__(self, other):
        if not isinstance(other, ScoreSet):
            return NotImplemented
        return (
            self.kind is other.kind
            and np.array_equal(self.labels, other.labels)
            and self.scores.tobytes() == other.scores.tobytes()
            and self.trial_ids == other.trial_ids
        )

    __hash__ = None

    def __repr__(self):
        n_tar, n_non, n_spoof = self.counts
        return (
            f"ScoreSet(kind={self.kind.value}, n_tar={n_tar}, "
            f"n_non={n_non}, n_spoof={n_spoof})"
        )


def subset_by_label(score_set: ScoreSet, label: TrialLabel) -> list[float]:
    return score_set.select(label).tolist()


def read_score_lines(lines: Iterable[str], kind: ScoreKind, source: str = "<input>") -> ScoreSet:
    kind = ScoreKind(kind)
    tokens = _CM_TOKENS if kind is ScoreKind.CM else _ASV_TOKENS
    ids, scores, labels = [], [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ScoreFileError(
                f"{source}:{lineno}: expected 3 fields, got {len(fields)}"
            )
        tid, score_text, label_text = fields
        try:
            score = float(score_text)
        except ValueError:
            raise ScoreFileError(f"{source}:{lineno}: unparsable score {score_text!r}") from None
        if not math.isfinite(score):
            raise ScoreFileError(f"{source}:{lineno}: non-finite score {score_text!r}")
        label = tokens.get(label_text.lower())
        if label is None:
            raise ScoreFileError(
                f"{source}:{lineno}: unknown label {label_text!r} for {kind.value} scores"
            )
        ids.append(tid)
        scores.append(score)
        labels.append(int(label))
    if not ids:
        raise ScoreFileError(f"{source}: no trials")
    try:
        return ScoreSet(scores, labels, kind, trial_ids=ids)
    except ScoreFileError as exc:
        raise ScoreFileError(f"{source}: {exc}") from None


def parse_score_file(path, kind: ScoreKind) -> ScoreSet:
    """Read and validate a score file.  Record order follows the file."""
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fh:
            return read_score_lines(fh, kind, source=path)
    except OSError as exc:
        raise ScoreFileError(f"{path}: {exc.strerror or exc}") from None


def format_score_set(score_set: ScoreSet) -> str:
    # repr() of a float is the shortest string that round-trips exactly
    lines = [
        f"{rec.trial_id} {rec.score!r} {rec.label.token}\n" for rec in score_set
    ]
    return "".join(lines)


def write_score_file(score_set: ScoreSet, path) -> None:
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(format_score_set(score_set))
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
