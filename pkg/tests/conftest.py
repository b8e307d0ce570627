import sys
from pathlib import Path

import numpy as np
import pytest

from tdcf.trial_data import ScoreKind, ScoreSet, TrialLabel

sys.path.insert(0, str(Path(__file__).parent))

T, N, S = TrialLabel.TARGET, TrialLabel.NONTARGET, TrialLabel.SPOOF


def make_set(kind, tar=(), non=(), spoof=()):
    scores = list(tar) + list(non) + list(spoof)
    labels = [T] * len(tar) + [N] * len(non) + [S] * len(spoof)
    return ScoreSet(scores, labels, ScoreKind(kind))


def runs_to_scores(runs):
    """Scores from an ordered list of ``(label, count)`` runs, lowest first.

    Every run gets one shared integer score, increasing run by run.
    """
    out = {T: [], N: [], S: []}
    for level, (label, count) in enumerate(runs):
        out[label].extend([float(level)] * count)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(424242)


@pytest.fixture
def write_scores(tmp_path):
    def _write(name, lines):
        path = tmp_path / name
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path

    return _write


# Two CMs for the ranking fixture, as runs of (label, count) from low to high
# score.  CM "a" has the lower EER (0.10 against 0.13), but "b" reaches a low
# miss rate at a moderate false-alarm rate, which pays off once spoofs are
# common.
CM_A_RUNS = [(S, 70), (T, 10), (S, 20), (T, 90), (S, 10)]
CM_B_RUNS = [(S, 60), (T, 2), (S, 25), (T, 28), (S, 1), (T, 70), (S, 14)]

# ASV at t = 0: miss 0.05, false alarm 0.01, spoof miss 0.10
ASV_TAR = [-1.0] * 5 + [2.0] * 95
ASV_NON = [-2.0] * 99 + [1.0]
ASV_SPOOF = [-1.0] * 10 + [1.5] * 90


def cm_from_runs(runs):
    scores = runs_to_scores(runs)
    return make_set("cm", tar=scores[T], spoof=scores[S])


def rank_fixture_lines():
    """Score file lines for the ASV set and both CMs."""
    asv = [f"asv{i} {x!r} {lab}" for i, (x, lab) in enumerate(
        [(x, "target") for x in ASV_TAR] + [(x, "nontarget") for x in ASV_NON]
        + [(x, "spoof") for x in ASV_SPOOF])]
    cms = {}
    for name, runs in (("cm_a", CM_A_RUNS), ("cm_b", CM_B_RUNS)):
        scores = runs_to_scores(runs)
        lines = [f"h{i} {x!r} bonafide" for i, x in enumerate(scores[T])]
        lines += [f"s{i} {x!r} spoof" for i, x in enumerate(scores[S])]
        cms[name] = lines
    return asv, cms


@pytest.fixture
def rank_dir(tmp_path):
    asv, cms = rank_fixture_lines()
    (tmp_path / "asv.tsv").write_text("\n".join(asv) + "\n")
    cm_dir = tmp_path / "cms"
    cm_dir.mkdir()
    for name, lines in cms.items():
        (cm_dir / f"{name}.tsv").write_text("\n".join(lines) + "\n")
    return tmp_path
