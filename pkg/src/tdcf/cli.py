"""Command-line front end.

Subcommands: ``eer``, ``dcf``, ``tdcf``, ``rank``, ``det`` and ``simulate``.
All tables go to standard output as TSV with a ``#``-prefixed header row.
Exit status is 0 on success, 1 for usage errors and 2 for data errors.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cost_model import CostModel, CostModelError, load_cost_model, nist_dcf
from .engine import (
    AsvRates,
    CalibrationError,
    SpoofMode,
    TandemArchitecture,
    TandemOperatingPoint,
    asv_rates,
    calibrate_affine,
    default_spoof_mode,
    min_tdcf_over_cm,
    tdcf_at,
    tdcf_from_rates,
)
from .error_rates import EerMethod, ProfileRole, build_profile, estimate_eer
from .synthetic import GaussianScoreModel, analytic_cm_rates, analytic_rates, sample_scores
from .trial_data import ScoreFileError, ScoreKind, ScoreSet, format_score_set, parse_score_file

__all__ = ["main", "RankRow", "RankReport", "run_rank", "parse_prior_list"]

EXIT_USAGE = 1
EXIT_DATA = 2

SCORE_SUFFIXES = (".tsv", ".txt", ".scores")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(value: float, precision: int) -> str:
    if value == np.inf:
        return "+inf"
    if value == -np.inf:
        return "-inf"
    return f"{value:.{precision}f}"


def _emit(header: Sequence[str], rows, precision: int, out, comments=()):
    for line in comments:
        out.write(f"# {line}\n")
    out.write("#" + "\t".join(header) + "\n")
    for row in rows:
        out.write(
            "\t".join(v if isinstance(v, str) else _fmt(v, precision) for v in row) + "\n"
        )


def parse_prior_list(text: str, flag: str = "--pi-spoof") -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"{flag}: not a comma-separated list of numbers: {text!r}") from None
    if not values:
        raise UsageError(f"{flag}: empty list")
    return values


# --- rank report ----------------------------------------------------------


@dataclass(frozen=True)
class RankRow:
    system: str
    eer: float | None
    tdcf: dict[float, float]


@dataclass
class RankReport:
    pi_spoof: list[float]
    reference_rows: list[RankRow]
    rows: list[RankRow] = field(default_factory=list)

    def ranks(self, pi_spoof: float) -> list[str]:
        """System names ordered by min t-DCF at ``pi_spoof`` (ties by EER order)."""
        order = sorted(range(len(self.rows)), key=lambda i: (self.rows[i].tdcf[pi_spoof], i))
        return [self.rows[i].system for i in order]

    def write(self, out, precision: int = 6):
        header = ["system", "eer"] + [f"tdcf@{p:g}" for p in self.pi_spoof]
        rows = []
        for row in self.reference_rows + self.rows:
            eer = "-" if row.eer is None else row.eer
            rows.append([row.system, eer] + [row.tdcf[p] for p in self.pi_spoof])
        _emit(
            header,
            rows,
            precision,
            out,
            comments=["eer pooled over all spoof trials of each CM file (rocch)"],
        )


def _asv_operating_rates(
    asv_set: ScoreSet,
    model: CostModel,
    threshold: float | str,
    spoof_mode: SpoofMode,
) -> tuple[ScoreSet, float, AsvRates]:
    if threshold == "auto-calibrate":
        asv_set = calibrate_affine(asv_set, model).calibrated
        t = 0.0
    else:
        t = float(threshold)
    return asv_set, t, asv_rates(asv_set, t, spoof_mode)


def _cm_files(cm_dir) -> list[Path]:
    cm_dir = Path(cm_dir)
    if not cm_dir.is_dir():
        raise ScoreFileError(f"{cm_dir}: not a directory")
    files = sorted(
        p for p in cm_dir.iterdir() if p.is_file() and p.suffix in SCORE_SUFFIXES
    )
    if not files:
        raise ScoreFileError(f"{cm_dir}: no CM score files ({', '.join(SCORE_SUFFIXES)})")
    return files


def run_rank(
    asv_scores,
    cm_score_dir,
    config=None,
    pi_spoof_list: Sequence[float] = (0.001, 0.01, 0.05),
    asv_threshold: float | str = 0.0,
    arch: TandemArchitecture = TandemArchitecture.CM_THEN_ASV,
    spoof_mode: SpoofMode | None = None,
    jobs: int = 1,
    cost_overrides=None,
) -> RankReport:
    """EER and min t-DCF of every CM score file in ``cm_score_dir``.

    Rows are sorted by EER, ties by system name.  The reference rows give
    the unprotected ASV (CM accepting everything) and a perfect CM.
    """
    base = load_cost_model(config, cost_overrides)
    models = {p: base.with_pi_spoof(p) for p in pi_spoof_list}
    asv_raw = parse_score_file(asv_scores, ScoreKind.ASV)
    if spoof_mode is None:
        spoof_mode = default_spoof_mode(asv_raw)
    files = _cm_files(cm_score_dir)
    cm_sets = [parse_score_file(p, ScoreKind.CM) for p in files]

    operating = {
        p: _asv_operating_rates(asv_raw, models[p], asv_threshold, spoof_mode)
        for p in pi_spoof_list
    }
    no_cm = RankRow(
        "no CM",
        None,
        {p: tdcf_from_rates(operating[p][2], 0.0, 1.0, models[p], arch).total for p in pi_spoof_list},
    )
    perfect = RankRow(
        "perfect CM",
        0.0,
        {p: tdcf_from_rates(operating[p][2], 0.0, 0.0, models[p], arch).total for p in pi_spoof_list},
    )

    def evaluate(item):
        path, cm_set = item
        eer = estimate_eer(build_profile(cm_set, ProfileRole.CM_HUMAN_SPOOF)).value
        values = {}
        for p in pi_spoof_list:
            asv_set, t, _ = operating[p]
            values[p] = min_tdcf_over_cm(asv_set, cm_set, models[p], t, arch, spoof_mode)[0]
        return RankRow(path.stem, eer, values)

    items = list(zip(files, cm_sets))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(evaluate, items))
    else:
        rows = [evaluate(item) for item in items]
    rows.sort(key=lambda r: (r.eer, r.system))
    return RankReport(list(pi_spoof_list), [no_cm, perfect], rows)


# --- subcommands ------------------------------------------------------------


def cmd_eer(args, out):
    kind = ScoreKind(args.kind)
    profile = build_profile(parse_score_file(args.scores, kind))
    est = estimate_eer(profile, EerMethod(args.method))
    _emit(["metric", "value"], [["eer", est.value], ["threshold", est.threshold_hint]], args.precision, out)


def cmd_det(args, out):
    profile = build_profile(parse_score_file(args.scores, ScoreKind(args.kind)))
    rows = zip(profile.thresholds.tolist(), profile.p_miss.tolist(), profile.p_fa.tolist())
    _emit(["threshold", "p_miss", "p_fa"], rows, args.precision, out)


def cmd_dcf(args, out):
    model = load_cost_model(args.config, _overrides(args))
    pi_tar = model.priors.bona_fide_target
    asv_set = parse_score_file(args.scores, ScoreKind.ASV)
    profile = build_profile(asv_set, ProfileRole.ASV_TARGET_NONTARGET)
    p_miss, p_fa = profile.rates_at(args.threshold)
    value = nist_dcf(model.c_miss_asv, model.c_fa_asv, pi_tar, p_miss, p_fa)
    curve = [
        nist_dcf(model.c_miss_asv, model.c_fa_asv, pi_tar, m, f)
        for m, f in zip(profile.p_miss.tolist(), profile.p_fa.tolist())
    ]
    k = int(np.argmin(curve))
    _emit(
        ["c_miss", "c_fa", "pi_tar", "threshold", "p_miss", "p_fa", "dcf", "min_dcf", "min_threshold"],
        [[model.c_miss_asv, model.c_fa_asv, pi_tar, args.threshold, p_miss, p_fa, value,
          curve[k], float(profile.thresholds[k])]],
        args.precision,
        out,
    )


def _asv_threshold(text: str) -> float | str:
    if text == "auto-calibrate":
        return text
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"--asv-threshold: expected a number or 'auto-calibrate', got {text!r}") from None


def cmd_tdcf(args, out):
    base = load_cost_model(args.config, _overrides(args))
    priors = parse_prior_list(args.pi_spoof) if args.pi_spoof else [base.pi_spoof]
    arch = TandemArchitecture(args.arch)
    threshold = _asv_threshold(args.asv_threshold)
    asv_raw = parse_score_file(args.asv_scores, ScoreKind.ASV)
    cm_set = parse_score_file(args.cm_scores, ScoreKind.CM)
    spoof_mode = SpoofMode(args.spoof_mode) if args.spoof_mode else default_spoof_mode(asv_raw)

    def evaluate(p):
        model = base.with_pi_spoof(p) if args.pi_spoof else base
        asv_set, t, _ = _asv_operating_rates(asv_raw, model, threshold, spoof_mode)
        if args.min:
            _, s = min_tdcf_over_cm(asv_set, cm_set, model, t, arch, spoof_mode)
        else:
            s = args.cm_threshold
        bd = tdcf_at(asv_set, cm_set, model, TandemOperatingPoint(s, t, spoof_mode), arch)
        row = [p, arch.value, t, s, bd.total]
        if args.breakdown:
            row += list(bd.terms)
        return row

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(evaluate, priors))
    else:
        rows = [evaluate(p) for p in priors]
    header = ["pi_spoof", "arch", "t", "s_star" if args.min else "s", "tdcf"]
    if args.breakdown:
        header += ["term_a", "term_b", "term_c", "term_d"]
    _emit(header, rows, args.precision, out)


def cmd_rank(args, out):
    priors = parse_prior_list(args.pi_spoof)
    report = run_rank(
        args.asv_scores,
        args.cm_dir,
        args.config,
        priors,
        asv_threshold=_asv_threshold(args.asv_threshold),
        arch=TandemArchitecture(args.arch),
        spoof_mode=SpoofMode(args.spoof_mode) if args.spoof_mode else None,
        jobs=args.jobs,
        cost_overrides=_overrides(args),
    )
    report.write(out, args.precision)


def cmd_simulate(args, out):
    model = GaussianScoreModel(
        mu_tar=args.mu_tar,
        mu_non=args.mu_non,
        mu_spoof=args.mu_spoof,
        sigma_tar=args.sigma_tar,
        sigma_non=args.sigma_non,
        sigma_spoof=args.sigma_spoof,
        n_tar=args.n_tar,
        n_non=args.n_non,
        n_spoof=args.n_spoof,
        seed=args.seed,
    )
    kind = ScoreKind(args.kind)
    thresholds = parse_prior_list(args.thresholds, "--thresholds")
    score_set = sample_scores(model, kind)
    report_path = f"{args.out}.oracle"
    report = io.StringIO()
    if kind is ScoreKind.ASV:
        rows = [[t, *analytic_rates(model, t)] for t in thresholds]
        header = ["threshold", "p_miss", "p_fa", "p_miss_spoof"]
    else:
        rows = [[t, *analytic_cm_rates(model, t)] for t in thresholds]
        header = ["threshold", "p_miss", "p_fa"]
    _emit(header, rows, args.precision, report, comments=[f"analytic Gaussian rates, kind={kind.value}"])

    _atomic_write(args.out, format_score_set(score_set))
    try:
        _atomic_write(report_path, report.getvalue())
    except BaseException:
        os.remove(args.out)
        raise
    n_tar, n_non, n_spoof = score_set.counts
    _emit(
        ["path", "kind", "n_tar", "n_non", "n_spoof"],
        [[str(args.out), kind.value, str(n_tar), str(n_non), str(n_spoof)]],
        args.precision,
        out,
    )


def _atomic_write(path, text: str):
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _overrides(args) -> dict:
    return {
        "c_miss_asv": args.c_miss_asv,
        "c_fa_asv": args.c_fa_asv,
        "c_miss_cm": args.c_miss_cm,
        "c_fa_cm": args.c_fa_cm,
        "pi_tar": args.pi_tar,
        "pi_non": args.pi_non,
    }


# --- parser -------------------------------------------------------------------


def _precision(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= 17:
        raise argparse.ArgumentTypeError("must be between 0 and 17")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="cost model file (key = value lines)")
    common.add_argument("--precision", type=_precision, default=6, help="decimal places (default 6)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads where supported")

    costs = _Parser(add_help=False)
    for key in ("c_miss_asv", "c_fa_asv", "c_miss_cm", "c_fa_cm", "pi_tar", "pi_non"):
        costs.add_argument("--" + key.replace("_", "-"), dest=key, type=float, help=f"override {key}")

    parser = _Parser(prog="tdcf", description="Tandem detection cost evaluation of CM and ASV scores.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eer", parents=[common], help="equal error rate of one score file")
    p.add_argument("--scores", required=True)
    p.add_argument("--kind", choices=["asv", "cm"], default="cm")
    p.add_argument("--method", choices=["rocch", "linear"], default="rocch")
    p.set_defaults(func=cmd_eer)

    p = sub.add_parser("det", parents=[common], help="miss / false-alarm profile as TSV")
    p.add_argument("--scores", required=True)
    p.add_argument("--kind", choices=["asv", "cm"], default="asv")
    p.set_defaults(func=cmd_det)

    p = sub.add_parser("dcf", parents=[common, costs], help="NIST DCF of an ASV score file")
    p.add_argument("--scores", required=True)
    p.add_argument("--threshold", type=float, default=0.0)
    p.set_defaults(func=cmd_dcf)

    def tandem_flags(p):
        p.add_argument("--asv-scores", required=True)
        p.add_argument("--arch", choices=[a.value for a in TandemArchitecture], default="cm-asv")
        p.add_argument("--spoof-mode", choices=[m.value for m in SpoofMode])
        p.add_argument("--asv-threshold", default="0", help="number or 'auto-calibrate'")

    p = sub.add_parser("tdcf", parents=[common, costs], help="t-DCF of one CM with one ASV")
    tandem_flags(p)
    p.add_argument("--cm-scores", required=True)
    p.add_argument("--pi-spoof", help="comma-separated spoof priors (banking recipe)")
    p.add_argument("--cm-threshold", type=float, default=0.0, help="CM threshold without --min")
    p.add_argument("--min", action="store_true", help="minimize over the CM threshold")
    p.add_argument("--breakdown", action="store_true", help="emit the four cost terms")
    p.set_defaults(func=cmd_tdcf)

    p = sub.add_parser("rank", parents=[common, costs], help="rank CM systems by EER and min t-DCF")
    tandem_flags(p)
    p.add_argument("--cm-dir", required=True, help="directory with one score file per CM")
    p.add_argument("--pi-spoof", default="0.001,0.01,0.05")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("simulate", parents=[common], help="sample a Gaussian score file")
    for name, default in (("mu-tar", 1.0), ("mu-non", -1.0), ("mu-spoof", 1.0)):
        p.add_argument("--" + name, type=float, default=default)
    for name in ("sigma-tar", "sigma-non", "sigma-spoof"):
        p.add_argument("--" + name, type=float, default=1.0)
    for name in ("n-tar", "n-non", "n-spoof"):
        p.add_argument("--" + name, type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=["asv", "cm"], default="asv")
    p.add_argument("--out", required=True)
    p.add_argument("--thresholds", default="0", help="thresholds for the oracle report")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        buffer = io.StringIO()
        args.func(args, buffer)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except CostModelError as exc:
        where = f" [{exc.key}]" if exc.key else ""
        err.write(f"error{where}: {exc}\n")
        return EXIT_DATA
    except (ScoreFileError, CalibrationError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_DATA
    try:
        out.write(buffer.getvalue())
        out.flush()
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
    return 0


if __name__ == "__main__":
    sys.exit(main())
