"""Command-line entry point.

    mdlinfer run --input data.csv --group-x case --group-y control
    mdlinfer generate --n-features 50 --seed 1 --out synthetic.csv

Settings may also come from a ``key = value`` file given by ``--config``
(keys are the long option names, with ``-`` or ``_``); command-line flags
win over the file. Exit codes: 0 success, 2 input error, 3 numerical
failure after a retry with a tighter tolerance.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import sys
from pathlib import Path
from typing import Sequence

from .data import IngestConfig, generate_synthetic, ingest_csv, preprocess, write_long_csv
from .errors import InputError, MdlError, NumericError
from .report import SCHEMES, RunConfig, emit, run, write_plotdata

log = logging.getLogger("mdlinfer")

RUN_DEFAULTS = {
    "input": None, "group_x": None, "group_y": None, "scheme": "all", "family": "folded_t",
    "preprocess": "on", "log_base": "2", "tol": "1e-6", "theta_max": None,
    "smoothing": "off", "seed": "0", "out_dir": "mdl_out", "format": "csv",
    "feature_column": "feature_id", "group_column": "group", "value_column": "value",
}


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a section-less ``key = value`` file."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        text = Path(path).read_text(encoding="utf-8")
        parser.read_string("[settings]\n" + text)
    except (OSError, configparser.Error) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    out = {}
    for key, value in parser["settings"].items():
        key = key.replace("-", "_")
        if key not in RUN_DEFAULTS:
            raise InputError(f"unknown config key {key!r} in {path}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mdlinfer", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress and timings")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="analyse a long-format CSV")
    r.add_argument("--config", help="key = value settings file")
    r.add_argument("--input", help="CSV with columns feature_id, group, value")
    r.add_argument("--group-x", help="case group label; a comma-separated list gives several contrasts")
    r.add_argument("--group-y", help="control group label")
    r.add_argument("--scheme", choices=SCHEMES)
    r.add_argument("--family", choices=("folded_t", "signed_t"))
    r.add_argument("--preprocess", choices=("on", "off"))
    r.add_argument("--log-base", choices=("2", "e"))
    r.add_argument("--tol", help="optimiser tolerance in theta")
    r.add_argument("--theta-max", help="upper end of the theta search")
    r.add_argument("--smoothing", choices=("off", "laplace"))
    r.add_argument("--seed", help="recorded for reproducibility; the analysis itself is deterministic")
    r.add_argument("--out-dir")
    r.add_argument("--format", choices=("csv", "json-lines", "plotdata"))
    for col in ("feature", "group", "value"):
        r.add_argument(f"--{col}-column", help=f"name of the {col} column")

    g = sub.add_parser("generate", help="write a synthetic two-group dataset")
    g.add_argument("--n-features", type=int, default=20)
    g.add_argument("--m", type=int, default=8, help="case group size")
    g.add_argument("--n", type=int, default=8, help="control group size")
    g.add_argument("--pi0", type=float, default=0.5)
    g.add_argument("--theta-alt", type=float, default=2.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output CSV path")
    return p


def _settings(args: argparse.Namespace) -> dict[str, str | None]:
    settings = dict(RUN_DEFAULTS)
    if args.config:
        settings.update(read_config_file(args.config))
    for key in RUN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _float(settings, key):
    value = settings[key]
    if value is None or value == "":
        return None
    try:
        return float(value)
    except ValueError:
        raise InputError(f"{key} must be a number, got {value!r}") from None


def _cmd_run(args: argparse.Namespace) -> int:
    s = _settings(args)
    for key in ("input", "group_x", "group_y"):
        if not s[key]:
            raise InputError(f"--{key.replace('_', '-')} is required")
    cases = [c.strip() for c in s["group_x"].split(",") if c.strip()]
    base = dict(scheme=s["scheme"], family=s["family"], log_base=s["log_base"],
                theta_max=_float(s, "theta_max"), smoothing=s["smoothing"])
    tol = _float(s, "tol")
    out_dir = Path(s["out_dir"])
    reports = []
    for case in cases:
        dataset = ingest_csv(s["input"], IngestConfig(
            case, s["group_y"], s["feature_column"], s["group_column"], s["value_column"]))
        if s["preprocess"] == "on":
            dataset = preprocess(dataset)
        try:
            report = run(dataset, RunConfig(tol=tol, **base))
        except NumericError as exc:
            log.warning("numerical failure (%s); retrying with tol=%g", exc, tol / 10)
            report = run(dataset, RunConfig(tol=tol / 10, **base))
        for name, secs in report.timings.items():
            log.info("%s: %s took %.3f s", case, name, secs)
        reports.append(report)
        if s["format"] != "plotdata":
            target = out_dir / case if len(cases) > 1 else out_dir
            for path in emit(report, s["format"], target):
                print(path)
    if s["format"] == "plotdata":
        manifest = write_plotdata(reports, out_dir, cases)
        for name in manifest["files"]:
            print(out_dir / name)
        print(out_dir / "manifest.json")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    try:
        dataset = generate_synthetic(args.n_features, args.m, args.n, args.pi0,
                                     args.theta_alt, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    write_long_csv(dataset, args.out)
    print(args.out)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _cmd_run(args) if args.command == "run" else _cmd_generate(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (MdlError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
