"""Run the coding schemes over a dataset and write the results.

A report holds one row per feature plus a set of global fields. Rows of
features whose statistic cannot be formed (e.g. zero variance) carry
``status = "error"`` and the message; the remaining features are analysed
without them. All codelengths are in bits unless ``log_base = "e"``.
Wall-clock timings are kept on the report object but never written, so
emitted files are byte-identical across runs.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .coding import approx_code, exact_code, prepare
from .data import Dataset
from .errors import InputError, MdlError
from .mixture import fit_mixture, lfdr
from .selection import Scheme, Smoothing, null_proportion, run_selection
from .statistics import family_by_name, reduce

SPEC_VERSION = "1.0"
SCHEMES = ("exact", "approx", "mixture", "all")
LN2 = math.log(2.0)

# Column name -> type, in emission order. Scheme-specific columns are only
# present when that scheme ran.
BASE_COLUMNS = {
    "feature_id": str, "status": str, "error": str, "m": int, "n": int, "df": int,
    "T": float, "scale": float, "theta_hat": float, "L0": float, "regret_null": float,
}
APPROX_COLUMNS = {
    "L_approx": float, "regret_approx": float, "delta_approx": float,
    "total_delta_approx": float, "posterior_null_approx": float, "selected_approx": str,
}
EXACT_COLUMNS = {
    "theta_exact": float, "L_exact": float, "regret_exact": float, "delta_exact": float,
    "p_null_exact": float, "total_delta_exact": float, "posterior_null_exact": float,
    "selected_exact": str, "flags_exact": str,
}
MIXTURE_COLUMNS = {"lfdr": float, "mixture_delta": float}
# Length-valued fields, rescaled when reporting in nats.
LENGTH_FIELDS = {
    "L0", "regret_null", "L_approx", "regret_approx", "delta_approx", "total_delta_approx",
    "L_exact", "regret_exact", "delta_exact", "total_delta_exact", "mixture_delta",
}
GLOBAL_TYPES = {
    "spec_version": str, "scheme": str, "family": str, "log_base": str, "tol": float,
    "theta_max": float, "smoothing": str, "group_x": str, "group_y": str,
    "preprocess_shift": float, "n_features": int, "n_errors": int,
    "theta_approx": float, "p_null_approx": float, "flags_approx": str,
    "theta_mixture": float, "pi0_mixture": float, "loglik_mixture": float,
    "flags_mixture": str,
}


@dataclass(frozen=True)
class RunConfig:
    scheme: str = "all"
    family: str = "folded_t"
    log_base: str = "2"
    tol: float = 1e-6
    theta_max: float | None = None
    smoothing: str = "off"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InputError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.log_base not in ("2", "e"):
            raise InputError(f"log base must be '2' or 'e', got {self.log_base!r}")
        try:
            family_by_name(self.family)
            Smoothing(self.smoothing)
        except (KeyError, ValueError) as exc:
            raise InputError(f"bad configuration value: {exc}") from None
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.theta_max is not None and not self.theta_max > 0:
            raise InputError("theta_max must be positive")

    def runs(self, name: str) -> bool:
        return self.scheme in (name, "all")


@dataclass
class AnalysisReport:
    globals: dict[str, Any]
    rows: list[dict[str, Any]]
    columns: tuple[str, ...]
    timings: dict[str, float] = field(default_factory=dict)

    def ok_rows(self) -> list[dict[str, Any]]:
        return [r for r in self.rows if r["status"] == "ok"]


def _flags(flags) -> str:
    return ";".join(sorted(flags))


def run(dataset: Dataset, config: RunConfig | None = None) -> AnalysisReport:
    """Analyse every feature of ``dataset`` with the configured scheme(s)."""
    config = config or RunConfig()
    family = family_by_name(config.family)
    timings: dict[str, float] = {}
    clock = time.perf_counter()

    rows: list[dict[str, Any]] = []
    stats, positions = [], []
    for f in dataset.features:
        row: dict[str, Any] = {"feature_id": f.feature_id, "status": "ok", "error": "",
                               "m": f.m, "n": f.n}
        try:
            stat = reduce(family, f)
        except MdlError as exc:
            row.update(status="error", error=f"{type(exc).__name__}: {exc}")
        else:
            row.update(df=stat.df, T=stat.value, scale=stat.scale)
            positions.append(len(rows))
            stats.append(stat)
        rows.append(row)
    if len(stats) < 2:
        raise InputError(f"need at least two analysable features, got {len(stats)}")

    inp = prepare(family, stats, theta_max=config.theta_max, tol=config.tol)
    timings["mle"] = time.perf_counter() - clock
    columns = dict(BASE_COLUMNS)
    glob: dict[str, Any] = {
        "spec_version": SPEC_VERSION, "scheme": config.scheme, "family": config.family,
        "log_base": config.log_base, "tol": config.tol, "theta_max": inp.theta_max,
        "smoothing": config.smoothing, "group_x": dataset.group_labels[0],
        "group_y": dataset.group_labels[1],
        "preprocess_shift": (dataset.preprocessing_log.shift
                             if dataset.preprocessing_log else None),
        "n_features": len(rows), "n_errors": len(rows) - len(stats),
    }

    # The approximate code is also the warm start of the exact one.
    clock = time.perf_counter()
    approx = approx_code(inp, tol=config.tol)
    timings["approx"] = time.perf_counter() - clock
    for pos, mle, code in zip(positions, inp.mles, approx.codes):
        rows[pos].update(theta_hat=mle, L0=code.L0, regret_null=code.regret_null)

    if config.runs("approx"):
        columns.update(APPROX_COLUMNS)
        sel = run_selection(approx.codes, Scheme.APPROX, config.smoothing)
        glob.update(theta_approx=approx.theta, flags_approx=_flags(approx.flags),
                    p_null_approx=null_proportion([c.delta for c in approx.codes],
                                                  smoothing=config.smoothing))
        for pos, code, s in zip(positions, approx.codes, sel):
            rows[pos].update(L_approx=code.L_alt, regret_approx=code.regret_alt,
                             delta_approx=code.delta, total_delta_approx=s.total_delta,
                             posterior_null_approx=s.posterior_null,
                             selected_approx=s.selected)

    if config.runs("exact"):
        clock = time.perf_counter()
        exact = exact_code(inp, tol=config.tol, warm_start=approx.theta)
        timings["exact"] = time.perf_counter() - clock
        columns.update(EXACT_COLUMNS)
        sel = run_selection(exact.codes, Scheme.EXACT, config.smoothing)
        for pos, th, code, fl, s in zip(positions, exact.thetas, exact.codes, exact.flags, sel):
            rows[pos].update(theta_exact=th, L_exact=code.L_alt, regret_exact=code.regret_alt,
                             delta_exact=code.delta, p_null_exact=s.p_null,
                             total_delta_exact=s.total_delta,
                             posterior_null_exact=s.posterior_null,
                             selected_exact=s.selected, flags_exact=_flags(fl))

    if config.runs("mixture"):
        clock = time.perf_counter()
        fit = fit_mixture(family, stats, theta_max=inp.theta_max, tol=config.tol)
        timings["mixture"] = time.perf_counter() - clock
        columns.update(MIXTURE_COLUMNS)
        glob.update(theta_mixture=fit.theta_alt, pi0_mixture=fit.pi0,
                    loglik_mixture=fit.loglik, flags_mixture=_flags(fit.flags))
        for pos, stat in zip(positions, stats):
            res = lfdr(family, fit, stat)
            rows[pos].update(lfdr=res.lfdr, mixture_delta=res.mixture_delta)

    if config.log_base == "e":
        for row in rows:
            for key in LENGTH_FIELDS.intersection(row):
                row[key] = row[key] * LN2
    # every row carries every column: "" for missing text, None for missing numbers
    for row in rows:
        for key, kind in columns.items():
            row.setdefault(key, "" if kind is str else None)
    return AnalysisReport(glob, rows, tuple(columns), timings)


# ---------------------------------------------------------------- emission

def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(text: str, kind: type) -> Any:
    if kind is str:
        return text
    if text == "":
        return None
    return kind(text)


def _column_types() -> dict[str, type]:
    return {**BASE_COLUMNS, **APPROX_COLUMNS, **EXACT_COLUMNS, **MIXTURE_COLUMNS}


def to_csv(report: AnalysisReport) -> str:
    """Global fields as ``# key=value`` preamble lines, then one row per feature."""
    buf = io.StringIO()
    for key, value in report.globals.items():
        buf.write(f"# {key}={_format(value)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for row in report.rows:
        w.writerow([_format(row.get(c)) for c in report.columns])
    return buf.getvalue()


def from_csv(text: str) -> AnalysisReport:
    """Inverse of ``to_csv``."""
    lines = text.splitlines(keepends=True)
    glob: dict[str, Any] = {}
    k = 0
    while k < len(lines) and lines[k].startswith("# "):
        key, _, value = lines[k][2:].rstrip("\n").partition("=")
        glob[key] = _parse(value, GLOBAL_TYPES.get(key, str))
        k += 1
    reader = csv.reader(lines[k:])
    columns = tuple(next(reader))
    types = _column_types()
    rows = []
    for record in reader:
        rows.append({c: _parse(v, types.get(c, str)) for c, v in zip(columns, record)})
    return AnalysisReport(glob, rows, columns)


def to_json_lines(report: AnalysisReport) -> str:
    """One JSON object per feature; each carries the version and global fields.

    Infinite and undefined values use the JavaScript spellings
    (``Infinity``, ``NaN``) accepted by Python's json module.
    """
    out = []
    for row in report.rows:
        record = {"spec_version": SPEC_VERSION, "globals": report.globals}
        record.update({c: row.get(c) for c in report.columns})
        out.append(json.dumps(record, sort_keys=False))
    return "\n".join(out) + "\n"


def from_json_lines(text: str) -> AnalysisReport:
    records = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not records:
        raise InputError("no rows in json-lines report")
    glob = records[0]["globals"]
    columns = tuple(k for k in records[0] if k not in ("spec_version", "globals"))
    rows = [{c: r[c] for c in columns} for r in records]
    return AnalysisReport(glob, rows, columns)


PLOT_FIGURES = {
    "fig1": "per-feature approximate information and regret, first contrast",
    "fig2": "per-feature approximate information and regret, second contrast",
    "fig3": "approximate versus exact information for discrimination",
    "fig4": "total information for discrimination including the parameter code",
}


def _xy(path: Path, header: tuple[str, str], pairs) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, y in pairs:
            w.writerow([_format(x), _format(y)])


def write_plotdata(reports: Sequence[AnalysisReport], out_dir: str | Path,
                   labels: Sequence[str] | None = None) -> dict[str, Any]:
    """Two-column (x, y) files for four standard plots, plus manifest.json.

    ``reports`` holds one report per contrast (case group versus the shared
    control group). fig1 (information and regret per feature) uses the first
    contrast and fig2 the second; fig3 (approximate versus exact
    information) and fig4 (total information including the parameter code)
    get one panel per contrast. Files that
    cannot be produced are listed in the manifest with the reason.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = list(labels or [r.globals.get("group_x", f"contrast{i + 1}")
                             for i, r in enumerate(reports)])
    manifest: dict[str, Any] = {"spec_version": SPEC_VERSION, "files": {}, "missing": {}}

    def indexed(report, column):
        return [(i + 1, r[column]) for i, r in enumerate(report.rows)
                if r["status"] == "ok" and r.get(column) is not None]

    for fig, k in (("fig1", 0), ("fig2", 1)):
        if k >= len(reports):
            manifest["missing"][f"{fig}_*.csv"] = (
                "only one contrast was analysed; pass two case-group labels to produce it")
            continue
        rep = reports[k]
        if "delta_approx" not in rep.columns:
            manifest["missing"][f"{fig}_*.csv"] = "the approximate scheme was not run"
            continue
        for part, column in (("delta", "delta_approx"), ("regret", "regret_approx")):
            name = f"{fig}_{part}.csv"
            _xy(out / name, ("feature_index", column), indexed(rep, column))
            manifest["files"][name] = {"figure": f"{PLOT_FIGURES[fig]} ({part} panel)",
                                       "contrast": labels[k],
                                       "x": "feature index (1-based, input order)", "y": column}
    for k, rep in enumerate(reports):
        name = f"fig3_panel{k + 1}.csv"
        if "delta_exact" not in rep.columns or "delta_approx" not in rep.columns:
            manifest["missing"][name] = (
                f"scheme={rep.globals['scheme']} lacks the exact or approximate code; "
                "the scatter needs both (run with scheme=all)")
        else:
            pairs = [(r["delta_exact"], r["delta_approx"]) for r in rep.ok_rows()]
            _xy(out / name, ("delta_exact", "delta_approx"), pairs)
            manifest["files"][name] = {"figure": f"{PLOT_FIGURES['fig3']} (panel {k + 1})", "contrast": labels[k],
                                       "x": "delta_exact", "y": "delta_approx"}
        name = f"fig4_panel{k + 1}.csv"
        if "total_delta_approx" not in rep.columns:
            manifest["missing"][name] = "the approximate scheme was not run"
        else:
            _xy(out / name, ("feature_index", "total_delta_approx"),
                indexed(rep, "total_delta_approx"))
            manifest["files"][name] = {"figure": f"{PLOT_FIGURES['fig4']} (panel {k + 1})", "contrast": labels[k],
                                       "x": "feature index (1-based, input order)",
                                       "y": "total_delta_approx"}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def emit(report: AnalysisReport, fmt: str, out_dir: str | Path, stem: str = "report") -> list[Path]:
    """Write ``report`` as csv, json-lines or plotdata under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = out / f"{stem}.csv"
        path.write_text(to_csv(report), encoding="utf-8")
        return [path]
    if fmt == "json-lines":
        path = out / f"{stem}.jsonl"
        path.write_text(to_json_lines(report), encoding="utf-8")
        return [path]
    if fmt == "plotdata":
        manifest = write_plotdata([report], out)
        return [out / "manifest.json"] + [out / name for name in manifest["files"]]
    raise InputError(f"unknown format {fmt!r}; expected csv, json-lines or plotdata")
