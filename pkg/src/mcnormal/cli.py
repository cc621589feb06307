"""Command-line interface.

Subcommands: fit, lrtests, curves, analyze, sample, ingest-check.
Exit codes: 0 success, 1 usage error, 2 ingestion error, 3 numeric
non-convergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import core, order_stats, series, shape
from .core import McNParams, ModelKind
from .data import Dataset, ingest
from .errors import DomainError, IngestionError, McNError, NumericError
from .inference import (FitOptions, FitResult, descriptive_stats, fit, fit_models,
                        standard_lr_tests)
from .special_fn import SeriesConfig

__all__ = ["RunConfig", "load_config", "main", "build_parser"]

CONFIG_ENV = "MCNORMAL_CONFIG"
EXIT_OK, EXIT_USAGE, EXIT_INGEST, EXIT_NUMERIC = 0, 1, 2, 3

ALL_MODELS = (ModelKind.MCN, ModelKind.BN, ModelKind.KWN, ModelKind.EN,
              ModelKind.NORMAL, ModelKind.SKEW_NORMAL)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs besides its inputs."""

    series: SeriesConfig = field(default_factory=SeriesConfig)
    fit: FitOptions = field(default_factory=FitOptions)
    seed: int = 20100101
    format: str = "tsv"

    def __post_init__(self):
        if self.format not in ("json", "tsv"):
            raise DomainError("format must be 'json' or 'tsv'")


_SERIES_KEYS = {f.name for f in dataclasses.fields(SeriesConfig)}
_FIT_KEYS = {f.name for f in dataclasses.fields(FitOptions)} - {"extra_starts"}


def _coerce(text: str):
    low = text.strip().lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text.strip()


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from a key=value file (``#`` starts a comment) plus overrides.

    With no path, the file named by the MCNORMAL_CONFIG environment variable
    is used if set.  Override values win over file values.
    """
    path = path or os.environ.get(CONFIG_ENV)
    values: dict = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                for no, line in enumerate(fh, 1):
                    line = line.split("#", 1)[0].strip()
                    if not line:
                        continue
                    if "=" not in line:
                        raise DomainError(f"{path}:{no}: expected key=value")
                    k, v = line.split("=", 1)
                    values[k.strip()] = _coerce(v)
        except OSError as exc:
            raise DomainError(f"cannot read config {path}: {exc}") from exc
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = set(values) - _SERIES_KEYS - _FIT_KEYS - {"seed", "format"}
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    s_cfg = SeriesConfig(**{k: v for k, v in values.items() if k in _SERIES_KEYS})
    f_cfg = FitOptions(**{k: v for k, v in values.items() if k in _FIT_KEYS})
    return RunConfig(s_cfg, f_cfg, int(values.get("seed", RunConfig.seed)),
                     str(values.get("format", "tsv")))


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------


def _plain(obj):
    """Convert to JSON-safe builtins (non-finite floats become strings)."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def render(report: dict, fmt: str) -> str:
    """JSON, or TSV built from the report's ``rows`` (list of dicts) or flat items."""
    if fmt == "json":
        return json.dumps(_plain(report), indent=2, sort_keys=True) + "\n"
    lines = []
    for note in report.get("notes", []):
        lines.append(f"# {note}")
    rows = report.get("rows")
    if rows:
        cols = list(rows[0].keys())
        lines.append("\t".join(cols))
        for r in rows:
            lines.append("\t".join(_cell(r.get(c)) for c in cols))
    for k, v in _flatten({k: v for k, v in report.items() if k not in ("rows", "notes", "fits")}):
        lines.append(f"{k}\t{_cell(v)}")
    return "\n".join(lines) + "\n"


def _flatten(obj, prefix=""):
    """(dotted key, leaf) pairs of nested dicts and lists of dicts."""
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)) and obj and all(isinstance(v, dict) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}")
    else:
        yield prefix, obj


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    if isinstance(v, (list, tuple)):
        return ",".join(_cell(x) for x in v)
    return str(v)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _fit_row(r: FitResult) -> dict:
    row = {"model": r.model.value, "loglik": r.loglik, "AIC": r.aic, "CAIC": r.caic, "BIC": r.bic,
           "converged": r.converged}
    for name in ("a", "b", "c", "lam", "mu", "sigma"):
        if name in r.estimates:
            se = r.std_errors.get(name)
            row[name] = f"{r.estimates[name]:.6g}" + (f" ({se:.4g})" if se is not None else "")
        else:
            row[name] = "-"
    return row


def cmd_fit(dataset: Dataset, models, config: RunConfig) -> tuple[dict, int]:
    fits = fit_models(models, dataset, config.fit)
    rows, failed, notes = [], [], []
    for m, r in fits.items():
        if isinstance(r, FitResult):
            rows.append(r)
            if not r.converged:
                failed.append(m.value)
        else:
            failed.append(m.value)
            notes.append(f"{m.value}: {r}")
    rows.sort(key=lambda r: r.aic)
    sn, nm = fits.get(ModelKind.SKEW_NORMAL), fits.get(ModelKind.NORMAL)
    if isinstance(sn, FitResult) and isinstance(nm, FitResult):
        gain = sn.loglik - nm.loglik
        if abs(sn.estimates["lam"]) > 1e-3 and gain > 1e-6:
            # a skew-normal fit stalled at lam = 0 would tie the normal loglik
            notes.append(f"SkewNormal: lam = {sn.estimates['lam']:.4g} away from the lam = 0 "
                         f"stationary point; loglik gain over Normal {gain:.4g}")
    if failed:
        notes.append("not converged: " + ", ".join(failed))
    report = {"dataset": dataset.name, "n": dataset.n, "notes": notes,
              "rows": [_fit_row(r) for r in rows],
              "fits": [r.to_record() for r in rows]}
    return report, (EXIT_NUMERIC if failed else EXIT_OK)


def cmd_lrtests(dataset: Dataset, config: RunConfig) -> tuple[dict, int]:
    models = [ModelKind.MCN, ModelKind.BN, ModelKind.KWN, ModelKind.MCN_A_EQ_C,
              ModelKind.EN, ModelKind.NORMAL]
    fits = fit_models(models, dataset, config.fit)
    bad = [m.value for m, r in fits.items() if not isinstance(r, FitResult)]
    if ModelKind.MCN.value in bad:
        return {"dataset": dataset.name, "notes": ["McN fit failed"], "rows": []}, EXIT_NUMERIC
    hyp = {ModelKind.BN: "c=1", ModelKind.KWN: "a=1", ModelKind.MCN_A_EQ_C: "a=c",
           ModelKind.EN: "b=c=1", ModelKind.NORMAL: "a=b=c=1"}
    rows = []
    for t in standard_lr_tests(fits):
        rows.append({"comparison": f"McN vs {t.null_model.value}", "H0": hyp[t.null_model],
                     "w": t.w, "df": t.df, "p_value": t.p_value})
    notes = [f"{m}: fit failed" for m in bad]
    notconv = [m.value for m, r in fits.items() if isinstance(r, FitResult) and not r.converged]
    if notconv:
        notes.append("not converged: " + ", ".join(notconv))
    return ({"dataset": dataset.name, "n": dataset.n, "notes": notes, "rows": rows},
            EXIT_NUMERIC if (bad or notconv) else EXIT_OK)


_CURVES = {
    "pdf": core.pdf,
    "cdf": core.cdf,
    "survival": core.survival,
    "hazard": core.hazard,
}


def curve_rows(params: McNParams, which: str, lo: float, hi: float, points: int) -> list[tuple]:
    if which not in _CURVES:
        raise DomainError(f"unknown curve {which!r}")
    if points < 2 or not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError("need points >= 2 and a finite range lo < hi")
    x = np.linspace(lo, hi, points)
    y = np.asarray(_CURVES[which](params, x), dtype=float)
    return list(zip(x.tolist(), y.tolist()))


def empirical_survival_rows(values) -> list[tuple]:
    """Right-continuous empirical survival: 1 - i/n at the i-th order statistic."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    return [(float(v), 1.0 - (i + 1) / n) for i, v in enumerate(x)]


def _write_tsv(path: str | None, header: tuple, rows) -> str:
    text = "\t".join(header) + "\n" + "".join("\t".join(f"{v:.12g}" for v in r) + "\n" for r in rows)
    _emit(text, path)
    return text


def cmd_curves(args, config: RunConfig) -> int:
    which = args.which
    if args.data:
        ds = ingest(args.data, args.column, args.delimiter)
        if not args.out:
            raise DomainError("--out DIR is required for fitted overlays")
        os.makedirs(args.out, exist_ok=True)
        models = _parse_models(args.models) if args.models else [m for m in ALL_MODELS
                                                                  if m is not ModelKind.SKEW_NORMAL]
        lo, hi = (args.range if args.range else (float(ds.values.min()), float(ds.values.max())))
        fits = fit_models(models, ds, config.fit)
        code = EXIT_OK
        for m, r in fits.items():
            if not isinstance(r, FitResult) or r.theta_hat is None:
                code = EXIT_NUMERIC
                continue
            code = code if r.converged else EXIT_NUMERIC
            _write_tsv(os.path.join(args.out, f"{which}_{_slug(m.value)}.tsv"), ("x", which),
                       curve_rows(r.theta_hat, which, lo, hi, args.points))
        if which == "survival":
            _write_tsv(os.path.join(args.out, "survival_empirical.tsv"), ("x", "survival"),
                       empirical_survival_rows(ds.values))
        return code
    if not args.params:
        raise DomainError("give --params or a data file")
    p = _parse_params(args.params)
    lo, hi = args.range if args.range else (p.mu - 4 * p.sigma, p.mu + 4 * p.sigma)
    _write_tsv(args.out, ("x", which), curve_rows(p, which, lo, hi, args.points))
    return EXIT_OK


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in text).strip("_").lower()


def _series_entry(res) -> dict:
    return {"value": float(res), "method": res.method, "converged": bool(res.converged),
            "error_estimate": res.error_estimate}


def cmd_analyze(params: McNParams, config: RunConfig, os_pairs=()) -> tuple[dict, int]:
    cfg = config.series
    cps = shape.critical_points(params.a, params.b, params.c)
    modes = [params.mu + params.sigma * cp.z for cp in cps if cp.kind == "mode"]
    report: dict = {"params": dict(zip(("a", "b", "c", "mu", "sigma"), params.as_tuple())),
                    "modes": len(modes), "mode_locations": modes,
                    "critical_points": [{"z": cp.z, "kind": cp.kind} for cp in cps]}
    moms = series.raw_moments(params, 4, cfg)
    report["moments"] = {str(k + 1): _series_entry(m) for k, m in enumerate(moms)}
    m1, m2 = float(moms[0]), float(moms[1])
    report["mean"] = m1
    report["variance"] = m2 - m1 * m1
    sk, ku = series.skewness_kurtosis(params, cfg)
    report["skewness"] = sk
    report["kurtosis"] = ku
    d1, d2 = series.mean_deviations(params, cfg)
    report["mean_deviation_mean"] = _series_entry(d1)
    report["mean_deviation_median"] = _series_entry(d2)
    report["entropy"] = _series_entry(series.shannon_entropy(params, cfg))
    if os_pairs:
        std = params.standard()
        entries = {}
        for i, n in os_pairs:
            r = order_stats.os_moment(std, i, n, 1, cfg)
            entries[f"{i}:{n}"] = {"mean": params.mu + params.sigma * r.value, "method": r.method}
        report["order_statistic_means"] = entries
    return report, EXIT_OK


def _parse_params(text: str) -> McNParams:
    parts = [float(v) for v in text.replace(" ", "").split(",") if v]
    if len(parts) not in (3, 5):
        raise DomainError("--params takes a,b,c or a,b,c,mu,sigma")
    return McNParams(*parts)


def _parse_models(text: str) -> list[ModelKind]:
    if text.strip().lower() == "all":
        return list(ALL_MODELS)
    return [ModelKind.parse(t) for t in text.split(",") if t.strip()]


def _parse_os(items) -> list[tuple[int, int]]:
    out = []
    for it in items or ():
        i, n = (int(v) for v in it.split(","))
        out.append((i, n))
    return out


# --------------------------------------------------------------------------
# Parser and entry point
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key=value config file (default: ${CONFIG_ENV})")
    common.add_argument("--format", choices=("json", "tsv"), default=None)
    common.add_argument("--out", help="output file (directory for fitted curves)")
    common.add_argument("--seed", type=int, default=None)

    data_args = argparse.ArgumentParser(add_help=False)
    data_args.add_argument("--column", default=None, help="column name or 0-based index")
    data_args.add_argument("--delimiter", default=None)

    p = _Parser(prog="mcnormal", description="McDonald normal distribution toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fit", parents=[common, data_args], help="fit models, rank by AIC")
    f.add_argument("data")
    f.add_argument("--models", default="all", help="comma list or 'all'")

    lr = sub.add_parser("lrtests", parents=[common, data_args], help="LR tests of McN against sub-models")
    lr.add_argument("data")

    cu = sub.add_parser("curves", parents=[common, data_args], help="write pdf/cdf/survival/hazard TSV")
    cu.add_argument("data", nargs="?")
    cu.add_argument("--params")
    cu.add_argument("--which", choices=sorted(_CURVES), default="pdf")
    cu.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"))
    cu.add_argument("--points", type=int, default=201)
    cu.add_argument("--models")

    an = sub.add_parser("analyze", parents=[common, data_args], help="shape, moments, entropy")
    an.add_argument("data", nargs="?")
    an.add_argument("--params")
    an.add_argument("--model", default="McN", help="model fitted when a data file is given")
    an.add_argument("--os", action="append", metavar="I,N", help="order statistic mean to report")

    sa = sub.add_parser("sample", parents=[common], help="draw random variates")
    sa.add_argument("--params", required=True)
    sa.add_argument("-n", type=int, required=True)

    ic = sub.add_parser("ingest-check", parents=[common, data_args], help="ingest and summarize a column")
    ic.add_argument("data")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        config = load_config(args.config, {"format": args.format, "seed": args.seed})
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fmt = config.format
    try:
        if args.command == "fit":
            ds = ingest(args.data, args.column, args.delimiter)
            report, code = cmd_fit(ds, _parse_models(args.models), config)
            _emit(render(report, fmt), args.out)
            return code
        if args.command == "lrtests":
            ds = ingest(args.data, args.column, args.delimiter)
            report, code = cmd_lrtests(ds, config)
            _emit(render(report, fmt), args.out)
            return code
        if args.command == "curves":
            return cmd_curves(args, config)
        if args.command == "analyze":
            code = EXIT_OK
            if args.data:
                ds = ingest(args.data, args.column, args.delimiter)
                model = ModelKind.parse(args.model)
                if not model.is_mcn_family:
                    raise DomainError("analyze needs an McN-family model")
                r = fit(model, ds, config.fit)
                params = r.theta_hat
                code = EXIT_OK if r.converged else EXIT_NUMERIC
            elif args.params:
                params = _parse_params(args.params)
            else:
                raise DomainError("give --params or a data file")
            report, c2 = cmd_analyze(params, config, _parse_os(args.os))
            _emit(render(report, fmt), args.out)
            return max(code, c2)
        if args.command == "sample":
            if args.n < 1:
                raise DomainError("-n must be at least 1")
            p = _parse_params(args.params)
            draws = core.sample(p, args.n, config.seed)
            _emit("".join(f"{v!r}\n" for v in map(float, draws)), args.out)
            return EXIT_OK
        if args.command == "ingest-check":
            ds = ingest(args.data, args.column, args.delimiter)
            report = {"dataset": ds.name, "source": ds.source_path, "n": ds.n,
                      "notes": list(ds.warnings)}
            if ds.n >= 2:
                report.update(descriptive_stats(ds).to_record())
            _emit(render(report, fmt), args.out)
            return EXIT_OK
    except IngestionError as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, McNError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.print_usage(sys.stderr)
    return EXIT_USAGE
