"""
File formats: panel CSV ingestion, report/summary JSON, plot-data CSVs and
run manifests.

Panel CSV: a header row of series labels, one row per time point, and an
optional leading ``time`` column which is ignored. Every data cell must be
a finite number.

All floats are written with ``repr`` so a rerun with the same inputs and
seed produces byte-identical files. Only ``manifest.json`` carries a
timestamp.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import Panel, sample_acf, sample_pacf, significance_limit
from .pipeline import PipelineReport
from .studies import GroundTruth, StudySummary

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "InputError",
    "read_panel_csv",
    "report_to_dict",
    "sha256_file",
    "write_csv",
    "write_json",
    "write_manifest",
    "write_panel_csv",
    "write_report",
    "write_study",
    "write_truth",
]

REPORT_SCHEMA_VERSION = "1.0"
MANIFEST_NAME = "manifest.json"


class InputError(ValueError):
    """Malformed input table; carries the 1-based ``line`` and ``column``."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


def read_panel_csv(path) -> Panel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise InputError(f"{path} is empty", line=1)
    header = [h.strip() for h in rows[0]]
    skip_time = header[0].lower() == "time"
    labels = header[1:] if skip_time else header
    if not labels:
        raise InputError("header names no series", line=1)
    if any(not lab for lab in labels):
        raise InputError("empty series label in header", line=1)
    if len(set(labels)) != len(labels):
        raise InputError("duplicate series labels in header", line=1)
    first_col = 1 if skip_time else 0
    data = np.empty((len(rows) - 1, len(labels)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InputError(f"expected {len(header)} fields, found {len(row)}", line=i)
        for j, cell in enumerate(row[first_col:]):
            try:
                value = float(cell)
            except ValueError:
                raise InputError(f"cannot parse {cell!r} as a number", line=i, column=j + first_col + 1) from None
            if not math.isfinite(value):
                raise InputError(f"non-finite value {cell!r}", line=i, column=j + first_col + 1)
            data[i - 2, j] = value
    if data.shape[0] < 2:
        raise InputError("need at least two data rows", line=len(rows))
    return Panel(data, tuple(labels))


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return "" if value is None else str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def write_panel_csv(panel: Panel, path) -> Path:
    rows = ([t, *panel.values[t]] for t in range(panel.n_obs))
    return write_csv(path, ["time", *panel.labels], rows)


def write_truth(panel: Panel, truth: GroundTruth, outdir) -> list[Path]:
    outdir = Path(outdir)
    series = write_csv(
        outdir / "truth_series.csv",
        ["time", "eta", "sigma", "eps"],
        ([t, truth.eta[t], truth.sigma[t], truth.eps[t]] for t in range(truth.eta.shape[0])),
    )
    coefs = write_csv(
        outdir / "truth_phi.csv",
        ["label", "phi", "regime"],
        zip(panel.labels, truth.phi, truth.regime),
    )
    return [series, coefs]


# -- pipeline report ----------------------------------------------------------


def _garch_block(report: PipelineReport) -> dict:
    sel = report.garch_selection
    if sel is None:
        return {"status": "not-applicable"}
    best = sel.best
    return {
        "status": "fitted",
        "order": {"p": best.p, "q": best.q},
        "coefficients": best.summary_table(),
        "log_likelihood": best.log_likelihood,
        "aic": best.aic,
        "aic_table": [
            {"p": p, "q": q, "aic": sel.aic[(p, q)], "log_likelihood": sel.fits[(p, q)].log_likelihood}
            for (p, q) in sel.aic
        ],
        "failed_candidates": {f"{p},{q}": msg for (p, q), msg in sel.failures.items()},
    }


def report_to_dict(report: PipelineReport) -> dict:
    series = []
    legacy = report.legacy or [None] * len(report.labels)
    for j, label in enumerate(report.labels):
        f1, f2 = report.first_pass[j], report.second_pass[j]
        entry = {
            "label": label,
            "weight": report.weights[j],
            "first_pass": {"order": f1.order, "coefficients": f1.coefficients, "standard_errors": f1.standard_errors},
            "second_pass": {"order": f2.order, "coefficients": f2.coefficients, "standard_errors": f2.standard_errors},
            "final": {
                "coefficients": report.final_coefficients[j],
                "standard_errors": report.final_standard_errors[j],
                "order_disagreement": report.order_disagreement[j],
            },
        }
        lf = legacy[j]
        if lf is not None:
            entry["legacy"] = {"coefficients": lf.coefficients, "standard_errors": lf.standard_errors}
        series.append(entry)
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "n_series": len(report.labels),
        "n_obs": int(report.aligned_start + report.averaged_residuals.shape[0]),
        "aligned_start": report.aligned_start,
        "config": report.config.to_dict(),
        "garch": _garch_block(report),
        "diagnostics": [d.to_dict() for d in report.diagnostics],
        "qq_envelope_coverage": None if report.qq is None else report.qq.coverage,
        "cross_correlation_squared_residuals": report.cross_correlation_summary,
        "series": series,
        "warnings": list(report.warnings),
    }


def write_report(report: PipelineReport, outdir) -> list[Path]:
    """Write the report JSON plus the series and plot-data CSVs."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = [write_json(outdir / "report.json", report_to_dict(report))]
    start = report.aligned_start
    eta = report.averaged_residuals
    times = range(start, start + eta.shape[0])
    fit = report.shared_garch
    if fit is not None:
        sigma = fit.conditional_sd
        z = fit.standardized_residuals
        rows = ([t, eta[i], sigma[i], z[i]] for i, t in enumerate(times))
        written.append(write_csv(outdir / "shared_residuals.csv", ["time", "eta_bar", "sigma_hat", "eps_hat"], rows))
    else:
        written.append(write_csv(outdir / "shared_residuals.csv", ["time", "eta_bar"], ([t, eta[i]] for i, t in enumerate(times))))

    ml = report.mcleod_li
    written.append(write_csv(outdir / "plot_mcleod_li.csv", ["lag", "statistic", "p_value"], zip(ml.lags, ml.statistics, ml.p_values)))

    lags = min(report.config.max_lag, eta.shape[0] - 1)
    limit = significance_limit(eta.shape[0])
    acf2, pacf2 = sample_acf(eta**2, lags), sample_pacf(eta**2, lags)
    written.append(
        write_csv(
            outdir / "plot_acf_squared.csv",
            ["lag", "acf", "pacf", "limit"],
            ([k + 1, acf2[k], pacf2[k], limit] for k in range(lags)),
        )
    )
    if report.qq is not None:
        qq = report.qq
        written.append(
            write_csv(
                outdir / "plot_qq.csv",
                ["theoretical", "sample", "lower", "upper"],
                zip(qq.theoretical_quantiles, qq.sample_quantiles, qq.envelope_lower, qq.envelope_upper),
            )
        )
    legacy = report.legacy or [None] * len(report.labels)

    def first(vals, i=0):
        return vals[i] if len(vals) > i else None

    written.append(
        write_csv(
            outdir / "plot_phi.csv",
            ["label", "order1", "phi1", "se1", "order2", "phi2", "se2", "phi_final", "se_final", "phi_old", "se_old"],
            (
                [
                    lab,
                    f1.order,
                    first(f1.coefficients),
                    first(f1.standard_errors),
                    f2.order,
                    first(f2.coefficients),
                    first(f2.standard_errors),
                    first(c),
                    first(s),
                    None if lf is None else first(lf.coefficients),
                    None if lf is None else first(lf.standard_errors),
                ]
                for lab, f1, f2, c, s, lf in zip(
                    report.labels,
                    report.first_pass,
                    report.second_pass,
                    report.final_coefficients,
                    report.final_standard_errors,
                    legacy,
                )
            ),
        )
    )
    ccs = report.cross_correlation_summary
    if ccs is not None:
        edges, counts = ccs["histogram"]["edges"], ccs["histogram"]["counts"]
        written.append(
            write_csv(
                outdir / "plot_cross_correlation_hist.csv",
                ["bin_lower", "bin_upper", "count"],
                zip(edges[:-1], edges[1:], counts),
            )
        )
    return written


# -- studies ------------------------------------------------------------------


def write_study(summary: StudySummary, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = summary.to_dict()
    written = [write_json(outdir / "summary.json", payload)]

    flat = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else str(k), obj[k])
        elif isinstance(obj, list):
            flat.append((prefix, json.dumps(_jsonable(obj))))
        else:
            flat.append((prefix, obj))

    walk("", payload)
    written.append(write_csv(outdir / "summary.csv", ["metric", "value"], flat))

    written.append(
        write_csv(
            outdir / "replications.csv",
            ["replication", "garch_order", "phi_mse", "phi_mse_first", "phi_mse_unweighted", "sigma_corr", "sigma_rmse", "qq_coverage", "mcleod_li_reject", "li_mak_reject"],
            (
                [
                    r.index,
                    "none" if r.garch_order is None else f"{r.garch_order[0]},{r.garch_order[1]}",
                    r.mse("final"),
                    r.mse("first"),
                    None if r.phi_final_unweighted is None else r.mse("unweighted"),
                    r.sigma_corr,
                    r.sigma_rmse,
                    r.qq_coverage,
                    r.mcleod_li_reject,
                    r.li_mak_reject,
                ]
                for r in summary.replications
            ),
        )
    )

    rep = summary.replications[0]
    if rep.sigma_hat is not None:
        written.append(
            write_csv(
                outdir / "plot_sigma.csv",
                ["step", "sigma_true", "sigma_hat"],
                ([i, a, b] for i, (a, b) in enumerate(zip(rep.sigma_true, rep.sigma_hat))),
            )
        )
    if rep.qq is not None:
        qq = rep.qq
        written.append(
            write_csv(
                outdir / "plot_qq.csv",
                ["theoretical", "sample", "lower", "upper"],
                zip(qq.theoretical_quantiles, qq.sample_quantiles, qq.envelope_lower, qq.envelope_upper),
            )
        )
    written.append(
        write_csv(
            outdir / "plot_phi.csv",
            ["replication", "series", "regime", "phi", "phi_first", "phi_second", "phi_final"],
            (
                [r.index, i, r.regime[i], r.phi[i], r.phi_first[i], r.phi_second[i], r.phi_final[i]]
                for r in summary.replications
                for i in range(r.phi.shape[0])
            ),
        )
    )
    finals = np.concatenate([r.phi_final for r in summary.replications])
    counts, edges = np.histogram(finals, bins=50, range=(-0.2, 1.0))
    written.append(
        write_csv(
            outdir / "plot_phi_density.csv",
            ["bin_lower", "bin_upper", "density"],
            zip(edges[:-1], edges[1:], counts / (counts.sum() * np.diff(edges))),
        )
    )
    return written


# -- manifest -----------------------------------------------------------------


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir, command: str, config: dict, seed, files: Sequence[Path], input_path=None) -> Path:
    from . import __version__

    outdir = Path(outdir)
    canonical = json.dumps(_jsonable(config), sort_keys=True).encode()
    manifest = {
        "command": command,
        "config": _jsonable(config),
        "config_sha256": hashlib.sha256(canonical).hexdigest(),
        "master_seed": seed,
        "input": None if input_path is None else {"path": str(input_path), "sha256": sha256_file(input_path)},
        "outputs": {Path(f).name: sha256_file(f) for f in sorted(files, key=lambda p: Path(p).name)},
        "tool_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return write_json(outdir / MANIFEST_NAME, manifest)
