"""Serialization, configuration files, and experiment profiles.

All numeric output is written with 17 significant digits so every double
round-trips exactly.  Deterministic artifacts (report JSON, CSV tables, path
CSVs) never contain volatile data; wall time and worker count go to a
separate ``*.run.json`` so re-running with the same master seed produces
byte-identical reports.

CSV schemas (header line included, LF line endings):

* path:                ``t,xi``
* segments:            ``segment_index,node_index,t,value``
* predictions:         ``segment_index,node_index,t,predicted_value,actual_value``
* band_coverage:       ``theta,T,N,k,coverage,failures``
* emse:                ``theta,T,N,emse,two_theta_over_T``
* predictor_bound:     ``theta,T,N,epsilon,p_hat_H,p_hat_B``
* standardized_errors: ``theta,T,replicate,z``

Experiment configuration files are JSON objects whose keys mirror
ExperimentConfig exactly (lists for the grids); unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from .errors import GridMismatch
from .experiments import ExperimentConfig, ExperimentReport
from .functional import FunctionalSegment
from .ou_process import SamplePath
from .predict import PredictionRecord

SCHEMA_VERSION = 1

_EXPERIMENT_KINDS = ("band-coverage", "emse", "predictor-bound", "normality")

_CSV_COLUMNS = {
    "band_coverage": ("theta", "T", "N", "k", "coverage", "failures"),
    "emse": ("theta", "T", "N", "emse", "two_theta_over_T"),
    "predictor_bound": ("theta", "T", "N", "epsilon", "p_hat_H", "p_hat_B"),
    "lil_coverage": ("theta", "T", "N", "multiplier", "lil_coverage", "failures"),
}


def fmt(x) -> str:
    """17 significant digits: enough to reproduce any IEEE double exactly."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def config_hash(config: ExperimentConfig) -> str:
    """sha256 of the canonical (sorted, compact) JSON encoding of the config."""
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def provenance(config: ExperimentConfig) -> dict:
    from . import __version__
    from .experiments import RNG_ALGORITHM

    return {
        "master_seed": config.master_seed,
        "config_hash": config_hash(config),
        "version": __version__,
        "rng": RNG_ALGORITHM,
        "schema_version": SCHEMA_VERSION,
    }


def _json_safe(value):
    """NaN (cells where every replicate failed) serializes as null."""
    if isinstance(value, float) and value != value:
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def report_json_text(report: ExperimentReport) -> str:
    """Deterministic JSON body of a report (volatile run data excluded)."""
    doc = {
        "kind": report.kind,
        "config": report.config.to_dict(),
        "cells": _json_safe(report.cells),
        "failures_total": report.failures_total,
        "provenance": provenance(report.config),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _csv_text(header: tuple[str, ...], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def report_csv_text(report: ExperimentReport) -> str:
    """Per-kind CSV table of the report cells."""
    if report.kind == "normality":
        rows = []
        for cell in report.cells:
            rows.extend(
                (cell["theta"], cell["T"], r, z)
                for r, z in zip(cell["z_replicates"], cell["z"])
            )
        return _csv_text(("theta", "T", "replicate", "z"), rows)
    columns = _CSV_COLUMNS.get(report.kind)
    if columns is None:
        raise ValueError(f"no CSV schema for report kind {report.kind!r}")
    rows = [tuple(cell[c] for c in columns) for cell in report.cells]
    return _csv_text(columns, rows)


def write_report(
    report: ExperimentReport,
    out_dir,
    basename: str | None = None,
    formats: tuple[str, ...] = ("json", "csv"),
) -> dict:
    """Write ``<basename>.json``, ``<basename>.csv`` and the volatile ``.run.json``.

    Returns the paths written.  The run file records wall time and worker
    count and is the only file allowed to differ between reruns.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    basename = basename or report.kind
    paths = {"run": out_dir / f"{basename}.run.json"}
    if "json" in formats:
        paths["json"] = out_dir / f"{basename}.json"
        paths["json"].write_text(report_json_text(report))
    if "csv" in formats:
        paths["csv"] = out_dir / f"{basename}.csv"
        paths["csv"].write_text(report_csv_text(report))
    run_doc = {
        "wall_time_s": report.wall_time_s,
        "n_workers": report.n_workers,
        "finished_unix": time.time(),
    }
    paths["run"].write_text(json.dumps(run_doc, sort_keys=True, indent=2) + "\n")
    return paths


def path_csv_text(path: SamplePath) -> str:
    t = path.grid.times()
    return _csv_text(("t", "xi"), zip(t, path.values))


def path_sidecar(path: SamplePath, seed: int, extra: dict | None = None) -> dict:
    from . import __version__
    from .experiments import RNG_ALGORITHM

    doc = {
        "seed": seed,
        "scheme": path.scheme,
        "params": None
        if path.params is None
        else {"theta": path.params.theta, "mu": path.params.mu, "sigma": path.params.sigma},
        "t_end": path.grid.t_end,
        "dt": path.grid.dt,
        "n_steps": path.grid.n_steps,
        "version": __version__,
        "rng": RNG_ALGORITHM,
        "schema_version": SCHEMA_VERSION,
    }
    if extra:
        doc.update(extra)
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    doc["config_hash"] = hashlib.sha256(canonical.encode()).hexdigest()
    return doc


def write_path_csv(path: SamplePath, outfile, seed: int, extra: dict | None = None) -> None:
    """Write the ``t,xi`` CSV plus a ``.meta.json`` sidecar with full provenance."""
    outfile = Path(outfile)
    outfile.parent.mkdir(parents=True, exist_ok=True)
    outfile.write_text(path_csv_text(path))
    sidecar = outfile.with_suffix(outfile.suffix + ".meta.json")
    sidecar.write_text(json.dumps(path_sidecar(path, seed, extra), sort_keys=True, indent=2) + "\n")


def read_path_csv(infile) -> tuple[np.ndarray, float]:
    """Load a ``t,xi`` CSV; returns (values, dt) after checking uniform spacing."""
    infile = Path(infile)
    raw = infile.read_text().strip().splitlines()
    if not raw or raw[0].strip() != "t,xi":
        raise GridMismatch(f"{infile}: expected header 't,xi'")
    try:
        data = np.array([[float(f) for f in line.split(",")] for line in raw[1:]])
    except ValueError as exc:
        raise GridMismatch(f"{infile}: malformed CSV row ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise GridMismatch(f"{infile}: need two columns and at least two rows")
    t, xi = data[:, 0], data[:, 1]
    steps = np.diff(t)
    dt = steps[0]
    if dt <= 0 or np.any(np.abs(steps - dt) > 1e-9 * max(dt, 1.0)):
        raise GridMismatch(f"{infile}: time column is not uniformly spaced")
    return xi, float(dt)


def segments_csv_text(segments: list[FunctionalSegment]) -> str:
    rows = []
    for n, seg in enumerate(segments):
        t = seg.grid.times()
        rows.extend((n, j, t[j], seg.values[j]) for j in range(seg.values.size))
    return _csv_text(("segment_index", "node_index", "t", "value"), rows)


def write_segments_csv(segments: list[FunctionalSegment], outfile) -> None:
    Path(outfile).write_text(segments_csv_text(segments))


def predictions_csv_text(records: list[tuple[int, PredictionRecord, FunctionalSegment | None]]) -> str:
    """Rows (segment_index, node_index, t, predicted, actual); actual may be absent."""
    rows = []
    for n, record, actual in records:
        t = record.predicted.grid.times()
        for j in range(record.predicted.values.size):
            actual_value = "" if actual is None else fmt(actual.values[j])
            rows.append((n, j, fmt(t[j]), fmt(record.predicted.values[j]), actual_value))
    lines = [",".join(("segment_index", "node_index", "t", "predicted_value", "actual_value"))]
    lines.extend(",".join(str(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_predictions_csv(records, outfile) -> None:
    Path(outfile).write_text(predictions_csv_text(records))


# experiment profiles: "desk" finishes on a laptop in minutes, "full" mirrors
# the published tables (days of CPU; the CLI asks for confirmation first)

_DESK_SEED = 20260810

_DESK = {
    "band-coverage": dict(
        thetas=(0.4, 0.7, 1.0),
        horizons=(1000.0, 2000.0, 4000.0),
        replicates=200,
        epsilon=0.05,
    ),
    "emse": dict(
        thetas=(0.4, 0.7, 1.0),
        horizons=(500.0, 1000.0, 2000.0, 4000.0),
        replicates=200,
        epsilon=0.05,
    ),
    "predictor-bound": dict(
        thetas=(0.4, 0.7, 1.0),
        horizons=(2000.0, 4000.0, 8000.0),
        replicates=200,
        epsilon=0.05,
    ),
    "normality": dict(
        thetas=(1.0,),
        horizons=(2000.0, 4000.0),
        replicates=200,
        epsilon=0.05,
    ),
}

_FULL = {
    "band-coverage": dict(
        thetas=(0.1, 0.4, 0.7, 1.0, 2.0, 5.0),
        horizons=tuple(12000.0 + 1000.0 * l for l in range(7)),
        replicates=1000,
    ),
    "emse": dict(
        thetas=(0.1, 0.4, 0.7, 1.0, 2.0),
        horizons=tuple(50.0 + 250.0 * l for l in range(25)),
        replicates=1000,
    ),
    "predictor-bound": dict(
        thetas=(0.4, 0.7, 1.0),
        horizons=tuple(200000.0 * l for l in range(1, 6)),
        replicates=1000,
        epsilon=0.008,
    ),
    "normality": dict(
        thetas=(0.1, 0.4, 0.7, 1.0, 2.0, 5.0),
        horizons=tuple(12000.0 + 1000.0 * l for l in range(7)),
        replicates=1000,
    ),
}

PROFILES = {"desk": _DESK, "full": _FULL}


def profile_config(kind: str, profile: str) -> ExperimentConfig:
    """Pre-filled ExperimentConfig for an experiment kind under a named profile."""
    if kind not in _EXPERIMENT_KINDS:
        raise ValueError(f"unknown experiment kind {kind!r}; expected one of {_EXPERIMENT_KINDS}")
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; expected 'desk' or 'full'")
    return ExperimentConfig(master_seed=_DESK_SEED, **PROFILES[profile][kind])


def load_experiment_config(doc: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed JSON object, rejecting unknown keys.

    ``overrides`` (e.g. from command-line flags) win over file values.
    """
    allowed = {f.name for f in fields(ExperimentConfig)}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}; allowed: {sorted(allowed)}")
    merged = dict(doc)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    missing = {"thetas", "horizons"} - set(merged)
    if missing:
        raise ValueError(f"config must set {sorted(missing)}")
    merged["thetas"] = tuple(merged["thetas"])
    merged["horizons"] = tuple(merged["horizons"])
    return ExperimentConfig(**merged)


_DOC_ONLY_KEYS = ("profile", "out_dir", "formats")


def resolve_cli_config(kind: str, doc: dict, overrides: dict | None = None):
    """Resolve a full CLI configuration document.

    Beyond the ExperimentConfig fields the document may carry ``profile``
    (desk | full | custom; desk/full pre-fill the grids, remaining keys then
    override them), ``out_dir``, and ``formats`` (subset of ["json", "csv"]).
    Returns ``(config, out_dir, formats, profile)``.
    """
    unknown = set(doc) - {f.name for f in fields(ExperimentConfig)} - set(_DOC_ONLY_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    profile = doc.get("profile", "custom")
    out_dir = doc.get("out_dir")
    formats = doc.get("formats", ["json", "csv"])
    if not isinstance(formats, (list, tuple)) or not formats or set(formats) - {"json", "csv"}:
        raise ValueError(f"formats must be a nonempty subset of ['json', 'csv']: {formats!r}")
    body = {k: v for k, v in doc.items() if k not in _DOC_ONLY_KEYS}
    if profile in PROFILES:
        body = profile_config(kind, profile).to_dict() | body
    elif profile != "custom":
        raise ValueError(f"unknown profile {profile!r}; expected desk, full, or custom")
    return load_experiment_config(body, overrides), out_dir, tuple(formats), profile


def estimated_steps(config: ExperimentConfig) -> int:
    """Total number of simulation steps the configuration will run."""
    per_replicate = sum(int(round(t / config.dt)) for t in config.horizons)
    return per_replicate * config.replicates * len(config.thetas)
