"""Bit-stable result serialization.

series.csv carries the sampled observable rows with the exact header
t,norm2,mean_x,mean_p,dpdt,f_boundary,f_potential,transmitted; absent
quantities are empty cells. Floats are written with shortest round-trip
formatting, so rerunning an identical configuration reproduces the files
byte for byte. summary.json holds the scalar results plus the fully resolved
configuration echo; manifest.json records tool version, config hash, and
wall-clock (the manifest is the one file allowed to differ between reruns).
"""

from __future__ import annotations

import json
import os
import tempfile
import time

from . import __version__
from .config import RunConfig, config_hash
from .errors import InvalidArgumentError
from .experiments import ComparisonResult, RunResult, SweepResult
from .observables import ObservableRecord

SERIES_HEADER = "t,norm2,mean_x,mean_p,dpdt,f_boundary,f_potential,transmitted"

SWEEP_HEADER = (
    "axis,value,delta_phi_sim,delta_phi_exact_mode,delta_phi_approx,"
    "delta_phi_oracle_1d,p_plateau,transmitted_final,error"
)

COMPARE_HEADER = (
    "model,v0,w,delta_phi_sim,p_plateau,entry_impulse,exit_impulse,"
    "ehrenfest_residual,transmitted_final,peak_force"
)


def _fmt(value) -> str:
    """Empty cell for missing values; shortest round-trip decimal otherwise."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return repr(float(value))


def preflight_output_dir(path: str):
    """Fail before any computation if the output directory is not writable."""
    try:
        os.makedirs(path, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=path, prefix=".preflight", delete=True):
            pass
    except OSError as exc:
        raise OSError(f"output directory {path!r} is not writable: {exc}") from exc


def write_series_csv(path: str, series: list[ObservableRecord]):
    lines = [SERIES_HEADER]
    for rec in series:
        lines.append(",".join(_fmt(getattr(rec, col)) for col in ObservableRecord.COLUMNS))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(path: str, sweep: SweepResult):
    lines = [SWEEP_HEADER]
    for row in sweep.rows:
        lines.append(",".join(_fmt(row[col]) for col in SWEEP_HEADER.split(",")))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_compare_csv(path: str, comparison: ComparisonResult):
    lines = [COMPARE_HEADER]
    for row in comparison.rows:
        lines.append(",".join(_fmt(row[col]) for col in COMPARE_HEADER.split(",")))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _dump_json(path: str, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_summary_json(path: str, result) -> None:
    if isinstance(result, RunResult):
        payload = {"kind": result.config.experiment.kind,
                   "result": result.summary_scalars(),
                   "config": result.config.to_dict()}
    elif isinstance(result, SweepResult):
        payload = {"kind": "sweep", "axis": result.axis,
                   "fitted_exponent": result.fitted_exponent,
                   "rows": result.rows,
                   "errors": [f"{v}: {e}" for v, e in result.errors],
                   "config": result.config.to_dict()}
    elif isinstance(result, ComparisonResult):
        payload = {"kind": "model-compare", "rows": result.rows,
                   "config": result.config.to_dict()}
    else:
        raise InvalidArgumentError(f"cannot summarize {type(result).__name__}")
    _dump_json(path, payload)


def write_manifest(path: str, cfg: RunConfig, wallclock_s: float):
    _dump_json(path, {
        "tool": "channelsim",
        "version": __version__,
        "config_sha256": config_hash(cfg),
        "wallclock_s": wallclock_s,
    })


def emit_results(result, outdir: str, formats=("csv", "json"), wallclock_s: float | None = None) -> list[str]:
    """Write the result files; returns the paths written.

    RunResult -> series.csv + summary.json; SweepResult -> sweep.csv +
    summary.json; ComparisonResult -> compare.csv + summary.json. manifest.json
    is always written.
    """
    os.makedirs(outdir, exist_ok=True)
    written = []
    if "csv" in formats:
        if isinstance(result, RunResult):
            p = os.path.join(outdir, "series.csv")
            write_series_csv(p, result.series)
            written.append(p)
        elif isinstance(result, SweepResult):
            p = os.path.join(outdir, "sweep.csv")
            write_sweep_csv(p, result)
            written.append(p)
        elif isinstance(result, ComparisonResult):
            p = os.path.join(outdir, "compare.csv")
            write_compare_csv(p, result)
            written.append(p)
    if "json" in formats:
        p = os.path.join(outdir, "summary.json")
        write_summary_json(p, result)
        written.append(p)
    p = os.path.join(outdir, "manifest.json")
    write_manifest(p, result.config, 0.0 if wallclock_s is None else wallclock_s)
    written.append(p)
    return written
