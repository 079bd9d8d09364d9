"""Run artifacts: trace, timings, solution and metadata files.

``trace.csv`` holds only deterministic quantities so two runs with the same
inputs produce byte-identical files; wall-clock times go to ``timings.csv``.
"""

from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np

TRACE_COLUMNS = ("iter", "U", "L", "gap", "n_cuts", "kind", "alpha", "L_alpha", "r_star",
                 "stage", "tr_radius")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def trace_rows(trace) -> list[list[str]]:
    return [[_fmt(x) for x in (r.iteration, r.U, r.L, r.gap, r.n_cuts, r.kind, r.alpha,
                               r.L_alpha, r.r_star, r.stage, r.tr_radius)] for r in trace]


def _write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)
    return path


def write_trace(path, trace) -> Path:
    return _write_csv(path, TRACE_COLUMNS, trace_rows(trace))


def read_trace(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_timings(path, trace, wall_ms) -> Path:
    return _write_csv(path, ("iter", "wall_ms"),
                      [[r.iteration, f"{t:.3f}"] for r, t in zip(trace, wall_ms)])


def write_solution(path, objective: float, names, values) -> Path:
    rows = [["objective", _fmt(float(objective))]]
    rows += [[n, _fmt(float(v))] for n, v in zip(names, values)]
    return _write_csv(path, ("name", "value"), rows)


def versions() -> dict:
    import highspy
    import scipy

    from .. import __version__

    return {"cembenders": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__,
            "highspy": getattr(highspy, "__version__", "unknown")}


def write_meta(path, config: dict, extra: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {"config": config, "versions": versions()}
    meta.update(extra or {})
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return path


def write_run(out_dir, result, extra: dict | None = None) -> dict[str, Path]:
    """Write trace, timings, solution and meta files of a decomposition run."""
    out = Path(out_dir)
    lay = result.bp.layout
    names = list(lay.y_names) + list(lay.z_names)
    values = np.concatenate([result.y, result.z])
    info = {"status": result.status, "objective": result.objective, "lower": result.lower,
            "gap": result.gap, "iterations": result.iterations,
            "stage_boundary": result.stage_boundary}
    info.update(extra or {})
    return {
        "trace": write_trace(out / "trace.csv", result.trace),
        "timings": write_timings(out / "timings.csv", result.trace, result.wall_ms),
        "solution": write_solution(out / "solution.csv", result.objective, names, values),
        "meta": write_meta(out / "meta.json", result.config.echo(), info),
    }
