"""Command-line entry point.

``cembenders solve`` runs one algorithm on a loaded or generated instance and
writes its artifacts; ``cembenders compare`` runs several and tabulates them.
Exit codes: 0 converged, 1 input error, 2 iteration cap reached (artifacts
are still written), 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .benders import BendersConfig, TraceRow, run_benders, subproblem_lp
from .benders.report import write_meta, write_run, write_solution, write_trace
from .errors import CEMError, InstanceInvalid, ParseError, SpecInvalid
from .instance import (
    GeneratorSpec, generate_synthetic, instance_hash, load_instance, preset, validate_instance,
)
from .lpcore import export_mps, relative_gap, solve_lp, solve_milp
from .reformulate import assemble_block_problem, assemble_monolithic
from .regularize import run_regularized, run_two_stage

EXIT_OK, EXIT_INPUT, EXIT_MAX_ITER, EXIT_SOLVER = 0, 1, 2, 3

ALGOS = {
    "monolithic": None,
    "benders": "none",
    "benders-l2": "l2",
    "benders-int": "interior",
    "benders-tr": "trust-region",
    "two-stage": "interior",
}
COMPARE_COLUMNS = ("algo", "final_gap", "iterations", "wall_ms", "iters_to_1pct")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags, which would read as "iteration cap".
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _input_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", metavar="DIR", help="instance directory")
    src.add_argument("--generate", metavar="SPEC",
                     help="generator preset name or path to a JSON generator spec")
    p.add_argument("--seed", type=int, default=0, help="generator and run seed (default 0)")
    p.add_argument("--alpha", type=float, default=0.5, help="level-set parameter in (0, 1)")
    p.add_argument("--tol", type=float, default=1e-3, help="relative gap tolerance")
    p.add_argument("--max-iter", type=int, default=200, help="iteration cap")
    p.add_argument("--workers", type=int, default=None,
                   help="sub-problem workers (BENDERS_WORKERS overrides)")
    p.add_argument("--out", metavar="DIR", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cembenders", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    solve = sub.add_parser("solve", help="run one algorithm")
    _input_flags(solve)
    solve.add_argument("--algo", choices=sorted(ALGOS), default="benders")
    solve.add_argument("--export-mps", action="store_true",
                       help="also write the monolithic and per-sub-period problem files")
    cmp_ = sub.add_parser("compare", help="run several algorithms and write compare.csv")
    _input_flags(cmp_)
    cmp_.add_argument("--algos", default="benders,benders-l2,benders-int,benders-tr",
                      help="comma-separated algorithm list")
    return parser


def generator_spec(text: str) -> tuple[GeneratorSpec, dict]:
    """Preset name or JSON file; returns the spec and its manifest description."""
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecInvalid(f"cannot read generator spec {text}: {exc}") from exc
        if "discrete" in data:
            data["discrete"] = tuple(data["discrete"])
        try:
            spec = GeneratorSpec(**data)
        except TypeError as exc:
            raise SpecInvalid(f"bad generator spec {text}: {exc}") from exc
        return spec, {"file": str(path), "spec": data}
    return preset(text), {"preset": text}


def load_input(args):
    """Instance plus its manifest description."""
    if args.instance:
        inst = load_instance(args.instance)
        source = {"instance": str(Path(args.instance).resolve())}
    else:
        spec, source = generator_spec(args.generate)
        inst = generate_synthetic(spec, args.seed)
        source["seed"] = args.seed
        source["spec_echo"] = asdict(spec)
    report = validate_instance(inst)
    if not report.ok:
        raise InstanceInvalid(str(report))
    return inst, source


def config_from(args, kind: str = "none") -> BendersConfig:
    return BendersConfig(max_iter=args.max_iter, tol=args.tol, kind=kind, alpha=args.alpha,
                         workers=args.workers, seed=args.seed)


def run_algo(inst, algo: str, cfg: BendersConfig):
    if algo == "two-stage":
        return run_two_stage(inst, cfg)
    if algo == "benders":
        return run_benders(inst, cfg)
    return run_regularized(inst, cfg)


def solve_monolithic(inst, out: Path) -> dict:
    lp = assemble_monolithic(inst)
    t0 = time.perf_counter()
    sol = solve_milp(lp) if lp.is_mip else solve_lp(lp)
    wall = (time.perf_counter() - t0) * 1e3
    if not sol.optimal:
        raise CEMError(f"monolithic solve returned {sol.status}")
    bound = getattr(sol, "bound", sol.objective)
    gap = relative_gap(sol.objective, bound)
    row = TraceRow(0, sol.objective, bound, gap, 0, kind="monolithic")
    write_trace(out / "trace.csv", [row])
    lay = assemble_block_problem(inst).layout
    ny, nz = len(lay.y_names), len(lay.z_names)
    # The decomposed stack orders columns (y, z, operations), so the planning part leads.
    write_solution(out / "solution.csv", sol.objective, lp.col_names[:ny + nz], sol.x[:ny + nz])
    write_meta(out / "meta.json", {"algo": "monolithic"},
               {"status": "converged", "objective": sol.objective, "lower": bound, "gap": gap,
                "wall_ms": wall})
    return {"status": "converged", "objective": sol.objective, "gap": gap, "iterations": 1,
            "wall_ms": wall, "trace": [row], "y": sol.x[:ny], "z": sol.x[ny:ny + nz]}


def export_problems(inst, out: Path, y: np.ndarray, z: np.ndarray) -> None:
    export_mps(assemble_monolithic(inst), out / "monolithic.mps")
    bp = assemble_block_problem(inst)
    for b in bp.blocks:
        export_mps(subproblem_lp(b, y[b.y_cols], z[b.z_cols]), out / f"sub_w{b.w}.mps")


def iters_to(trace, level: float):
    for r in trace:
        if r.gap <= level:
            return r.iteration
    return None


def _manifest(out: Path, args, source: dict, inst, algo, config: dict, started: str) -> None:
    manifest = {
        "command": args.command, "algo": algo, "source": source, "config": config,
        "out": str(out.resolve()), "instance_hash": instance_hash(inst),
        "started": started, "finished": datetime.now(timezone.utc).isoformat(),
        "argv": list(args.argv),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_solve(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    cfg = config_from(args, ALGOS[args.algo] or "none")
    inst, source = load_input(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.algo == "monolithic":
        res = solve_monolithic(inst, out)
        status, gap, objective = res["status"], res["gap"], res["objective"]
        if args.export_mps:
            export_problems(inst, out, res["y"], res["z"])
    else:
        res = run_algo(inst, args.algo, cfg)
        write_run(out, res, {"algo": args.algo})
        status, gap, objective = res.status, res.gap, res.objective
        if args.export_mps:
            export_problems(inst, out, res.y, res.z)
    _manifest(out, args, source, inst, args.algo, cfg.echo(), started)
    print(f"{args.algo}: {status} objective={objective!r} gap={gap:.3e} out={out}")
    return EXIT_OK if status == "converged" else EXIT_MAX_ITER


def cmd_compare(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    if not algos:
        raise SpecInvalid("compare needs at least one algorithm")
    unknown = [a for a in algos if a not in ALGOS]
    if unknown:
        raise SpecInvalid(f"unknown algorithms {unknown}; choose from {sorted(ALGOS)}")
    base = config_from(args)
    inst, source = load_input(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, all_ok = [], True
    for algo in algos:
        if algo == "monolithic":
            res = solve_monolithic(inst, out / algo)
            trace, wall, status = res["trace"], res["wall_ms"], res["status"]
        else:
            cfg = config_from(args, ALGOS[algo])
            res = run_algo(inst, algo, cfg)
            write_run(out / algo, res, {"algo": algo})
            trace, wall, status = res.trace, float(sum(res.wall_ms)), res.status
        all_ok &= status == "converged"
        k1 = iters_to(trace, 0.01)
        rows.append([algo, repr(float(trace[-1].gap)), len(trace), f"{wall:.3f}",
                     "" if k1 is None else k1])
    with open(out / "compare.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(COMPARE_COLUMNS)
        wr.writerows(rows)
    _manifest(out, args, source, inst, algos, base.echo(), started)
    for r in rows:
        print(",".join(str(v) for v in r))
    return EXIT_OK if all_ok else EXIT_MAX_ITER


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        if args.command == "solve":
            return cmd_solve(args)
        return cmd_compare(args)
    except (SpecInvalid, InstanceInvalid, ParseError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CEMError as exc:
        print(f"solver error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
