"""Command-line front end.

Exit codes: 0 success, 2 validation or domain error, 3 numerical
consistency failure (cross-route discrepancy above 1e-6 or a failed
self-test criterion).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .checks import CONSISTENCY_LIMIT, DEFAULT_STEPS, PHASE_KEYS, phase_report, run_selftest
from .errors import Su3PhaseError
from .experiment import (
    estimate_phase,
    fmt,
    fringe,
    low_light_counts,
    records_to_csv,
    records_to_json,
    round12,
)
from .geometry import TriangleParams, geometric_phase_closed_form, triangle_vertices
from .optics import interferometer_matrix, triangle_sequence

EXIT_OK, EXIT_DOMAIN, EXIT_INCONSISTENT = 0, 2, 3

REPORT_COLUMNS = ["index", "status", "s1_0", "s2_0", "alpha", "beta", *PHASE_KEYS, "max_abs_discrepancy"]


class UsageError(Exception):
    pass


def _angle(args, value: float) -> float:
    return math.radians(value) if args.degrees else value


def _params(args) -> TriangleParams:
    return TriangleParams(
        _angle(args, args.s1), _angle(args, args.s2), _angle(args, args.alpha), _angle(args, args.beta)
    )


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _format_value(v) -> str:
    return fmt(v) if isinstance(v, float) else str(v)


# --- phase ------------------------------------------------------------------


def cmd_phase(args) -> int:
    report = phase_report(_params(args), args.steps)
    if args.json:
        print(json.dumps(round12(report), indent=2))
    else:
        for key, value in report.items():
            print(f"{key:<20} {_format_value(value)}")
    return EXIT_INCONSISTENT if report["max_abs_discrepancy"] > CONSISTENCY_LIMIT else EXIT_OK


# --- sweep ------------------------------------------------------------------


def _grid(spec) -> np.ndarray:
    start, stop, count = spec
    count = int(count)
    if count < 1:
        raise UsageError("grid count must be >= 1")
    return np.linspace(float(start), float(stop), count)


def _sweep_point(task: tuple) -> dict:
    index, values, steps, photons, seed = task
    row = {"index": index, "status": "ok", "s1_0": values[0], "s2_0": values[1], "alpha": values[2], "beta": values[3]}
    try:
        params = TriangleParams(*values)
        row.update(phase_report(params, steps))
        if photons:
            seq = triangle_sequence(triangle_vertices(params))
            deltas = np.linspace(0.0, 2 * math.pi, 24, endpoint=False)
            est = estimate_phase(low_light_counts(seq, None, deltas, photons, seed + index))
            row["two_phi_counts"] = est.phase
            row["two_phi_counts_std_error"] = est.std_error
        if row["max_abs_discrepancy"] > CONSISTENCY_LIMIT:
            row["status"] = "inconsistent"
    except Su3PhaseError as exc:
        row["status"] = "degenerate"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _sweep_spec(args) -> dict:
    spec = {
        "s1_0": args.s1,
        "s2_0": args.s2,
        "alpha": args.alpha,
        "beta": args.beta,
        "format": args.format,
        "seed": args.seed,
        "photons_per_setting": args.photons,
        "output": args.output,
        "steps": args.steps,
    }
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        unknown = set(cfg) - set(spec)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        spec.update({k: v for k, v in cfg.items() if v is not None})
    for key in ("s1_0", "s2_0", "alpha", "beta"):
        if spec[key] is None:
            raise UsageError(f"missing grid for {key}")
        if len(spec[key]) != 3:
            raise UsageError(f"grid for {key} must be [start, stop, count]")
    return spec


def cmd_sweep(args) -> int:
    spec = _sweep_spec(args)
    grids = [_grid(spec[k]) for k in ("s1_0", "s2_0", "alpha", "beta")]
    if args.degrees:
        grids = [np.radians(g) for g in grids]
    points = [tuple(float(x) for x in pt) for pt in np.array(np.meshgrid(*grids, indexing="ij")).reshape(4, -1).T]
    tasks = [(i, pt, spec["steps"], spec["photons_per_setting"], spec["seed"]) for i, pt in enumerate(points)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks, chunksize=16))
    else:
        rows = [_sweep_point(t) for t in tasks]

    ok_rows = [r for r in rows if r["status"] != "degenerate"]
    worst = max((r["max_abs_discrepancy"] for r in ok_rows), default=0.0)
    summary = {
        "points": len(rows),
        "ok": sum(r["status"] == "ok" for r in rows),
        "degenerate": sum(r["status"] == "degenerate" for r in rows),
        "inconsistent": sum(r["status"] == "inconsistent" for r in rows),
        "worst_discrepancy": worst,
    }
    columns = list(REPORT_COLUMNS)
    if spec["photons_per_setting"]:
        columns += ["two_phi_counts", "two_phi_counts_std_error"]
    columns.append("error")

    if spec["format"] == "json":
        text = json.dumps(round12({"rows": rows, "summary": summary}), indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_format_value(r[c]) if c in r else "" for c in columns])
        buf.write("# summary," + ",".join(f"{k}={_format_value(v)}" for k, v in summary.items()) + "\n")
        text = buf.getvalue()
    _write(spec["output"], text)
    if spec["output"] not in (None, "-"):
        print(
            f"{summary['points']} points: {summary['ok']} ok, {summary['degenerate']} degenerate, "
            f"{summary['inconsistent']} inconsistent; worst discrepancy {fmt(worst)}"
        )
    return EXIT_INCONSISTENT if summary["inconsistent"] else EXIT_OK


# --- netlist ----------------------------------------------------------------


def cmd_netlist(args) -> int:
    params = _params(args)
    seq = triangle_sequence(triangle_vertices(params))
    doc = seq.to_dict()
    status = EXIT_OK
    if args.verify:
        u = interferometer_matrix(seq)
        target = np.exp(1j * geometric_phase_closed_form(params))
        closure = max(abs(u[0, 0] - target), abs(u[1, 0]), abs(u[2, 0]))
        doc["verify"] = {"closure_error": float(closure)}
        print(f"closure error {fmt(float(closure))}", file=sys.stderr)
        if closure > CONSISTENCY_LIMIT:
            status = EXIT_INCONSISTENT
    _write(args.output, json.dumps(round12(doc), indent=2) + "\n")
    return status


# --- fringe -----------------------------------------------------------------


def _deltas(args) -> np.ndarray:
    if args.deltas:
        parts = args.deltas.split(":")
        if len(parts) != 3:
            raise UsageError("--deltas takes start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise UsageError("delta count must be >= 1")
        d = np.linspace(start, stop, count, endpoint=False)
        return np.radians(d) if args.degrees else d
    return np.linspace(0.0, 2 * math.pi, args.settings, endpoint=False)


def cmd_fringe(args) -> int:
    params = _params(args)
    seq = triangle_sequence(triangle_vertices(params))
    dyn = None
    if args.dynamical_seed is not None:
        dyn = np.random.default_rng(args.dynamical_seed).uniform(-math.pi, math.pi, len(seq))
    deltas = _deltas(args)
    if args.photons:
        records = low_light_counts(seq, dyn, deltas, args.photons, args.seed, args.convention)
    else:
        records = fringe(seq, dyn, deltas, args.convention)
    fit = estimate_phase(records)
    if args.format == "json":
        text = records_to_json(records, fit, phi_g=geometric_phase_closed_form(params)) + "\n"
    else:
        text = records_to_csv(records, fit)
    _write(args.output, text)
    return EXIT_OK


# --- selftest ---------------------------------------------------------------


def cmd_selftest(args) -> int:
    results = run_selftest(args.seed)
    for r in results:
        print(r.line(args.timing))
    failed = [r.number for r in results if not r.passed]
    print("selftest: all criteria passed" if not failed else f"selftest: FAILED criteria {failed}")
    return EXIT_INCONSISTENT if failed else EXIT_OK


# --- parser -----------------------------------------------------------------


def _add_triangle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--s1", type=float, required=True, help="first side length s1_0")
    p.add_argument("--s2", type=float, required=True, help="second side length s2_0")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--degrees", action="store_true", help="angles are in degrees (default radians)")


def _grid_arg(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid is start:stop:count")
    return [float(parts[0]), float(parts[1]), int(parts[2])]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="su3phase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase", help="geometric phase of one triangle by four routes")
    _add_triangle_args(p)
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS, help="holonomy samples per side")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("sweep", help="phase report over a parameter grid")
    for name in ("s1", "s2", "alpha", "beta"):
        p.add_argument(f"--{name}", type=_grid_arg, metavar="START:STOP:COUNT")
    p.add_argument("--config", help="JSON file with sweep settings (overrides flags)")
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--photons", type=int, default=None, help="also fit Monte Carlo counts per point")
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("netlist", help="export the nine-element interferometer as JSON")
    _add_triangle_args(p)
    p.add_argument("--output", "-o")
    p.add_argument("--verify", action="store_true", help="recompose and report closure error")
    p.set_defaults(func=cmd_netlist)

    p = sub.add_parser("fringe", help="counter-propagation fringe, noiseless or photon-counted")
    _add_triangle_args(p)
    p.add_argument("--deltas", metavar="START:STOP:COUNT", help="reference phases, stop excluded")
    p.add_argument("--settings", type=int, default=24, help="evenly spaced settings over [0, 2pi)")
    p.add_argument("--photons", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dynamical-seed", type=int, default=None, help="random per-element dynamical phases")
    p.add_argument("--convention", choices=("adjoint", "transpose"), default="adjoint")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_fringe)

    p = sub.add_parser("selftest", help="run the oracle cross-check battery")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (Su3PhaseError, UsageError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
