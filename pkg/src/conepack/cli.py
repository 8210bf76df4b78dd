"""Command-line interface: one entry point, one subcommand per task.

Every run emits a manifest (subcommand, parameters, seeds, version,
backend, wall time, sha256 of each output file) next to its first output
file, or as a JSON line on stderr when the run writes no files. Outputs
are bit-reproducible for fixed seeds.

Exit codes: 0 success, 2 usage error, 3 infeasibility, 4 resource cap.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__, analysis, catalog, geometry, lattice, optimizer, simulator
from ._backend import BACKEND
from .errors import (BracketingError, CatalogMissError, ConepackError,
                     InfeasibleError, InvalidConstellationError, ResourceCapError)
from .geometry import Constellation

USAGE_ERROR, INFEASIBLE, RESOURCE_CAP = 2, 3, 4


def _default_threads() -> int:
    """Worker cap for optimize/simulate; results never depend on it."""
    try:
        return max(1, int(os.environ.get("CONEPACK_THREADS", "1")))
    except ValueError:
        return 1


def _parse_snr_grid(spec: str) -> np.ndarray:
    """Parse 'start:stop:step', a comma list, or a single value (dB)."""
    try:
        if ":" in spec:
            start, stop, step = (float(v) for v in spec.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            return np.arange(start, stop + step / 2.0, step)
        return np.array([float(v) for v in spec.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad SNR grid {spec!r}: {exc}") from exc


def _load_constellation(args) -> tuple[Constellation, float]:
    """Resolve --id/--in to a constellation and its kissing tolerance."""
    if getattr(args, "id", None):
        entry = catalog.get(args.id)
        return entry.constellation, entry.kissing_rel_tol
    return Constellation.load(args.infile), geometry.DEFAULT_KISSING_REL_TOL


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _emit_manifest(args, outputs: list[str], wall_time: float) -> None:
    params = {k: v.tolist() if isinstance(v, np.ndarray) else v
              for k, v in vars(args).items()
              if k not in ("func", "manifest") and not k.startswith("_")}
    digests = {}
    for path in outputs:
        with open(path, "rb") as fh:
            digests[path] = hashlib.sha256(fh.read()).hexdigest()
    manifest = {
        "subcommand": args.subcommand,
        "parameters": params,
        "tool_version": __version__,
        "backend": BACKEND,
        "rng": simulator.RNG_DESCRIPTION,
        "wall_time_s": round(wall_time, 6),
        "outputs": digests,
    }
    path = args.manifest or (outputs[0] + ".manifest.json" if outputs else None)
    text = json.dumps(manifest, sort_keys=True, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(json.dumps(manifest, sort_keys=True), file=sys.stderr)


# ---------------------------------------------------------------- handlers

def _cmd_catalog(args) -> list[str]:
    if args.action == "list":
        print(f"{'id':14s} {'M':>3s} {'bits/s/Hz':>10s}  bandwidth")
        for row in catalog.list_entries():
            print(f"{row.id:14s} {row.size:3d} {row.spectral_efficiency:10.2f}"
                  f"  {row.bandwidth_model}")
        return []
    entry = catalog.get(args.id)
    entry.constellation.save(args.out)
    print(f"wrote {args.out}")
    return [args.out]


def _cmd_evaluate(args) -> list[str]:
    c, kiss_tol = _load_constellation(args)
    if args.kissing_rel_tol is not None:
        kiss_tol = args.kissing_rel_tol
    report = geometry.cone_contains(c, args.cone_tol)
    print(f"name                : {c.name}")
    print(f"points              : {c.size} in {c.dim}-d ({c.bandwidth_model})")
    print(f"min distance        : {geometry.min_distance(c):.12g}")
    print(f"kissing count       : {geometry.kissing_count(c, kiss_tol)}")
    print(f"avg energy E[|s|^2] : {geometry.avg_electrical_energy(c):.12g}")
    print(f"avg DC E[s1]        : {geometry.avg_optical_amplitude(c):.12g}")
    print(f"spectral efficiency : {geometry.spectral_efficiency(c):.12g} bits/s/Hz")
    if report.ok:
        print(f"cone admissible     : yes (tol {report.tol:g})")
    else:
        print(f"cone admissible     : NO; violations "
              f"{dict(zip(report.violating_indices, report.violations))}")
    return []


def _cmd_optimize(args) -> list[str]:
    problem = optimizer.PackingProblem(
        size=args.M, objective=args.objective, d_min=args.d_min,
        starts=args.starts, seed=args.seed)
    report = optimizer.solve(problem, threads=args.threads)
    best = report.best
    best.constellation.save(args.out)
    outputs = [args.out]
    print(f"best objective {best.objective_value:.9f} from start "
          f"{best.start_index} (min distance {best.min_pairwise_distance:.9f}, "
          f"max cone violation {best.max_cone_violation:.3g})")
    if args.report:
        summary = {
            "problem": dataclasses.asdict(problem),
            "best": {
                "objective_value": best.objective_value,
                "start_index": best.start_index,
                "min_pairwise_distance": best.min_pairwise_distance,
                "max_cone_violation": best.max_cone_violation,
                "converged": best.converged,
            },
            "starts": [
                {"start_index": r.start_index, "converged": r.converged,
                 "objective_value": None if not r.converged else r.objective_value}
                for r in report.starts
            ],
        }
        with open(args.report, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
        outputs.append(args.report)
    return outputs


def _cmd_lattice_search(args) -> list[str]:
    result = lattice.optimize_frame(args.M, args.objective, h_max=args.hmax,
                                    use_grid=(args.frames == "grid"))
    result.constellation.save(args.out)
    print(f"objective {result.objective_value:.12g} with frame "
          f"{result.frame_label}")
    return [args.out]


def _cmd_bound(args) -> list[str]:
    c, kiss_tol = _load_constellation(args)
    curve = analysis.bound_curve(c, args.snr_db, args.definition, kiss_tol)
    if args.mode == "nn":
        header, cols = ["snr_db", "ser_nn"], lambda p: [p.snr.value_db, p.ser_nn]
    elif args.mode == "full":
        header, cols = ["snr_db", "ser_full"], lambda p: [p.snr.value_db, p.ser_full]
    else:
        header = ["snr_db", "ser_nn", "ser_full"]
        cols = lambda p: [p.snr.value_db, p.ser_nn, p.ser_full]  # noqa: E731
    _write_csv(args.out, header, [cols(p) for p in curve])
    print(f"wrote {args.out} ({len(curve)} points)")
    return [args.out]


def _cmd_simulate(args) -> list[str]:
    c, _ = _load_constellation(args)
    cfg = simulator.SimConfig(
        constellation=c, snr_grid_db=tuple(args.snr_db),
        definition=args.definition, min_errors=args.min_errors,
        max_symbols=int(args.max_symbols), seed=args.seed,
        batch_size=int(args.batch_size))
    estimates = simulator.simulate_curve(cfg, threads=args.threads)
    rows = [[e.snr.value_db, e.snr.definition, e.errors, e.trials, e.ser,
             e.ci95_halfwidth] for e in estimates]
    _write_csv(args.out, ["snr_db", "definition", "errors", "trials", "ser", "ci95"],
               rows)
    print(f"wrote {args.out} ({len(rows)} points)")
    return [args.out]


def _cmd_gains(args) -> list[str]:
    ids = [s.strip() for s in args.ids.split(",") if s.strip()]
    table = analysis.gain_table(ids, args.ser, args.definition, mode=args.mode)
    print(f"required {args.definition} SNR at SER {args.ser:g} ({args.mode} bound):")
    for id in ids:
        print(f"  {id:14s} {table.required_db[id]:8.4f} dB")
    print("pairwise gains (row over column, dB):")
    print("  " + " ".join(f"{id:>12s}" for id in [""] + ids))
    rows = []
    for a in ids:
        print(f"  {a:>12s} " + " ".join(f"{table.gain_db(a, b):12.4f}" for b in ids))
        for b in ids:
            if a != b:
                rows.append([a, b, args.definition, float(args.ser),
                             table.gain_db(a, b)])
    if args.out:
        _write_csv(args.out, ["winner", "baseline", "definition", "target_ser",
                              "gain_db"], rows)
        return [args.out]
    return []


def _cmd_reproduce(args) -> list[str]:
    crossings: dict[str, simulator.CrossingEstimate] = {}
    if args.mc:
        ids = sorted({a for a, _, _, _ in analysis.REFERENCE_GAINS_DB}
                     | {b for _, b, _, _ in analysis.REFERENCE_GAINS_DB})
        for id in ids:
            entry = catalog.get(id)
            crossings[id] = simulator.estimate_crossing(
                entry.constellation, args.target_ser, seed=args.seed,
                min_errors=args.min_errors, max_symbols=int(args.max_symbols),
                kissing_rel_tol=entry.kissing_rel_tol)

    def required_db(id: str, definition: str) -> float:
        entry = catalog.get(id)
        if args.mc:
            return crossings[id].snr(entry.constellation, definition).value_db
        return analysis.required_snr(
            entry.constellation, args.target_ser, definition,
            kissing_rel_tol=entry.kissing_rel_tol).value_db

    method = "monte-carlo" if args.mc else "union-bound (nearest neighbor)"
    print(f"gains at SER {args.target_ser:g} via {method}; "
          "delta = computed - reference")
    rows = []
    worst = 0.0
    for winner, baseline, definition, expected in analysis.REFERENCE_GAINS_DB:
        got = required_db(baseline, definition) - required_db(winner, definition)
        delta = got - expected
        worst = max(worst, abs(delta))
        rows.append([winner, baseline, definition, expected, got, delta])
        print(f"  {winner:>8s} over {baseline:12s} [{definition:10s}] "
              f"reference {expected:5.2f}  computed {got:7.4f}  delta {delta:+.4f}")
    print(f"largest |delta|: {worst:.4f} dB")
    if args.out:
        _write_csv(args.out, ["winner", "baseline", "definition",
                              "reference_db", "computed_db", "delta_db"], rows)
        return [args.out]
    return []


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="conepack",
        description="Constellation design and link analysis for IM/DD channels.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add(name, func, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(func=func)
        sp.add_argument("--manifest", default=None,
                        help="manifest path (default: <out>.manifest.json)")
        return sp

    sp = add("catalog", _cmd_catalog, help="list or export the built-in formats")
    sp.add_argument("action", choices=["list", "export"])
    sp.add_argument("--id", default=None)
    sp.add_argument("--out", default=None)

    sp = add("evaluate", _cmd_evaluate, help="power/geometry metrics of a constellation")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--in", dest="infile")
    g.add_argument("--id")
    sp.add_argument("--kissing-rel-tol", type=float, default=None)
    sp.add_argument("--cone-tol", type=float, default=geometry.DEFAULT_CONE_TOL)

    sp = add("optimize", _cmd_optimize, help="multistart cone packing")
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--objective", choices=["electrical", "optical"], required=True)
    sp.add_argument("--starts", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--d-min", type=float, default=1.0)
    sp.add_argument("--threads", type=int, default=_default_threads())
    sp.add_argument("--out", required=True)
    sp.add_argument("--report", default=None)

    sp = add("lattice-search", _cmd_lattice_search,
             help="best lattice subset inside the cone")
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--objective", choices=["electrical", "optical"], required=True)
    sp.add_argument("--hmax", type=float, default=3.0)
    sp.add_argument("--frames", choices=["default", "grid"], default="default")
    sp.add_argument("--out", required=True)

    sp = add("bound", _cmd_bound, help="union-bound SER curve to CSV")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--in", dest="infile")
    g.add_argument("--id")
    sp.add_argument("--snr-db", type=_parse_snr_grid,
                    default=_parse_snr_grid("0:20:0.25"))
    sp.add_argument("--definition", choices=["electrical", "optical"],
                    default="electrical")
    sp.add_argument("--mode", choices=["nn", "full", "both"], default="both")
    sp.add_argument("--out", required=True)

    sp = add("simulate", _cmd_simulate, help="Monte Carlo SER curve to CSV")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--in", dest="infile")
    g.add_argument("--id")
    sp.add_argument("--snr-db", type=_parse_snr_grid, required=True)
    sp.add_argument("--definition", choices=["electrical", "optical"],
                    default="electrical")
    sp.add_argument("--min-errors", type=int, default=200)
    sp.add_argument("--max-symbols", type=float, default=1e9)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--batch-size", type=float, default=1e6)
    sp.add_argument("--threads", type=int, default=_default_threads())
    sp.add_argument("--out", required=True)

    sp = add("gains", _cmd_gains, help="pairwise required-SNR gain table")
    sp.add_argument("--ids", required=True, help="comma-separated catalog ids")
    sp.add_argument("--ser", type=float, default=1e-6)
    sp.add_argument("--definition", choices=["electrical", "optical"],
                    default="electrical")
    sp.add_argument("--mode", choices=["nearest_neighbor", "full"],
                    default="nearest_neighbor")
    sp.add_argument("--out", default=None)

    sp = add("reproduce", _cmd_reproduce,
             help="recompute the published gain table and report deltas")
    sp.add_argument("--target-ser", type=float, default=1e-6)
    sp.add_argument("--mc", action="store_true",
                    help="estimate crossings by simulation instead of bounds")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--min-errors", type=int, default=200)
    sp.add_argument("--max-symbols", type=float, default=1e9)
    sp.add_argument("--out", default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "catalog" and args.action == "export" \
            and (not args.id or not args.out):
        parser.error("catalog export needs --id and --out")
    start = time.perf_counter()
    try:
        outputs = args.func(args)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RESOURCE_CAP
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INFEASIBLE
    except (CatalogMissError, InvalidConstellationError, BracketingError,
            ConepackError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    _emit_manifest(args, outputs, time.perf_counter() - start)
    return 0


if __name__ == "__main__":
    sys.exit(main())
