"""Command-line interface: ``pairoverlap {cluster,generate,calibrate}``.

Exit codes: 0 success, 1 data error, 2 bad flags or malformed scenario.
The default output directory for ``cluster`` and ``generate`` can be set
with the ``PAIROVERLAP_OUT`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .calibration import CalibrationError, interval_geometry, m_from_overlap, overlap_from_m
from .datagen import (
    DataError,
    ScenarioError,
    generate_scenario,
    load_csv,
    load_scenario_config,
    square_scenario,
    standardize,
    write_csv,
)
from .engine import INIT_METHODS, FitConfig, run_restarts, select_best
from .graph import count_overlaps, extract_graph, to_dot, to_json

REPORT_SCHEMA = "pairoverlap.report/1"
DEFAULT_OVERLAP = 1.0 / 3.0


def _default_out(name: str) -> str:
    return os.environ.get("PAIROVERLAP_OUT", name)


def _dump(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairoverlap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="fit a pairwise overlapping clustering and export its graph")
    p.add_argument("--input", required=True, help="comma-separated numeric matrix")
    p.add_argument("--header", action="store_true", help="first row of the CSV is a header")
    p.add_argument("--label-column", help="header column holding row labels")
    p.add_argument("--standardize", action="store_true", help="z-score each column before fitting")
    p.add_argument("--k", type=int, default=8)
    level = p.add_mutually_exclusive_group()
    level.add_argument("--m", type=float, help="objective exponent, >= 1")
    level.add_argument("--overlap", type=float, help="overlap level in [0, 1) (default 1/3)")
    p.add_argument("--gamma", type=float, default=0.1, help="edge threshold in [0, 1]")
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--init", choices=INIT_METHODS, default="random-points")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="threads for independent restarts")
    p.add_argument("--out", default=None, help="output directory (default $PAIROVERLAP_OUT or ./run)")
    p.set_defaults(func=cmd_cluster)

    g = sub.add_parser("generate", help="write a synthetic blob-and-bridge dataset")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario JSON with keys blobs, bridges, seed")
    src.add_argument("--square", action="store_true", help="four-blob square with bridges (0,1) and (1,2)")
    g.add_argument("--seed", type=int, help="override the scenario seed")
    g.add_argument("--out", default=None, help="output directory (default $PAIROVERLAP_OUT or ./scenario)")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("calibrate", help="convert between m and the overlap level")
    which = c.add_mutually_exclusive_group(required=True)
    which.add_argument("--m", type=float)
    which.add_argument("--overlap", type=float)
    c.set_defaults(func=cmd_calibrate)
    return parser


def _resolve_m(args, parser) -> tuple[float, float]:
    try:
        if args.m is not None:
            return args.m, overlap_from_m(args.m)
        r = DEFAULT_OVERLAP if args.overlap is None else args.overlap
        return m_from_overlap(r), r
    except CalibrationError as exc:
        flag = "--m" if args.m is not None else "--overlap"
        parser.error(f"{flag}: {exc}")


def cmd_cluster(args, parser) -> int:
    m, r_overlap = _resolve_m(args, parser)
    if not 0.0 <= args.gamma <= 1.0:
        parser.error(f"--gamma: must lie in the range [0, 1], got {args.gamma}")
    for flag, value in (("--k", args.k), ("--restarts", args.restarts), ("--max-iter", args.max_iter)):
        if value < 1:
            parser.error(f"{flag}: must be >= 1, got {value}")
    if args.seed < 0:
        parser.error(f"--seed: must be nonnegative, got {args.seed}")
    if args.label_column and not args.header:
        parser.error("--label-column requires --header")

    started = time.perf_counter()
    try:
        data = load_csv(args.input, has_header=args.header, label_column=args.label_column)
        if args.standardize:
            data = standardize(data)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.k > data.n_points:
        print(f"error: --k {args.k} exceeds the number of rows ({data.n_points}) in {args.input}", file=sys.stderr)
        return 1

    config = FitConfig(
        k=args.k, m=m, init=args.init, restarts=args.restarts,
        max_iterations=args.max_iter, seed=args.seed,
    )
    models = run_restarts(data, config, workers=args.workers)
    best_idx, model = select_best(models)
    graph = extract_graph(model, args.gamma)

    model_doc = model.to_dict()
    if data.labels is not None:
        model_doc["labels"] = list(data.labels)
    report = {
        "schema": REPORT_SCHEMA,
        "config": {
            "input": args.input,
            "header": args.header,
            "label_column": args.label_column,
            "standardize": args.standardize,
            "n_points": data.n_points,
            "n_features": data.n_features,
            "k": config.k,
            "m": m,
            "overlap": r_overlap,
            "m_source": "m" if args.m is not None else "overlap",
            "gamma": args.gamma,
            "restarts": config.restarts,
            "init": config.init,
            "max_iterations": config.max_iterations,
            "seed": config.seed,
        },
        "restart_objectives": [mm.objective for mm in models],
        "restart_converged": [mm.converged for mm in models],
        "winning_restart": best_idx,
        "objective": model.objective,
        "cluster_sizes": model.cluster_sizes().tolist(),
        "overlaps": [{"i": i, "j": j, "count": n} for (i, j), n in count_overlaps(model).items()],
        "edges": [[e.i, e.j] for e in graph.edges],
        # the only nondeterministic fields; excluded from reproducibility checks
        "timing": {
            "wall_seconds": time.perf_counter() - started,
            "finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        },
    }

    out = Path(args.out or _default_out("run"))
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(_dump(model_doc))
    (out / "graph.json").write_text(to_json(graph))
    (out / "graph.dot").write_text(to_dot(graph))
    (out / "report.json").write_text(_dump(report))
    print(
        f"k={config.k} m={m:.6g} objective={model.objective:.6g} "
        f"(restart {best_idx} of {config.restarts}); {len(graph.edges)} edge(s); wrote {out}/"
    )
    return 0


def cmd_generate(args, parser) -> int:
    try:
        if args.square:
            blobs, bridges = square_scenario()
            seed = 0
        else:
            blobs, bridges, seed = load_scenario_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ScenarioError("--seed must be nonnegative")
            seed = args.seed
        truth = generate_scenario(blobs, bridges, seed)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out or _default_out("scenario"))
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "data.csv", truth.dataset)
    (out / "truth.json").write_text(
        _dump({"seed": seed, "bridges": sorted(list(p) for p in truth.true_bridges), "origin": truth.origin.tolist()})
    )
    print(f"wrote {truth.dataset.n_points} points to {out / 'data.csv'}")
    return 0


def cmd_calibrate(args, parser) -> int:
    m, r = _resolve_m(args, parser)
    geo = interval_geometry(m, 1.0)
    print(f"m        = {m:.6f}")
    print(f"overlap  = {r:.6f}")
    print("unit interval between two adjacent means:")
    print(f"  exclusive to first   {geo.l_exclusive:.6f}")
    print(f"  shared               {geo.l_overlap:.6f}")
    print(f"  exclusive to second  {geo.l_exclusive:.6f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
