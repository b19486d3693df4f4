"""Command-line pipeline: synth, trace, baseline, refine, eval, serve.

Values resolve in order: command-line flag, then `--config` JSON (subcommand
section over flat keys), then the module defaults.  Exit codes: 0 success,
1 usage or config error, 2 data or IO error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from .baseline import density_grid, extract_graph
from .evalgeo import EvalConfig, geo_precision_recall
from .graph import RoadGraph, load_graph, save_graph
from .refine import RefineConfig, refine_geometry
from .spatial import build_index
from .synth import SynthConfig, SynthError, make_ground_truth, simulate_trips
from .tracer import GpsOracle, TraceConfig, detect_seeds, trace
from .trajectories import load_trajectories, save_trajectories


class UsageError(Exception):
    pass


_FLOAT = "float"
_INT = "int"
_STR = "str"

CONFIG_KEYS: dict[str, dict[str, str]] = {
    "synth": {"graph": _STR, "n_trips": _INT, "speed": _FLOAT,
              "sample_interval": _FLOAT, "noise_sigma": _FLOAT,
              "bias_radius": _FLOAT, "rng_seed": _INT},
    "trace": {"n_bins": _INT, "step_d": _FLOAT, "r_match": _FLOAT,
              "r_hist": _FLOAT, "smooth_sigma_bins": _FLOAT,
              "conf_threshold": _FLOAT, "merge_radius": _FLOAT,
              "exclusion_halfwidth": _FLOAT, "max_iterations": _INT},
    "baseline": {"cell_size": _FLOAT, "threshold": _INT},
    "refine": {"junction_snap": _FLOAT, "simplify_tol": _FLOAT,
               "smooth_window": _INT, "min_component_len": _FLOAT},
    "eval": {"sample_spacing": _FLOAT, "d_match": _FLOAT},
    "serve": {"port": _INT, "data_dir": _STR, "merge_radius": _FLOAT,
              "static_dir": _STR},
}


def _check_type(cmd: str, key: str, value, kind: str) -> None:
    ok = {(_INT): lambda v: isinstance(v, int) and not isinstance(v, bool),
          (_FLOAT): lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
          (_STR): lambda v: isinstance(v, str)}[kind](value)
    if not ok:
        raise UsageError(f"config key {cmd}.{key}: expected {kind}, got {value!r}")


def load_config(path: str | None, cmd: str) -> dict:
    """Read the config file and return the values that apply to `cmd`."""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: invalid JSON: {exc}")
    if not isinstance(doc, dict):
        raise UsageError(f"config {path}: top level must be an object")

    effective: dict = {}
    sections: dict = {}
    for key, value in doc.items():
        if key in CONFIG_KEYS:
            if not isinstance(value, dict):
                raise UsageError(f"config section {key!r} must be an object")
            for sub, subval in value.items():
                if sub not in CONFIG_KEYS[key]:
                    raise UsageError(f"unknown config key {key}.{sub}")
                _check_type(key, sub, subval, CONFIG_KEYS[key][sub])
            sections[key] = value
        else:
            owners = [c for c, keys in CONFIG_KEYS.items() if key in keys]
            if not owners:
                raise UsageError(f"unknown config key {key!r}")
            for owner in owners:
                _check_type(owner, key, value, CONFIG_KEYS[owner][key])
            if cmd in owners:
                effective[key] = value
    effective.update(sections.get(cmd, {}))
    return effective


def resolve(args: argparse.Namespace, cmd: str) -> dict:
    """Merge CLI flags over config-file values for `cmd`'s known keys."""
    merged = load_config(args.config, cmd)
    for key in CONFIG_KEYS[cmd]:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    return merged


def _build(config_cls, values: dict):
    try:
        return config_cls(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))


def _write_report(path: str, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")


def cmd_synth(args: argparse.Namespace) -> int:
    values = resolve(args, "synth")
    kind = values.pop("graph", None)
    if kind is None:
        raise UsageError("synth requires --graph (e.g. \"grid(6,100)\")")
    values.setdefault("n_trips", 100)
    cfg = _build(SynthConfig, {"graph_kind": kind, **values})
    truth = make_ground_truth(cfg.graph_kind)
    trips = simulate_trips(truth, cfg)
    save_graph(truth, args.out_graph)
    save_trajectories(trips, truth.projection, args.out_trips)
    return 0


def _parse_seed_at(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--seed-at expects X,Y, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"--seed-at expects numeric X,Y, got {text!r}")


def cmd_trace(args: argparse.Namespace) -> int:
    cfg = _build(TraceConfig, resolve(args, "trace"))
    explicit_seeds = [_parse_seed_at(s) for s in args.seed_at or []]

    started = time.perf_counter()
    base = load_graph(args.base) if args.base else None
    trajs, projection = load_trajectories(
        args.input, base.projection if base else None)
    if base is None:
        base = RoadGraph(projection=projection)
    index = build_index(trajs)

    seeds = list(explicit_seeds)
    if not seeds and args.detect_seeds is not None:
        seeds = detect_seeds(index, args.detect_seeds, cfg)
    if not seeds and not base.vertices:
        seeds = detect_seeds(index, 3, cfg)

    result = trace(base, seeds, GpsOracle(index, cfg), cfg)
    save_graph(result.graph, args.out)
    report = {
        "iterations": result.iterations,
        "edges_added": result.edges_added,
        "stop_reason": result.stop_reason,
        "truncated": result.truncated,
        "n_vertices": len(result.graph.vertices),
        "n_edges": len(result.graph.edges),
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    _write_report(args.report or args.out + ".report.json", report)
    return 0


def cmd_baseline(args: argparse.Namespace) -> int:
    values = resolve(args, "baseline")
    cell_size = float(values.get("cell_size", 5.0))
    threshold = int(values.get("threshold", 2))
    if cell_size <= 0:
        raise UsageError("cell_size must be positive")
    if threshold < 1:
        raise UsageError("threshold must be >= 1")

    started = time.perf_counter()
    trajs, projection = load_trajectories(args.input)
    grid = density_grid(trajs, cell_size)
    graph = extract_graph(grid, threshold, projection)
    save_graph(graph, args.out)
    report = {
        "cell_size": cell_size,
        "threshold": threshold,
        "n_vertices": len(graph.vertices),
        "n_edges": len(graph.edges),
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    _write_report(args.report or args.out + ".report.json", report)
    return 0


def cmd_refine(args: argparse.Namespace) -> int:
    cfg = _build(RefineConfig, resolve(args, "refine"))
    graph = load_graph(args.input)
    save_graph(refine_geometry(graph, cfg), args.out)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _build(EvalConfig, resolve(args, "eval"))
    inferred = load_graph(args.inferred)
    truth = load_graph(args.truth)
    report = geo_precision_recall(inferred, truth, cfg).as_dict()
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import make_app

    values = resolve(args, "serve")
    app = make_app(data_dir=values.get("data_dir"),
                   merge_radius=float(values.get("merge_radius", 10.0)),
                   static_dir=values.get("static_dir"))
    uvicorn.run(app, host=args.host, port=int(values.get("port", 8000)))
    return 0


def _add_config_flags(parser: argparse.ArgumentParser, cmd: str) -> None:
    parser.add_argument("--config", help="JSON config file")
    flag_types = {_INT: int, _FLOAT: float, _STR: str}
    for key, kind in CONFIG_KEYS[cmd].items():
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key,
                            type=flag_types[kind], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajmap",
        description="Road-network inference and editing from GPS trajectories")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate ground truth and trips")
    _add_config_flags(p, "synth")
    p.add_argument("--out-graph", required=True)
    p.add_argument("--out-trips", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("trace", help="trace roads from a trajectory CSV")
    _add_config_flags(p, "trace")
    p.add_argument("--input", required=True, help="trajectory CSV")
    p.add_argument("--base", help="base graph to extend")
    p.add_argument("--seed-at", action="append", metavar="X,Y",
                   help="seed position in meters; repeatable")
    p.add_argument("--detect-seeds", type=int, metavar="K",
                   help="auto-detect K seed positions")
    p.add_argument("--out", required=True, help="output graph file")
    p.add_argument("--report", help="run report path (default OUT.report.json)")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("baseline", help="density-threshold road extraction")
    _add_config_flags(p, "baseline")
    p.add_argument("--input", required=True, help="trajectory CSV")
    p.add_argument("--out", required=True, help="output graph file")
    p.add_argument("--report", help="run report path (default OUT.report.json)")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("refine", help="snap, smooth and simplify a graph")
    _add_config_flags(p, "refine")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("eval", help="precision/recall of inferred vs truth")
    _add_config_flags(p, "eval")
    p.add_argument("inferred")
    p.add_argument("truth")
    p.add_argument("--out", help="write JSON report here instead of stdout")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the editing HTTP API")
    _add_config_flags(p, "serve")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (OSError, SynthError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
