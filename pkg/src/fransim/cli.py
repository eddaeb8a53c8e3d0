"""Command-line front end.

Three verbs: ``run`` replays one scenario per seed and writes a
metrics CSV; ``sweep`` runs a policy/device-count/D2D grid and can
render SVG charts; ``oracle`` solves the offline placement problem
exactly for a small instance given a demand table.

Exit codes: 0 success, 2 invalid configuration, 3 runtime invariant
violation, 4 oracle instance too large for exhaustive search.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import engine, plotting
from .config import ScenarioConfig, load_config
from .errors import ConfigError, InstanceTooLarge, InvariantViolation
from .oracle import (
    DemandSpec,
    brute_force_optimal,
    linearize,
    verify_linearization,
)
from .policies import POLICY_NAMES
from .topology import Catalog, Topology, build_topology
from .workload import build_schedule

CSV_COLUMNS = (
    "policy", "n_fues", "d2d", "seed", "avg_hops", "cache_hits",
    "hits_own", "hits_d2d", "hits_fap", "hits_bbu", "hits_producer",
    "fronthaul_packets", "total_interests",
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_TOO_LARGE = 4


def _format_row(row: dict) -> dict:
    out = dict(row)
    out["d2d"] = "on" if row["d2d"] else "off"
    out["avg_hops"] = repr(float(row["avg_hops"]))
    return out


def _write_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(_format_row(row))


def _build_topology(cfg: ScenarioConfig) -> Topology:
    try:
        return build_topology(
            cfg.n_faps, cfg.fues_per_fap, cfg.capacities, cfg.d2d_enabled
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _trace_path(base: str, seed: int, many: bool) -> str:
    if not many:
        return base
    path = Path(base)
    return str(path.with_name(f"{path.stem}_seed{seed}{path.suffix}"))


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.output = args.output
    topo = _build_topology(cfg)
    catalog = Catalog(cfg.zipf.catalog_size)
    n_fues = len(topo.fues())
    rows = []
    for seed in cfg.seeds:
        zipf = replace(cfg.zipf, seed=seed)
        schedule = build_schedule(zipf, topo.fues())
        trace_records: list | None = [] if cfg.trace else None
        sim = engine.Simulation(
            topo,
            catalog,
            cfg.policy,
            cfg.policy_config,
            debug=args.debug,
            cache_d2d_data=cfg.cache_d2d_data,
            trace=trace_records,
        )
        report = sim.run_schedule(schedule)
        rows.append(
            engine.metrics_row(cfg.policy, n_fues, cfg.d2d_enabled, seed, report)
        )
        if trace_records is not None:
            path = _trace_path(cfg.trace_output, seed, len(cfg.seeds) > 1)
            with open(path, "w", encoding="utf-8") as handle:
                for record in trace_records:
                    handle.write(json.dumps(record, sort_keys=True))
                    handle.write("\n")
    _write_csv(cfg.output, rows)
    print(f"wrote {len(rows)} rows to {cfg.output}")
    return EXIT_OK


def _parse_fues(text: str) -> list[int]:
    text = text.strip()
    try:
        if ".." in text:
            span, _, step_text = text.partition(":")
            start_text, _, stop_text = span.partition("..")
            start, stop = int(start_text), int(stop_text)
            step = int(step_text) if step_text else 5
            if step < 1 or stop < start:
                raise ValueError
            return list(range(start, stop + 1, step))
        counts = [int(part) for part in text.split(",") if part.strip()]
        if not counts or min(counts) < 1:
            raise ValueError
        return counts
    except ValueError:
        raise ConfigError(
            f"cannot parse device counts {text!r}; use e.g. 5..30:5 or "
            "5,10,20"
        ) from None


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.output = args.output
    fue_counts = _parse_fues(args.fues)
    if min(fue_counts) < cfg.n_faps:
        raise ConfigError(
            f"device count {min(fue_counts)} cannot cover "
            f"{cfg.n_faps} access points with one device each"
        )
    policies = tuple(p.strip() for p in args.policies.split(",") if p.strip())
    for policy in policies:
        if policy not in POLICY_NAMES:
            raise ConfigError(
                f"unknown policy {policy!r}; expected one of "
                f"{', '.join(POLICY_NAMES)}"
            )
    d2d_options = {
        "both": (False, True), "off": (False,), "on": (True,),
    }[args.d2d]
    rows = engine.sweep(
        fue_counts,
        policies,
        d2d_options,
        cfg.seeds,
        n_faps=cfg.n_faps,
        capacities=cfg.capacities,
        zipf=cfg.zipf,
        policy_config=cfg.policy_config,
        cache_d2d_data=cfg.cache_d2d_data,
        debug=args.debug,
        n_jobs=args.jobs,
    )
    _write_csv(cfg.output, rows)
    print(f"wrote {len(rows)} rows to {cfg.output}")
    if args.plot:
        out_dir = Path(cfg.output).parent
        for filename, svg in sorted(plotting.sweep_charts(rows).items()):
            target = out_dir / filename
            target.write_text(svg, encoding="utf-8")
            print(f"wrote {target}")
    return EXIT_OK


def load_demand_csv(path: str, topo: Topology) -> DemandSpec:
    """Read a (name, fue, rate) table; devices by label or node id."""
    base: dict[tuple[str, int], float] = {}
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or set(reader.fieldnames) != {
                "name", "fue", "rate",
            }:
                raise ConfigError(
                    f"demand table {path} must have columns name,fue,rate"
                )
            for line in reader:
                fue = _node_id(line["fue"], topo)
                base[(line["name"].strip(), fue)] = float(line["rate"])
    except OSError as exc:
        raise ConfigError(f"cannot read demand table {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad demand table {path}: {exc}") from exc
    return DemandSpec(base)


def demand_from_trace(path: str, topo: Topology) -> DemandSpec:
    """Empirical demand: requests issued per (content, device) in an
    event-trace file written by ``run`` with trace enabled."""
    fues = set(topo.fues())
    counts: dict[tuple[str, int], float] = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if (
                    record.get("kind") == "interest"
                    and record.get("node") in fues
                    and record.get("outcome") in ("own-hit", "forwarded")
                ):
                    key = (record["name"], record["node"])
                    counts[key] = counts.get(key, 0.0) + 1.0
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read trace {path}: {exc}") from exc
    return DemandSpec(counts)


def _node_id(text: str, topo: Topology) -> int:
    text = text.strip()
    if text in topo.label_to_id:
        return topo.label_to_id[text]
    return int(text)


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    topo = _build_topology(cfg)
    if args.demand:
        demand = load_demand_csv(args.demand, topo)
    elif args.demand_from_trace:
        demand = demand_from_trace(args.demand_from_trace, topo)
    else:
        raise ConfigError("oracle needs --demand or --demand-from-trace")
    try:
        demand.validate(topo)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    placement, value = brute_force_optimal(topo, demand)
    print(f"optimal = {value:g}")
    chosen = sorted(
        (name, topo.labels[node]) for (name, node), x in placement.items() if x
    )
    if chosen:
        for name, label in chosen:
            print(f"  {name} @ {label}")
    else:
        print("  (empty placement)")
    if args.lp_out:
        program = linearize(topo, demand)
        Path(args.lp_out).write_text(program.to_text(), encoding="utf-8")
        print(f"wrote {args.lp_out}")
    if args.verify_linearization:
        result = verify_linearization(topo, demand)
        verdict = "exact" if result else f"MISMATCH: {result.message}"
        print(
            f"linearization over {result.checked} assignments: {verdict}"
        )
        if not result:
            return EXIT_INVARIANT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fransim",
        description="Named-data fog-RAN caching simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario per seed")
    p_run.add_argument("config", help="scenario YAML file")
    p_run.add_argument("--output", help="metrics CSV path (overrides config)")
    p_run.add_argument(
        "--debug", action="store_true",
        help="enable runtime consistency checks",
    )
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a factorial grid")
    p_sweep.add_argument("config", help="scenario YAML file")
    p_sweep.add_argument(
        "--fues", default="5..30:5",
        help="device counts: 5..30:5 or a comma list (default 5..30:5)",
    )
    p_sweep.add_argument(
        "--policies", default=",".join(POLICY_NAMES),
        help="comma-separated policies (default all)",
    )
    p_sweep.add_argument(
        "--d2d", choices=("both", "on", "off"), default="both",
        help="which D2D settings to run (default both)",
    )
    p_sweep.add_argument(
        "--plot", action="store_true",
        help="write one SVG chart per metric and D2D setting",
    )
    p_sweep.add_argument(
        "--jobs", type=int, default=1, help="parallel worker processes"
    )
    p_sweep.add_argument("--output", help="metrics CSV path")
    p_sweep.add_argument(
        "--debug", action="store_true",
        help="enable runtime consistency checks",
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_oracle = sub.add_parser(
        "oracle", help="solve the offline placement problem exactly"
    )
    p_oracle.add_argument("config", help="scenario YAML file (topology)")
    p_oracle.add_argument("--demand", help="demand table CSV (name,fue,rate)")
    p_oracle.add_argument(
        "--demand-from-trace",
        help="derive demand from an event-trace file instead",
    )
    p_oracle.add_argument(
        "--verify-linearization", action="store_true",
        help="exhaustively check the zero-one linearization",
    )
    p_oracle.add_argument(
        "--lp-out", help="write the linearized program as text"
    )
    p_oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE


if __name__ == "__main__":
    sys.exit(main())
