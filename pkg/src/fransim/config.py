"""Scenario configuration: one YAML file drives a whole experiment.

The file has four blocks (topology, workload, policy, run), each
mapping 1:1 onto the owning module's parameters.  Parsing is strict:
unknown keys anywhere are rejected so typos in sweep scripts fail fast
instead of silently running the default.

Example:

    topology:
      n_faps: 5
      fues_per_fap: 6
      capacities: {bbu: 8, fap: 4, fue: 2}
      d2d_enabled: true
    workload:
      exponent: 0.8
      catalog_size: 100
      interests_per_fue: 2000
      inter_arrival: 1.0
    policy:
      name: rate-hop
      tau: 100.0
      alpha: 1.0
      beta: 1.0
      score_rule: rate-times-fetch-hops
    run:
      seeds: [0, 1, 2]
      trace: false
      output: metrics.csv
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .policies import POLICY_NAMES, PolicyConfig, ScoreRule
from .topology import Capacities
from .workload import ZipfSpec

_TOPOLOGY_KEYS = {
    "n_faps", "fues_per_fap", "capacities", "d2d_enabled", "cache_d2d_data",
}
_CAPACITY_KEYS = {"bbu", "fap", "fue"}
_WORKLOAD_KEYS = {
    "exponent", "catalog_size", "seed", "interests_per_fue", "inter_arrival",
}
_POLICY_KEYS = {"name", "tau", "alpha", "beta", "score_rule"}
_RUN_KEYS = {"seeds", "trace", "output", "trace_output"}
_TOP_KEYS = {"topology", "workload", "policy", "run"}


@dataclass
class ScenarioConfig:
    n_faps: int = 5
    fues_per_fap: list[int] = field(default_factory=lambda: [6] * 5)
    capacities: Capacities = field(default_factory=Capacities)
    d2d_enabled: bool = False
    cache_d2d_data: bool = False
    zipf: ZipfSpec = field(default_factory=ZipfSpec)
    policy: str = "rate-hop"
    policy_config: PolicyConfig = field(default_factory=PolicyConfig)
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    trace: bool = False
    output: str = "metrics.csv"
    trace_output: str = "trace.jsonl"


def _require_mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping")
    return value


def _reject_unknown(block: dict, allowed: set, where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) in {where}: {', '.join(sorted(map(str, unknown)))}"
        )


def _typed(block: dict, key: str, kinds, default, where: str):
    if key not in block:
        return default
    value = block[key]
    if isinstance(value, bool) and bool not in (
        kinds if isinstance(kinds, tuple) else (kinds,)
    ):
        raise ConfigError(f"{where}.{key} must not be a boolean")
    if not isinstance(value, kinds):
        raise ConfigError(f"{where}.{key} has the wrong type")
    return value


def load_config(path: str) -> ScenarioConfig:
    """Parse and validate a scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parse_config(raw if raw is not None else {})


def parse_config(raw: dict) -> ScenarioConfig:
    raw = _require_mapping(raw, "config")
    _reject_unknown(raw, _TOP_KEYS, "config")
    cfg = ScenarioConfig()

    topo = _require_mapping(raw.get("topology"), "topology")
    _reject_unknown(topo, _TOPOLOGY_KEYS, "topology")
    cfg.n_faps = _typed(topo, "n_faps", int, cfg.n_faps, "topology")
    if cfg.n_faps < 1:
        raise ConfigError("topology.n_faps must be positive")
    fues = topo.get("fues_per_fap", 6)
    if isinstance(fues, bool) or not isinstance(fues, (int, list)):
        raise ConfigError("topology.fues_per_fap must be an int or a list")
    if isinstance(fues, int):
        cfg.fues_per_fap = [fues] * cfg.n_faps
    else:
        if len(fues) != cfg.n_faps or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in fues
        ):
            raise ConfigError(
                "topology.fues_per_fap must list one int per access point"
            )
        cfg.fues_per_fap = list(fues)
    caps = _require_mapping(topo.get("capacities"), "topology.capacities")
    _reject_unknown(caps, _CAPACITY_KEYS, "topology.capacities")
    defaults = Capacities()
    try:
        cfg.capacities = Capacities(
            bbu=_typed(caps, "bbu", int, defaults.bbu, "capacities"),
            fap=_typed(caps, "fap", int, defaults.fap, "capacities"),
            fue=_typed(caps, "fue", int, defaults.fue, "capacities"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if min(cfg.capacities.bbu, cfg.capacities.fap, cfg.capacities.fue) < 0:
        raise ConfigError("capacities must be non-negative")
    cfg.d2d_enabled = _typed(topo, "d2d_enabled", bool, False, "topology")
    cfg.cache_d2d_data = _typed(topo, "cache_d2d_data", bool, False, "topology")

    wl = _require_mapping(raw.get("workload"), "workload")
    _reject_unknown(wl, _WORKLOAD_KEYS, "workload")
    cfg.zipf = ZipfSpec(
        exponent=float(
            _typed(wl, "exponent", (int, float), 0.8, "workload")
        ),
        catalog_size=_typed(wl, "catalog_size", int, 100, "workload"),
        seed=_typed(wl, "seed", int, 0, "workload"),
        interests_per_fue=_typed(wl, "interests_per_fue", int, 2000, "workload"),
        inter_arrival=float(
            _typed(wl, "inter_arrival", (int, float), 1.0, "workload")
        ),
    )

    pol = _require_mapping(raw.get("policy"), "policy")
    _reject_unknown(pol, _POLICY_KEYS, "policy")
    cfg.policy = _typed(pol, "name", str, "rate-hop", "policy")
    if cfg.policy not in POLICY_NAMES:
        raise ConfigError(
            f"policy.name must be one of {', '.join(POLICY_NAMES)}"
        )
    rule_raw = _typed(
        pol, "score_rule", str, ScoreRule.RATE_TIMES_FETCH_HOPS.value, "policy"
    )
    try:
        rule = ScoreRule(rule_raw)
    except ValueError:
        raise ConfigError(
            f"policy.score_rule must be one of "
            f"{', '.join(r.value for r in ScoreRule)}"
        ) from None
    cfg.policy_config = PolicyConfig(
        tau=float(_typed(pol, "tau", (int, float), 100.0, "policy")),
        alpha=float(_typed(pol, "alpha", (int, float), 1.0, "policy")),
        beta=float(_typed(pol, "beta", (int, float), 1.0, "policy")),
        score_rule=rule,
    )

    run = _require_mapping(raw.get("run"), "run")
    _reject_unknown(run, _RUN_KEYS, "run")
    if "seeds" in run:
        seeds = run["seeds"]
        if not isinstance(seeds, list) or not seeds or not all(
            isinstance(s, int) and not isinstance(s, bool) for s in seeds
        ):
            raise ConfigError("run.seeds must be a non-empty list of ints")
        cfg.seeds = list(seeds)
    elif "seed" in wl:
        cfg.seeds = [cfg.zipf.seed]
    cfg.trace = _typed(run, "trace", bool, False, "run")
    cfg.output = _typed(run, "output", str, "metrics.csv", "run")
    cfg.trace_output = _typed(run, "trace_output", str, "trace.jsonl", "run")
    return cfg
