"""Regenerate the seven-node walkthrough goldens.

Runs the small replacement scenario (two access points with two
devices each, capacities 2/2/1, request sequence C1 C2 C1 C2 C3 C3)
under FIFO and under the rate-and-hop policy with seeded BBU rates,
checks every store and metric against the hand-traced expectations,
and only then writes tests/data/walkthrough_*.json.  If the engine
ever drifts from the hand trace this script fails instead of silently
refreshing the goldens.
"""

import json
from pathlib import Path

from fransim.engine import Simulation
from fransim.policies import PolicyConfig
from fransim.topology import Capacities, Catalog, build_topology

DATA_DIR = Path(__file__).resolve().parent.parent / "tests" / "data"

TOPOLOGY = {
    "n_faps": 2,
    "fues_per_fap": [2, 2],
    "capacities": {"bbu": 2, "fap": 2, "fue": 1},
}

REQUESTS = [
    [0.0, "fue1", "c1"],
    [1.0, "fue2", "c2"],
    [2.0, "fue3", "c1"],
    [3.0, "fue4", "c2"],
    [4.0, "fue1", "c3"],
    [5.0, "fue2", "c3"],
]

# Hand-traced outcomes.  FIFO: the BBU's oldest entry (c1) is evicted
# when c3 arrives, and access point 1 then serves the second c3 from
# its own refreshed store.  Rate-and-hop: the seeded BBU rates make
# both incumbents too valuable for c3 (score 5x1 vs 2x1), so the BBU
# keeps c1/c2; access point 1 rejects the first c3 (tie, 2 vs 2) but
# accepts the second (4 > 2), evicting its earliest insert, c1.
EXPECTED = {
    "fifo": {
        "seed_rates": {},
        "final_stores": {
            "bbu": ["c2", "c3"],
            "fap1": ["c2", "c3"],
            "fap2": ["c1", "c2"],
            "fue1": ["c3"],
            "fue2": ["c3"],
            "fue3": ["c1"],
            "fue4": ["c2"],
        },
        "metrics": {
            "total_interests": 6,
            "total_hops": 28,
            "in_network_cache_hits": 3,
            "hits_by_tier": {
                "own_cs": 0, "d2d": 0, "fap": 1, "bbu": 2, "producer": 3,
            },
            "fronthaul_packets": 10,
        },
    },
    "rate-hop": {
        "seed_rates": {"bbu": {"c1": 4.0, "c2": 4.0}},
        "final_stores": {
            "bbu": ["c1", "c2"],
            "fap1": ["c2", "c3"],
            "fap2": ["c1", "c2"],
            "fue1": ["c1"],
            "fue2": ["c2"],
            "fue3": ["c1"],
            "fue4": ["c2"],
        },
        "metrics": {
            "total_interests": 6,
            "total_hops": 32,
            "in_network_cache_hits": 2,
            "hits_by_tier": {
                "own_cs": 0, "d2d": 0, "fap": 0, "bbu": 2, "producer": 4,
            },
            "fronthaul_packets": 12,
        },
    },
}


def run_case(policy: str, seed_rates: dict) -> Simulation:
    topo = build_topology(
        TOPOLOGY["n_faps"],
        TOPOLOGY["fues_per_fap"],
        Capacities(**TOPOLOGY["capacities"]),
    )
    sim = Simulation(topo, Catalog(3), policy, PolicyConfig(), debug=True)
    for label, rates in seed_rates.items():
        for name, rate in rates.items():
            sim.seed_rate(topo.label_to_id[label], name, rate)
    for t, label, name in REQUESTS:
        sim.request(topo.label_to_id[label], name, t)
    return sim, topo


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    for policy, expected in EXPECTED.items():
        sim, topo = run_case(policy, expected["seed_rates"])
        stores = {
            label: sorted(sim.cs_contents(topo.label_to_id[label]))
            for label in expected["final_stores"]
        }
        assert stores == expected["final_stores"], (
            f"{policy}: stores {stores} != hand trace"
        )
        report = sim.report()
        got = {
            "total_interests": report.total_interests,
            "total_hops": report.total_hops,
            "in_network_cache_hits": report.in_network_cache_hits,
            "hits_by_tier": report.hits_by_tier,
            "fronthaul_packets": report.fronthaul_packets,
        }
        assert got == expected["metrics"], (
            f"{policy}: metrics {got} != hand trace"
        )
        golden = {
            "topology": TOPOLOGY,
            "catalog_size": 3,
            "policy": policy,
            "seed_rates": expected["seed_rates"],
            "requests": REQUESTS,
            "final_stores": expected["final_stores"],
            "metrics": expected["metrics"],
        }
        slug = policy.replace("-", "")
        path = DATA_DIR / f"walkthrough_{slug}.json"
        path.write_text(
            json.dumps(golden, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
