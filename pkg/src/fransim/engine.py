"""Deterministic simulation engine.

The engine replays a request schedule against a topology under one
replacement policy and reports hop and hit metrics.  Transmission is
modelled as instantaneous, so each interest is processed to completion
(up the tree to wherever it is served, data back down with caching)
before the next arrival.  Events are totally ordered by (time, kind,
sequence) with rate-refresh ticks firing before same-time arrivals;
processing is single-threaded and uses no randomness, so a run is a
pure function of (topology, schedule, policy, knobs).

For speed the hot path keys all per-node state by integer content
rank rather than by name, stores demand rates in dense lists, and
relies on two exact shortcuts: FIFO and LRU victims are taken from
dict insertion order (equivalent to comparing stamps, since stamps are
assigned in insertion order), and the selective policy caches each
store's minimum entry score so the common reject decision is O(1).
The cached minimum is invalidated whenever rates are refreshed or the
store mutates; data arrivals only bump the rate of content that is not
in the store, which cannot lower the minimum.  Pending-interest state
collapses within one processed chain, so the PIT bookkeeping runs only
under ``debug``, where it feeds the single-forward and flow
conservation checks.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass, field, replace

from .errors import InvariantViolation
from .policies import PolicyConfig, ScoreRule, POLICY_NAMES
from .topology import Capacities, Catalog, Topology, build_topology, distribute_fues
from .workload import ZipfSpec, build_schedule

TIER_KEYS = ("own_cs", "d2d", "fap", "bbu", "producer")


@dataclass
class MetricsReport:
    total_interests: int = 0
    total_hops: int = 0
    in_network_cache_hits: int = 0
    hits_by_tier: dict[str, int] = field(
        default_factory=lambda: dict.fromkeys(TIER_KEYS, 0)
    )
    fronthaul_packets: int = 0
    unsolicited_drops: int = 0

    @property
    def avg_hops(self) -> float:
        if self.total_interests == 0:
            return 0.0
        return self.total_hops / self.total_interests


class Simulation:
    """One run's mutable state plus the request-processing kernel.

    Drive it either with :meth:`run_schedule` or by calling
    :meth:`tick` and :meth:`request` by hand for scripted scenarios.
    """

    def __init__(
        self,
        topo: Topology,
        catalog: Catalog,
        policy: str,
        policy_config: PolicyConfig | None = None,
        *,
        debug: bool = False,
        cache_d2d_data: bool = False,
        trace=None,
    ):
        if policy not in POLICY_NAMES:
            raise ValueError(f"unknown policy {policy!r}")
        self.topo = topo
        self.catalog = catalog
        self.policy = policy
        self.config = policy_config or PolicyConfig()
        self.debug = debug
        self.cache_d2d_data = cache_d2d_data
        if trace is None:
            self._emit = None
        else:
            self._emit = trace.append if isinstance(trace, list) else trace

        n = len(topo)
        k = len(catalog)
        self._k = k
        self._is_lru = policy == "lru"
        self._is_ratehop = policy == "rate-hop"
        self._rate_only = self.config.score_rule is ScoreRule.RATE_ONLY

        # Per-node state, indexed by NodeId.  Stores map content rank
        # (0-based) to (inserted_stamp, fetch_hops) for the selective
        # policy and to None for FIFO/LRU, which only need dict order.
        self._cap = list(topo.capacity)
        self._cs: list[dict] = [{} for _ in range(n)]
        self._pit: list[set] = [set() for _ in range(n)]
        if self._is_ratehop:
            self._rates = [[0.0] * k for _ in range(n)]
            self._wc = [[0] * k for _ in range(n)]
            self._min_score: list[float | None] = [None] * n
        # One directory per access point: rank -> set of devices
        # under that access point currently caching the content.
        self._dir: list[dict[int, set[int]] | None] = [None] * n
        for fap in topo.faps():
            self._dir[fap] = {}
        self._fap_of = [0] * n
        self._paths: dict[int, tuple[int, int, int, int]] = {}
        for fue in topo.fues():
            path = topo.upstream_path(fue)
            self._paths[fue] = tuple(path)
            self._fap_of[fue] = path[1]
        self._d2d = topo.d2d_enabled

        self.seq = 0
        self._n = 0
        self._hops = 0
        self._fronthaul = 0
        self._hits = [0, 0, 0, 0, 0]  # own, d2d, fap, bbu, producer

    # -- public inspection / scripting helpers ------------------------

    def cs_contents(self, node: int) -> set[str]:
        """Names currently cached at a node."""
        names = self.catalog.names
        return {names[r] for r in self._cs[node]}

    def seed_rate(self, node: int, name: str, rate: float) -> None:
        """Warm-start the tracked demand rate at one node."""
        if not self._is_ratehop:
            raise ValueError("only the rate-tracking policy keeps rates")
        self._rates[node][self.catalog.index[name]] = float(rate)
        self._min_score[node] = None

    def rate_of(self, node: int, name: str) -> float:
        if not self._is_ratehop:
            return 0.0
        return self._rates[node][self.catalog.index[name]]

    def report(self) -> MetricsReport:
        own, d2d, fap, bbu, prod = self._hits
        return MetricsReport(
            total_interests=self._n,
            total_hops=self._hops,
            in_network_cache_hits=own + d2d + fap + bbu,
            hits_by_tier={
                "own_cs": own,
                "d2d": d2d,
                "fap": fap,
                "bbu": bbu,
                "producer": prod,
            },
            fronthaul_packets=self._fronthaul,
        )

    # -- event processing ---------------------------------------------

    def tick(self, now: float) -> None:
        """Refresh every node's demand estimates (window -> smoothed)."""
        self.seq += 1
        if self._is_ratehop:
            alpha = self.config.alpha
            beta = self.config.beta
            denom = alpha + beta
            rates = self._rates
            wc = self._wc
            k = self._k
            for node in range(len(rates)):
                old = rates[node]
                w = wc[node]
                rates[node] = [
                    (alpha * w[r] + beta * old[r]) / denom for r in range(k)
                ]
                wc[node] = [0] * k
                self._min_score[node] = None
        if self._emit is not None:
            self._emit(
                {"time": now, "seq": self.seq, "node": None, "kind": "tick",
                 "name": None, "outcome": "refresh"}
            )
        if self.debug:
            self._check_global()

    def request(self, fue: int, name: str, now: float) -> None:
        """Process one consumer request to completion."""
        self._request(fue, self.catalog.index[name], now)

    def _request(self, fue: int, rank: int, now: float) -> None:
        self.seq += 1
        seq = self.seq
        self._n += 1
        path = self._paths[fue]
        cs = self._cs
        ratehop = self._is_ratehop
        debug = self.debug
        emit = self._emit

        # Tier 0: the device's own store.
        store = cs[fue]
        if rank in store:
            if self._is_lru:
                store[rank] = store.pop(rank)
            self._hits[0] += 1
            if emit is not None:
                self._trace(now, seq, fue, "interest", rank, "own-hit")
            return
        if ratehop:
            self._wc[fue][rank] += 1
        if debug:
            self._forward(fue, rank)
        if emit is not None:
            self._trace(now, seq, fue, "interest", rank, "forwarded")

        # Tier 1: the access point (which may broker a D2D serve).
        fap = path[1]
        if ratehop:
            self._wc[fap][rank] += 1
        store_a = cs[fap]
        if rank in store_a:
            if self._is_lru:
                store_a[rank] = store_a.pop(rank)
            self._hits[2] += 1
            self._hops += 2
            if emit is not None:
                self._trace(now, seq, fap, "interest", rank, "cs-hit")
            self._deliver(rank, now, seq, path, 1)
            return
        if self._d2d:
            holders = self._dir[fap].get(rank)
            if holders:
                peer = min(holders)
                if self._is_lru:
                    cs_p = cs[peer]
                    cs_p[rank] = cs_p.pop(rank)
                self._hits[1] += 1
                self._hops += 2
                if ratehop:
                    self._rates[fue][rank] += 1.0
                if emit is not None:
                    self._trace(now, seq, fap, "interest", rank, "d2d")
                    self._trace(now, seq, fue, "data", rank, "delivered")
                if self.cache_d2d_data:
                    self._cache(fue, rank, 1, seq)
                if debug:
                    self._consume(fue, rank)
                    self._check_chain(path, 1)
                return
        if debug:
            self._forward(fap, rank)
        if emit is not None:
            self._trace(now, seq, fap, "interest", rank, "forwarded")

        # Tier 2: the BBU pool.  Passing it means crossing the
        # fronthaul twice (interest up now, data back down later).
        self._fronthaul += 2
        bbu = path[2]
        if ratehop:
            self._wc[bbu][rank] += 1
        store_b = cs[bbu]
        if rank in store_b:
            if self._is_lru:
                store_b[rank] = store_b.pop(rank)
            self._hits[3] += 1
            self._hops += 4
            if emit is not None:
                self._trace(now, seq, bbu, "interest", rank, "cs-hit")
            self._deliver(rank, now, seq, path, 2)
            return
        if debug:
            self._forward(bbu, rank)
        if emit is not None:
            self._trace(now, seq, bbu, "interest", rank, "forwarded")

        # Tier 3: the producer always serves.
        self._hits[4] += 1
        self._hops += 6
        if emit is not None:
            self._trace(now, seq, path[3], "interest", rank, "origin")
        self._deliver(rank, now, seq, path, 3)

    def _deliver(
        self,
        rank: int,
        now: float,
        seq: int,
        path: tuple,
        served_depth: int,
    ) -> None:
        """Walk data from path[served_depth] down to the consumer,
        bumping rates and offering the content to each store."""
        ratehop = self._is_ratehop
        for j in range(served_depth - 1, -1, -1):
            node = path[j]
            if self.debug:
                self._consume(node, rank)
            if ratehop:
                self._rates[node][rank] += 1.0
            self._cache(node, rank, served_depth - j, seq)
            if self._emit is not None:
                self._trace(now, seq, node, "data", rank, "arrived")
        if self.debug:
            self._check_chain(path, served_depth)

    def _cache(self, node: int, rank: int, fetch_hops: int, seq: int) -> None:
        cap = self._cap[node]
        if cap == 0:
            return
        store = self._cs[node]
        if len(store) < cap:
            store[rank] = (seq, fetch_hops) if self._is_ratehop else None
            if self._is_ratehop:
                self._min_score[node] = None
            if self._fap_of[node]:
                self._dir_add(node, rank)
            return
        if self._is_ratehop:
            rates = self._rates[node]
            rate_only = self._rate_only
            incoming = rates[rank] if rate_only else rates[rank] * fetch_hops
            low = self._min_score[node]
            if low is None:
                if rate_only:
                    low = min(rates[r] for r in store)
                else:
                    low = min(rates[r] * e[1] for r, e in store.items())
                self._min_score[node] = low
            if not low < incoming:
                return
            victim = None
            victim_key = None
            for r, entry in store.items():
                score = rates[r] if rate_only else rates[r] * entry[1]
                key = (score, entry[0])
                if victim_key is None or key < victim_key:
                    victim = r
                    victim_key = key
            del store[victim]
            store[rank] = (seq, fetch_hops)
            self._min_score[node] = None
        else:
            victim = next(iter(store))
            del store[victim]
            store[rank] = None
        if self._fap_of[node]:
            self._dir_remove(node, victim)
            self._dir_add(node, rank)

    def _dir_add(self, fue: int, rank: int) -> None:
        directory = self._dir[self._fap_of[fue]]
        holders = directory.get(rank)
        if holders is None:
            directory[rank] = {fue}
        else:
            holders.add(fue)

    def _dir_remove(self, fue: int, rank: int) -> None:
        directory = self._dir[self._fap_of[fue]]
        holders = directory[rank]
        holders.discard(fue)
        if not holders:
            del directory[rank]

    def _trace(self, now, seq, node, kind, rank, outcome) -> None:
        self._emit(
            {"time": now, "seq": seq, "node": node, "kind": kind,
             "name": self.catalog.names[rank], "outcome": outcome}
        )

    # -- debug instrumentation ----------------------------------------

    def _forward(self, node: int, rank: int) -> None:
        pit = self._pit[node]
        if rank in pit:
            raise InvariantViolation(
                f"node {node} forwarded {self.catalog.names[rank]} twice "
                f"while pending (event {self.seq})"
            )
        pit.add(rank)

    def _consume(self, node: int, rank: int) -> None:
        pit = self._pit[node]
        if rank not in pit:
            raise InvariantViolation(
                f"unsolicited data for {self.catalog.names[rank]} at node "
                f"{node} (event {self.seq})"
            )
        pit.discard(rank)

    def _check_chain(self, path: tuple, depth: int) -> None:
        for j in range(depth + 1):
            node = path[j]
            if len(self._cs[node]) > self._cap[node]:
                raise InvariantViolation(
                    f"capacity exceeded at node {node} (event {self.seq})"
                )
        self._check_group(path[1])

    def _check_group(self, fap: int) -> None:
        directory = self._dir[fap]
        group = set(self.topo.children(fap))
        for rank, holders in directory.items():
            if not holders:
                raise InvariantViolation(
                    f"empty directory set at node {fap} (event {self.seq})"
                )
            for holder in holders:
                if holder not in group or rank not in self._cs[holder]:
                    raise InvariantViolation(
                        f"directory at node {fap} lists a non-holder "
                        f"{holder} for {self.catalog.names[rank]} "
                        f"(event {self.seq})"
                    )
        for fue in group:
            for rank in self._cs[fue]:
                if fue not in directory.get(rank, ()):
                    raise InvariantViolation(
                        f"directory at node {fap} misses holder {fue} for "
                        f"{self.catalog.names[rank]} (event {self.seq})"
                    )

    def _check_global(self) -> None:
        for node in range(len(self.topo)):
            if len(self._cs[node]) > self._cap[node]:
                raise InvariantViolation(
                    f"capacity exceeded at node {node} (event {self.seq})"
                )
        for fap in self.topo.faps():
            self._check_group(fap)

    def _check_final(self) -> None:
        for node, pit in enumerate(self._pit):
            if pit:
                raise InvariantViolation(
                    f"pending interests left at node {node}: "
                    f"{sorted(pit)}"
                )
        answered = sum(self._hits)
        if answered != self._n:
            raise InvariantViolation(
                f"{self._n} interests issued but {answered} answered"
            )
        self._check_global()

    # -- schedule replay ----------------------------------------------

    def run_schedule(self, schedule) -> MetricsReport:
        """Replay arrivals in order, firing refresh ticks every tau.

        Ticks land at tau, 2 tau, ... and take effect before arrivals
        that share the same time.
        """
        tau = self.config.tau
        tick_no = 1
        next_tick = tau
        index = self.catalog.index
        request = self._request
        for t, fue, name in schedule:
            while next_tick <= t:
                self.tick(next_tick)
                tick_no += 1
                next_tick = tau * tick_no
            request(fue, index[name], t)
        if self.debug:
            self._check_final()
        return self.report()


def run_single(
    policy: str,
    n_fues: int,
    d2d: bool,
    seed: int,
    *,
    n_faps: int = 5,
    capacities: Capacities | None = None,
    zipf: ZipfSpec | None = None,
    policy_config: PolicyConfig | None = None,
    cache_d2d_data: bool = False,
    debug: bool = False,
    trace=None,
) -> MetricsReport:
    """Build one scenario and run it."""
    capacities = capacities or Capacities()
    zipf = replace(zipf or ZipfSpec(), seed=seed)
    topo = build_topology(
        n_faps, distribute_fues(n_fues, n_faps), capacities, d2d
    )
    catalog = Catalog(zipf.catalog_size)
    schedule = build_schedule(zipf, topo.fues())
    sim = Simulation(
        topo,
        catalog,
        policy,
        policy_config,
        debug=debug,
        cache_d2d_data=cache_d2d_data,
        trace=trace,
    )
    return sim.run_schedule(schedule)


def metrics_row(policy, n_fues, d2d, seed, report: MetricsReport) -> dict:
    tiers = report.hits_by_tier
    return {
        "policy": policy,
        "n_fues": n_fues,
        "d2d": d2d,
        "seed": seed,
        "avg_hops": report.avg_hops,
        "cache_hits": report.in_network_cache_hits,
        "hits_own": tiers["own_cs"],
        "hits_d2d": tiers["d2d"],
        "hits_fap": tiers["fap"],
        "hits_bbu": tiers["bbu"],
        "hits_producer": tiers["producer"],
        "fronthaul_packets": report.fronthaul_packets,
        "total_interests": report.total_interests,
    }


def _run_cell(args) -> dict:
    (policy, n_fues, d2d, seed, n_faps, capacities, zipf, policy_config,
     cache_d2d_data, debug) = args
    report = run_single(
        policy,
        n_fues,
        d2d,
        seed,
        n_faps=n_faps,
        capacities=capacities,
        zipf=zipf,
        policy_config=policy_config,
        cache_d2d_data=cache_d2d_data,
        debug=debug,
    )
    return metrics_row(policy, n_fues, d2d, seed, report)


def sweep(
    fue_counts,
    policies=POLICY_NAMES,
    d2d_options=(False, True),
    seeds=range(10),
    *,
    n_faps: int = 5,
    capacities: Capacities | None = None,
    zipf: ZipfSpec | None = None,
    policy_config: PolicyConfig | None = None,
    cache_d2d_data: bool = False,
    debug: bool = False,
    n_jobs: int = 1,
) -> list[dict]:
    """Run the full factorial grid and return one metrics row per run.

    The request schedule for a cell depends only on (seed, n_fues), so
    every policy and D2D setting sees identical workloads.  Rows come
    back sorted by (policy, n_fues, d2d, seed) regardless of n_jobs.
    """
    capacities = capacities or Capacities()
    zipf = zipf or ZipfSpec()
    cells = [
        (policy, n_fues, d2d, seed, n_faps, capacities, zipf,
         policy_config, cache_d2d_data, debug)
        for policy in policies
        for n_fues in fue_counts
        for d2d in d2d_options
        for seed in seeds
    ]
    if n_jobs > 1:
        with multiprocessing.Pool(n_jobs) as pool:
            rows = pool.map(_run_cell, cells)
    else:
        rows = [_run_cell(cell) for cell in cells]
    rows.sort(key=lambda r: (r["policy"], r["n_fues"], r["d2d"], r["seed"]))
    return rows
