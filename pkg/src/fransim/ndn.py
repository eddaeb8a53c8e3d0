"""Named-data plumbing for one network node.

Each node owns a content store (CS), a pending-interest table (PIT)
and a default upstream route.  Interests walk up the tree until some
node can serve them; data walks back down the reverse path, getting
cached along the way subject to the node's replacement policy.  Access
points additionally keep a directory of what their attached user
devices cache, so a request that misses the access point's own store
can be brokered to a nearby device instead of travelling further up.

Entry timestamps (``inserted_at``, ``last_used_at``) are monotone event
stamps supplied by the caller, which keeps FIFO/LRU ordering and tie
breaks exact even when many events share one simulation time.
"""

from __future__ import annotations

from .policies import Policy
from .topology import NodeId, NodeRole

# Sentinel downstream id meaning "the consumer application on this node".
APP: NodeId = -1

# handle_interest outcomes.
SERVE_FROM_CS = 0
SERVE_VIA_D2D = 1
AGGREGATED = 2
FORWARDED = 3


class InterestPacket:
    __slots__ = ("name", "requester", "hops_traveled", "seq")

    def __init__(self, name: str, requester: NodeId, seq: int):
        self.name = name
        self.requester = requester
        self.hops_traveled = 0
        self.seq = seq


class DataPacket:
    __slots__ = ("name", "hops_from_source", "served_by", "via_d2d")

    def __init__(
        self,
        name: str,
        served_by: NodeId,
        hops_from_source: int = 0,
        via_d2d: bool = False,
    ):
        self.name = name
        self.served_by = served_by
        self.hops_from_source = hops_from_source
        self.via_d2d = via_d2d


class CsEntry:
    __slots__ = ("inserted_at", "last_used_at", "fetch_hops")

    def __init__(self, inserted_at: int, fetch_hops: int):
        self.inserted_at = inserted_at
        self.last_used_at = inserted_at
        self.fetch_hops = fetch_hops


class ContentStore:
    """Fixed-capacity name -> CsEntry map."""

    __slots__ = ("capacity", "entries")

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.entries: dict[str, CsEntry] = {}

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def __len__(self) -> int:
        return len(self.entries)


class Node:
    """One network node with its forwarding and caching state."""

    __slots__ = (
        "node_id",
        "role",
        "upstream",
        "cs",
        "pit",
        "policy",
        "directory",
        "fap_directory",
        "d2d_serve",
        "cache_d2d_data",
        "is_origin",
        "unsolicited_drops",
    )

    def __init__(
        self,
        node_id: NodeId,
        role: NodeRole,
        upstream: NodeId | None,
        capacity: int,
        policy: Policy,
    ):
        self.node_id = node_id
        self.role = role
        self.upstream = upstream
        self.cs = ContentStore(capacity)
        self.pit: dict[str, list[NodeId]] = {}
        self.policy = policy
        # Access points carry the D2D directory for their group; user
        # devices hold a reference to their access point's directory.
        self.directory: dict[str, set[NodeId]] | None = (
            {} if role is NodeRole.FAP else None
        )
        self.fap_directory: dict[str, set[NodeId]] | None = None
        self.d2d_serve = False
        self.cache_d2d_data = False
        self.is_origin = role is NodeRole.PRODUCER
        self.unsolicited_drops = 0

    def handle_interest(
        self, interest: InterestPacket, downstream: NodeId, now: float, stamp: int
    ) -> tuple[int, NodeId | None]:
        """Process one arriving interest.

        ``downstream`` is the node the interest came from (APP when the
        node's own consumer issued it).  Returns an outcome kind plus
        the node the outcome concerns: the D2D peer for SERVE_VIA_D2D,
        the upstream next hop for FORWARDED, None otherwise.
        """
        if self.is_origin:
            return SERVE_FROM_CS, None
        name = interest.name
        entry = self.cs.entries.get(name)
        if entry is not None:
            self.policy.on_request(name, downstream == APP)
            entry.last_used_at = stamp
            self.policy.on_hit(name, now)
            return SERVE_FROM_CS, None
        self.policy.on_request(name, False)
        if self.d2d_serve and self.directory is not None:
            holders = self.directory.get(name)
            if holders:
                return SERVE_VIA_D2D, min(holders)
        pending = self.pit.get(name)
        if pending is not None:
            if downstream not in pending:
                pending.append(downstream)
            return AGGREGATED, None
        self.pit[name] = [downstream]
        return FORWARDED, self.upstream

    def serve_peer(self, name: str, stamp: int) -> None:
        """Mark a D2D serve from this node's store (recency + hook)."""
        entry = self.cs.entries[name]
        entry.last_used_at = stamp
        self.policy.on_hit(name, stamp)

    def handle_data(
        self, data: DataPacket, now: float, stamp: int
    ) -> tuple[list[NodeId], str | None]:
        """Consume the PIT entry for arriving data and maybe cache it.

        Returns the pending downstream requesters (empty for
        unsolicited data, which is dropped and counted) and the name
        evicted to make room, if any.
        """
        name = data.name
        requesters = self.pit.pop(name, None)
        if requesters is None:
            self.unsolicited_drops += 1
            return [], None
        self.policy.on_data(name)
        evicted = self._maybe_cache(data, now, stamp)
        return requesters, evicted

    def _maybe_cache(self, data: DataPacket, now: float, stamp: int) -> str | None:
        cs = self.cs
        if cs.capacity == 0 or data.name in cs.entries:
            return None
        if data.via_d2d and not self.cache_d2d_data:
            return None
        name = data.name
        evicted = None
        if len(cs.entries) >= cs.capacity:
            incoming = (name, self.policy.incoming_rate(name), data.hops_from_source)
            victim = self.policy.select_victim(cs.entries, incoming)
            if victim is None:
                return None
            del cs.entries[victim]
            self._directory_remove(victim)
            self.policy.on_evict(victim, now)
            evicted = victim
        cs.entries[name] = CsEntry(stamp, data.hops_from_source)
        self._directory_add(name)
        self.policy.on_insert(name, now)
        return evicted

    def _directory_add(self, name: str) -> None:
        directory = self.fap_directory
        if directory is not None:
            directory.setdefault(name, set()).add(self.node_id)

    def _directory_remove(self, name: str) -> None:
        directory = self.fap_directory
        if directory is not None:
            holders = directory.get(name)
            if holders is not None:
                holders.discard(self.node_id)
                if not holders:
                    del directory[name]
