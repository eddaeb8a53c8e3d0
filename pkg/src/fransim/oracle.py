"""Exact offline evaluation of the cache-placement objective.

Given exogenous per-device demand rates, a placement assigns contents
to content stores.  Demand thins as it climbs the tree: a node only
sees the requests its subtree could not satisfy, each hop applying a
(1 - x) factor.  The objective credits each placed copy with the
demand reaching it weighted by the node's hop distance from the core,
so popular content placed far from the core scores highest.

This module provides the placement evaluator, an exhaustive optimal
search for small instances, and a zero-one linearization of the
polynomial objective together with a brute-force verifier that the
linearization is exact.  Placements are plain ``{(name, node): 0|1}``
maps; missing keys mean 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import InstanceTooLarge
from .topology import NodeId, NodeRole, Topology

# Exhaustive-search guard: contents x cache-capable nodes.
ENUMERATION_LIMIT = 24

Placement = dict  # (name, NodeId) -> 0 | 1


@dataclass(frozen=True)
class DemandSpec:
    """Exogenous request rates, one per (content name, device)."""

    base_rate: dict[tuple[str, NodeId], float]

    def contents(self) -> list[str]:
        return sorted({name for name, _ in self.base_rate})

    def validate(self, topo: Topology) -> None:
        for (name, fue), rate in self.base_rate.items():
            if topo.roles[fue] is not NodeRole.FUE:
                raise ValueError(
                    f"demand for {name!r} at node {fue}, which is not "
                    "user equipment"
                )
            if rate < 0:
                raise ValueError(f"negative demand rate for {name!r} at {fue}")


def caching_nodes(topo: Topology) -> list[NodeId]:
    """Nodes that may hold placements: every node except the producer."""
    return [
        n for n, role in enumerate(topo.roles) if role is not NodeRole.PRODUCER
    ]


def check_feasible(topo: Topology, placement: Placement) -> None:
    """Raise if the placement violates any store capacity."""
    used: dict[NodeId, int] = {}
    for (name, node), x in placement.items():
        if x not in (0, 1):
            raise ValueError(f"placement value for ({name}, {node}) not binary")
        if x:
            used[node] = used.get(node, 0) + 1
    for node, count in used.items():
        if count > topo.capacity[node]:
            raise ValueError(
                f"placement infeasible: node {node} holds {count} contents "
                f"but has capacity {topo.capacity[node]}"
            )


def propagate_rates(
    topo: Topology, demand: DemandSpec, placement: Placement
) -> dict[tuple[str, NodeId], float]:
    """Effective demand at every caching node under a placement.

    At a device the base rate is thinned by the device's own copy; at
    aggregation tiers each child contributes its rate thinned by the
    child's copy.  Computed leaf to root in one pass.
    """
    check_feasible(topo, placement)
    return _propagate(topo, demand, placement)


def _propagate(topo, demand, placement):
    rates: dict[tuple[str, NodeId], float] = {}
    fues = topo.fues()
    faps = topo.faps()
    bbu = topo.bbu()
    for name in demand.contents():
        base = demand.base_rate
        for fue in fues:
            b = base.get((name, fue), 0.0)
            rates[(name, fue)] = b * (1 - placement.get((name, fue), 0))
        for fap in faps:
            total = 0.0
            for child in topo.children(fap):
                total += rates[(name, child)] * (
                    1 - placement.get((name, child), 0)
                )
            rates[(name, fap)] = total
        total = 0.0
        for fap in faps:
            total += rates[(name, fap)] * (1 - placement.get((name, fap), 0))
        rates[(name, bbu)] = total
    return rates


def objective_value(
    topo: Topology, demand: DemandSpec, placement: Placement
) -> float:
    """Hop-weighted demand captured by a feasible placement."""
    check_feasible(topo, placement)
    return _objective(topo, demand, placement)


def _objective(topo, demand, placement):
    rates = _propagate(topo, demand, placement)
    hop = topo.hop_from_core
    value = 0.0
    for (name, node), x in placement.items():
        if x:
            value += rates.get((name, node), 0.0) * hop[node]
    return value


def _guard(topo: Topology, demand: DemandSpec) -> tuple[list[str], list[NodeId]]:
    contents = demand.contents()
    nodes = [n for n in caching_nodes(topo) if topo.capacity[n] > 0]
    size = len(contents) * len(nodes)
    if size > ENUMERATION_LIMIT:
        raise InstanceTooLarge(
            f"{len(contents)} contents x {len(nodes)} caching nodes = "
            f"{size} binary variables exceeds the exhaustive-search "
            f"limit of {ENUMERATION_LIMIT}"
        )
    return contents, nodes


def brute_force_optimal(
    topo: Topology, demand: DemandSpec
) -> tuple[Placement, float]:
    """Enumerate every feasible placement and return a maximizer.

    Ties go to the lexicographically smallest assignment vector, with
    variables ordered by (content, node id), so the result is unique.
    """
    demand.validate(topo)
    contents, nodes = _guard(topo, demand)
    per_node_choices = []
    for node in nodes:
        cap = min(topo.capacity[node], len(contents))
        subsets = []
        for size in range(cap + 1):
            subsets.extend(itertools.combinations(contents, size))
        per_node_choices.append(subsets)

    best_value = -1.0
    best_vec: tuple[int, ...] | None = None
    best_placement: Placement = {}
    for combo in itertools.product(*per_node_choices):
        placement = {
            (name, node): 1
            for node, chosen in zip(nodes, combo)
            for name in chosen
        }
        value = _objective(topo, demand, placement)
        vec = tuple(
            placement.get((name, node), 0)
            for name in contents
            for node in nodes
        )
        if value > best_value or (value == best_value and vec < best_vec):
            best_value = value
            best_vec = vec
            best_placement = placement
    return best_placement, best_value


# -- zero-one linearization -------------------------------------------


@dataclass(frozen=True)
class Constraint:
    """Linear inequality: sum(coeffs[v] * v) <= rhs."""

    coeffs: dict[str, float]
    rhs: float

    def check(self, values: dict[str, float], tol: float = 1e-9) -> bool:
        return sum(c * values[v] for v, c in self.coeffs.items()) <= self.rhs + tol


@dataclass
class LinearizedProgram:
    """The objective polynomial rewritten with one auxiliary variable
    per distinct product of binary placement variables."""

    x_vars: list[str]
    z_vars: list[str]
    x_key: dict[str, tuple[str, NodeId]]
    monomials: dict[str, frozenset[str]]  # z name -> its x-variable factors
    objective: dict[str, float]
    constraints: list[Constraint] = field(default_factory=list)

    def to_text(self) -> str:
        lines = ["maximize:"]
        terms = [
            f"  {coeff:+g} {var}"
            for var, coeff in self.objective.items()
            if coeff
        ]
        lines.extend(terms or ["  0"])
        lines.append("subject to:")
        for con in self.constraints:
            left = " ".join(
                f"{coeff:+g} {var}" for var, coeff in con.coeffs.items()
            )
            lines.append(f"  {left} <= {con.rhs:g}")
        for z, factors in self.monomials.items():
            lines.append(f"  # {z} stands for {' * '.join(sorted(factors))}")
        lines.append("binary: " + " ".join(self.x_vars))
        return "\n".join(lines)


def _x_name(topo: Topology, name: str, node: NodeId) -> str:
    return f"x[{name},{topo.labels[node]}]"


def linearize(
    topo: Topology,
    demand: DemandSpec,
    *,
    drop_zero_capacity: bool = False,
) -> LinearizedProgram:
    """Expand the objective into multilinear monomials and linearize.

    Binary idempotence makes device self-placement terms vanish, so the
    expansion only produces access-point and BBU terms.  Each distinct
    monomial of degree >= 2 gets one auxiliary variable constrained by
    z <= factor (each), z >= sum(factors) - (arity - 1), z >= 0, which
    pins z to the exact product at binary points.  With
    ``drop_zero_capacity`` the variables of zero-capacity stores are
    pre-substituted to 0 and their monomials dropped.
    """
    demand.validate(topo)
    contents = demand.contents()
    bbu = topo.bbu()
    h_fap = 2
    h_bbu = 1

    def keep(node: NodeId) -> bool:
        return not drop_zero_capacity or topo.capacity[node] > 0

    # Accumulate monomial -> coefficient.  Iteration order (content,
    # then device id) fixes the auxiliary numbering deterministically.
    coeffs: dict[frozenset[str], float] = {}

    def add(term: frozenset[str], coeff: float) -> None:
        coeffs[term] = coeffs.get(term, 0.0) + coeff

    for name in contents:
        xb = _x_name(topo, name, bbu)
        for fue in topo.fues():
            rate = demand.base_rate.get((name, fue), 0.0)
            if rate == 0.0:
                continue
            fap = topo.parent[fue]
            xu = _x_name(topo, name, fue)
            xa = _x_name(topo, name, fap)
            ok_u, ok_a, ok_b = keep(fue), keep(fap), keep(bbu)
            # Access-point value at h=2: x_a thinned by the device copy.
            if ok_a:
                add(frozenset([xa]), h_fap * rate)
                if ok_u:
                    add(frozenset([xa, xu]), -h_fap * rate)
            # BBU value at h=1: x_b thinned by both lower copies.
            if ok_b:
                add(frozenset([xb]), h_bbu * rate)
                if ok_a:
                    add(frozenset([xa, xb]), -h_bbu * rate)
                if ok_u:
                    add(frozenset([xu, xb]), -h_bbu * rate)
                if ok_a and ok_u:
                    add(frozenset([xu, xa, xb]), h_bbu * rate)

    x_vars = []
    x_key = {}
    for name in contents:
        for node in caching_nodes(topo):
            if not keep(node):
                continue
            var = _x_name(topo, name, node)
            x_vars.append(var)
            x_key[var] = (name, node)

    objective: dict[str, float] = {}
    monomials: dict[str, frozenset[str]] = {}
    z_vars: list[str] = []
    constraints: list[Constraint] = []
    for term, coeff in coeffs.items():
        if coeff == 0.0:
            continue
        if len(term) == 1:
            (var,) = term
            objective[var] = objective.get(var, 0.0) + coeff
            continue
        z = f"z{len(z_vars) + 1}"
        z_vars.append(z)
        monomials[z] = term
        objective[z] = coeff
        for factor in sorted(term):
            constraints.append(Constraint({z: 1.0, factor: -1.0}, 0.0))
        lower = {z: -1.0}
        lower.update({factor: 1.0 for factor in sorted(term)})
        constraints.append(Constraint(lower, len(term) - 1.0))
        constraints.append(Constraint({z: -1.0}, 0.0))

    for node in caching_nodes(topo):
        if not keep(node):
            continue
        coeffs_cap = {
            _x_name(topo, name, node): 1.0
            for name in contents
        }
        constraints.append(Constraint(coeffs_cap, float(topo.capacity[node])))

    return LinearizedProgram(
        x_vars, z_vars, x_key, monomials, objective, constraints
    )


@dataclass
class VerificationReport:
    ok: bool
    checked: int
    message: str = ""
    counterexample: dict[str, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


def _z_interval(
    program: LinearizedProgram, z: str, x_val: dict[str, float]
) -> tuple[float, float]:
    """Feasible range for one auxiliary, derived from the program's own
    constraints at a fixed binary x assignment."""
    lo, hi = float("-inf"), float("inf")
    for con in program.constraints:
        cz = con.coeffs.get(z)
        if not cz:
            continue
        rest = sum(
            coeff * x_val[var]
            for var, coeff in con.coeffs.items()
            if var != z
        )
        bound = (con.rhs - rest) / cz
        if cz > 0:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
    return lo, hi


def verify_linearization(
    topo: Topology,
    demand: DemandSpec,
    program: LinearizedProgram | None = None,
) -> VerificationReport:
    """Exhaustively confirm the linearization is exact.

    Two checks over every binary assignment of the x variables: the
    linear objective with each auxiliary set to its defining product
    must equal the direct polynomial objective, and the maxima over
    feasible assignments must agree when each auxiliary instead ranges
    freely within its own constraints.  Returns a falsy report naming
    the first counterexample otherwise.
    """
    demand.validate(topo)
    if program is None:
        program = linearize(topo, demand)
    # Guard on the program's own width: it may list zero-capacity
    # stores' variables, so it can be wider than the placement search.
    if len(program.x_vars) > ENUMERATION_LIMIT:
        raise InstanceTooLarge(
            f"program has {len(program.x_vars)} binary variables, "
            f"exceeding the exhaustive-search limit of "
            f"{ENUMERATION_LIMIT}"
        )
    x_vars = program.x_vars
    capacity = topo.capacity
    tol = 1e-9

    best_direct = None
    best_linear = None
    checked = 0
    for bits in itertools.product((0, 1), repeat=len(x_vars)):
        x_val = dict(zip(x_vars, bits))
        placement = {
            program.x_key[var]: value for var, value in x_val.items()
        }
        direct = _objective(topo, demand, placement)

        pinned = dict(x_val)
        for z, factors in program.monomials.items():
            prod = 1
            for factor in factors:
                prod *= x_val[factor]
            pinned[z] = prod
        linear = sum(
            coeff * pinned[var] for var, coeff in program.objective.items()
        )
        checked += 1
        if abs(linear - direct) > tol * max(1.0, abs(direct)):
            return VerificationReport(
                False,
                checked,
                f"pinned objective {linear!r} != direct {direct!r}",
                x_val,
            )

        used: dict[NodeId, int] = {}
        for var, value in x_val.items():
            if value:
                node = program.x_key[var][1]
                used[node] = used.get(node, 0) + 1
        feasible = all(
            count <= capacity[node] for node, count in used.items()
        )
        if not feasible:
            continue
        free = 0.0
        for var, coeff in program.objective.items():
            if var in program.monomials:
                lo, hi = _z_interval(program, var, x_val)
                free += coeff * (hi if coeff > 0 else lo)
            else:
                free += coeff * x_val[var]
        if best_direct is None or direct > best_direct:
            best_direct = direct
        if best_linear is None or free > best_linear:
            best_linear = free

    if best_direct is None:
        return VerificationReport(True, checked, "no feasible assignments")
    if abs(best_linear - best_direct) > tol * max(1.0, abs(best_direct)):
        return VerificationReport(
            False,
            checked,
            f"optimum mismatch: linear {best_linear!r} vs direct "
            f"{best_direct!r}",
        )
    return VerificationReport(True, checked)
