import itertools
from dataclasses import replace

import numpy as np
import pytest

from fransim.errors import InstanceTooLarge
from fransim.oracle import (
    DemandSpec,
    brute_force_optimal,
    caching_nodes,
    check_feasible,
    linearize,
    objective_value,
    propagate_rates,
    verify_linearization,
)
from fransim.topology import Capacities, build_topology


@pytest.fixture
def open_topo():
    """Same shape as two_fap_topo but with room at the devices, so
    device placements are feasible."""
    return build_topology(2, [1, 1], Capacities(bbu=2, fap=1, fue=1))


def ids(topo):
    u1, u2 = topo.fues()
    a1, a2 = topo.faps()
    return topo.bbu(), a1, a2, u1, u2


# -- demand validation -------------------------------------------------

def test_demand_must_sit_at_devices(two_fap_topo):
    bad = DemandSpec({("c1", two_fap_topo.bbu()): 1.0})
    with pytest.raises(ValueError, match="not user equipment"):
        bad.validate(two_fap_topo)


def test_demand_rates_must_be_nonnegative(two_fap_topo):
    u1 = two_fap_topo.fues()[0]
    bad = DemandSpec({("c1", u1): -0.5})
    with pytest.raises(ValueError, match="negative"):
        bad.validate(two_fap_topo)


def test_caching_nodes_excludes_producer(two_fap_topo):
    nodes = caching_nodes(two_fap_topo)
    assert two_fap_topo.producer() not in nodes
    assert len(nodes) == len(two_fap_topo) - 1


# -- feasibility --------------------------------------------------------

def test_placement_values_must_be_binary(two_fap_topo):
    u1 = two_fap_topo.fues()[0]
    with pytest.raises(ValueError, match="not binary"):
        check_feasible(two_fap_topo, {("c1", two_fap_topo.bbu()): 2})
    check_feasible(two_fap_topo, {("c1", u1): 0})  # a zero takes no room


def test_overfull_placement_names_the_node(two_fap_topo):
    a1 = two_fap_topo.faps()[0]
    placement = {("c1", a1): 1, ("c2", a1): 1}  # capacity is 1
    with pytest.raises(ValueError, match=f"node {a1} holds 2"):
        check_feasible(two_fap_topo, placement)


# -- demand propagation --------------------------------------------------

def test_empty_placement_passes_demand_through(two_fap_topo, unit_demand):
    b, a1, a2, u1, u2 = ids(two_fap_topo)
    rates = propagate_rates(two_fap_topo, unit_demand, {})
    assert rates[("c1", u1)] == 1.0
    assert rates[("c1", a1)] == 1.0
    assert rates[("c1", b)] == 1.0
    assert rates[("c1", a2)] == 0.0  # u2 never asks for c1
    assert rates[("c2", a2)] == 1.0


def test_device_copy_starves_the_whole_chain(open_topo):
    b, a1, a2, u1, u2 = ids(open_topo)
    demand = DemandSpec({("c1", u1): 1.0})
    rates = propagate_rates(open_topo, demand, {("c1", u1): 1})
    assert rates[("c1", u1)] == 0.0
    assert rates[("c1", a1)] == 0.0
    assert rates[("c1", b)] == 0.0


def test_access_point_copy_starves_only_upstream(two_fap_topo, unit_demand):
    b, a1, a2, u1, u2 = ids(two_fap_topo)
    rates = propagate_rates(two_fap_topo, unit_demand, {("c1", a1): 1})
    assert rates[("c1", a1)] == 1.0  # the copy still sees the demand
    assert rates[("c1", b)] == 0.0


def test_propagation_rejects_infeasible_placement(two_fap_topo, unit_demand):
    u1 = two_fap_topo.fues()[0]  # capacity 0
    with pytest.raises(ValueError, match="infeasible"):
        propagate_rates(two_fap_topo, unit_demand, {("c1", u1): 1})


def test_sibling_demands_sum_at_the_bbu(open_topo):
    b, a1, a2, u1, u2 = ids(open_topo)
    demand = DemandSpec({("c1", u1): 2.0, ("c1", u2): 3.0})
    rates = propagate_rates(open_topo, demand, {})
    assert rates[("c1", b)] == 5.0
    rates = propagate_rates(open_topo, demand, {("c1", a2): 1})
    assert rates[("c1", b)] == 2.0


# -- objective ------------------------------------------------------------

def test_empty_placement_scores_zero(two_fap_topo, unit_demand):
    assert objective_value(two_fap_topo, unit_demand, {}) == 0.0


def test_access_point_pair_scores_four(two_fap_topo, unit_demand):
    _, a1, a2, _, _ = ids(two_fap_topo)
    placement = {("c1", a1): 1, ("c2", a2): 1}
    assert objective_value(two_fap_topo, unit_demand, placement) == 4.0


def test_bbu_pair_scores_two(two_fap_topo, unit_demand):
    b = two_fap_topo.bbu()
    placement = {("c1", b): 1, ("c2", b): 1}
    assert objective_value(two_fap_topo, unit_demand, placement) == 2.0


def test_mixed_placement_sums_tier_values(two_fap_topo, unit_demand):
    b, a1, _, _, _ = ids(two_fap_topo)
    placement = {("c1", a1): 1, ("c2", b): 1}
    assert objective_value(two_fap_topo, unit_demand, placement) == 3.0


def test_shadowed_bbu_copy_adds_nothing(two_fap_topo, unit_demand):
    b, a1, a2, _, _ = ids(two_fap_topo)
    placement = {("c1", a1): 1, ("c1", b): 1, ("c2", a2): 1}
    assert objective_value(two_fap_topo, unit_demand, placement) == 4.0


def test_device_self_placement_contributes_zero(open_topo):
    b, a1, a2, u1, u2 = ids(open_topo)
    demand = DemandSpec({("c1", u1): 5.0})
    assert objective_value(open_topo, demand, {("c1", u1): 1}) == 0.0


# -- exhaustive search ------------------------------------------------------

def test_optimal_placement_prefers_edge_copies(two_fap_topo, unit_demand):
    _, a1, a2, _, _ = ids(two_fap_topo)
    placement, value = brute_force_optimal(two_fap_topo, unit_demand)
    assert value == 4.0
    assert placement == {("c1", a1): 1, ("c2", a2): 1}


def test_zero_demand_yields_empty_optimum(two_fap_topo):
    u1 = two_fap_topo.fues()[0]
    for demand in (DemandSpec({}), DemandSpec({("c1", u1): 0.0})):
        placement, value = brute_force_optimal(two_fap_topo, demand)
        assert value == 0.0
        assert placement == {}


def test_no_capacity_forces_empty_optimum():
    topo = build_topology(1, [1], Capacities(0, 0, 0))
    demand = DemandSpec({("c1", topo.fues()[0]): 1.0})
    placement, value = brute_force_optimal(topo, demand)
    assert placement == {}
    assert value == 0.0


def test_oversized_instance_is_refused():
    topo = build_topology(5, [1] * 5, Capacities(2, 1, 1))
    u = topo.fues()[0]
    demand = DemandSpec({(f"c{i}", u): 1.0 for i in range(1, 4)})
    # 3 contents x 11 stores = 33 variables
    with pytest.raises(InstanceTooLarge, match="limit of 24"):
        brute_force_optimal(topo, demand)


def random_feasible_placement(rng, topo, contents):
    placement = {}
    for node in caching_nodes(topo):
        cap = topo.capacity[node]
        if cap == 0:
            continue
        k = rng.integers(0, min(cap, len(contents)) + 1)
        for name in rng.choice(contents, size=k, replace=False):
            placement[(name, node)] = 1
    return placement


def test_no_feasible_placement_beats_the_optimum(open_topo):
    b, a1, a2, u1, u2 = ids(open_topo)
    rng = np.random.default_rng(7)
    demand = DemandSpec({
        ("c1", u1): 1.5, ("c2", u1): 0.25,
        ("c1", u2): 0.5, ("c2", u2): 2.0,
    })
    _, best = brute_force_optimal(open_topo, demand)
    contents = demand.contents()
    for _ in range(200):
        placement = random_feasible_placement(rng, open_topo, contents)
        value = objective_value(open_topo, demand, placement)
        assert value <= best + 1e-12


def test_demand_scaling_scales_value_and_keeps_argmax(open_topo):
    b, a1, a2, u1, u2 = ids(open_topo)
    demand = DemandSpec({("c1", u1): 1.25, ("c2", u2): 0.75})
    scaled = DemandSpec({k: 3.7 * v for k, v in demand.base_rate.items()})
    place_a, value_a = brute_force_optimal(open_topo, demand)
    place_b, value_b = brute_force_optimal(open_topo, scaled)
    assert place_a == place_b
    assert value_b == pytest.approx(3.7 * value_a, rel=1e-12)


def test_dropping_device_placements_never_hurts(open_topo):
    rng = np.random.default_rng(13)
    b, a1, a2, u1, u2 = ids(open_topo)
    demand = DemandSpec({
        ("c1", u1): 2.0, ("c2", u1): 1.0,
        ("c1", u2): 0.5, ("c2", u2): 1.5,
    })
    fues = set(open_topo.fues())
    contents = demand.contents()
    for _ in range(100):
        placement = random_feasible_placement(rng, open_topo, contents)
        stripped = {
            key: x for key, x in placement.items() if key[1] not in fues
        }
        full = objective_value(open_topo, demand, placement)
        bare = objective_value(open_topo, demand, stripped)
        assert full <= bare + 1e-12


# -- zero-one linearization ---------------------------------------------

def xname(name, label):
    return f"x[{name},{label}]"


def test_linearized_variables_cover_the_caching_nodes(
    two_fap_topo, unit_demand
):
    prog = linearize(two_fap_topo, unit_demand)
    assert len(prog.x_vars) == 10  # 2 contents x 5 stores
    assert xname("c1", "bbu") in prog.x_vars
    assert xname("c2", "fue2") in prog.x_vars
    assert prog.x_key[xname("c1", "fap1")] == ("c1", two_fap_topo.faps()[0])


def test_auxiliaries_match_the_product_terms(two_fap_topo, unit_demand):
    prog = linearize(two_fap_topo, unit_demand)
    assert len(prog.z_vars) == 8
    per_content = {
        name: sorted(
            tuple(sorted(prog.monomials[z]))
            for z in prog.z_vars
            if any(f"[{name}," in var for var in prog.monomials[z])
        )
        for name in ("c1", "c2")
    }
    expected_c1 = sorted([
        (xname("c1", "fap1"), xname("c1", "fue1")),
        (xname("c1", "bbu"), xname("c1", "fap1")),
        (xname("c1", "bbu"), xname("c1", "fue1")),
        (xname("c1", "bbu"), xname("c1", "fap1"), xname("c1", "fue1")),
    ])
    assert per_content["c1"] == expected_c1
    assert len(per_content["c2"]) == 4


def test_linear_coefficients_follow_hop_weights(two_fap_topo, unit_demand):
    prog = linearize(two_fap_topo, unit_demand)
    assert prog.objective[xname("c1", "fap1")] == 2.0
    assert prog.objective[xname("c1", "bbu")] == 1.0
    by_monomial = {
        tuple(sorted(prog.monomials[z])): prog.objective[z]
        for z in prog.z_vars
    }
    assert by_monomial[
        (xname("c1", "fap1"), xname("c1", "fue1"))
    ] == -2.0
    assert by_monomial[
        (xname("c1", "bbu"), xname("c1", "fap1"), xname("c1", "fue1"))
    ] == 1.0


def test_every_auxiliary_carries_full_bounds(two_fap_topo, unit_demand):
    prog = linearize(two_fap_topo, unit_demand)
    for z in prog.z_vars:
        factors = prog.monomials[z]
        uppers = [
            c for c in prog.constraints
            if c.coeffs.get(z) == 1.0 and len(c.coeffs) == 2
        ]
        assert {next(v for v in c.coeffs if v != z) for c in uppers} == set(
            factors
        )
        lower = [
            c for c in prog.constraints
            if c.coeffs.get(z) == -1.0 and len(c.coeffs) == len(factors) + 1
        ]
        assert len(lower) == 1
        assert lower[0].rhs == len(factors) - 1.0
        assert any(
            c.coeffs == {z: -1.0} and c.rhs == 0.0 for c in prog.constraints
        )


def test_capacity_constraints_carried_over(two_fap_topo, unit_demand):
    prog = linearize(two_fap_topo, unit_demand)
    cap_cons = [
        c for c in prog.constraints
        if all(v in prog.x_vars for v in c.coeffs)
    ]
    assert len(cap_cons) == 5
    bbu_con = next(
        c for c in cap_cons if xname("c1", "bbu") in c.coeffs
    )
    assert bbu_con.rhs == 2.0
    assert set(bbu_con.coeffs) == {xname("c1", "bbu"), xname("c2", "bbu")}


def test_zero_capacity_stores_can_be_pre_substituted(
    two_fap_topo, unit_demand
):
    prog = linearize(two_fap_topo, unit_demand, drop_zero_capacity=True)
    assert len(prog.x_vars) == 6
    assert not any("fue" in var for var in prog.x_vars)
    assert len(prog.z_vars) == 2  # only the fap x bbu products survive
    for z in prog.z_vars:
        assert len(prog.monomials[z]) == 2
        assert not any("fue" in var for var in prog.monomials[z])


def test_chain_expansion_has_three_pair_terms_and_one_triple():
    # One content on one branch: the bbu term is thinned by both lower
    # stores, so the expansion needs every pairing plus the full triple.
    topo = build_topology(1, [1], Capacities(2, 1, 1))
    demand = DemandSpec({("c1", topo.fues()[0]): 1.0})
    prog = linearize(topo, demand)
    degrees = sorted(len(prog.monomials[z]) for z in prog.z_vars)
    assert degrees == [2, 2, 2, 3]
    factor_sets = {tuple(sorted(prog.monomials[z])) for z in prog.z_vars}
    assert factor_sets == {
        (xname("c1", "fap1"), xname("c1", "fue1")),
        (xname("c1", "bbu"), xname("c1", "fap1")),
        (xname("c1", "bbu"), xname("c1", "fue1")),
        (xname("c1", "bbu"), xname("c1", "fap1"), xname("c1", "fue1")),
    }


def test_program_renders_as_text(two_fap_topo, unit_demand):
    text = linearize(two_fap_topo, unit_demand).to_text()
    assert text.startswith("maximize:")
    assert "subject to:" in text
    assert "+2 x[c1,fap1]" in text
    assert "# z1 stands for" in text
    assert text.splitlines()[-1].startswith("binary: ")


def test_zero_rate_demand_linearizes_to_constant_zero(two_fap_topo):
    u1 = two_fap_topo.fues()[0]
    prog = linearize(two_fap_topo, DemandSpec({("c1", u1): 0.0}))
    assert prog.z_vars == []
    assert prog.objective == {}


# -- linearization verification ----------------------------------------

def test_linearization_is_exact_on_the_reference_instance(
    two_fap_topo, unit_demand
):
    report = verify_linearization(two_fap_topo, unit_demand)
    assert report
    assert report.ok
    assert report.checked == 2 ** 10
    assert report.counterexample is None


def test_pre_substituted_program_verifies_over_fewer_points(
    two_fap_topo, unit_demand
):
    prog = linearize(two_fap_topo, unit_demand, drop_zero_capacity=True)
    report = verify_linearization(two_fap_topo, unit_demand, prog)
    assert report.ok
    assert report.checked == 2 ** 6


def test_zero_demand_verifies_trivially(two_fap_topo):
    report = verify_linearization(two_fap_topo, DemandSpec({}))
    assert report.ok


def test_verifier_is_exact_on_uneven_demand(open_topo):
    b, a1, a2, u1, u2 = ids(open_topo)
    demand = DemandSpec({
        ("c1", u1): 2.0, ("c1", u2): 0.5, ("c2", u2): 1.0,
    })
    report = verify_linearization(open_topo, demand)
    assert report.ok


def test_verifier_refuses_programs_too_wide_to_enumerate():
    # 4 contents over a 7-store tree: only 12 variables sit at stores
    # with capacity, but the full program lists 28, so enumerating it
    # must be refused rather than attempted.
    topo = build_topology(2, [2, 2], Capacities(bbu=4, fap=2, fue=0))
    fues = topo.fues()
    demand = DemandSpec({
        (f"c{i}", fue): 1.0 for i, fue in enumerate(fues, start=1)
    })
    with pytest.raises(InstanceTooLarge, match="28 binary variables"):
        verify_linearization(topo, demand)
    compact = linearize(topo, demand, drop_zero_capacity=True)
    report = verify_linearization(topo, demand, compact)
    assert report.ok
    assert report.checked == 2 ** 12


def test_missing_lower_bound_is_caught(two_fap_topo, unit_demand):
    prog = linearize(two_fap_topo, unit_demand)
    z = next(
        z for z in prog.z_vars
        if prog.objective[z] < 0
        and any("fue" in var for var in prog.monomials[z])
        and len(prog.monomials[z]) == 2
    )
    kept = [c for c in prog.constraints if c.coeffs != {z: -1.0}]
    assert len(kept) == len(prog.constraints) - 1
    broken = replace(prog, constraints=kept)
    report = verify_linearization(two_fap_topo, unit_demand, broken)
    assert not report
    assert "optimum mismatch" in report.message


def test_wrong_coefficient_yields_a_counterexample(
    two_fap_topo, unit_demand
):
    prog = linearize(two_fap_topo, unit_demand)
    prog.objective[prog.z_vars[0]] = 0.0
    report = verify_linearization(two_fap_topo, unit_demand, prog)
    assert not report.ok
    assert report.counterexample is not None
    assert "pinned objective" in report.message


def test_pinned_and_direct_agree_pointwise_by_hand(open_topo):
    # independent spot check of one assignment on the open instance
    b, a1, a2, u1, u2 = ids(open_topo)
    demand = DemandSpec({("c1", u1): 1.0})
    prog = linearize(open_topo, demand)
    x_val = {var: 0 for var in prog.x_vars}
    x_val[xname("c1", "bbu")] = 1
    x_val[xname("c1", "fue1")] = 1
    pinned = dict(x_val)
    for z, factors in prog.monomials.items():
        pinned[z] = int(all(x_val[f] for f in factors))
    linear = sum(
        coeff * pinned[var] for var, coeff in prog.objective.items()
    )
    placement = {prog.x_key[var]: v for var, v in x_val.items()}
    # direct: device copy kills the chain, so the bbu copy earns 0
    assert objective_value(open_topo, demand, placement) == 0.0
    assert linear == pytest.approx(0.0)
