import pytest

from fransim.oracle import DemandSpec
from fransim.topology import Capacities, build_topology


@pytest.fixture
def chain_topo():
    """Smallest valid tree: producer - BBU - one access point - one
    device, with a store at every tier."""
    return build_topology(1, [1], Capacities(bbu=2, fap=2, fue=1))


@pytest.fixture
def two_fap_topo():
    """Two access points with one device each: b, {a1, a2}, {u1, u2}."""
    return build_topology(2, [1, 1], Capacities(bbu=2, fap=1, fue=0))


@pytest.fixture
def unit_demand(two_fap_topo):
    """Unit demand: u1 wants c1, u2 wants c2."""
    u1, u2 = two_fap_topo.fues()
    return DemandSpec({("c1", u1): 1.0, ("c2", u2): 1.0})
