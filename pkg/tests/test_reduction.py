import pytest
import os
import sys
import logging
from fractions import Fraction

# Add the package root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

from tradenet.analysis.equilibria import Equilibria
from tradenet.analysis.reduction import Reduction
from tradenet.analysis.welfare import Welfare
from tradenet.exceptions import PreconditionError
from tradenet.generators import generator, random_prices, random_substitutes_market
from tradenet.models import Arrangement
from tradenet.scenario import Scenario

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

@pytest.fixture
def fig1():
    return Reduction(Scenario.from_file("fig1").market)

def test_tau_holdings(fig1):
    """Test that a seller keeps unsold goods and a buyer holds what it buys."""
    assert fig1.tau("1", []) == frozenset({"omega"})
    assert fig1.tau("1", ["omega"]) == frozenset()
    assert fig1.tau("1", ["chi"]) == frozenset({"omega", "chi"})
    assert fig1.tau("2", ["omega", "chi"]) == frozenset({"omega"})

def test_tau_involution(fig1):
    """Test that tau applied twice is the identity."""
    for agent in fig1.market.agents:
        for bundle in fig1.market.bundles(agent):
            assert fig1.tau(agent, fig1.tau(agent, bundle)) == bundle

def test_auction_valuations(fig1):
    """Test that auction values are the market values of the preimage."""
    auction = fig1.to_auction()
    logger.info("Auction valuations: %s", auction.valuations)
    assert auction.valuations["1"][frozenset({"omega"})] == 0
    assert auction.valuations["1"][frozenset()] == -1
    assert auction.valuations["2"][frozenset({"omega"})] == 1

def test_allocation_mapping(fig1):
    """Test that every good is held once and the mapping inverts."""
    for allocation in fig1.market.allocations():
        holdings = fig1.map_allocation(allocation)
        held = sorted(g for goods in holdings.values() for g in goods)
        assert held == sorted(fig1.market.trade_ids)
        assert fig1.unmap_allocation(holdings) == allocation

def test_unmap_rejects_double_holding(fig1):
    """Test that a good held twice has no preimage."""
    with pytest.raises(PreconditionError):
        fig1.unmap_allocation({"1": frozenset({"omega"}), "2": frozenset({"omega", "chi"})})

@pytest.mark.parametrize("name", ["fig1", "fig5", "fig6", "fig7"])
def test_welfare_preserved(name):
    """Test that the auction image of every allocation has the same welfare."""
    market = Scenario.from_file(name).market
    reduction, welfare = Reduction(market), Welfare(market)
    for allocation in market.allocations():
        assert reduction.auction_social_welfare(reduction.map_allocation(allocation)) == welfare.social_welfare(allocation)

@pytest.mark.parametrize("seed", range(5))
def test_demand_mapping(seed):
    """Test that tau maps market demand sets onto auction demand sets at random prices."""
    market = random_substitutes_market(seed, n_agents=3, n_trades=4, max_value=4)
    reduction = Reduction(market)
    rng = generator(seed)
    for _ in range(25):
        prices = random_prices(rng, market, -5, 5)
        for agent in market.agents:
            assert reduction.verify_demand_mapping(agent, prices)

def test_ce_mapping_on_equilibria():
    """Test that market equilibria map to auction equilibria."""
    for name in ("fig5", "fig7"):
        scenario = Scenario.from_file(name)
        reduction = Reduction(scenario.market)
        arrangement = scenario.arrangement("ce")
        assert reduction.verify_ce_mapping(arrangement)
        assert reduction.is_auction_equilibrium(arrangement.prices, reduction.map_allocation(arrangement.allocation))

def test_ce_mapping_on_non_equilibrium():
    """Test that a non-equilibrium maps to a non-equilibrium."""
    scenario = Scenario.from_file("fig7")
    reduction = Reduction(scenario.market)
    arrangement = Arrangement({"w1": Fraction(2), "w2": Fraction(2)}, frozenset({"w1", "w2"}))
    assert reduction.verify_ce_mapping(arrangement)
    assert not reduction.is_auction_equilibrium(arrangement.prices, reduction.map_allocation(arrangement.allocation))

@pytest.mark.parametrize("seed", range(5))
def test_ce_mapping_generated(seed):
    """Test the equilibrium mapping on solved equilibria of generated markets."""
    market = random_substitutes_market(seed, n_agents=3, n_trades=4, max_value=4)
    reduction = Reduction(market)
    arrangement = Equilibria(market).solve_ce_prices()
    assert reduction.verify_ce_mapping(arrangement)
    assert reduction.is_auction_equilibrium(arrangement.prices, reduction.map_allocation(arrangement.allocation))

def test_auction_demand(fig1):
    """Test the auction demand of the agent that buys and sells."""
    prices = {"omega": Fraction(1), "chi": Fraction(1)}
    assert fig1.auction_demand("2", prices) == [frozenset({"omega"})]
    assert fig1.verify_demand_mapping("1", prices)
