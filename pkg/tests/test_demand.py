import pytest
import os
import sys
import logging
from fractions import Fraction

# Add the package root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

from tradenet.analysis.demand import Demand
from tradenet.exceptions import EnumerationCapError, InternalConsistencyError, MissingPriceError, PreconditionError
from tradenet.generators import generator, random_prices, random_two_agent_market
from tradenet.market import Market

FIXTURES = os.path.abspath(os.path.join(os.path.dirname(__file__), '../fixtures'))

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

def load(name):
    return Market.from_file(os.path.join(FIXTURES, f"{name}.json"))

@pytest.fixture
def fig1():
    return Demand(load("fig1"))

@pytest.fixture
def fig7():
    return Demand(load("fig7"))

def test_utility(fig1):
    """Test quasi-linear utility: sellers receive the price, buyers pay it."""
    prices = {"omega": Fraction(2), "chi": Fraction(1)}
    assert fig1.utility("1", ["omega"], prices) == 1
    assert fig1.utility("1", ["chi"], prices) == 0
    assert fig1.utility("2", ["omega", "chi"], prices) == 0

def test_missing_price(fig1):
    """Test that demand refuses prices missing an incident trade."""
    with pytest.raises(MissingPriceError):
        fig1.demand_set("1", {"omega": 0})

def test_demand_set_empty_bundle(fig1):
    """Test that agent 1 demands only the empty bundle when chi is expensive."""
    prices = {"omega": Fraction(0), "chi": Fraction(2)}
    assert fig1.demand_set("1", prices) == [frozenset()]

def test_demand_set_at_equilibrium(fig1):
    """Test the full tie of agent 1 at the equilibrium prices (1, 1)."""
    prices = {"omega": Fraction(1), "chi": Fraction(1)}
    demand = fig1.demand_set("1", prices)
    logger.info("Demand set: %s", demand)
    assert len(demand) == 4
    assert demand[0] == frozenset({"omega", "chi"})
    assert fig1.demand_set("2", prices) == [frozenset({"omega", "chi"})]

def test_tiebreak_prefers_larger_then_earlier(fig7):
    """Test that the buyer picks the first of two tied singletons."""
    prices = {"w1": Fraction(2), "w2": Fraction(2)}
    assert fig7.demand_set("b", prices) == [frozenset({"w1"}), frozenset({"w2"})]
    assert fig7.demand_tiebreak("b", prices) == frozenset({"w1"})

def test_tiebreak_matches_perturbation(fig7):
    """Test the tie-break against the perturbed valuation on the half-integer lattice."""
    for w1 in range(0, 9):
        for w2 in range(0, 9):
            prices = {"w1": Fraction(w1, 2), "w2": Fraction(w2, 2)}
            chosen = fig7.demand_tiebreak("b", prices, epsilon=Fraction(1, 2))
            assert chosen == fig7.perturbed_demand("b", prices, Fraction(1, 2))

def test_indirect_utility(fig7):
    """Test the indirect utility of the buyer."""
    assert fig7.indirect_utility("b", {"w1": Fraction(2), "w2": Fraction(3, 2)}) == Fraction(3, 2)

def test_fig1_agents_substitutable(fig1):
    """Test that both agents of the two-trade market are fully substitutable."""
    for agent in ("1", "2"):
        result = fig1.is_fully_substitutable(agent)
        logger.info("Agent %s: %s", agent, result)
        assert result

def test_complements_agent_flagged():
    """Test that the complements agent is reported with a witness."""
    demand = Demand(load("exB2"))
    assert demand.is_fully_substitutable("1")
    result = demand.is_fully_substitutable("2")
    assert not result
    assert result.witness["condition"] in ("i", "ii")
    logger.info("Witness: %s", result.witness)

def test_grid_preconditions(fig1):
    """Test the grid step and box checks."""
    with pytest.raises(PreconditionError):
        fig1.is_fully_substitutable("1", (0, 1), step=Fraction(2, 3))
    with pytest.raises(PreconditionError):
        fig1.is_fully_substitutable("1", (1, 0))

def test_grid_cap():
    """Test that an oversized grid is refused."""
    demand = Demand(load("fig6"))
    with pytest.raises(EnumerationCapError):
        demand.is_fully_substitutable("s1", (-1000, 1000), step=Fraction(1, 2))

@pytest.mark.parametrize("seed", range(8))
def test_generated_agents_substitutable(seed):
    """Test that generated valuations pass the grid check."""
    market = random_two_agent_market(seed, max_trades=3, max_value=3)
    demand = Demand(market)
    for agent in market.agents:
        low, high = demand.default_box(agent)
        assert demand.is_fully_substitutable(agent, (low, high), step=Fraction(1))

@pytest.mark.parametrize("seed", range(5))
def test_generated_tiebreak_consistent(seed):
    """Test the tie-break cross-check on random lattice prices."""
    market = random_two_agent_market(seed, max_trades=3, max_value=4)
    demand = Demand(market)
    rng = generator(seed + 100)
    for _ in range(20):
        prices = random_prices(rng, market, -5, 5)
        for agent in market.agents:
            try:
                demand.demand_tiebreak(agent, prices, epsilon=Fraction(1, 2))
            except InternalConsistencyError:
                pytest.fail(f"tie-break disagrees with the perturbed valuation at {prices}")
