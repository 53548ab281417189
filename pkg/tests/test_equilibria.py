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
from tradenet.analysis.simplex import INFEASIBLE, LinearProgram, OPTIMAL, UNBOUNDED, solve_exact
from tradenet.analysis.welfare import Welfare
from tradenet.exact import NEG_INF
from tradenet.exceptions import NoEquilibriumError, PreconditionError
from tradenet.generators import random_substitutes_market
from tradenet.market import Market, Trade, Valuation
from tradenet.models import Arrangement

FIXTURES = os.path.abspath(os.path.join(os.path.dirname(__file__), '../fixtures'))

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

def load(name):
    return Market.from_file(os.path.join(FIXTURES, f"{name}.json"))

# ---- Welfare ----

def test_market_values():
    """Test the market value of several worked examples."""
    assert Welfare(load("fig6")).market_value() == 15
    assert Welfare(load("fig8")).market_value() == 33
    assert Welfare(load("fig5")).social_welfare(["omega"]) == 1
    assert Welfare(load("fig5")).social_welfare(["omega", "chi"]) == 0

def test_efficient_allocations():
    """Test that exactly one seller sells in the two-seller market."""
    welfare = Welfare(load("fig3"))
    assert welfare.market_value() == 1
    assert welfare.efficient_allocations() == [frozenset({"w1"}), frozenset({"w2"})]
    assert welfare.is_efficient(["w2"])
    assert not welfare.is_efficient([])

def test_infeasible_allocation_has_no_welfare():
    """Test that an allocation leaving an agent at minus infinity has welfare minus infinity."""
    assert Welfare(load("fig4")).social_welfare(["w1"]) == NEG_INF

# ---- Competitive equilibria ----

def test_fig1_equilibrium():
    """Test the equilibrium at prices (1, 1) with both trades executed."""
    equilibria = Equilibria(load("fig1"))
    arrangement = Arrangement({"omega": Fraction(1), "chi": Fraction(1)}, frozenset({"omega", "chi"}))
    assert equilibria.is_competitive_equilibrium(arrangement)
    assert not equilibria.is_competitive_equilibrium(Arrangement(arrangement.prices, frozenset()))

def test_fig5_equilibrium():
    """Test that zero prices with one trade form an equilibrium and the buyer takes the value."""
    equilibria = Equilibria(load("fig5"))
    assert equilibria.is_competitive_equilibrium(Arrangement({"omega": Fraction(0), "chi": Fraction(0)}, frozenset({"omega"})))
    solved = equilibria.solve_ce_prices()
    logger.info("Solved: %s", solved)
    assert solved.prices == {"omega": 0, "chi": 0}
    assert solved.allocation in (frozenset({"omega"}), frozenset({"chi"}))

def test_fig7_equilibrium():
    """Test the two-seller equilibrium at prices (2, 2)."""
    equilibria = Equilibria(load("fig7"))
    assert equilibria.is_competitive_equilibrium(Arrangement({"w1": Fraction(2), "w2": Fraction(2)}, frozenset({"w1"})))

def test_approximate_equilibrium():
    """Test the epsilon slack of the equilibrium check."""
    equilibria = Equilibria(load("fig7"))
    arrangement = Arrangement({"w1": Fraction(2), "w2": Fraction(7, 4)}, frozenset({"w1"}))
    assert not equilibria.is_competitive_equilibrium(arrangement)
    assert equilibria.is_competitive_equilibrium(arrangement, Fraction(1, 4))
    with pytest.raises(PreconditionError):
        equilibria.is_competitive_equilibrium(arrangement, -1)

def test_no_equilibrium_with_complements():
    """Test that the market with a complements agent has no equilibrium."""
    with pytest.raises(NoEquilibriumError):
        Equilibria(load("exB2")).solve_ce_prices()

def test_lyapunov_at_equilibrium():
    """Test that L equals the market value at solved equilibrium prices."""
    for name in ("fig1", "fig4", "fig5", "fig7"):
        market = load(name)
        equilibria = Equilibria(market)
        arrangement = equilibria.solve_ce_prices(integral=True)
        assert all(p.denominator == 1 for p in arrangement.prices.values())
        assert equilibria.lyapunov(arrangement.prices) == Welfare(market).market_value()
        assert Welfare(market).is_efficient(arrangement.allocation)

def test_distance_to_equilibrium():
    """Test the exact distance to the equilibrium price set."""
    equilibria = Equilibria(load("fig7"))
    assert equilibria.distance_to_equilibrium({"w1": 2, "w2": 2}) == 0
    assert equilibria.distance_to_equilibrium({"w1": 2, "w2": Fraction(3, 2)}) > 0

@pytest.mark.parametrize("seed", range(10))
def test_welfare_theorems_on_generated_markets(seed):
    """Test that every efficient allocation is supported by solved equilibrium prices."""
    market = random_substitutes_market(seed, n_agents=3, n_trades=4, max_value=4)
    equilibria = Equilibria(market)
    arrangement = equilibria.solve_ce_prices()
    assert equilibria.is_competitive_equilibrium(arrangement)
    for allocation in Welfare(market).efficient_allocations():
        assert equilibria.is_competitive_equilibrium(Arrangement(arrangement.prices, allocation))

def test_unimodularity():
    """Test total unimodularity of substitutes rows and the row-shape precondition."""
    assert Equilibria.unimodularity_check([[1, -1, 0], [0, 1, -1]])
    assert Equilibria.unimodularity_check([[1, 0, -1], [-1, 1, 0], [0, -1, 1]])
    with pytest.raises(PreconditionError):
        Equilibria.unimodularity_check([[1, 1, 0], [0, 1, 1], [1, 0, 1]])

# ---- Linear programs ----

def test_lp_optimal():
    """Test an exact optimum with a free variable."""
    lp = LinearProgram("test")
    lp.add_variable("x")
    lp.add_variable("y", lower=None)
    lp.add_constraint({"x": 1, "y": 1}, "<=", 4)
    lp.add_constraint({"y": 1}, ">=", Fraction(-1, 2))
    result = lp.maximize({"x": 1})
    assert result.status == OPTIMAL
    assert result.value == Fraction(9, 2)
    assert result["y"] == Fraction(-1, 2)

def test_lp_infeasible_and_unbounded():
    """Test the infeasible and unbounded statuses."""
    lp = LinearProgram()
    lp.add_variable("x")
    lp.add_constraint({"x": 1}, "<=", -1)
    assert lp.maximize({"x": 1}).status == INFEASIBLE
    assert not lp.feasible()

    lp = LinearProgram()
    lp.add_variable("x")
    assert lp.maximize({"x": 1}).status == UNBOUNDED

    lp = LinearProgram()
    lp.add_variable("x")
    lp.add_variable("y", lower=None)
    result = lp.minimize({"x": 1})
    assert result.status == OPTIMAL
    assert result.value == 0
    assert result.values == {"x": 0, "y": 0}

def test_solve_exact():
    """Test exact Gauss-Jordan elimination and singular systems."""
    assert solve_exact([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    assert solve_exact([[1, 2], [2, 4]], [1, 2]) is None

def test_equilibrium_price_set():
    """Test membership of price vectors in the equilibrium price set."""
    equilibria = Equilibria(load("fig7"))
    assert equilibria.supports_efficient({"w1": Fraction(2), "w2": Fraction(2)}) == frozenset({"w1"})
    assert equilibria.ce_price_set_contains({"w1": Fraction(2), "w2": Fraction(2)})
    assert equilibria.supports_efficient({"w1": Fraction(2), "w2": Fraction(3, 2)}) is None

def test_equilibrium_without_trades():
    """Test that a market without trades has the empty equilibrium."""
    arrangement = Equilibria(Market(["a"], [], {})).solve_ce_prices()
    assert arrangement.prices == {}
    assert arrangement.allocation == frozenset()

def test_equilibrium_with_only_infeasible_bundles():
    """Test that agents who cannot trade clear the market with nothing traded."""
    market = Market(["a", "b"], [Trade("x", "a", "b")], {"a": Valuation({}, NEG_INF), "b": Valuation({}, NEG_INF)})
    arrangement = Equilibria(market).solve_ce_prices()
    assert Welfare(market).market_value() == 0
    assert arrangement.allocation == frozenset()
    assert arrangement.prices == {"x": 0}
