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
from tradenet.analysis.game import TradingGame
from tradenet.exceptions import IncompleteOffersError, NoExtensionError, NotEquilibriumError, NotNashError, PreconditionError
from tradenet.generators import random_substitutes_market
from tradenet.models import Arrangement, NashReport, OfferProfile
from tradenet.scenario import Scenario

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

@pytest.fixture
def fig7():
    return Scenario.from_file("fig7")

@pytest.fixture
def example2():
    return Scenario.from_file("example2")

def profile(market, rows):
    return OfferProfile.from_dict(market, rows)

def test_outcome_of_offers(fig7):
    """Test that only trades with matching offers are executed, at the common offer."""
    offers = fig7.offer_profile("table2-terminal")
    outcome = TradingGame(fig7.market).outcome_of_offers(offers)
    assert outcome.allocation == frozenset({"w1"})
    assert outcome.prices == {"w1": 2}

def test_incomplete_offers(fig7):
    """Test that a profile missing an incidence is rejected."""
    with pytest.raises(IncompleteOffersError):
        profile(fig7.market, {"s1": {"w1": 2}, "b": {"w1": 2, "w2": 2}})

def test_terminal_offers_tight(fig7):
    """Test that the terminal offers of the two-seller run are an epsilon-tight equilibrium."""
    report = TradingGame(fig7.market).is_nash(fig7.offer_profile("table2-terminal"), Fraction(1, 2))
    logger.info("Report: %s", report)
    assert report.status == NashReport.EPS_TIGHT
    assert report.is_nash

def test_loose_equilibrium(fig7):
    """Test an equilibrium whose offers are further apart than epsilon."""
    offers = profile(fig7.market, {"s1": {"w1": 3}, "s2": {"w2": 3}, "b": {"w1": 2, "w2": 2}})
    assert TradingGame(fig7.market).is_nash(offers, Fraction(1, 2)).status == NashReport.NASH

def test_profitable_deviation(fig7):
    """Test that a buyer paying for two trades deviates to one."""
    offers = profile(fig7.market, {"s1": {"w1": 2}, "s2": {"w2": 2}, "b": {"w1": 2, "w2": 2}})
    report = TradingGame(fig7.market).is_nash(offers, Fraction(1, 2))
    assert report.status == NashReport.NOT_NASH
    assert report.witness_agent == "b"
    assert report.witness_gain == 2
    assert report.witness_offers == {"w1": 2, "w2": Fraction(3, 2)}

def test_tightness_depends_on_epsilon(fig7):
    """Test that the terminal offers are an equilibrium but not tight for a smaller epsilon."""
    report = TradingGame(fig7.market).is_nash(fig7.offer_profile("table2-terminal"), Fraction(1, 4))
    assert report.status == NashReport.NASH
    assert report.crossed_trades == ()

def test_approximate_equilibrium_from_tight(fig7):
    """Test the midpoint arrangement read off tight offers."""
    game = TradingGame(fig7.market)
    arrangement = game.approx_ce_from_tight_ne(fig7.offer_profile("table2-terminal"), Fraction(1, 2))
    assert arrangement.allocation == frozenset({"w1"})
    assert arrangement.prices == {"w1": 2, "w2": Fraction(7, 4)}
    assert Equilibria(fig7.market).is_competitive_equilibrium(arrangement, 1)

def test_ne_from_ce():
    """Test the offers built from the single-buyer equilibrium."""
    scenario = Scenario.from_file("fig5")
    game = TradingGame(scenario.market)
    offers = game.ne_from_ce(scenario.arrangement("ce"), Fraction(1, 2))
    assert offers.agent_offers(scenario.market, "s") == {"omega": 0, "chi": Fraction(1, 4)}
    assert offers.agent_offers(scenario.market, "b") == {"omega": 0, "chi": Fraction(-1, 4)}

def test_ne_from_non_equilibrium():
    """Test that a non-equilibrium arrangement is refused."""
    scenario = Scenario.from_file("fig5")
    arrangement = Arrangement({"omega": Fraction(0), "chi": Fraction(0)}, frozenset())
    with pytest.raises(NotEquilibriumError):
        TradingGame(scenario.market).ne_from_ce(arrangement, Fraction(1, 2))

def test_extension_round_trip():
    """Test that tight offers below the bound extend back to an integral equilibrium."""
    scenario = Scenario.from_file("fig5")
    game = TradingGame(scenario.market)
    assert game.extension_bound() == Fraction(1, 2)
    offers = game.ne_from_ce(scenario.arrangement("ce"), Fraction(1, 4))
    arrangement = game.extend_ne_to_ce(offers, Fraction(1, 4))
    assert arrangement.allocation == frozenset({"omega"})
    assert arrangement.prices == {"omega": 0, "chi": 0}

def test_example2_tight_without_trades(example2):
    """Test that the two-agent offers are tight, execute nothing and approximate an equilibrium."""
    game = TradingGame(example2.market)
    offers = example2.offer_profile("example2")
    assert game.outcome_of_offers(offers).allocation == frozenset()
    assert game.is_nash(offers, Fraction(1, 2)).status == NashReport.EPS_TIGHT
    arrangement = game.approx_ce_from_tight_ne(offers, Fraction(1, 2))
    assert arrangement.allocation == frozenset()
    assert Equilibria(example2.market).is_competitive_equilibrium(arrangement, 1)

def test_example2_no_extension_at_bound(example2):
    """Test that the extension fails exactly at epsilon = 1/(2*Delta - 2)."""
    game = TradingGame(example2.market)
    with pytest.raises(NoExtensionError) as error:
        game.extend_ne_to_ce(example2.offer_profile("example2"), Fraction(1, 2))
    assert error.value.at_tightness_bound
    assert error.value.exit_code == 5

def test_extension_preconditions(example2):
    """Test that epsilon above the bound and non-tight offers are refused."""
    game = TradingGame(example2.market)
    with pytest.raises(PreconditionError):
        game.extend_ne_to_ce(example2.offer_profile("example2"), 1)
    loose = profile(example2.market, {"1": {"omega": 3, "chi": 0}, "2": {"omega": 0, "chi": 3}})
    with pytest.raises(NotNashError):
        game.extend_ne_to_ce(loose, Fraction(1, 4))

@pytest.mark.parametrize("seed", range(200))
def test_ne_ce_round_trip_on_generated_markets(seed):
    """Test equilibrium -> tight offers -> integral equilibrium with the same trades."""
    market = random_substitutes_market(seed, n_agents=2 + seed % 3, n_trades=2 + seed % 4, max_value=4)
    game = TradingGame(market)
    ce = Equilibria(market).solve_ce_prices(integral=True)
    bound = game.extension_bound() or Fraction(1, 2)
    epsilon = bound / 2
    offers = game.ne_from_ce(ce, epsilon)
    extended = game.extend_ne_to_ce(offers, epsilon)
    assert extended.allocation == ce.allocation
    assert all(p.denominator == 1 for p in extended.prices.values())
    assert Equilibria(market).is_competitive_equilibrium(extended)

def test_game_utilities(fig7):
    """Test utilities from the trades the terminal offers activate."""
    game = TradingGame(fig7.market)
    offers = fig7.offer_profile("table2-terminal")
    assert game.agent_game_utility("s1", offers) == 0
    assert game.agent_game_utility("s2", offers) == 0
    assert game.agent_game_utility("b", offers) == 1

def test_best_deviation(fig7):
    """Test that the buyer keeps one offer and steps the other away."""
    offers = profile(fig7.market, {"s1": {"w1": 2}, "s2": {"w2": 2}, "b": {"w1": 2, "w2": 2}})
    new_offers, utility = TradingGame(fig7.market).best_deviation("b", offers)
    assert new_offers == {"w1": 2, "w2": Fraction(3, 2)}
    assert utility == 1

def test_core_outcome_is_not_nash():
    """Test that offers realizing a core outcome off equilibrium admit a profitable deviation."""
    scenario = Scenario.from_file("exB1")
    game = TradingGame(scenario.market)
    offers = game.offers_from_outcome(scenario.outcome("both"))
    assert game.outcome_of_offers(offers).allocation == frozenset({"chi", "phi"})
    report = game.is_nash(offers, Fraction(1, 2))
    assert report.status == NashReport.NOT_NASH
    assert report.witness_agent == "i"
    assert report.witness_gain == 1
