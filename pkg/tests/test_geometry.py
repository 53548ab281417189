import pytest
import os
import sys
import json
import logging
from fractions import Fraction

# Add the package root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

from tradenet.analysis.demand import Demand
from tradenet.analysis.geometry import Geometry
from tradenet.exceptions import PreconditionError
from tradenet.generators import random_substitutes_market
from tradenet.scenario import Scenario

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

@pytest.fixture
def fig1():
    return Geometry(Scenario.from_file("fig1").market)

def test_additive_agent_has_unit_normals(fig1):
    """Test that an additive valuation only produces coordinate normals."""
    facets = fig1.lip_facets("1")
    logger.info("Agent 1 facets: %s", [f.to_dict() for f in facets])
    assert facets
    assert all(sum(1 for v in f.normal if v) == 1 for f in facets)

def test_buy_and_sell_facet(fig1):
    """Test the facet where buying and selling together ties with doing nothing."""
    facets = fig1.lip_facets("2")
    normals = {f.normal for f in facets}
    logger.info("Agent 2 normals: %s", normals)
    assert (1, -1) in normals
    facet = next(f for f in facets if f.normal == (1, -1))
    assert facet.weight == 1
    assert set(facet.demand_change) == {frozenset(), frozenset({"omega", "chi"})}
    assert fig1.is_substitutes_by_normals("2")

def test_facet_records_serialize(fig1):
    """Test that facet records are JSON-ready."""
    for facet in fig1.lip_facets("2"):
        row = json.loads(json.dumps(facet.to_dict()))
        assert row["trades"] == ["omega", "chi"]

def test_complements_normal():
    """Test that the complements agent has a facet with normal (1, 1)."""
    geometry = Geometry(Scenario.from_file("exB2").market)
    result = geometry.is_substitutes_by_normals("2")
    assert not result
    assert result.witness["facet"].normal == (1, 1)
    assert geometry.is_substitutes_by_normals("1")

@pytest.mark.parametrize("name, agent", [("fig1", "1"), ("fig1", "2"), ("exB2", "1"), ("exB2", "2"), ("fig7", "b")])
def test_normals_agree_with_grid(name, agent):
    """Test that the normal verdict matches the demand grid check."""
    market = Scenario.from_file(name).market
    assert bool(Geometry(market).is_substitutes_by_normals(agent)) == bool(Demand(market).is_fully_substitutable(agent))

def test_preconditions():
    """Test the dimension and step limits."""
    market = random_substitutes_market(0, n_agents=2, n_trades=4, max_value=3)
    geometry = Geometry(market)
    with pytest.raises(PreconditionError):
        geometry.lip_facets(market.agents[0])
    with pytest.raises(PreconditionError):
        Geometry(Scenario.from_file("fig1").market).lip_facets("1", step=Fraction(1))

def test_substitutes_normal_shapes():
    """Test which normals count as substitutes normals."""
    assert Geometry.is_substitutes_normal((0, 1, 0))
    assert Geometry.is_substitutes_normal((1, 0, -1))
    assert not Geometry.is_substitutes_normal((1, 1))
    assert not Geometry.is_substitutes_normal((2, -1))
