import pytest
import os
import sys
import json
import logging
import shutil

# Add the package root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

import matplotlib
matplotlib.use("Agg")

from tradenet import visuals
from tradenet.analysis.dynamics import Dynamics
from tradenet.exceptions import ScenarioError, UnknownAgentError
from tradenet.scenario import Scenario, resolve

FIXTURES = os.path.abspath(os.path.join(os.path.dirname(__file__), '../fixtures'))

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

@pytest.fixture
def fig7():
    return Scenario.from_file("fig7")

def test_resolve_by_name_and_path():
    """Test that bare names resolve against the fixture directory."""
    path = os.path.join(FIXTURES, "fig7.json")
    assert os.path.samefile(resolve("fig7"), path)
    assert resolve(path) == path
    with pytest.raises(ScenarioError):
        resolve("no-such-scenario")

def test_fixture_directory_from_environment(tmp_path, monkeypatch):
    """Test that TRADENET_FIXTURES redirects name lookups."""
    shutil.copy(os.path.join(FIXTURES, "fig5.json"), tmp_path / "market.json")
    monkeypatch.setenv("TRADENET_FIXTURES", str(tmp_path))
    scenario = Scenario.from_file("market")
    assert scenario.market.agents == ("s", "b")

def test_named_entries(fig7):
    """Test lookups of runs, schedules, offers and arrangements."""
    assert fig7.schedule("table2") == ["s1", "b", "s2", "b", "s2", "b", "s2"]
    spec = fig7.run("table3")
    assert spec.algorithm == "clock"
    assert spec.config.rounds == 5
    assert fig7.arrangement("ce").allocation == frozenset({"w1"})
    assert fig7.offer_profile("table2-terminal") is not None

def test_missing_entries_are_none(fig7):
    """Test that absent names return None with a warning."""
    assert fig7.run("nope") is None
    assert fig7.imputation("nope") is None
    assert fig7.outcome("nope") is None

def test_scheduler_choice(fig7):
    """Test scripted schedulers for scripted runs and seeded ones otherwise."""
    assert fig7.scheduler(fig7.run("table2")).mode == "scripted"
    assert fig7.scheduler(fig7.run("random-offers")).mode == "seeded-uniform-random"

def test_schedule_with_unknown_agent():
    """Test that a schedule naming an unknown agent is rejected."""
    with open(os.path.join(FIXTURES, "fig7.json"), "r", encoding="utf-8") as handle:
        data = json.load(handle)
    data["schedules"]["bad"] = ["s1", "zz"]
    with pytest.raises(UnknownAgentError):
        Scenario.from_dict(data)

def test_run_with_missing_schedule():
    """Test that a run referencing an undefined schedule is rejected."""
    with open(os.path.join(FIXTURES, "fig7.json"), "r", encoding="utf-8") as handle:
        data = json.load(handle)
    data["runs"]["bad"] = {"algorithm": "offers", "schedule": "missing"}
    with pytest.raises(ScenarioError):
        Scenario.from_dict(data)

def test_imputation_missing_agent():
    """Test that an imputation must list every agent."""
    with open(os.path.join(FIXTURES, "fig5.json"), "r", encoding="utf-8") as handle:
        data = json.load(handle)
    data["imputations"]["bad"] = {"s": "1"}
    with pytest.raises(ScenarioError):
        Scenario.from_dict(data)

def test_plots(fig7, tmp_path):
    """Test the potential and Lyapunov figures and their data frames."""
    dynamics = Dynamics(fig7.market)
    offers = dynamics.run_offer_dynamics(fig7.run("table2").config, fig7.scheduler(fig7.run("table2")))
    df = visuals.plot_potential(offers.trace, path=str(tmp_path / "potential.png"))
    assert list(df["phi"])[0] == 4 and list(df["phi"])[-1] == 0
    assert (tmp_path / "potential.png").exists()

    clock = dynamics.run_price_dynamics(fig7.run("table3").config, fig7.scheduler(fig7.run("table3")))
    df = visuals.plot_lyapunov(clock.trace, 1, path=str(tmp_path / "lyapunov.png"))
    assert len(df) == 6
    assert (df["L"] >= 1).all()
    visuals.plot_price_path(clock.trace, clock.average_prices, path=str(tmp_path / "prices.png"))
    assert (tmp_path / "prices.png").exists()
