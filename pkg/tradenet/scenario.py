import os
from dataclasses import dataclass
from typing import Optional

from tradenet.analysis.dynamics import Scheduler
from tradenet.exceptions import ScenarioError, UnknownAgentError
from tradenet.logging_config import logger
from tradenet.market import Market, parse_json, locate
from tradenet.models import Arrangement, Imputation, MarketOutcome, OfferProfile, RunConfig

DEFAULT_FIXTURES = os.path.abspath(os.path.join(os.path.dirname(__file__), '../fixtures'))

ALGORITHMS = ("offers", "clock")

@dataclass(frozen=True)
class RunSpec:
    name: str
    algorithm: str
    config: RunConfig
    schedule: Optional[str] = None

class Scenario:
    """
    A market plus the named inputs that go with it: runs, scripted schedules, offer
    profiles, arrangements, outcomes and imputations.

    Scenario files are the market JSON with extra top-level sections::

        {"agents": [...], "trades": [...], "valuations": {...},
         "runs": {"table2": {"algorithm": "offers", "epsilon": "0.5", "schedule": "table2"}},
         "schedules": {"table2": ["s1", "b", "s2"]},
         "offers": {...}, "arrangements": {...}, "outcomes": {...}, "imputations": {...}}
    """
    def __init__(self, market, runs=None, schedules=None, offers=None, arrangements=None,
                 outcomes=None, imputations=None, alpha=None, source=None):
        self.market = market
        self.runs = runs or {}
        self.schedules = schedules or {}
        self.offers = offers or {}
        self.arrangements = arrangements or {}
        self.outcomes = outcomes or {}
        self.imputations = imputations or {}
        self.alpha = alpha
        self.source = source

    @classmethod
    def from_dict(cls, data, source=None):
        market = Market.from_dict(data)

        schedules = {}
        for name, sequence in data.get("schedules", {}).items():
            for agent in sequence:
                if agent not in market.agents:
                    raise UnknownAgentError(f"schedule '{name}' names unknown agent '{agent}'", token=agent)
            schedules[name] = list(sequence)

        runs = {}
        for name, spec in data.get("runs", {}).items():
            algorithm = spec.get("algorithm", "offers")
            if algorithm not in ALGORITHMS:
                raise ScenarioError(f"run '{name}' has unknown algorithm '{algorithm}'", token=name)
            schedule = spec.get("schedule")
            if schedule is not None and schedule not in schedules:
                raise ScenarioError(f"run '{name}' references missing schedule '{schedule}'", token=name)
            try:
                config = RunConfig.from_dict(spec)
            except (ValueError, TypeError) as error:
                raise ScenarioError(f"run '{name}': {error}", token=name)
            if config.initial_offers is not None:
                config.initial_offers = OfferProfile.from_dict(market, config.initial_offers)
            if config.initial_prices is not None:
                config.initial_prices = market.price_vector(config.initial_prices)
            runs[name] = RunSpec(name, algorithm, config, schedule)

        offers = {name: OfferProfile.from_dict(market, row) for name, row in data.get("offers", {}).items()}
        arrangements = {name: Arrangement.from_dict(market, row) for name, row in data.get("arrangements", {}).items()}
        outcomes = {name: MarketOutcome.from_dict(market, row) for name, row in data.get("outcomes", {}).items()}
        imputations = {}
        for name, row in data.get("imputations", {}).items():
            try:
                imputations[name] = Imputation.from_sequence(market.agents, [row[a] for a in market.agents])
            except KeyError as error:
                raise ScenarioError(f"imputation '{name}' misses agent {error}", token=name)
        return cls(market, runs, schedules, offers, arrangements, outcomes, imputations,
                   alpha=data.get("alpha"), source=source)

    @classmethod
    def from_text(cls, text, source=None):
        data = parse_json(text)
        try:
            return cls.from_dict(data, source=source)
        except ScenarioError as error:
            raise locate(error, text)

    @classmethod
    def from_file(cls, path):
        """
        Load a scenario by path, or by bare name from the fixture directory.

        Parameters
        ----------
        path : str
            File path, or a name such as ``fig7`` resolved against TRADENET_FIXTURES

        Returns
        -------
        Scenario
        """
        resolved = resolve(path)
        logger.debug(f"Loading scenario from {resolved}")
        try:
            with open(resolved, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as error:
            raise ScenarioError(f"cannot read scenario '{path}': {error.strerror}")
        return cls.from_text(text, source=resolved)

    # ---- Named entries ----

    def _lookup(self, table, kind, name):
        if name not in table:
            logger.warning(f"Scenario {self.market.name} has no {kind} named '{name}'")
            return None
        return table[name]

    def run(self, name):
        return self._lookup(self.runs, "run", name)

    def schedule(self, name):
        return self._lookup(self.schedules, "schedule", name)

    def offer_profile(self, name):
        return self._lookup(self.offers, "offer profile", name)

    def arrangement(self, name):
        return self._lookup(self.arrangements, "arrangement", name)

    def outcome(self, name):
        return self._lookup(self.outcomes, "outcome", name)

    def imputation(self, name):
        return self._lookup(self.imputations, "imputation", name)

    def scheduler(self, spec, seed=None):
        """Scripted scheduler for runs with a schedule, seeded random otherwise."""
        if spec.schedule is not None:
            return Scheduler.scripted(self.schedules[spec.schedule])
        return Scheduler.random(spec.config.seed if seed is None else seed)

def resolve(name):
    """Return ``name`` if it is a file, else look it up in the fixture directory."""
    if os.path.isfile(name):
        return name
    directory = os.getenv("TRADENET_FIXTURES", DEFAULT_FIXTURES)
    candidate = os.path.join(directory, name if name.endswith(".json") else f"{name}.json")
    if os.path.isfile(candidate):
        return candidate
    raise ScenarioError(f"scenario '{name}' not found (looked in {directory})")
