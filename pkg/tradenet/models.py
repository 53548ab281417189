"""Value objects shared by the analysis modules."""
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import pandas as pd

from tradenet.exact import format_number, format_vector, to_fraction
from tradenet.exceptions import IncompleteOffersError, ScenarioError

@dataclass(frozen=True)
class Arrangement:
    """Prices on every trade plus a set of executed trades."""
    prices: dict
    allocation: frozenset

    def to_dict(self, market=None):
        allocation = market.sort_trades(self.allocation) if market else sorted(self.allocation)
        return {"prices": format_vector(self.prices), "allocation": allocation}

    @classmethod
    def from_dict(cls, market, data):
        allocation = frozenset(data.get("allocation", []))
        market.check_allocation(allocation)
        return cls(market.price_vector(data["prices"]), allocation)

@dataclass(frozen=True)
class MarketOutcome:
    """Executed trades with prices indexed only by those trades."""
    prices: dict
    allocation: frozenset

    def __post_init__(self):
        if set(self.prices) != set(self.allocation):
            raise ScenarioError("outcome prices must be indexed exactly by the allocation")

    def to_dict(self, market=None):
        allocation = market.sort_trades(self.allocation) if market else sorted(self.allocation)
        return {"prices": format_vector(self.prices), "allocation": allocation}

    @classmethod
    def from_dict(cls, market, data):
        allocation = frozenset(data.get("allocation", []))
        market.check_allocation(allocation)
        return cls(market.price_vector(data.get("prices", {}), scope=allocation), allocation)

@dataclass(frozen=True)
class OfferProfile:
    """
    One offer per (agent, incident trade) pair.

    Offers are stored as a mapping ``(agent, trade_id) -> Fraction``.
    """
    offers: dict

    def __getitem__(self, key):
        return self.offers[key]

    def agent_offers(self, market, agent):
        return {t: self.offers[(agent, t)] for t in market.incident(agent)}

    def faced(self, market, agent):
        """sigma^{-i}: the counterpart offers on the agent's incident trades."""
        return {t: self.offers[(market.counterpart(agent, t), t)] for t in market.incident(agent)}

    def buyer_offer(self, market, trade_id):
        return self.offers[(market.trade(trade_id).buyer, trade_id)]

    def seller_offer(self, market, trade_id):
        return self.offers[(market.trade(trade_id).seller, trade_id)]

    def replace(self, agent, new_offers):
        offers = dict(self.offers)
        for trade_id, value in new_offers.items():
            offers[(agent, trade_id)] = value
        return OfferProfile(offers)

    def check_complete(self, market):
        missing = [
            (agent, t) for agent in market.agents for t in market.incident(agent)
            if (agent, t) not in self.offers
        ]
        if missing:
            raise IncompleteOffersError(f"offer profile misses incidences {missing}")
        return self

    def to_dict(self, market):
        return {
            agent: {t: format_number(self.offers[(agent, t)]) for t in market.incident(agent)}
            for agent in market.agents if market.incident(agent)
        }

    @classmethod
    def from_dict(cls, market, data):
        """Parse ``{agent: {trade: offer}}`` and check completeness."""
        offers = {}
        for agent, row in data.items():
            market.check_agent(agent)
            for trade_id, value in row.items():
                market.check_bundle(agent, [trade_id])
                try:
                    offers[(agent, trade_id)] = to_fraction(value)
                except ValueError as error:
                    raise ScenarioError(f"offer of '{agent}' on '{trade_id}': {error}", token=trade_id)
        return cls(offers).check_complete(market)

@dataclass(frozen=True)
class Imputation:
    """Utility vector over the agents of a cooperative game."""
    utilities: dict

    def vector(self, agents):
        return tuple(self.utilities[a] for a in agents)

    def __getitem__(self, agent):
        return self.utilities[agent]

    def to_dict(self):
        return format_vector(self.utilities)

    @classmethod
    def from_sequence(cls, agents, values):
        return cls({a: to_fraction(v) for a, v in zip(agents, values)})

@dataclass(frozen=True)
class CharacteristicFunction:
    """Coalition values w(C) keyed by frozensets of agent ids."""
    agents: tuple
    values: dict

    def __call__(self, coalition):
        return self.values[frozenset(coalition)]

    @property
    def grand(self):
        return self.values[frozenset(self.agents)]

    def coalitions(self):
        """Nonempty coalitions by increasing size, then lexicographic agent order."""
        return sorted(
            (c for c in self.values if c),
            key=lambda c: (len(c), sorted(self.agents.index(a) for a in c)),
        )

    def bitmask(self, coalition):
        return sum(1 << self.agents.index(a) for a in coalition)

    def to_dict(self):
        return {str(self.bitmask(c)): format_number(self.values[c]) for c in [frozenset()] + self.coalitions()}

    def to_dataframe(self):
        rows = [
            {"coalition": "{" + ",".join(a for a in self.agents if a in c) + "}", "bitmask": self.bitmask(c), "value": self.values[c]}
            for c in self.coalitions()
        ]
        return pd.DataFrame(rows)

    @classmethod
    def from_dict(cls, agents, data):
        """Inverse of ``to_dict``: bitmask strings to values; missing coalitions are errors."""
        agents = tuple(agents)
        values = {}
        for key, value in data.items():
            mask = int(key)
            values[frozenset(a for j, a in enumerate(agents) if mask >> j & 1)] = to_fraction(value)
        values.setdefault(frozenset(), Fraction(0))
        if len(values) != 1 << len(agents):
            raise ScenarioError("characteristic function must list every coalition")
        return cls(agents, values)

@dataclass(frozen=True)
class CoreViolation:
    kind: str  # nonnegativity | efficiency | coalition
    coalition: frozenset
    value: Fraction
    bound: Fraction

@dataclass(frozen=True)
class FacetRecord:
    """A facet of an agent's locus of indifference prices found on the sampling grid."""
    anchor: dict
    normal: tuple
    weight: int
    demand_change: tuple  # (bundle before, bundle after) along the sampling line
    trades: tuple

    def to_dict(self):
        return {
            "anchor": format_vector(self.anchor),
            "normal": list(self.normal),
            "weight": self.weight,
            "demand_change": [sorted(b) for b in self.demand_change],
            "trades": list(self.trades),
        }

@dataclass(frozen=True)
class Auction:
    """Buyers, one unit of each good, and valuations over good subsets."""
    buyers: tuple
    goods: tuple
    valuations: dict  # agent -> {frozenset of goods: ExtValue}
    domains: dict  # agent -> goods the agent may hold

@dataclass
class RunConfig:
    """
    Parameters of a dynamics run.

    ``epsilon=None`` selects the automatic step R*sqrt(2m/(T*Delta)) of the price dynamics.
    """
    epsilon: Optional[Fraction] = None
    rounds: int = 10 ** 6
    R: Optional[Fraction] = None
    seed: int = 0
    initial_offers: Optional[dict] = None
    initial_prices: Optional[dict] = None
    track: bool = True

    @classmethod
    def from_dict(cls, data):
        return cls(
            epsilon=to_fraction(data["epsilon"]) if data.get("epsilon") not in (None, "auto") else None,
            rounds=int(data.get("rounds", 10 ** 6)),
            R=to_fraction(data["R"]) if data.get("R") is not None else None,
            seed=int(data.get("seed", 0)),
            initial_offers=data.get("initial_offers"),
            initial_prices=data.get("initial_prices"),
        )

@dataclass(frozen=True)
class TraceRecord:
    round: int
    agent: Optional[str]
    bundle: Optional[frozenset]
    snapshot: dict
    potential: Optional[int] = None
    lyapunov: Optional[Fraction] = None
    unsatisfied: Optional[tuple] = None

    def to_dict(self, market):
        record = {
            "round": self.round,
            "agent": self.agent,
            "bundle": market.sort_trades(self.bundle) if self.bundle is not None else None,
            "snapshot": _format_nested(self.snapshot),
        }
        if self.potential is not None:
            record["phi"] = self.potential
        if self.lyapunov is not None:
            record["L"] = format_number(self.lyapunov)
        if self.unsatisfied is not None:
            record["unsatisfied"] = list(self.unsatisfied)
        return record

@dataclass
class DynamicsTrace:
    algorithm: str
    records: list = field(default_factory=list)

    def append(self, record):
        if record.round != len(self.records):
            raise ValueError("trace rounds must be contiguous from 0")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def to_jsonl(self, market):
        return "".join(json.dumps(r.to_dict(market), sort_keys=True) + "\n" for r in self.records)

@dataclass(frozen=True)
class OfferRun:
    trace: DynamicsTrace
    offers: OfferProfile
    terminated: bool
    rounds: int

@dataclass(frozen=True)
class PriceRun:
    trace: DynamicsTrace
    final_prices: dict
    average_prices: dict
    epsilon: Fraction
    rounds: int

@dataclass(frozen=True)
class NashReport:
    status: str  # not_nash | nash | eps_tight_nash
    witness_agent: Optional[str] = None
    witness_offers: Optional[dict] = None
    witness_gain: Optional[Fraction] = None
    crossed_trades: tuple = ()

    NOT_NASH = "not_nash"
    NASH = "nash"
    EPS_TIGHT = "eps_tight_nash"

    @property
    def is_nash(self):
        return self.status != self.NOT_NASH

@dataclass(frozen=True)
class TaxedCheck:
    taxed_ce: bool
    original_ce: bool
    efficient: bool

    @property
    def original_ce_implies_taxed_ce(self):
        return (not self.original_ce) or self.taxed_ce

    @property
    def taxed_allocation_efficient(self):
        return (not self.taxed_ce) or self.efficient

def _format_nested(value):
    if isinstance(value, dict):
        return {key: _format_nested(val) for key, val in value.items()}
    return format_number(value)
