import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from tradenet.exact import NEG_INF, NEG_INF_TOKEN, format_number, is_finite, to_ext_value, to_fraction
from tradenet.exceptions import (
    ScenarioError, UnknownAgentError, UnknownTradeError, MissingPriceError, EnumerationCapError
)
from tradenet.logging_config import logger

@dataclass(frozen=True)
class Trade:
    """A bilateral contract, directed from its seller to its buyer."""
    id: str
    seller: str
    buyer: str

class Valuation:
    """
    Valuation of one agent over the subsets of its incident trades.

    Parameters
    ----------
    entries : dict
        Explicit values keyed by frozenset bundles.
    default : Fraction or NEG_INF
        Value of every nonempty bundle that is not listed.
    """
    def __init__(self, entries, default=NEG_INF):
        self.entries = dict(entries)
        self.default = default

    def __call__(self, bundle):
        if not bundle:
            return Fraction(0)
        return self.entries.get(frozenset(bundle), self.default)

class Market:
    """
    A trading network: agents, a directed multigraph of trades, and valuations.

    Every analysis class in ``tradenet.analysis`` is constructed with a Market.
    Markets are immutable once built; bundle lists are cached lazily.
    """
    MAX_AGENT_TRADES = 20
    MAX_MARKET_TRADES = 24

    def __init__(self, agents, trades, valuations, name="market"):
        self.name = name
        self.agents = tuple(agents)
        self.trades = tuple(trades)
        if len(set(self.agents)) != len(self.agents):
            raise ScenarioError("duplicate agent ids")

        self._trade_by_id = {}
        for trade in self.trades:
            if trade.id in self._trade_by_id:
                raise ScenarioError(f"duplicate trade id '{trade.id}'", token=trade.id)
            if trade.seller == trade.buyer:
                raise ScenarioError(f"trade '{trade.id}' has the same seller and buyer '{trade.seller}'", token=trade.id)
            for end in (trade.seller, trade.buyer):
                if end not in self.agents:
                    raise UnknownAgentError(f"trade '{trade.id}' references unknown agent '{end}'", token=trade.id)
            self._trade_by_id[trade.id] = trade

        self.trade_order = {trade.id: index for index, trade in enumerate(self.trades)}
        self._incident = {agent: tuple(t.id for t in self.trades if agent in (t.seller, t.buyer)) for agent in self.agents}

        self.valuations = {}
        for agent, valuation in valuations.items():
            self.check_agent(agent)
            for bundle, value in valuation.entries.items():
                self.check_bundle(agent, bundle)
                if not bundle and value != 0:
                    raise ScenarioError(f"agent '{agent}' must value the empty bundle at 0", token=agent)
            self.valuations[agent] = valuation
        for agent in self.agents:
            if agent not in self.valuations:
                if self._incident[agent]:
                    raise ScenarioError(f"agent '{agent}' has trades but no valuation", token=agent)
                self.valuations[agent] = Valuation({}, NEG_INF)
        self._bundles = {}

    # ---- Graph structure ----

    @property
    def n(self):
        return len(self.agents)

    @property
    def m(self):
        return len(self.trades)

    @property
    def trade_ids(self):
        return tuple(t.id for t in self.trades)

    @property
    def max_degree(self):
        """Maximum number of trades incident to one agent (Delta)."""
        return max((len(ids) for ids in self._incident.values()), default=0)

    def trade(self, trade_id):
        try:
            return self._trade_by_id[trade_id]
        except KeyError:
            raise UnknownTradeError(f"unknown trade id '{trade_id}'")

    def check_agent(self, agent):
        if agent not in self._incident:
            raise UnknownAgentError(f"unknown agent id '{agent}'")

    def incident(self, agent):
        """Trades incident to ``agent`` in declaration order."""
        self.check_agent(agent)
        return self._incident[agent]

    def chi(self, agent, trade_id):
        """+1 if ``agent`` buys the trade, -1 if it sells it, 0 otherwise."""
        trade = self.trade(trade_id)
        if trade.buyer == agent:
            return 1
        if trade.seller == agent:
            return -1
        return 0

    def counterpart(self, agent, trade_id):
        trade = self.trade(trade_id)
        return trade.seller if trade.buyer == agent else trade.buyer

    def neighbours(self, agent):
        return {self.counterpart(agent, trade_id) for trade_id in self.incident(agent)}

    def check_bundle(self, agent, bundle):
        incident = set(self.incident(agent))
        for trade_id in bundle:
            self.trade(trade_id)
            if trade_id not in incident:
                raise ScenarioError(f"trade '{trade_id}' is not incident to agent '{agent}'", token=trade_id)

    def check_allocation(self, allocation):
        for trade_id in allocation:
            self.trade(trade_id)

    def buying(self, agent, bundle):
        return frozenset(t for t in bundle if self.trade(t).buyer == agent)

    def selling(self, agent, bundle):
        return frozenset(t for t in bundle if self.trade(t).seller == agent)

    def bundle_of(self, agent, allocation):
        """Phi_i: the part of an allocation incident to ``agent``."""
        incident = self.incident(agent)
        return frozenset(t for t in allocation if t in incident)

    def involved(self, allocation):
        """Agents a(Phi) taking part in at least one trade of the allocation."""
        agents = set()
        for trade_id in allocation:
            trade = self.trade(trade_id)
            agents.update((trade.seller, trade.buyer))
        return frozenset(agents)

    def sort_trades(self, trade_ids):
        return sorted(trade_ids, key=self.trade_order.__getitem__)

    # ---- Valuations ----

    def value(self, agent, bundle):
        self.check_agent(agent)
        return self.valuations[agent](frozenset(bundle))

    def bundles(self, agent):
        """
        All subsets of the agent's incident trades.

        Bundles are ordered by bitmask over the declaration order, so the empty
        bundle comes first.
        """
        if agent not in self._bundles:
            incident = self.incident(agent)
            if len(incident) > self.MAX_AGENT_TRADES:
                raise EnumerationCapError(f"agent '{agent}' has {len(incident)} trades; the cap is {self.MAX_AGENT_TRADES}")
            self._bundles[agent] = [
                frozenset(incident[j] for j in range(len(incident)) if mask >> j & 1)
                for mask in range(1 << len(incident))
            ]
        return self._bundles[agent]

    def allocations(self):
        """All subsets of the trades, ordered by bitmask."""
        if self.m > self.MAX_MARKET_TRADES:
            raise EnumerationCapError(f"market has {self.m} trades; the cap is {self.MAX_MARKET_TRADES}")
        ids = self.trade_ids
        for mask in range(1 << len(ids)):
            yield frozenset(ids[j] for j in range(len(ids)) if mask >> j & 1)

    def finite_values(self):
        values = [Fraction(0)]
        for agent in self.agents:
            for bundle in self.bundles(agent):
                value = self.value(agent, bundle)
                if is_finite(value):
                    values.append(value)
        return values

    @property
    def is_integral(self):
        return all(value.denominator == 1 for value in self.finite_values())

    @property
    def all_finite(self):
        return all(is_finite(self.value(a, b)) for a in self.agents for b in self.bundles(a))

    def max_abs_value(self):
        return max(abs(v) for v in self.finite_values())

    def restrict(self, coalition):
        """Sub-market on the coalition and the trades internal to it."""
        coalition = [a for a in self.agents if a in set(coalition)]
        members = set(coalition)
        trades = [t for t in self.trades if t.seller in members and t.buyer in members]
        kept = {t.id for t in trades}
        valuations = {}
        for agent in coalition:
            source = self.valuations[agent]
            valuations[agent] = Valuation(
                {b: self.value(agent, b) for b in self.bundles(agent) if b and b <= kept},
                source.default,
            )
        return Market(coalition, trades, valuations, name=f"{self.name}|{'+'.join(coalition)}")

    # ---- Prices ----

    def price_vector(self, mapping, scope=None):
        """
        Parse a price vector into exact Fractions.

        Parameters
        ----------
        mapping : dict
            Trade id to number (int, decimal string or Fraction).
        scope : iterable, optional
            Trades the vector must cover; defaults to every trade.

        Returns
        -------
        dict
            Trade id to Fraction.
        """
        prices = {}
        for trade_id, price in mapping.items():
            self.trade(trade_id)
            try:
                prices[trade_id] = to_fraction(price)
            except ValueError as error:
                raise ScenarioError(f"price of '{trade_id}': {error}", token=trade_id)
        scope = self.trade_ids if scope is None else scope
        missing = [t for t in scope if t not in prices]
        if missing:
            raise MissingPriceError(f"missing prices for trades {missing}")
        return prices

    # ---- Serialization ----

    @classmethod
    def from_dict(cls, data, name=None):
        """
        Build a market from the scenario JSON structure.

        Parameters
        ----------
        data : dict
            ``{"agents": [...], "trades": [{"id", "seller", "buyer"}], "valuations": {...}}``.
        name : str, optional
            Label; defaults to ``data["name"]``.

        Returns
        -------
        Market
        """
        try:
            agents = [str(a) for a in data["agents"]]
            trades = [Trade(str(t["id"]), str(t["seller"]), str(t["buyer"])) for t in data.get("trades", [])]
        except (KeyError, TypeError) as error:
            raise ScenarioError(f"malformed agents/trades section: missing {error}")

        incident_ids = {t.id for t in trades}
        valuations = {}
        for agent, spec in data.get("valuations", {}).items():
            try:
                default = to_ext_value(spec.get("default", NEG_INF_TOKEN))
                entries = {}
                for entry in spec.get("entries", []):
                    bundle = frozenset(str(t) for t in entry["bundle"])
                    unknown = bundle - incident_ids
                    if unknown:
                        raise UnknownTradeError(f"valuation of '{agent}' names unknown trades {sorted(unknown)}", token=sorted(unknown)[0])
                    if bundle in entries:
                        raise ScenarioError(f"valuation of '{agent}' lists bundle {sorted(bundle)} twice", token=agent)
                    entries[bundle] = to_ext_value(entry["value"])
            except (KeyError, TypeError, AttributeError) as error:
                raise ScenarioError(f"malformed valuation for agent '{agent}': {error}", token=agent)
            except ValueError as error:
                raise ScenarioError(f"valuation for agent '{agent}': {error}", token=agent)
            valuations[str(agent)] = Valuation(entries, default)

        return cls(agents, trades, valuations, name=name or data.get("name", "market"))

    @classmethod
    def from_file(cls, path):
        """Load a market from a scenario file, reporting errors with line context."""
        logger.debug(f"Loading market from {path}")
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
        return cls.from_text(text)

    @classmethod
    def from_text(cls, text):
        data = parse_json(text)
        try:
            return cls.from_dict(data)
        except ScenarioError as error:
            raise locate(error, text)

    def to_dict(self):
        valuations = {}
        for agent in self.agents:
            valuation = self.valuations[agent]
            entries = [
                {"bundle": self.sort_trades(bundle), "value": format_number(value)}
                for bundle, value in valuation.entries.items() if bundle
            ]
            valuations[agent] = {"default": format_number(valuation.default), "entries": entries}
        return {
            "name": self.name,
            "agents": list(self.agents),
            "trades": [{"id": t.id, "seller": t.seller, "buyer": t.buyer} for t in self.trades],
            "valuations": valuations,
        }

    def __repr__(self):
        return f"Market(name={self.name!r}, n={self.n}, m={self.m})"

def parse_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as error:
        raise ScenarioError(f"invalid JSON: {error.msg}", line=error.lineno)

def locate(error, text):
    """Attach the line of the first occurrence of the error's token."""
    if error.line is not None or error.token is None:
        return error
    needle = f'"{error.token}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            located = type(error)(str(error), line=number, token=error.token)
            return located
    return error

def combinations_of(items, max_size=None):
    """Subsets of ``items`` in increasing size, then lexicographic order."""
    items = list(items)
    top = len(items) if max_size is None else min(max_size, len(items))
    for size in range(top + 1):
        yield from combinations(items, size)
