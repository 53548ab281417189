"""Seeded random markets for property suites and CLI sweeps.

Valuations are built where substitutability is easy to guarantee: each agent values the
goods it would hold in the equivalent auction by an assignment (OXS) valuation, which
is gross substitutes, and the valuation over trades is read back through the same
buy/sell mapping the reduction module uses. Every generated agent is therefore fully
substitutable, and all values are finite integers.
"""
from fractions import Fraction

import numpy as np

from tradenet.exact import NEG_INF
from tradenet.market import Market, Trade, Valuation

def generator(seed):
    """A numpy Generator from a seed, or the Generator itself."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)

def assignment_value(weights, goods):
    """Best total weight of matching ``goods`` to distinct slots; unmatched goods add nothing."""
    goods = list(goods)
    if not goods:
        return 0

    def best(index, used):
        if index == len(goods):
            return 0
        top = best(index + 1, used)
        for slot, row in enumerate(weights):
            if slot not in used:
                top = max(top, row[goods[index]] + best(index + 1, used | {slot}))
        return top

    return best(0, frozenset())

def _subsets(items):
    items = list(items)
    for mask in range(1, 1 << len(items)):
        yield frozenset(items[j] for j in range(len(items)) if mask >> j & 1)

def substitutes_valuation(rng, trade_ids, sells, max_value=5, slots=2):
    """
    Valuation over ``trade_ids`` induced by a random assignment valuation over goods.

    Parameters
    ----------
    rng : numpy.random.Generator
    trade_ids : list of str
        The agent's incident trades
    sells : set of str
        Those the agent sells
    max_value : int
        Largest slot weight
    slots : int
        Number of unit-demand slots

    Returns
    -------
    Valuation
    """
    weights = [{t: int(rng.integers(0, max_value + 1)) for t in trade_ids} for _ in range(slots)]
    sells = frozenset(sells)
    base = assignment_value(weights, sells)
    entries = {}
    for bundle in _subsets(trade_ids):
        held = (bundle - sells) | (sells - bundle)
        entries[bundle] = Fraction(assignment_value(weights, held) - base)
    return Valuation(entries, NEG_INF)

def random_substitutes_market(seed, n_agents=3, n_trades=4, max_value=5, slots=2, name=None):
    """
    Random market whose agents are all fully substitutable.

    Parameters
    ----------
    seed : int or numpy.random.Generator
    n_agents : int
    n_trades : int
        Trades are drawn between uniformly chosen distinct agents; parallel trades allowed
    max_value : int
    slots : int

    Returns
    -------
    Market
    """
    rng = generator(seed)
    agents = [f"a{i}" for i in range(n_agents)]
    trades = []
    for j in range(n_trades):
        seller, buyer = rng.choice(n_agents, size=2, replace=False)
        trades.append(Trade(f"t{j}", agents[int(seller)], agents[int(buyer)]))

    valuations = {}
    for agent in agents:
        incident = [t.id for t in trades if agent in (t.seller, t.buyer)]
        if not incident:
            continue
        sells = {t.id for t in trades if t.seller == agent}
        valuations[agent] = substitutes_valuation(rng, incident, sells, max_value, slots)
    label = name or (f"random-{seed}" if isinstance(seed, int) else "random")
    return Market(agents, trades, valuations, name=label)

def random_two_agent_market(seed, max_trades=3, max_value=5):
    """Two fully substitutable agents joined by one to ``max_trades`` trades in random directions."""
    rng = generator(seed)
    n_trades = int(rng.integers(1, max_trades + 1))
    agents = ["a0", "a1"]
    trades = []
    for j in range(n_trades):
        forward = bool(rng.integers(0, 2))
        trades.append(Trade(f"t{j}", *(agents if forward else agents[::-1])))
    valuations = {}
    for agent in agents:
        incident = [t.id for t in trades]
        sells = {t.id for t in trades if t.seller == agent}
        valuations[agent] = substitutes_valuation(rng, incident, sells, max_value, slots=2)
    label = f"pair-{seed}" if isinstance(seed, int) else "pair"
    return Market(agents, trades, valuations, name=label)

def random_prices(rng, market, low, high, step=Fraction(1, 2)):
    """Uniform lattice prices on every trade in [low, high]."""
    rng = generator(rng)
    ticks = int((Fraction(high) - Fraction(low)) / Fraction(step))
    return {t: Fraction(low) + int(rng.integers(0, ticks + 1)) * Fraction(step) for t in market.trade_ids}
