from fractions import Fraction

from tradenet.analysis.demand import Demand
from tradenet.analysis.equilibria import Equilibria
from tradenet.analysis.welfare import Welfare
from tradenet.decorators import operation, verifier, helper
from tradenet.exact import NEG_INF, is_finite
from tradenet.exceptions import PreconditionError
from tradenet.logging_config import logger
from tradenet.market import Market
from tradenet.models import Arrangement, Auction

class Reduction:
    """
    The auction equivalent of a trading network.

    Every trade becomes one good. A trade that is executed goes to its buyer, one that is
    not executed stays with its seller, so agent i holds tau_i(bundle) = bought trades
    plus the selling trades it does not execute.
    """
    def __init__(self, market: Market):
        self.market = market
        self.demand = Demand(market)
        self.welfare = Welfare(market)
        self.equilibria = Equilibria(market)
        self._auction = None

    def tau(self, agent, bundle):
        """Map a bundle of trades to the goods the agent holds; an involution on the agent's bundles."""
        bundle = frozenset(bundle)
        selling = self.market.selling(agent, self.market.incident(agent))
        return self.market.buying(agent, bundle) | (selling - self.market.selling(agent, bundle))

    @operation
    def to_auction(self):
        """
        Build the auction with valuations v_hat(tau(bundle)) = v(bundle).

        Returns
        -------
        Auction
        """
        if self._auction is None:
            logger.debug(f"Reducing {self.market.name} to an auction")
            valuations = {
                agent: {self.tau(agent, b): self.market.value(agent, b) for b in self.market.bundles(agent)}
                for agent in self.market.agents
            }
            domains = {agent: frozenset(self.market.incident(agent)) for agent in self.market.agents}
            self._auction = Auction(self.market.agents, self.market.trade_ids, valuations, domains)
        return self._auction

    @operation
    def map_allocation(self, allocation):
        """
        Goods held by each agent once ``allocation`` is executed.

        Returns
        -------
        dict
            Agent id to frozenset of goods; every good is held by exactly one agent
        """
        allocation = frozenset(allocation)
        self.market.check_allocation(allocation)
        return {a: self.tau(a, self.market.bundle_of(a, allocation)) for a in self.market.agents}

    @helper
    def unmap_allocation(self, holdings):
        """Recover the executed trades from an auction allocation; each good must be held once, by its buyer or seller."""
        allocation = set()
        for trade in self.market.trades:
            holders = [a for a, goods in holdings.items() if trade.id in goods]
            if len(holders) != 1 or holders[0] not in (trade.seller, trade.buyer):
                raise PreconditionError(f"good '{trade.id}' must be held once by its buyer or seller, found {holders}")
            if holders[0] == trade.buyer:
                allocation.add(trade.id)
        return frozenset(allocation)

    def _auction_utility(self, agent, goods, prices):
        value = self.to_auction().valuations[agent].get(frozenset(goods), NEG_INF)
        if not is_finite(value):
            return NEG_INF
        return value - sum((prices[g] for g in goods), Fraction(0))

    @operation
    def auction_demand(self, agent, prices):
        """
        Utility-maximizing good sets of ``agent`` in the auction.

        Returns
        -------
        list of frozenset
            Ordered like the market-side demand set
        """
        table = [(goods, self._auction_utility(agent, goods, prices)) for goods in self.to_auction().valuations[agent]]
        best = max(u for _, u in table)
        return sorted((g for g, u in table if u == best), key=self.demand.tie_order)

    @helper
    def auction_social_welfare(self, holdings):
        return sum(
            (self.to_auction().valuations[a].get(frozenset(goods), NEG_INF) for a, goods in holdings.items()),
            Fraction(0),
        )

    @verifier
    def verify_demand_mapping(self, agent, prices):
        """
        Check that tau maps the agent's market demand set onto its auction demand set.

        Returns
        -------
        bool
        """
        prices = self.market.price_vector(prices)
        market_side = {self.tau(agent, b) for b in self.demand.demand_set(agent, prices)}
        return market_side == set(self.auction_demand(agent, prices))

    @helper
    def is_auction_equilibrium(self, prices, holdings):
        """Every good allocated exactly once and every agent holding a demanded good set."""
        counts = {g: 0 for g in self.market.trade_ids}
        for goods in holdings.values():
            for g in goods:
                counts[g] += 1
        if any(c != 1 for c in counts.values()):
            return False
        return all(frozenset(holdings[a]) in self.auction_demand(a, prices) for a in self.market.agents)

    @verifier
    def verify_ce_mapping(self, arrangement):
        """
        Check that the arrangement is a market equilibrium exactly when its image is an auction equilibrium.

        Returns
        -------
        bool
        """
        prices = self.market.price_vector(arrangement.prices)
        market_ce = self.equilibria.is_competitive_equilibrium(Arrangement(prices, frozenset(arrangement.allocation)))
        auction_ce = self.is_auction_equilibrium(prices, self.map_allocation(arrangement.allocation))
        logger.debug(f"market CE {market_ce}, auction CE {auction_ce}")
        return market_ce == auction_ce
