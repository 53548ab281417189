import math
from fractions import Fraction
from itertools import product

from tradenet.analysis.demand import Demand
from tradenet.analysis.equilibria import Equilibria
from tradenet.decorators import operation, verifier, helper
from tradenet.exact import NEG_INF, is_finite
from tradenet.exceptions import (
    NotEquilibriumError, NotNashError, NoExtensionError, PreconditionError, VerificationError
)
from tradenet.logging_config import logger
from tradenet.market import Market, Valuation
from tradenet.models import Arrangement, MarketOutcome, NashReport, OfferProfile

class TradingGame:
    """The one-shot trading-network game in which agents post offers on their trades."""
    def __init__(self, market: Market):
        self.market = market
        self.demand = Demand(market)
        self.equilibria = Equilibria(market)

    @operation
    def outcome_of_offers(self, offers):
        """
        Market outcome induced by an offer profile.

        Parameters
        ----------
        offers : OfferProfile
            Complete profile

        Returns
        -------
        MarketOutcome
            Active trades (buyer offer equals seller offer) priced at the common offer
        """
        offers.check_complete(self.market)
        prices = {}
        for trade in self.market.trades:
            buyer_offer = offers[(trade.buyer, trade.id)]
            if buyer_offer == offers[(trade.seller, trade.id)]:
                prices[trade.id] = buyer_offer
        return MarketOutcome(prices, frozenset(prices))

    @operation
    def agent_game_utility(self, agent, offers):
        """Utility of ``agent`` from the trades its offers activate."""
        outcome = self.outcome_of_offers(offers)
        bundle = self.market.bundle_of(agent, outcome.allocation)
        return self.demand._utility(agent, bundle, outcome.prices)

    @operation
    def best_deviation(self, agent, offers, epsilon=Fraction(1, 2)):
        """
        Best unilateral deviation of ``agent`` against the standing counterpart offers.

        Parameters
        ----------
        agent : str
            Agent id
        offers : OfferProfile
            Complete profile
        epsilon : Fraction
            Distance by which rejected trades are stepped away from the counterpart offer

        Returns
        -------
        tuple
            (offers of the agent as a dict trade -> Fraction, utility of the deviation)
        """
        offers.check_complete(self.market)
        faced = offers.faced(self.market, agent)
        bundle = self.demand.demand_tiebreak(agent, faced)
        new_offers = {
            t: faced[t] if t in bundle else faced[t] - epsilon * self.market.chi(agent, t)
            for t in self.market.incident(agent)
        }
        return new_offers, self.demand._utility(agent, bundle, faced)

    @verifier
    def is_nash(self, offers, epsilon):
        """
        Classify an offer profile as not Nash, Nash, or epsilon-tight Nash.

        Parameters
        ----------
        offers : OfferProfile
            Complete profile
        epsilon : Fraction
            Tightness bound on |buyer offer - seller offer| (closed)

        Returns
        -------
        NashReport
        """
        epsilon = Fraction(epsilon)
        offers.check_complete(self.market)
        outcome = self.outcome_of_offers(offers)
        for agent in self.market.agents:
            if not self.market.incident(agent):
                continue
            bundle = self.market.bundle_of(agent, outcome.allocation)
            current = self.demand._utility(agent, bundle, outcome.prices)
            deviation, best = self.best_deviation(agent, offers, epsilon)
            if best > current:
                gain = best - current if is_finite(current) else best
                logger.debug(f"Agent {agent} gains {gain} by deviating")
                return NashReport(NashReport.NOT_NASH, witness_agent=agent, witness_offers=deviation, witness_gain=gain)

        crossed = tuple(
            t.id for t in self.market.trades
            if offers[(t.buyer, t.id)] > offers[(t.seller, t.id)]
        )
        if crossed:
            logger.warning(f"Nash equilibrium with buyer offers above seller offers on {list(crossed)}")
        tight = all(
            abs(offers[(t.buyer, t.id)] - offers[(t.seller, t.id)]) <= epsilon for t in self.market.trades
        )
        return NashReport(NashReport.EPS_TIGHT if tight else NashReport.NASH, crossed_trades=crossed)

    @operation
    def ne_from_ce(self, arrangement, epsilon):
        """
        Epsilon-tight Nash equilibrium implementing a competitive equilibrium.

        Active trades get both offers equal to the price; inactive trades get the buyer
        at price - epsilon/2 and the seller at price + epsilon/2.

        Returns
        -------
        OfferProfile
            Verified epsilon-tight Nash equilibrium
        """
        epsilon = Fraction(epsilon)
        if epsilon <= 0:
            raise PreconditionError("epsilon must be positive")
        if not self.equilibria.is_competitive_equilibrium(arrangement):
            raise NotEquilibriumError("arrangement is not a competitive equilibrium")
        offers = {}
        for trade in self.market.trades:
            price = arrangement.prices[trade.id]
            if trade.id in arrangement.allocation:
                offers[(trade.buyer, trade.id)] = price
                offers[(trade.seller, trade.id)] = price
            else:
                offers[(trade.buyer, trade.id)] = price - epsilon / 2
                offers[(trade.seller, trade.id)] = price + epsilon / 2
        profile = OfferProfile(offers)
        report = self.is_nash(profile, epsilon)
        if report.status != NashReport.EPS_TIGHT:
            raise NotNashError(f"constructed profile is {report.status}")
        return profile

    @helper
    def offers_from_outcome(self, outcome):
        """
        Offers that realize an outcome: matching offers on its trades, far-apart offers elsewhere.

        Returns
        -------
        OfferProfile
        """
        spread = self.market.max_abs_value() + sum((abs(p) for p in outcome.prices.values()), Fraction(0)) + 1
        offers = {}
        for trade in self.market.trades:
            if trade.id in outcome.allocation:
                offers[(trade.buyer, trade.id)] = outcome.prices[trade.id]
                offers[(trade.seller, trade.id)] = outcome.prices[trade.id]
            else:
                offers[(trade.buyer, trade.id)] = -spread
                offers[(trade.seller, trade.id)] = spread
        return OfferProfile(offers)

    def _require_tight(self, offers, epsilon):
        report = self.is_nash(offers, epsilon)
        if report.status != NashReport.EPS_TIGHT:
            raise NotNashError(f"offers are not an epsilon-tight Nash equilibrium ({report.status})")
        return report

    @operation
    def approx_ce_from_tight_ne(self, offers, epsilon):
        """
        Approximate competitive equilibrium read off an epsilon-tight Nash equilibrium.

        Inactive trades are priced at the midpoint of the buyer and seller offers.

        Returns
        -------
        Arrangement
            Verified (epsilon * Delta)-approximate competitive equilibrium
        """
        epsilon = Fraction(epsilon)
        self._require_tight(offers, epsilon)
        outcome = self.outcome_of_offers(offers)
        prices = {}
        for trade in self.market.trades:
            if trade.id in outcome.allocation:
                prices[trade.id] = outcome.prices[trade.id]
            else:
                prices[trade.id] = (offers[(trade.buyer, trade.id)] + offers[(trade.seller, trade.id)]) / 2
        arrangement = Arrangement(prices, outcome.allocation)
        slack = epsilon * self.market.max_degree
        if not self.equilibria.is_competitive_equilibrium(arrangement, slack):
            raise VerificationError(f"midpoint arrangement is not a {slack}-approximate competitive equilibrium")
        return arrangement

    def extension_bound(self):
        """Largest admissible epsilon for the extension, 1/(2*Delta - 2); None when unbounded."""
        delta = self.market.max_degree
        if delta <= 1:
            return None
        return Fraction(1, 2 * delta - 2)

    @helper
    def reduced_market(self, offers):
        """
        Sub-market on the inactive trades with valuations absorbing each agent's active trades.

        The modified value of a bundle is the best value of adding any subset of the agent's
        active trades at the standing counterpart offers, normalized so the empty bundle is 0.
        """
        outcome = self.outcome_of_offers(offers)
        active = outcome.allocation
        inactive = [t for t in self.market.trades if t.id not in active]
        inactive_ids = {t.id for t in inactive}
        valuations = {}
        for agent in self.market.agents:
            own_active = [t for t in self.market.incident(agent) if t in active]
            faced = offers.faced(self.market, agent)

            def modified(bundle):
                best = NEG_INF
                for mask in range(1 << len(own_active)):
                    extra = frozenset(own_active[j] for j in range(len(own_active)) if mask >> j & 1)
                    value = self.market.value(agent, bundle | extra)
                    if not is_finite(value):
                        continue
                    value -= sum((self.market.chi(agent, t) * faced[t] for t in extra), Fraction(0))
                    best = max(best, value)
                return best

            base = modified(frozenset())
            own_inactive = [t for t in self.market.incident(agent) if t in inactive_ids]
            entries = {}
            for mask in range(1, 1 << len(own_inactive)):
                bundle = frozenset(own_inactive[j] for j in range(len(own_inactive)) if mask >> j & 1)
                value = modified(bundle)
                entries[bundle] = value - base if is_finite(value) else NEG_INF
            valuations[agent] = Valuation(entries, NEG_INF)
        return Market(self.market.agents, inactive, valuations, name=f"{self.market.name}|inactive")

    @operation
    def extend_ne_to_ce(self, offers, epsilon):
        """
        Extend an epsilon-tight Nash equilibrium to an integral competitive equilibrium.

        Inactive trades are priced from {floor(seller offer), ceil(buyer offer)}; a candidate is
        accepted when every agent demands nothing in the reduced market and the spliced
        arrangement is an exact competitive equilibrium of the full market.

        Parameters
        ----------
        offers : OfferProfile
            Epsilon-tight Nash equilibrium
        epsilon : Fraction
            Must satisfy epsilon <= 1/(2*Delta - 2); at equality the extension may not exist

        Returns
        -------
        Arrangement
            Competitive equilibrium with the same active trades

        Raises
        ------
        NoExtensionError
            When no candidate verifies; ``at_tightness_bound`` marks epsilon = 1/(2*Delta - 2)
        """
        epsilon = Fraction(epsilon)
        bound = self.extension_bound()
        if bound is not None and epsilon > bound:
            raise PreconditionError(f"epsilon {epsilon} exceeds 1/(2*Delta-2) = {bound}")
        at_bound = bound is not None and epsilon == bound
        self._require_tight(offers, epsilon)
        outcome = self.outcome_of_offers(offers)
        reduced = self.reduced_market(offers)
        reduced_demand = Demand(reduced)

        inactive = list(reduced.trade_ids)
        choices = []
        for trade_id in inactive:
            low = math.floor(offers.seller_offer(self.market, trade_id))
            high = math.ceil(offers.buyer_offer(self.market, trade_id))
            choices.append(sorted({Fraction(low), Fraction(high)}))
        logger.debug(f"Extending NE over {len(inactive)} inactive trades ({math.prod(len(c) for c in choices)} candidates)")

        for choice in product(*choices):
            candidate = dict(zip(inactive, choice))
            if not all(
                frozenset() in reduced_demand.demand_set(agent, candidate)
                for agent in reduced.agents if reduced.incident(agent)
            ):
                continue
            prices = dict(outcome.prices)
            prices.update(candidate)
            arrangement = Arrangement(prices, outcome.allocation)
            if self.equilibria.is_competitive_equilibrium(arrangement):
                logger.info(f"Extended NE to CE with prices {prices}")
                return arrangement

        if at_bound:
            raise NoExtensionError(f"no extension at epsilon = 1/(2*Delta-2) = {bound}", at_tightness_bound=True)
        raise NoExtensionError("no integral candidate prices extend the Nash equilibrium")
