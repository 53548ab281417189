from fractions import Fraction

import numpy as np

from tradenet.analysis.demand import Demand
from tradenet.analysis.game import TradingGame
from tradenet.analysis.welfare import Welfare
from tradenet.decorators import operation, helper
from tradenet.exact import rational_sqrt
from tradenet.exceptions import PreconditionError, SchedulerError, VerificationError
from tradenet.logging_config import logger
from tradenet.market import Market
from tradenet.models import DynamicsTrace, NashReport, OfferProfile, OfferRun, PriceRun, TraceRecord

class Scheduler:
    """
    Chooses the active agent of each round.

    Random schedulers draw uniformly from the eligible agents (in market order) with
    numpy's PCG64 generator seeded by ``seed``; scripted schedulers replay a fixed
    sequence and reject ineligible agents.
    """
    RNG_ALGORITHM = "numpy.random.PCG64"

    def __init__(self, seed=None, script=None):
        self.seed = seed
        self.script = list(script) if script is not None else None
        self.position = 0
        self.rng = np.random.Generator(np.random.PCG64(seed)) if script is None else None

    @classmethod
    def random(cls, seed):
        return cls(seed=seed)

    @classmethod
    def scripted(cls, sequence):
        return cls(script=sequence)

    @property
    def mode(self):
        return "scripted" if self.script is not None else "seeded-uniform-random"

    def next(self, eligible):
        """Next agent among ``eligible`` (an ordered list); None once a script is exhausted."""
        if self.script is not None:
            if self.position >= len(self.script):
                return None
            agent = self.script[self.position]
            self.position += 1
            if agent not in eligible:
                raise SchedulerError(f"scripted agent '{agent}' is not eligible; eligible agents are {list(eligible)}")
            return agent
        if not eligible:
            return None
        return eligible[int(self.rng.integers(len(eligible)))]

class Dynamics:
    def __init__(self, market: Market):
        self.market = market
        self.demand = Demand(market)
        self.welfare = Welfare(market)
        self.game = TradingGame(market)

    # ---- Offer dynamics ----

    def _best_response(self, agent, offers, epsilon):
        faced = offers.faced(self.market, agent)
        bundle = self.demand.demand_tiebreak(agent, faced)
        response = {
            t: faced[t] if t in bundle else faced[t] - epsilon * self.market.chi(agent, t)
            for t in self.market.incident(agent)
        }
        return bundle, response

    @operation
    def potential_phi(self, offers, epsilon):
        """
        Number of offer coordinates that best responses would change.

        Parameters
        ----------
        offers : OfferProfile
            Complete profile
        epsilon : Fraction
            Step of the offer dynamics

        Returns
        -------
        int
        """
        offers.check_complete(self.market)
        epsilon = Fraction(epsilon)
        total = 0
        for agent in self.market.agents:
            if not self.market.incident(agent):
                continue
            _, response = self._best_response(agent, offers, epsilon)
            total += sum(1 for t, value in response.items() if offers[(agent, t)] != value)
        return total

    def _initial_offers(self, config):
        if config.initial_offers is None:
            return OfferProfile({(a, t): Fraction(0) for a in self.market.agents for t in self.market.incident(a)})
        if isinstance(config.initial_offers, OfferProfile):
            return config.initial_offers.check_complete(self.market)
        return OfferProfile.from_dict(self.market, config.initial_offers)

    def _ordered(self, agents):
        return [a for a in self.market.agents if a in agents]

    @operation
    def run_offer_dynamics(self, config, scheduler):
        """
        Best-response dynamics over offers with a set of unsatisfied agents.

        The active agent best-responds to the offers it faces: it matches the offers of the
        trades it demands and steps epsilon away on the others, leaves the unsatisfied set,
        and every counterpart whose faced offer changed joins it.

        Parameters
        ----------
        config : RunConfig
            ``epsilon`` (required), ``rounds`` cap and ``initial_offers``
        scheduler : Scheduler
            Picks the active agent among the unsatisfied ones

        Returns
        -------
        OfferRun
            Trace, terminal offers and whether the unsatisfied set emptied
        """
        if config.epsilon is None or Fraction(config.epsilon) <= 0:
            raise PreconditionError("offer dynamics need a positive epsilon")
        if not self.market.all_finite:
            raise PreconditionError("offer dynamics need finite valuations on every bundle")
        epsilon = Fraction(config.epsilon)
        offers = self._initial_offers(config)
        unsatisfied = set(self.market.agents)
        trace = DynamicsTrace("offers")
        trace.append(TraceRecord(
            0, None, None, self._snapshot(offers),
            potential=self.potential_phi(offers, epsilon) if config.track else None,
            unsatisfied=tuple(self._ordered(unsatisfied)),
        ))
        logger.debug(f"Offer dynamics on {self.market.name} with epsilon {epsilon} ({scheduler.mode})")

        rounds = 0
        while unsatisfied and rounds < config.rounds:
            agent = scheduler.next(self._ordered(unsatisfied))
            if agent is None:
                break
            rounds += 1
            bundle, response = self._best_response(agent, offers, epsilon)
            changed = [t for t, value in response.items() if offers[(agent, t)] != value]
            offers = offers.replace(agent, response)
            unsatisfied.discard(agent)
            for trade_id in changed:
                unsatisfied.add(self.market.counterpart(agent, trade_id))
            trace.append(TraceRecord(
                rounds, agent, bundle, self._snapshot(offers),
                potential=self.potential_phi(offers, epsilon) if config.track else None,
                unsatisfied=tuple(self._ordered(unsatisfied)),
            ))

        terminated = not unsatisfied
        if terminated:
            report = self.game.is_nash(offers, epsilon)
            if report.status != NashReport.EPS_TIGHT:
                raise VerificationError(f"terminal offers are {report.status}, expected an epsilon-tight Nash equilibrium")
            logger.info(f"Offer dynamics terminated after {rounds} rounds")
        else:
            logger.warning(f"Offer dynamics stopped after {rounds} rounds with {len(unsatisfied)} unsatisfied agents")
        return OfferRun(trace, offers, terminated, rounds)

    def _snapshot(self, offers):
        return {
            agent: {t: offers[(agent, t)] for t in self.market.incident(agent)}
            for agent in self.market.agents if self.market.incident(agent)
        }

    # ---- Price dynamics ----

    @helper
    def price_dynamics_bound(self, rounds, R):
        """
        Convergence guarantee of the clock dynamics.

        Returns
        -------
        tuple
            (n * R * sqrt(2 m Delta / T) as a rational approximation, recommended T0 = 2 n^2 R^2 m Delta)
        """
        n, m, delta = self.market.n, self.market.m, self.market.max_degree
        R = Fraction(R)
        bound = n * R * rational_sqrt(Fraction(2 * m * delta, rounds))
        return bound, int(2 * n * n * R * R * m * delta)

    def auto_epsilon(self, rounds, R):
        """Step R * sqrt(2m / (T * Delta)) as a rational approximation."""
        delta = max(self.market.max_degree, 1)
        return Fraction(R) * rational_sqrt(Fraction(2 * self.market.m, rounds * delta))

    @operation
    def run_price_dynamics(self, config, scheduler):
        """
        Stochastic clock dynamics on prices.

        Each round one agent reports its tie-broken demand; prices of its rejected trades
        move by -epsilon * chi (buyers lower, sellers raise), demanded trades keep their price.

        Parameters
        ----------
        config : RunConfig
            ``rounds`` (T), ``R``, ``initial_prices`` and ``epsilon`` (None for the automatic step)
        scheduler : Scheduler
            Any agent is eligible each round

        Returns
        -------
        PriceRun
            Trace, final prices and the running average of the prices after each round
        """
        R = Fraction(config.R) if config.R is not None else self.market.max_abs_value()
        if R < self.market.max_abs_value():
            raise PreconditionError(f"R = {R} is below the largest absolute valuation {self.market.max_abs_value()}")
        if config.initial_prices is None:
            prices = {t: Fraction(0) for t in self.market.trade_ids}
        else:
            prices = self.market.price_vector(config.initial_prices)
        if any(abs(p) > R for p in prices.values()):
            raise PreconditionError(f"initial prices must lie in [-{R}, {R}]")
        rounds_cap = int(config.rounds)
        epsilon = Fraction(config.epsilon) if config.epsilon is not None else self.auto_epsilon(rounds_cap, R)
        if epsilon <= 0:
            raise PreconditionError("price dynamics need a positive epsilon")
        _, recommended = self.price_dynamics_bound(rounds_cap, R)
        if rounds_cap < recommended:
            logger.warning(f"T = {rounds_cap} is below 2n^2R^2m*Delta = {recommended}; the convergence bound does not apply")

        trace = DynamicsTrace("clock")
        trace.append(TraceRecord(0, None, None, dict(prices), lyapunov=self.lyapunov_L(prices) if config.track else None))
        totals = {t: Fraction(0) for t in prices}
        eligible = list(self.market.agents)
        rounds = 0
        while rounds < rounds_cap:
            agent = scheduler.next(eligible)
            if agent is None:
                break
            rounds += 1
            bundle = self.demand.demand_tiebreak(agent, prices)
            for trade_id in self.market.incident(agent):
                if trade_id not in bundle:
                    prices[trade_id] -= epsilon * self.market.chi(agent, trade_id)
            for trade_id, price in prices.items():
                totals[trade_id] += price
            trace.append(TraceRecord(
                rounds, agent, bundle, dict(prices),
                lyapunov=self.lyapunov_L(prices) if config.track else None,
            ))

        average = {t: totals[t] / rounds for t in totals} if rounds else dict(prices)
        logger.info(f"Price dynamics ran {rounds} rounds with epsilon {epsilon}")
        return PriceRun(trace, dict(prices), average, epsilon, rounds)

    # ---- Lyapunov function ----

    @operation
    def lyapunov_L(self, prices):
        """
        Sum of all agents' indirect utilities at full-scope prices.

        Returns
        -------
        Fraction
        """
        prices = self.market.price_vector(prices)
        return sum((self.demand.indirect_utility(a, prices) for a in self.market.agents), Fraction(0))

    @operation
    def ce_gap(self, prices):
        """L(p) - w(I); zero exactly at competitive equilibrium prices."""
        return self.lyapunov_L(prices) - self.welfare.market_value()

    @helper
    def agent_lyapunov(self, agent, prices):
        """L^i(p): indirect utility plus the agent's signed price total over its trades."""
        shift = sum((self.market.chi(agent, t) * prices[t] for t in self.market.incident(agent)), Fraction(0))
        return self.demand.indirect_utility(agent, prices) + shift

    @helper
    def update_direction(self, agent, prices):
        """
        Direction of the clock update for ``agent``: -chi on its rejected trades, 0 elsewhere.

        Returns
        -------
        dict
            Trade id to int over all trades
        """
        bundle = self.demand.demand_tiebreak(agent, prices)
        direction = {t: 0 for t in self.market.trade_ids}
        for trade_id in self.market.incident(agent):
            if trade_id not in bundle:
                direction[trade_id] = -self.market.chi(agent, trade_id)
        return direction
