from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional

from tradenet.decorators import operation, helper, verifier
from tradenet.exact import NEG_INF, is_finite, on_lattice
from tradenet.exceptions import MissingPriceError, PreconditionError, EnumerationCapError, InternalConsistencyError
from tradenet.logging_config import logger
from tradenet.market import Market

@dataclass(frozen=True)
class SubstitutabilityResult:
    substitutable: bool
    witness: Optional[dict] = None

    def __bool__(self):
        return self.substitutable

class Demand:
    MAX_GRID_POINTS = 250000
    EXHAUSTIVE_GRID_POINTS = 400

    def __init__(self, market: Market):
        self.market = market

    @operation
    def utility(self, agent, bundle, prices):
        """
        Quasi-linear utility of an agent for a bundle at given prices.

        Parameters
        ----------
        agent : str
            Agent id
        bundle : iterable
            Trade ids, all incident to ``agent``
        prices : dict
            Trade id to Fraction; must cover every trade in the bundle

        Returns
        -------
        Fraction or NEG_INF
            v(bundle) minus payments for bought trades plus income from sold trades
        """
        bundle = frozenset(bundle)
        self.market.check_bundle(agent, bundle)
        missing = [t for t in bundle if t not in prices]
        if missing:
            raise MissingPriceError(f"no price for trades {missing}")
        return self._utility(agent, bundle, prices)

    def _utility(self, agent, bundle, prices):
        value = self.market.value(agent, bundle)
        if not is_finite(value):
            return NEG_INF
        return value - sum((self.market.chi(agent, t) * prices[t] for t in bundle), Fraction(0))

    def _table(self, agent, prices):
        missing = [t for t in self.market.incident(agent) if t not in prices]
        if missing:
            raise MissingPriceError(f"no price for trades {missing}")
        return [(bundle, self._utility(agent, bundle, prices)) for bundle in self.market.bundles(agent)]

    def tie_order(self, bundle):
        """Sort key: larger bundles first, then lexicographically smallest in declaration order."""
        return (-len(bundle), sorted(self.market.trade_order[t] for t in bundle))

    @operation
    def demand_set(self, agent, prices):
        """
        Every utility-maximizing bundle.

        Parameters
        ----------
        agent : str
            Agent id
        prices : dict
            Prices on all trades incident to ``agent``

        Returns
        -------
        list of frozenset
            The argmax, ordered by the tie-breaking rule (preferred bundle first)
        """
        table = self._table(agent, prices)
        best = max(u for _, u in table)
        return sorted((b for b, u in table if u == best), key=self.tie_order)

    @helper
    def indirect_utility(self, agent, prices):
        """Maximum utility of the agent at the given prices."""
        return max(u for _, u in self._table(agent, prices))

    @operation
    def demand_tiebreak(self, agent, prices, epsilon=None):
        """
        The tie-broken demand d^i(p).

        The lexicographically smallest bundle of maximum cardinality in the demand set.
        When ``epsilon`` is given as 1/k, prices lie on the epsilon-lattice and valuations
        are integral, the result is cross-checked against the unique argmax of the
        perturbed valuation.

        Parameters
        ----------
        agent : str
            Agent id
        prices : dict
            Prices on the agent's incident trades
        epsilon : Fraction, optional
            Lattice step used for the cross-check

        Returns
        -------
        frozenset
        """
        chosen = self.demand_set(agent, prices)[0]
        if epsilon is not None and self._perturbation_applies(agent, prices, epsilon):
            perturbed = self.perturbed_demand(agent, prices, epsilon)
            if perturbed != chosen:
                raise InternalConsistencyError(
                    f"tie-break for agent '{agent}' picked {sorted(chosen)} but the perturbed valuation picks {sorted(perturbed)}"
                )
        return chosen

    def _perturbation_applies(self, agent, prices, epsilon):
        epsilon = Fraction(epsilon)
        if not 0 < epsilon < 1 or epsilon.numerator != 1:
            return False
        incident = {t: prices[t] for t in self.market.incident(agent)}
        if not on_lattice(incident, epsilon):
            return False
        return all(
            v.denominator == 1 for v in (self.market.value(agent, b) for b in self.market.bundles(agent)) if is_finite(v)
        )

    @helper
    def perturbed_demand(self, agent, prices, epsilon):
        """
        Argmax of the perturbed valuation v(B) + sum over trades j in B of epsilon / 4**j.

        The trade index j is the 1-based declaration index over all trades of the market.
        Returns the first maximizer by tie order if the argmax is not unique.
        """
        epsilon = Fraction(epsilon)
        best, best_value = None, None
        for bundle, utility in self._table(agent, prices):
            if not is_finite(utility):
                continue
            bonus = sum((epsilon / 4 ** (self.market.trade_order[t] + 1) for t in bundle), Fraction(0))
            value = utility + bonus
            if best_value is None or value > best_value or (value == best_value and self.tie_order(bundle) < self.tie_order(best)):
                best, best_value = bundle, value
        return best

    def default_box(self, agent):
        values = [self.market.value(agent, b) for b in self.market.bundles(agent)]
        finite = [v for v in values if is_finite(v)]
        return (min(finite) - 1, max(finite) + 1)

    @verifier
    def is_fully_substitutable(self, agent, price_box=None, step=Fraction(1, 2), exhaustive=None):
        """
        Grid check of full substitutability for one agent.

        Parameters
        ----------
        agent : str
            Agent id
        price_box : tuple, optional
            (low, high) bounds applied to every incident trade's price;
            defaults to [min finite value - 1, max finite value + 1]
        step : Fraction
            Grid spacing; must divide the box
        exhaustive : bool, optional
            Compare every admissible pair of grid points. By default this is done
            on grids of at most EXHAUSTIVE_GRID_POINTS points; larger grids compare
            pairs that differ in a single coordinate.

        Returns
        -------
        SubstitutabilityResult
            Truthy when both conditions hold; otherwise carries a witness (p, p', bundle, condition)
        """
        step = Fraction(step)
        if step <= 0:
            raise PreconditionError("grid step must be positive")
        low, high = price_box if price_box is not None else self.default_box(agent)
        low, high = Fraction(low), Fraction(high)
        if high < low:
            raise PreconditionError("empty price box")
        if ((high - low) / step).denominator != 1:
            raise PreconditionError("grid step must divide the price box")
        logger.debug(f"Checking full substitutability of agent {agent} on [{low}, {high}] step {step}")

        incident = self.market.incident(agent)
        if len(incident) <= 1:
            return SubstitutabilityResult(True)
        ticks = [low + j * step for j in range(int((high - low) / step) + 1)]
        n_points = len(ticks) ** len(incident)
        if n_points > self.MAX_GRID_POINTS:
            raise EnumerationCapError(f"substitutability grid has {n_points} points; the cap is {self.MAX_GRID_POINTS}")
        if exhaustive is None:
            exhaustive = n_points <= self.EXHAUSTIVE_GRID_POINTS

        buys = [j for j, t in enumerate(incident) if self.market.chi(agent, t) == 1]
        sells = [j for j, t in enumerate(incident) if self.market.chi(agent, t) == -1]
        demand = {}
        for point in product(range(len(ticks)), repeat=len(incident)):
            prices = {t: ticks[k] for t, k in zip(incident, point)}
            demand[point] = self.demand_set(agent, prices)

        def pairs(moving, fixed_sign):
            # p' differs from p only on `moving` coordinates, in direction fixed_sign
            for point in demand:
                if exhaustive:
                    ranges = [
                        (range(point[j] + 1) if fixed_sign < 0 else range(point[j], len(ticks))) if j in moving else (point[j],)
                        for j in range(len(incident))
                    ]
                    for other in product(*ranges):
                        if other != point:
                            yield point, other
                else:
                    for j in moving:
                        span = range(point[j]) if fixed_sign < 0 else range(point[j] + 1, len(ticks))
                        for k in span:
                            other = point[:j] + (k,) + point[j + 1:]
                            yield point, other

        # (i) buying prices weakly fall from p to p'
        for p, q in pairs(set(buys), -1):
            witness = self._violation(agent, incident, ticks, demand, p, q, changed_side=1)
            if witness:
                return SubstitutabilityResult(False, dict(witness, condition="i"))
        # (ii) selling prices weakly rise from p to p'
        for p, q in pairs(set(sells), 1):
            witness = self._violation(agent, incident, ticks, demand, p, q, changed_side=-1)
            if witness:
                return SubstitutabilityResult(False, dict(witness, condition="ii"))
        return SubstitutabilityResult(True)

    def _violation(self, agent, incident, ticks, demand, p, q, changed_side):
        unchanged = {incident[j] for j in range(len(incident)) if p[j] == q[j]}
        for bundle in demand[p]:
            side = frozenset(t for t in bundle if self.market.chi(agent, t) == changed_side)
            other = frozenset(t for t in bundle if self.market.chi(agent, t) == -changed_side)
            ok = False
            for candidate in demand[q]:
                c_side = frozenset(t for t in candidate if self.market.chi(agent, t) == changed_side)
                c_other = frozenset(t for t in candidate if self.market.chi(agent, t) == -changed_side)
                if (c_side & unchanged) <= side and other <= c_other:
                    ok = True
                    break
            if not ok:
                return {
                    "p": {t: ticks[k] for t, k in zip(incident, p)},
                    "p_prime": {t: ticks[k] for t, k in zip(incident, q)},
                    "bundle": bundle,
                }
        return None
