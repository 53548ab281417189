import math
from fractions import Fraction
from itertools import product

from tradenet.analysis.demand import Demand, SubstitutabilityResult
from tradenet.decorators import operation, verifier
from tradenet.exact import is_finite
from tradenet.exceptions import PreconditionError
from tradenet.logging_config import logger
from tradenet.market import Market
from tradenet.models import FacetRecord

class Geometry:
    """Facets of an agent's locus of indifference prices, sampled along axis-parallel lines."""
    MAX_DIMENSION = 3
    MAX_STEP = Fraction(1, 2)

    def __init__(self, market: Market):
        self.market = market
        self.demand = Demand(market)

    def quantities(self, agent, bundle):
        """Signed quantity vector of a bundle: +1 on bought trades, -1 on sold trades."""
        return tuple(
            self.market.chi(agent, t) if t in bundle else 0 for t in self.market.incident(agent)
        )

    @staticmethod
    def _primitive(vector):
        weight = math.gcd(*vector)
        if weight == 0:
            return tuple(vector), 0
        normal = tuple(v // weight for v in vector)
        first = next(v for v in normal if v)
        if first < 0:
            normal = tuple(-v for v in normal)
        return normal, weight

    @operation
    def lip_facets(self, agent, price_box=None, step=Fraction(1, 2)):
        """
        Facets of the agent's indifference locus inside a price box.

        Along every line parallel to a coordinate axis the tie-free demand changes at most
        once, where a bundle using that trade overtakes the best bundle without it. The
        lines run through grid points shifted by step/3 and step/5 in the other coordinates.
        Each crossing at which exactly two bundles tie yields one facet per bundle pair.

        Parameters
        ----------
        agent : str
            Agent with at most three incident trades
        price_box : tuple, optional
            (low, high) bounds on every price; defaults to the demand module's box
        step : Fraction
            Spacing of the sampling lines, at most 1/2

        Returns
        -------
        list of FacetRecord
        """
        incident = self.market.incident(agent)
        if len(incident) > self.MAX_DIMENSION:
            raise PreconditionError(f"agent '{agent}' has {len(incident)} trades; facets are extracted in at most {self.MAX_DIMENSION} dimensions")
        step = Fraction(step)
        if not 0 < step <= self.MAX_STEP:
            raise PreconditionError(f"sampling step {step} must lie in (0, {self.MAX_STEP}]")
        if not incident:
            return []
        low, high = price_box if price_box is not None else self.demand.default_box(agent)
        low, high = Fraction(low), Fraction(high)
        if high <= low:
            raise PreconditionError("empty price box")
        logger.debug(f"Extracting facets of agent {agent} on [{low}, {high}] step {step}")

        bundles = [b for b in self.market.bundles(agent) if is_finite(self.market.value(agent, b))]
        offsets = (step / 3, step / 5)
        n_ticks = int((high - low) / step)
        facets, seen = [], set()
        for axis, trade_id in enumerate(incident):
            others = [t for t in incident if t != trade_id]
            sign = self.market.chi(agent, trade_id)
            for ticks in product(range(n_ticks), repeat=len(others)):
                fixed = {t: low + k * step + offsets[j] for j, (t, k) in enumerate(zip(others, ticks))}
                # utility = constant - sign * s for bundles holding the trade, constant otherwise
                constants = {
                    b: self.demand._utility(agent, b, dict(fixed, **{trade_id: Fraction(0)})) for b in bundles
                }
                without = [b for b in bundles if trade_id not in b]
                using = [b for b in bundles if trade_id in b]
                if not without or not using:
                    continue
                top_without = max(constants[b] for b in without)
                top_using = max(constants[b] for b in using)
                crossing = (top_using - top_without) / sign
                if not low <= crossing <= high:
                    continue
                prices = dict(fixed, **{trade_id: crossing})
                tied = self.demand.demand_set(agent, prices)
                if len(tied) != 2:
                    continue
                # before/after along increasing price of the swept trade
                before = next(b for b in tied if (trade_id in b) == (sign > 0))
                after = next(b for b in tied if b != before)
                key = frozenset(tied)
                if key in seen:
                    continue
                seen.add(key)
                change = [a - b for a, b in zip(self.quantities(agent, after), self.quantities(agent, before))]
                normal, weight = self._primitive(change)
                facets.append(FacetRecord(
                    anchor={t: prices[t] for t in incident},
                    normal=normal,
                    weight=weight,
                    demand_change=(before, after),
                    trades=tuple(incident),
                ))
        logger.info(f"Agent {agent}: {len(facets)} facets")
        return facets

    @staticmethod
    def is_substitutes_normal(normal):
        nonzero = [v for v in normal if v]
        return sorted(nonzero) in ([1], [-1], [-1, 1])

    @verifier
    def is_substitutes_by_normals(self, agent, price_box=None, step=Fraction(1, 2)):
        """
        Substitutes verdict from facet normals: every normal is a unit vector or a difference of two.

        Returns
        -------
        SubstitutabilityResult
            Falsy with the first non-conforming facet as witness
        """
        for facet in self.lip_facets(agent, price_box, step):
            if not self.is_substitutes_normal(facet.normal):
                return SubstitutabilityResult(False, {"facet": facet})
        return SubstitutabilityResult(True)
