import math
from fractions import Fraction
from itertools import combinations, product

from tradenet.analysis.demand import Demand
from tradenet.analysis.simplex import LinearProgram, OPTIMAL
from tradenet.analysis.welfare import Welfare
from tradenet.decorators import operation, verifier, helper
from tradenet.exact import is_finite
from tradenet.exceptions import NoEquilibriumError, PreconditionError, LinearProgramError
from tradenet.logging_config import logger
from tradenet.market import Market
from tradenet.models import Arrangement

class Equilibria:
    def __init__(self, market: Market):
        self.market = market
        self.demand = Demand(market)
        self.welfare = Welfare(market)

    @verifier
    def is_competitive_equilibrium(self, arrangement, epsilon=0):
        """
        Check that every agent's assigned bundle is (epsilon-)utility-maximizing.

        Parameters
        ----------
        arrangement : Arrangement
            Prices on all trades and an allocation
        epsilon : Fraction
            Slack; 0 gives the exact definition

        Returns
        -------
        bool
        """
        epsilon = Fraction(epsilon)
        if epsilon < 0:
            raise PreconditionError("epsilon must be nonnegative")
        self.market.price_vector(arrangement.prices)
        for agent in self.market.agents:
            bundle = self.market.bundle_of(agent, arrangement.allocation)
            current = self.demand._utility(agent, bundle, arrangement.prices)
            if not is_finite(current):
                return False
            if current < self.demand.indirect_utility(agent, arrangement.prices) - epsilon:
                return False
        return True

    @helper
    def supports_efficient(self, prices):
        """First efficient allocation forming a CE with ``prices``, or None."""
        for allocation in self.welfare.efficient_allocations():
            if self.is_competitive_equilibrium(Arrangement(prices, allocation)):
                return allocation
        return None

    @helper
    def ce_price_set_contains(self, prices):
        """True when ``prices`` are competitive equilibrium prices."""
        return self.supports_efficient(prices) is not None

    def _swd_program(self, label):
        lp = LinearProgram(label)
        for agent in self.market.agents:
            lp.add_variable(f"u:{agent}")
        for trade_id in self.market.trade_ids:
            lp.add_variable(f"p:{trade_id}", lower=None)
        for agent in self.market.agents:
            for bundle in self.market.bundles(agent):
                value = self.market.value(agent, bundle)
                if not bundle or not is_finite(value):
                    continue
                row = {f"u:{agent}": 1}
                for trade_id in bundle:
                    row[f"p:{trade_id}"] = self.market.chi(agent, trade_id)
                lp.add_constraint(row, ">=", value)
        return lp

    @operation
    def solve_ce_prices(self, integral=False):
        """
        Competitive equilibrium from the dual of the welfare program.

        Minimizes the sum of indirect utilities over prices exactly; the optimum equals the
        market value iff a competitive equilibrium exists.

        Parameters
        ----------
        integral : bool
            For integral markets, return integral prices (searching the floor/ceil
            neighbourhood of a fractional optimum if needed)

        Returns
        -------
        Arrangement
            Verified competitive equilibrium
        """
        logger.debug(f"Solving CE prices for {self.market.name}")
        lp = self._swd_program(f"swd[{self.market.name}]")
        result = lp.minimize({f"u:{a}": 1 for a in self.market.agents})
        if result.status != OPTIMAL:
            raise LinearProgramError(f"welfare dual of {self.market.name} is {result.status}")
        value = self.welfare.market_value()
        if result.value != value:
            raise NoEquilibriumError(
                f"{self.market.name} has no competitive equilibrium: min L = {result.value} > w(I) = {value}"
            )
        prices = {t: result[f"p:{t}"] for t in self.market.trade_ids}

        if integral and any(p.denominator != 1 for p in prices.values()):
            prices = self._integral_neighbour(prices)

        allocation = self.supports_efficient(prices)
        if allocation is None:
            raise NoEquilibriumError(f"prices from the welfare dual do not support an efficient allocation of {self.market.name}")
        logger.info(f"CE for {self.market.name}: allocation {self.market.sort_trades(allocation)}")
        return Arrangement(prices, allocation)

    def _integral_neighbour(self, prices):
        fractional = [t for t, p in prices.items() if p.denominator != 1]
        for choice in product(*[(math.floor(prices[t]), math.ceil(prices[t])) for t in fractional]):
            candidate = dict(prices)
            candidate.update({t: Fraction(v) for t, v in zip(fractional, choice)})
            if self.supports_efficient(candidate) is not None:
                return candidate
        raise NoEquilibriumError(f"no integral CE prices next to the welfare dual optimum of {self.market.name}")

    @operation
    def lyapunov(self, prices):
        """L(p): sum of indirect utilities."""
        return sum((self.demand.indirect_utility(a, prices) for a in self.market.agents), Fraction(0))

    @operation
    def distance_to_equilibrium(self, prices):
        """
        Exact sup-norm distance from ``prices`` to the set of CE prices.

        Solves an LP over the optimal face of the welfare dual; slow, meant for verification.

        Returns
        -------
        Fraction
        """
        prices = self.market.price_vector(prices)
        lp = self._swd_program(f"distance[{self.market.name}]")
        lp.add_variable("s")
        lp.add_constraint({f"u:{a}": 1 for a in self.market.agents}, "<=", self.welfare.market_value())
        for trade_id, price in prices.items():
            lp.add_constraint({f"p:{trade_id}": 1, "s": -1}, "<=", price)
            lp.add_constraint({f"p:{trade_id}": 1, "s": 1}, ">=", price)
        result = lp.minimize({"s": 1})
        if result.status != OPTIMAL:
            raise NoEquilibriumError(f"{self.market.name} has no competitive equilibrium prices")
        return result.value

    @staticmethod
    def unimodularity_check(matrix, max_size=None):
        """
        Check that every square submatrix has determinant in {0, 1, -1}.

        Parameters
        ----------
        matrix : list of list of int
            Rows with at most one +1 and at most one -1, zeros elsewhere
        max_size : int, optional
            Largest submatrix order to check

        Returns
        -------
        bool
        """
        rows = [list(r) for r in matrix]
        for row in rows:
            if any(v not in (-1, 0, 1) for v in row) or row.count(1) > 1 or row.count(-1) > 1:
                raise PreconditionError(f"row {row} is not a substitutes row")
        if not rows:
            return True
        n_cols = len(rows[0])
        top = min(len(rows), n_cols) if max_size is None else min(max_size, len(rows), n_cols)
        for size in range(1, top + 1):
            for picked_rows in combinations(range(len(rows)), size):
                for picked_cols in combinations(range(n_cols), size):
                    sub = [[rows[i][j] for j in picked_cols] for i in picked_rows]
                    if determinant(sub) not in (-1, 0, 1):
                        return False
        return True

def determinant(matrix):
    """Exact determinant by fraction-valued Gaussian elimination."""
    a = [[Fraction(v) for v in row] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det
