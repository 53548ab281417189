from fractions import Fraction

from tradenet.decorators import operation
from tradenet.exact import NEG_INF, is_finite
from tradenet.logging_config import logger
from tradenet.market import Market

class Welfare:
    def __init__(self, market: Market):
        self.market = market
        self._value = None
        self._efficient = None

    @operation
    def social_welfare(self, allocation):
        """
        Sum of all agents' values for their parts of an allocation.

        Parameters
        ----------
        allocation : iterable
            Trade ids

        Returns
        -------
        Fraction or NEG_INF
        """
        allocation = frozenset(allocation)
        self.market.check_allocation(allocation)
        total = Fraction(0)
        for agent in self.market.agents:
            value = self.market.value(agent, self.market.bundle_of(agent, allocation))
            if not is_finite(value):
                return NEG_INF
            total += value
        return total

    def _sweep(self):
        logger.debug(f"Enumerating {2 ** self.market.m} allocations of {self.market.name}")
        best, argmax = None, []
        for allocation in self.market.allocations():
            welfare = self.social_welfare(allocation)
            if best is None or welfare > best:
                best, argmax = welfare, [allocation]
            elif welfare == best:
                argmax.append(allocation)
        self._value, self._efficient = best, argmax

    @operation
    def market_value(self):
        """
        Maximum social welfare over all sets of trades, w(I).

        Returns
        -------
        Fraction
        """
        if self._value is None:
            self._sweep()
        return self._value

    @operation
    def efficient_allocations(self):
        """
        Every allocation attaining the market value.

        Returns
        -------
        list of frozenset
            In bitmask order over the trade declaration order
        """
        if self._efficient is None:
            self._sweep()
        return list(self._efficient)

    def is_efficient(self, allocation):
        return self.social_welfare(allocation) == self.market_value()
