from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

from tradenet.analysis.demand import Demand
from tradenet.analysis.equilibria import Equilibria
from tradenet.analysis.simplex import LinearProgram, INFEASIBLE, solve_exact
from tradenet.analysis.welfare import Welfare
from tradenet.decorators import operation, verifier, helper
from tradenet.exact import NEG_INF, is_finite
from tradenet.exceptions import (
    EmptyCoreError, EnumerationCapError, InternalConsistencyError, LinearProgramError,
    NoEquilibriumError, NotInCoreError, PreconditionError
)
from tradenet.logging_config import logger
from tradenet.market import Market
from tradenet.models import (
    Arrangement, CharacteristicFunction, CoreViolation, Imputation, MarketOutcome, TaxedCheck
)

@dataclass(frozen=True)
class CoreCheck:
    in_core: bool
    violation: Optional[CoreViolation] = None

    def __bool__(self):
        return self.in_core

class Fairness:
    """
    The cooperative game of a market: coalition values, the core and fair core imputations.

    Methods taking a ``cf`` argument work on any CharacteristicFunction; the others use
    the market the instance was built with.
    """
    MAX_AGENTS = 10
    MAX_MINVAR_AGENTS = 6
    MAX_VERTEX_AGENTS = 6
    MAX_ORACLE_AGENTS = 5

    def __init__(self, market: Market):
        self.market = market
        self.demand = Demand(market)
        self.welfare = Welfare(market)
        self.equilibria = Equilibria(market)
        self._cf = None

    # ---- Characteristic function ----

    @operation
    def characteristic_function(self):
        """
        Coalition values w(C): best welfare over trade sets internal to C.

        Returns
        -------
        CharacteristicFunction
            Values for all 2^n coalitions
        """
        if self._cf is not None:
            return self._cf
        n = self.market.n
        if n > self.MAX_AGENTS:
            raise EnumerationCapError(f"market has {n} agents; the coalition sweep cap is {self.MAX_AGENTS}")
        logger.debug(f"Sweeping {1 << n} coalitions of {self.market.name}")
        index = {agent: j for j, agent in enumerate(self.market.agents)}

        # best[mask]: best welfare of a trade set whose involved agents are exactly mask
        best = [NEG_INF] * (1 << n)
        best[0] = Fraction(0)
        for allocation in self.market.allocations():
            welfare = self.welfare.social_welfare(allocation)
            if not is_finite(welfare):
                continue
            mask = sum(1 << index[a] for a in self.market.involved(allocation))
            if welfare > best[mask]:
                best[mask] = welfare
        for j in range(n):
            for mask in range(1 << n):
                if mask >> j & 1 and best[mask ^ (1 << j)] > best[mask]:
                    best[mask] = best[mask ^ (1 << j)]

        values = {
            frozenset(a for j, a in enumerate(self.market.agents) if mask >> j & 1): best[mask]
            for mask in range(1 << n)
        }
        self._cf = CharacteristicFunction(self.market.agents, values)
        return self._cf

    @helper
    def is_superadditive(self, cf):
        """True when w(S | T) >= w(S) + w(T) for all disjoint coalitions S, T."""
        coalitions = [frozenset()] + cf.coalitions()
        for s in coalitions:
            rest = [a for a in cf.agents if a not in s]
            for size in range(len(rest) + 1):
                for t in combinations(rest, size):
                    t = frozenset(t)
                    if cf(s | t) < cf(s) + cf(t):
                        return False
        return True

    @helper
    def supermodularity_witness(self, cf):
        """
        First pair (C, D) with w(C | D) + w(C & D) < w(C) + w(D), or None for a convex game.
        """
        coalitions = cf.coalitions()
        for c in coalitions:
            for d in coalitions:
                if cf(c | d) + cf(c & d) < cf(c) + cf(d):
                    return c, d
        return None

    # ---- Core ----

    def _imputation(self, cf, x):
        if isinstance(x, Imputation):
            utilities = x.utilities
        elif isinstance(x, dict):
            utilities = x
        else:
            values = list(x)
            if len(values) != len(cf.agents):
                raise PreconditionError(f"imputation has {len(values)} entries for {len(cf.agents)} agents")
            return Imputation.from_sequence(cf.agents, values)
        missing = [a for a in cf.agents if a not in utilities]
        if missing:
            raise PreconditionError(f"imputation misses agents {missing}")
        return Imputation({a: Fraction(utilities[a]) if is_finite(utilities[a]) else NEG_INF for a in cf.agents})

    @verifier
    def is_core_imputation(self, cf, x):
        """
        Check an imputation against every core constraint.

        Nonnegativity is checked first, then the grand-coalition equality, then the
        coalition inequalities in increasing size and lexicographic agent order.

        Parameters
        ----------
        cf : CharacteristicFunction
        x : Imputation, dict or sequence
            Utilities in agent order

        Returns
        -------
        CoreCheck
            Truthy when x is a core imputation; otherwise carries the first violation
        """
        x = self._imputation(cf, x)
        for agent in cf.agents:
            if x[agent] < 0:
                return CoreCheck(False, CoreViolation("nonnegativity", frozenset([agent]), x[agent], Fraction(0)))
        total = sum((x[a] for a in cf.agents), Fraction(0))
        if total != cf.grand:
            return CoreCheck(False, CoreViolation("efficiency", frozenset(cf.agents), total, cf.grand))
        for coalition in cf.coalitions():
            share = sum((x[a] for a in coalition), Fraction(0))
            if share < cf(coalition):
                return CoreCheck(False, CoreViolation("coalition", coalition, share, cf(coalition)))
        return CoreCheck(True)

    def _core_program(self, cf, label):
        lp = LinearProgram(label)
        for agent in cf.agents:
            lp.add_variable(f"x:{agent}")
        lp.add_constraint({f"x:{a}": 1 for a in cf.agents}, "==", cf.grand)
        for coalition in cf.coalitions():
            if len(coalition) < len(cf.agents) and cf(coalition) > 0:
                lp.add_constraint({f"x:{a}": 1 for a in coalition}, ">=", cf(coalition))
        return lp

    def _core_rows(self, cf):
        """Inequality rows (coefficients, bound) of the core: nonnegativity, then positive coalitions."""
        rows = []
        for agent in cf.agents:
            rows.append(([1 if a == agent else 0 for a in cf.agents], Fraction(0)))
        for coalition in cf.coalitions():
            if len(coalition) < len(cf.agents) and cf(coalition) > 0:
                rows.append(([1 if a in coalition else 0 for a in cf.agents], cf(coalition)))
        return rows

    @operation
    def core_nonempty(self, cf):
        """LP feasibility of the core polytope."""
        return self._core_program(cf, "core").feasible()

    @operation
    def core_vertices(self, cf):
        """
        Every vertex of the core polytope.

        Vertices are found by solving each choice of n-1 tight inequality rows together with
        the grand-coalition equality; exponential in n.

        Returns
        -------
        list of Imputation
            Sorted by utility vector in agent order; empty when the core is empty
        """
        n = len(cf.agents)
        if n > self.MAX_VERTEX_AGENTS:
            raise EnumerationCapError(f"vertex enumeration is capped at {self.MAX_VERTEX_AGENTS} agents")
        rows = self._core_rows(cf)
        ones = [1] * n
        found = set()
        for tight in combinations(range(len(rows)), n - 1):
            matrix = [rows[r][0] for r in tight] + [ones]
            rhs = [rows[r][1] for r in tight] + [cf.grand]
            x = solve_exact(matrix, rhs)
            if x is None or not self._feasible(rows, x):
                continue
            found.add(tuple(x))
        logger.debug(f"Core has {len(found)} vertices")
        return [Imputation.from_sequence(cf.agents, v) for v in sorted(found)]

    @staticmethod
    def _feasible(rows, x):
        return all(sum((a * v for a, v in zip(coeffs, x)), Fraction(0)) >= bound for coeffs, bound in rows)

    @helper
    def maximize_agent_utility(self, cf, agent):
        """
        Largest utility ``agent`` receives in any core imputation.

        Returns
        -------
        Fraction
        """
        if agent not in cf.agents:
            raise PreconditionError(f"unknown agent '{agent}'")
        result = self._core_program(cf, f"max-utility[{agent}]").maximize({f"x:{agent}": 1})
        if result.status == INFEASIBLE:
            raise EmptyCoreError("the core is empty")
        return result.require_optimal("core utility program").value

    # ---- Essential agents ----

    @operation
    def essential_agents(self):
        """
        Agents involved in every efficient trade set.

        Computed twice: by intersecting the involved agents of all efficient allocations,
        and by testing whether removing the agent lowers the market value.

        Returns
        -------
        frozenset
        """
        efficient = self.welfare.efficient_allocations()
        by_intersection = frozenset(self.market.agents)
        for allocation in efficient:
            by_intersection &= self.market.involved(allocation)

        value = self.welfare.market_value()
        by_removal = frozenset(
            agent for agent in self.market.agents
            if Welfare(self.market.restrict([a for a in self.market.agents if a != agent])).market_value() < value
        )
        if by_intersection != by_removal:
            raise InternalConsistencyError(
                f"essential agents disagree: {sorted(by_intersection)} by intersection, {sorted(by_removal)} by removal"
            )
        return by_intersection

    # ---- Fair core imputations ----

    def _lexicographic(self, cf, maximize):
        label = "leximin" if maximize else "leximax"
        if not self.core_nonempty(cf):
            raise EmptyCoreError(f"cannot compute the {label} imputation of an empty core")
        fixed = {}
        sense = ">=" if maximize else "<="
        while len(fixed) < len(cf.agents):
            free = [a for a in cf.agents if a not in fixed]

            lp = self._core_program(cf, f"{label}-bound")
            lp.add_variable("t", lower=None)
            for agent, value in fixed.items():
                lp.add_constraint({f"x:{agent}": 1}, "==", value)
            for agent in free:
                lp.add_constraint({f"x:{agent}": 1, "t": -1}, sense, 0)
            result = lp.maximize({"t": 1}) if maximize else lp.minimize({"t": 1})
            bound = result.require_optimal(f"{label} bound program").value

            newly = []
            for agent in free:
                aux = self._core_program(cf, f"{label}-probe[{agent}]")
                for other, value in fixed.items():
                    aux.add_constraint({f"x:{other}": 1}, "==", value)
                for other in free:
                    aux.add_constraint({f"x:{other}": 1}, sense, bound)
                probe = aux.maximize({f"x:{agent}": 1}) if maximize else aux.minimize({f"x:{agent}": 1})
                if probe.require_optimal(f"{label} probe").value == bound:
                    newly.append(agent)
            if not newly:
                raise LinearProgramError(f"{label} made no progress at bound {bound}")
            for agent in newly:
                fixed[agent] = bound
            logger.info(f"{label}: fixed {newly} at {bound}")
        return Imputation({a: fixed[a] for a in cf.agents})

    @operation
    def leximin_imputation(self, cf):
        """
        Core imputation maximizing the sorted-ascending utility vector lexicographically.

        Each stage maximizes the smallest free utility, then fixes every free agent
        that cannot exceed that bound.

        Returns
        -------
        Imputation
        """
        return self._lexicographic(cf, maximize=True)

    @operation
    def leximax_imputation(self, cf):
        """Core imputation minimizing the sorted-descending utility vector lexicographically."""
        return self._lexicographic(cf, maximize=False)

    @operation
    def minvar_imputation(self, cf, cross_check=True):
        """
        Core imputation with the least sum of squared utilities.

        Active sets of core rows are tried by increasing size; on each, the least-norm
        point of the tight face is accepted when it is feasible and its multipliers are
        nonnegative.

        Parameters
        ----------
        cf : CharacteristicFunction
        cross_check : bool
            Compare against the core vertices and their centroid for up to 5 agents

        Returns
        -------
        Imputation
        """
        n = len(cf.agents)
        if n > self.MAX_MINVAR_AGENTS:
            raise EnumerationCapError(f"minvar is capped at {self.MAX_MINVAR_AGENTS} agents")
        if not self.core_nonempty(cf):
            raise EmptyCoreError("cannot compute the minvar imputation of an empty core")
        rows = self._core_rows(cf)
        ones = [1] * n
        for size in range(n):
            for active in combinations(range(len(rows)), size):
                matrix = [rows[r][0] for r in active] + [ones]
                rhs = [rows[r][1] for r in active] + [cf.grand]
                gram = [[sum(a * b for a, b in zip(r1, r2)) for r2 in matrix] for r1 in matrix]
                y = solve_exact(gram, rhs)
                if y is None or any(m < 0 for m in y[:-1]):
                    continue
                x = [sum((y[k] * matrix[k][j] for k in range(len(matrix))), Fraction(0)) for j in range(n)]
                if not self._feasible(rows, x):
                    continue
                result = Imputation.from_sequence(cf.agents, x)
                if cross_check and n <= 5:
                    self._check_minvar(cf, x)
                return result
        raise InternalConsistencyError("no active set satisfied the optimality conditions")

    def _check_minvar(self, cf, x):
        vertices = [v.vector(cf.agents) for v in self.core_vertices(cf)]
        centroid = [sum((v[j] for v in vertices), Fraction(0)) / len(vertices) for j in range(len(x))]
        norm = sum(v * v for v in x)
        for point in vertices + [centroid]:
            if sum(v * v for v in point) < norm:
                raise InternalConsistencyError(f"core point {point} has a smaller sum of squares than {x}")

    # ---- Outcomes ----

    def _outcome_utilities(self, prices, allocation):
        return {
            agent: self.demand._utility(agent, self.market.bundle_of(agent, allocation), prices)
            for agent in self.market.agents
        }

    def _components(self, allocation):
        """Connected components of the agents under the trades of ``allocation``, in agent order."""
        parent = {a: a for a in self.market.agents}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for trade_id in self.market.sort_trades(allocation):
            trade = self.market.trade(trade_id)
            parent[find(trade.seller)] = find(trade.buyer)
        groups = {}
        for agent in self.market.agents:
            groups.setdefault(find(agent), []).append(agent)
        return list(groups.values())

    def _path(self, allocation, start, goal):
        """Shortest path of trades from ``start`` to ``goal``; neighbours explored in trade order."""
        previous = {start: None}
        queue = deque([start])
        active = self.market.sort_trades(allocation)
        while queue:
            agent = queue.popleft()
            if agent == goal:
                break
            for trade_id in active:
                trade = self.market.trade(trade_id)
                if agent not in (trade.seller, trade.buyer):
                    continue
                other = trade.buyer if trade.seller == agent else trade.seller
                if other not in previous:
                    previous[other] = (agent, trade_id)
                    queue.append(other)
        path = []
        agent = goal
        while previous[agent] is not None:
            before, trade_id = previous[agent]
            path.append((before, trade_id))
            agent = before
        return list(reversed(path))

    @operation
    def implement_imputation(self, allocation, x):
        """
        Prices on an efficient allocation realizing a given core imputation.

        Starts from competitive equilibrium prices and repeatedly moves utility from an
        overpaid agent to an underpaid agent of the same component along a path of
        active trades.

        Parameters
        ----------
        allocation : iterable
            Efficient set of trades
        x : Imputation, dict or sequence
            Core imputation

        Returns
        -------
        MarketOutcome
            Verified: every agent's utility equals its entry of ``x``
        """
        allocation = frozenset(allocation)
        self.market.check_allocation(allocation)
        if not self.welfare.is_efficient(allocation):
            raise PreconditionError(f"allocation {self.market.sort_trades(allocation)} is not efficient")
        cf = self.characteristic_function()
        x = self._imputation(cf, x)
        check = self.is_core_imputation(cf, x)
        if not check:
            raise NotInCoreError(f"imputation violates the core: {check.violation}")

        ce = self.equilibria.solve_ce_prices()
        prices = dict(ce.prices)
        if not self.equilibria.is_competitive_equilibrium(Arrangement(prices, allocation)):
            raise NoEquilibriumError("equilibrium prices do not support the requested allocation")
        utilities = self._outcome_utilities(prices, allocation)

        components = self._components(allocation)
        for component in components:
            if sum((x[a] for a in component), Fraction(0)) != sum((utilities[a] for a in component), Fraction(0)):
                raise InternalConsistencyError(f"component {component} cannot be balanced by prices")
        component_of = {a: j for j, component in enumerate(components) for a in component}

        shifts = 0
        while True:
            gaps = {a: x[a] - utilities[a] for a in self.market.agents}
            under = next((a for a in self.market.agents if gaps[a] > 0), None)
            if under is None:
                break
            over = next(a for a in self.market.agents if gaps[a] < 0 and component_of[a] == component_of[under])
            delta = min(gaps[under], -gaps[over])
            for agent, trade_id in self._path(allocation, under, over):
                # agent gains delta on this trade, its successor on the path loses it
                if self.market.trade(trade_id).seller == agent:
                    prices[trade_id] += delta
                else:
                    prices[trade_id] -= delta
            utilities = self._outcome_utilities(prices, allocation)
            shifts += 1
        logger.info(f"Implemented imputation with {shifts} path shifts")

        outcome = MarketOutcome({t: prices[t] for t in allocation}, allocation)
        if any(utilities[a] != x[a] for a in self.market.agents):
            raise InternalConsistencyError("implemented utilities differ from the imputation")
        return outcome

    @verifier
    def is_core_outcome(self, outcome):
        """
        Core membership of a market outcome through its utility profile.

        Returns
        -------
        bool
        """
        utilities = self._outcome_utilities(outcome.prices, outcome.allocation)
        if not all(is_finite(u) for u in utilities.values()):
            return False
        return bool(self.is_core_imputation(self.characteristic_function(), utilities))

    @helper
    def core_outcome_oracle(self, outcome):
        """
        Direct search for a blocking outcome.

        Inside every component of a candidate trade set prices can split the component's
        welfare arbitrarily, so the set blocks when some component's welfare exceeds the
        current utilities of its agents. A negative utility counts as blocked by the
        agent alone.

        Returns
        -------
        tuple
            (in_core, witness) where the witness is the blocking trade set or agent
        """
        if self.market.n > self.MAX_ORACLE_AGENTS:
            raise EnumerationCapError(f"the blocking search is capped at {self.MAX_ORACLE_AGENTS} agents")
        utilities = self._outcome_utilities(outcome.prices, outcome.allocation)
        for agent in self.market.agents:
            if utilities[agent] < 0:
                return False, agent
        for candidate in self.market.allocations():
            if not candidate:
                continue
            for component in self._components(candidate):
                trades = frozenset(t for t in candidate if self.market.trade(t).seller in component)
                if not trades:
                    continue
                welfare = sum(
                    (self.market.value(a, self.market.bundle_of(a, trades)) for a in component), Fraction(0)
                )
                if welfare > sum((utilities[a] for a in component), Fraction(0)):
                    return False, trades
        return True, None

    @operation
    def taxed_ce_check(self, arrangement, alpha):
        """
        Competitive equilibrium test in the market that taxes utility at rate ``alpha``.

        An agent's taxed utility for a bundle it could trade is
        (alpha / n) * W(allocation after its switch) + (1 - alpha) * its own utility.

        Parameters
        ----------
        arrangement : Arrangement
        alpha : Fraction
            Tax rate in [0, 1]

        Returns
        -------
        TaxedCheck
        """
        alpha = Fraction(alpha)
        if not 0 <= alpha <= 1:
            raise PreconditionError(f"tax rate {alpha} is outside [0, 1]")
        allocation = frozenset(arrangement.allocation)
        prices = self.market.price_vector(arrangement.prices)
        n = self.market.n

        def taxed(agent, bundle):
            total = Fraction(0)
            if alpha:
                switched = (allocation - frozenset(self.market.incident(agent))) | bundle
                welfare = self.welfare.social_welfare(switched)
                if not is_finite(welfare):
                    return NEG_INF
                total += alpha / n * welfare
            if alpha != 1:
                utility = self.demand._utility(agent, bundle, prices)
                if not is_finite(utility):
                    return NEG_INF
                total += (1 - alpha) * utility
            return total

        taxed_ce = True
        for agent in self.market.agents:
            current = taxed(agent, self.market.bundle_of(agent, allocation))
            if not is_finite(current) or any(taxed(agent, b) > current for b in self.market.bundles(agent)):
                taxed_ce = False
                break
        return TaxedCheck(
            taxed_ce=taxed_ce,
            original_ce=self.equilibria.is_competitive_equilibrium(Arrangement(prices, allocation)),
            efficient=self.welfare.is_efficient(allocation),
        )
