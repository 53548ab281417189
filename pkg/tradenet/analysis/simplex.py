"""Exact rational linear programming: two-phase tableau simplex with Bland's rule."""
from dataclasses import dataclass
from fractions import Fraction

from tradenet.exceptions import LinearProgramError
from tradenet.logging_config import logger

OPTIMAL = 'optimal'
INFEASIBLE = 'infeasible'
UNBOUNDED = 'unbounded'

@dataclass(frozen=True)
class LPResult:
    status: str
    value: Fraction = None
    values: dict = None

    def __getitem__(self, name):
        return self.values[name]

    def require_optimal(self, label="linear program"):
        if self.status != OPTIMAL:
            raise LinearProgramError(f"{label} is {self.status}")
        return self

class SimplexTableau:
    """
    Dense tableau for ``maximize c.x s.t. A x = b, x >= 0`` with ``b >= 0``.

    The last column holds the right-hand side. ``basis[i]`` is the column basic in row i.
    """
    def __init__(self, rows, rhs, basis, width):
        self.rows = [list(row) + [value] for row, value in zip(rows, rhs)]
        self.basis = list(basis)
        self.n = width
        self.blocked = set()
        self.costs = [Fraction(0)] * self.n

    def set_objective(self, costs):
        self.costs = list(costs)

    def reduced_costs(self):
        reduced = [-c for c in self.costs]
        for i, col in enumerate(self.basis):
            cb = self.costs[col]
            if cb:
                row = self.rows[i]
                for j in range(self.n):
                    if row[j]:
                        reduced[j] += cb * row[j]
        return reduced

    def objective_value(self):
        return sum((self.costs[col] * self.rows[i][-1] for i, col in enumerate(self.basis)), Fraction(0))

    def pivot(self, i, j):
        row = self.rows[i]
        piv = row[j]
        if piv != 1:
            self.rows[i] = row = [v / piv for v in row]
        for k, other in enumerate(self.rows):
            if k != i and other[j]:
                f = other[j]
                self.rows[k] = [a - f * b for a, b in zip(other, row)]
        self.basis[i] = j

    def bland_primal_step(self):
        reduced = self.reduced_costs()
        entering = [j for j in range(self.n) if reduced[j] < 0 and j not in self.blocked]
        if not entering:
            return OPTIMAL
        j = min(entering)
        candidates = [
            (self.rows[i][-1] / self.rows[i][j], self.basis[i], i)
            for i in range(len(self.rows)) if self.rows[i][j] > 0
        ]
        if not candidates:
            return UNBOUNDED
        _, _, i = min(candidates)
        self.pivot(i, j)
        return 'go_on'

    def bland_primal(self):
        while True:
            status = self.bland_primal_step()
            if status in (OPTIMAL, UNBOUNDED):
                return status

    def solution(self):
        x = [Fraction(0)] * self.n
        for i, col in enumerate(self.basis):
            x[col] = self.rows[i][-1]
        return x

class LinearProgram:
    """
    Small exact LP builder.

    Variables are named; ``lower=0`` makes a variable nonnegative, ``lower=None``
    makes it free. Constraints use the senses ``<=``, ``>=`` and ``==``.

    Examples
    --------
    >>> lp = LinearProgram()
    >>> _ = lp.add_variable("x"), lp.add_variable("y")
    >>> lp.add_constraint({"x": 1, "y": 1}, "<=", 4)
    >>> lp.maximize({"x": 1, "y": 2}).value
    Fraction(8, 1)
    """
    def __init__(self, label="lp"):
        self.label = label
        self.variables = []
        self.free = set()
        self.constraints = []

    def add_variable(self, name, lower=0):
        if name in self.variables:
            raise ValueError(f"duplicate variable {name}")
        if lower not in (0, None):
            raise ValueError("only nonnegative or free variables are supported")
        self.variables.append(name)
        if lower is None:
            self.free.add(name)
        return name

    def add_constraint(self, coefficients, sense, rhs):
        if sense not in ('<=', '>=', '=='):
            raise ValueError(f"unknown sense {sense}")
        coefficients = {name: Fraction(c) for name, c in coefficients.items() if c}
        for name in coefficients:
            if name not in self.variables:
                raise ValueError(f"unknown variable {name}")
        self.constraints.append((coefficients, sense, Fraction(rhs)))

    def maximize(self, objective):
        return self._solve({name: Fraction(c) for name, c in objective.items()})

    def minimize(self, objective):
        result = self._solve({name: -Fraction(c) for name, c in objective.items()})
        if result.status == OPTIMAL:
            return LPResult(OPTIMAL, -result.value, result.values)
        return result

    def feasible(self):
        return self._solve({}).status != INFEASIBLE

    def _columns(self):
        columns = []
        for name in self.variables:
            columns.append((name, 1))
            if name in self.free:
                columns.append((name, -1))
        return columns

    def _solve(self, objective):
        columns = self._columns()
        n_struct = len(columns)
        n_slack = sum(1 for _, sense, _ in self.constraints if sense != '==')
        n_rows = len(self.constraints)
        width = n_struct + n_slack + n_rows

        rows, rhs, basis = [], [], []
        slack = n_struct
        for r, (coefficients, sense, value) in enumerate(self.constraints):
            row = [Fraction(0)] * width
            for j, (name, sign) in enumerate(columns):
                if name in coefficients:
                    row[j] = sign * coefficients[name]
            if sense == '<=':
                row[slack] = Fraction(1)
                slack += 1
            elif sense == '>=':
                row[slack] = Fraction(-1)
                slack += 1
            if value < 0:
                row = [-v for v in row]
                value = -value
            artificial = n_struct + n_slack + r
            row[artificial] = Fraction(1)
            rows.append(row)
            rhs.append(value)
            basis.append(artificial)

        tableau = SimplexTableau(rows, rhs, basis, width)
        artificials = set(range(n_struct + n_slack, width))

        # Phase 1
        tableau.set_objective([Fraction(-1) if j in artificials else Fraction(0) for j in range(width)])
        tableau.bland_primal()
        if tableau.objective_value() < 0:
            logger.debug(f"{self.label}: infeasible")
            return LPResult(INFEASIBLE)

        # Drive zero-valued artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(tableau.rows):
            if tableau.basis[i] in artificials:
                pivot_col = next((j for j in range(n_struct + n_slack) if tableau.rows[i][j] != 0), None)
                if pivot_col is None:
                    del tableau.rows[i]
                    del tableau.basis[i]
                    continue
                tableau.pivot(i, pivot_col)
            i += 1
        tableau.blocked = artificials

        # Phase 2
        costs = [Fraction(0)] * width
        for j, (name, sign) in enumerate(columns):
            costs[j] = sign * objective.get(name, Fraction(0))
        tableau.set_objective(costs)
        if tableau.bland_primal() == UNBOUNDED:
            logger.debug(f"{self.label}: unbounded")
            return LPResult(UNBOUNDED)

        x = tableau.solution()
        values = {name: Fraction(0) for name in self.variables}
        for j, (name, sign) in enumerate(columns):
            values[name] += sign * x[j]
        return LPResult(OPTIMAL, tableau.objective_value(), values)

def solve_exact(matrix, rhs):
    """
    Solve a square system exactly by Gauss-Jordan elimination.

    Returns
    -------
    list of Fraction or None
        None when the matrix is singular.
    """
    n = len(matrix)
    a = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        piv = a[col][col]
        a[col] = [v / piv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[-1] for row in a]
