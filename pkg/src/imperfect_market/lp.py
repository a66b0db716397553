"""Dense two-phase simplex over exact rationals (or floats).

Every higher-level computation in the package goes through :func:`solve`.
The default mode is exact: all arithmetic is carried out on
:class:`fractions.Fraction` and no tolerance is consulted.  A float mode is
available for quick exploratory runs; there a single tolerance governs the
sign tests that decide pivots and the final status.

Pivoting uses Bland's rule (smallest eligible entering index, ties in the
ratio test broken by smallest basic index), so the solver terminates
without perturbation and is deterministic: identical inputs produce
identical outputs.
"""
from __future__ import annotations

import contextlib
import contextvars
import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Optional, Sequence, Union

Number = Union[Fraction, float]

DEFAULT_TOL = 1e-9


class MalformedProblem(ValueError):
    """Dimension mismatch or otherwise ill-formed LP input."""


class SolverInconsistency(RuntimeError):
    """An exact optimum failed its own feasibility re-check (a bug)."""


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class NumericMode:
    exact: bool = True
    tol: float = DEFAULT_TOL


_MODE: contextvars.ContextVar[NumericMode] = contextvars.ContextVar(
    "imperfect_market_numeric_mode", default=NumericMode()
)


def current_mode() -> NumericMode:
    return _MODE.get()


@contextlib.contextmanager
def numeric_mode(exact: bool = True, tol: float = DEFAULT_TOL) -> Iterator[NumericMode]:
    """Temporarily switch every LP solved in this context to ``exact``/float."""
    mode = NumericMode(exact=exact, tol=tol)
    token = _MODE.set(mode)
    try:
        yield mode
    finally:
        _MODE.reset(token)


def as_rational(value) -> Fraction:
    """Convert ints, Fractions, decimal strings and ``"p/q"`` strings exactly.

    Floats are refused: they would silently smuggle binary rounding into
    exact computations.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {value!r} exactly; use int, Fraction or str")


def _coerce(value, exact: bool) -> Number:
    if exact:
        return as_rational(value)
    return float(value)


@dataclass(frozen=True)
class LPProblem:
    """minimize ``objective . x`` s.t. ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    ``lower[j]`` is the lower bound of ``x_j``; ``None`` marks a free
    variable.  All entries are stored as Fractions.
    """

    objective: tuple
    A_ub: tuple = ()
    b_ub: tuple = ()
    A_eq: tuple = ()
    b_eq: tuple = ()
    lower: tuple = ()

    @classmethod
    def build(
        cls,
        objective: Sequence,
        A_ub: Optional[Sequence[Sequence]] = None,
        b_ub: Optional[Sequence] = None,
        A_eq: Optional[Sequence[Sequence]] = None,
        b_eq: Optional[Sequence] = None,
        lower: Optional[Sequence] = None,
    ) -> "LPProblem":
        n = len(objective)
        if n == 0:
            raise MalformedProblem("an LP needs at least one variable")
        A_ub = [] if A_ub is None else A_ub
        b_ub = [] if b_ub is None else b_ub
        A_eq = [] if A_eq is None else A_eq
        b_eq = [] if b_eq is None else b_eq
        if len(A_ub) != len(b_ub):
            raise MalformedProblem(f"{len(A_ub)} inequality rows but {len(b_ub)} bounds")
        if len(A_eq) != len(b_eq):
            raise MalformedProblem(f"{len(A_eq)} equality rows but {len(b_eq)} targets")
        for kind, rows in (("inequality", A_ub), ("equality", A_eq)):
            for i, row in enumerate(rows):
                if len(row) != n:
                    raise MalformedProblem(
                        f"{kind} row {i} has width {len(row)}, objective has {n}"
                    )
        if lower is None:
            lower = [0] * n
        if len(lower) != n:
            raise MalformedProblem(f"{len(lower)} lower bounds for {n} variables")

        def vec(v):
            return tuple(as_rational(x) for x in v)

        return cls(
            objective=vec(objective),
            A_ub=tuple(vec(r) for r in A_ub),
            b_ub=vec(b_ub),
            A_eq=tuple(vec(r) for r in A_eq),
            b_eq=vec(b_eq),
            lower=tuple(None if lo is None else as_rational(lo) for lo in lower),
        )

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def negated(self) -> "LPProblem":
        return LPProblem(
            objective=tuple(-c for c in self.objective),
            A_ub=self.A_ub,
            b_ub=self.b_ub,
            A_eq=self.A_eq,
            b_eq=self.b_eq,
            lower=self.lower,
        )


@dataclass(frozen=True)
class LPSolution:
    status: Status
    value: Optional[Number] = None
    point: Optional[tuple] = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _Tableau:
    """Rows carry their right-hand side as the last entry."""

    def __init__(self, rows, basis, exact, tol):
        self.rows = rows
        self.basis = basis
        self.exact = exact
        self.tol = 0 if exact else tol

    def positive(self, v) -> bool:
        return v > self.tol

    def negative(self, v) -> bool:
        return v < -self.tol

    def pivot(self, obj, r, c):
        rows = self.rows
        piv = rows[r][c]
        prow = [v / piv for v in rows[r]]
        rows[r] = prow
        for i, row in enumerate(rows):
            if i != r:
                f = row[c]
                if f:
                    rows[i] = [a - f * b for a, b in zip(row, prow)]
        f = obj[c]
        if f:
            obj[:] = [a - f * b for a, b in zip(obj, prow)]
        self.basis[r] = c

    def run(self, obj, allowed) -> Status:
        rows = self.rows
        while True:
            entering = next((j for j in allowed if self.negative(obj[j])), None)
            if entering is None:
                return Status.OPTIMAL
            best = None
            for i, row in enumerate(rows):
                a = row[entering]
                if self.positive(a):
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return Status.UNBOUNDED
            self.pivot(obj, best[1], entering)


def _objective_row(cost, rows, basis, width):
    obj = list(cost) + [0] * (width - len(cost))
    for i, b in enumerate(basis):
        cb = cost[b] if b < len(cost) else 0
        if cb:
            obj = [o - cb * v for o, v in zip(obj, rows[i])]
    return obj


def solve(
    problem: LPProblem, exact: Optional[bool] = None, tol: Optional[float] = None
) -> LPSolution:
    """Minimize ``problem``; the mode defaults to the ambient :func:`numeric_mode`."""
    mode = current_mode()
    exact = mode.exact if exact is None else exact
    tol = mode.tol if tol is None else tol
    zero = Fraction(0) if exact else 0.0

    n = problem.n_vars
    # Map each original variable to standard-form columns: x = lo + y, or y+ - y-.
    col_of: list[tuple[int, Optional[int]]] = []
    ncols = 0
    for lo in problem.lower:
        if lo is None:
            col_of.append((ncols, ncols + 1))
            ncols += 2
        else:
            col_of.append((ncols, None))
            ncols += 1
    shift = [zero if lo is None else _coerce(lo, exact) for lo in problem.lower]

    def expand(row):
        out = [zero] * ncols
        for j, a in enumerate(row):
            a = _coerce(a, exact)
            p, m = col_of[j]
            out[p] = a
            if m is not None:
                out[m] = -a
        return out

    def offset(row):
        return sum((_coerce(a, exact) * s for a, s in zip(row, shift)), zero)

    n_ub = len(problem.A_ub)
    raw_rows = []
    for i, (row, b) in enumerate(zip(problem.A_ub, problem.b_ub)):
        slack = [zero] * n_ub
        slack[i] = _coerce(1, exact)
        raw_rows.append((expand(row) + slack, _coerce(b, exact) - offset(row)))
    for row, d in zip(problem.A_eq, problem.b_eq):
        raw_rows.append((expand(row) + [zero] * n_ub, _coerce(d, exact) - offset(row)))

    width_struct = ncols + n_ub
    m = len(raw_rows)
    cost_struct = [zero] * width_struct
    for j, c in enumerate(problem.objective):
        c = _coerce(c, exact)
        p, mm = col_of[j]
        cost_struct[p] = c
        if mm is not None:
            cost_struct[mm] = -c

    one = _coerce(1, exact)
    rows = []
    for i, (coeffs, rhs) in enumerate(raw_rows):
        if rhs < 0:
            coeffs = [-v for v in coeffs]
            rhs = -rhs
        art = [zero] * m
        art[i] = one
        rows.append(coeffs + art + [rhs])
    basis = [width_struct + i for i in range(m)]
    tab = _Tableau(rows, basis, exact, tol)
    width = width_struct + m + 1

    # Phase 1: minimize the sum of artificials.
    if m:
        phase1_cost = [zero] * width_struct + [one] * m
        obj = _objective_row(phase1_cost, rows, basis, width)
        tab.run(obj, range(width_struct + m))
        if tab.positive(-obj[-1]):
            return LPSolution(Status.INFEASIBLE)
        # Drive artificials out of the basis; drop rows that are redundant.
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= width_struct:
                j = next(
                    (j for j in range(width_struct) if abs(tab.rows[i][j]) > tab.tol),
                    None,
                )
                if j is None:
                    del tab.rows[i]
                    del tab.basis[i]
                    continue
                tab.pivot(obj, i, j)
            i += 1
        for r in range(len(tab.rows)):
            tab.rows[r] = tab.rows[r][:width_struct] + [tab.rows[r][-1]]
        width = width_struct + 1

    obj = _objective_row(cost_struct, tab.rows, tab.basis, width)
    status = tab.run(obj, range(width_struct))
    if status is Status.UNBOUNDED:
        return LPSolution(Status.UNBOUNDED)

    y = [zero] * width_struct
    for i, b in enumerate(tab.basis):
        y[b] = tab.rows[i][-1]
    x = []
    for j in range(n):
        p, mm = col_of[j]
        v = y[p] if mm is None else y[p] - y[mm]
        x.append(v + shift[j])
    value = sum((_coerce(c, exact) * v for c, v in zip(problem.objective, x)), zero)
    if exact:
        _verify(problem, x)
    else:
        value = float(value)
    return LPSolution(Status.OPTIMAL, value, tuple(x))


def _verify(problem: LPProblem, x) -> None:
    for i, (row, b) in enumerate(zip(problem.A_ub, problem.b_ub)):
        if sum(a * v for a, v in zip(row, x)) > b:
            raise SolverInconsistency(f"inequality row {i} violated at optimum")
    for i, (row, d) in enumerate(zip(problem.A_eq, problem.b_eq)):
        if sum(a * v for a, v in zip(row, x)) != d:
            raise SolverInconsistency(f"equality row {i} violated at optimum")
    for j, (lo, v) in enumerate(zip(problem.lower, x)):
        if lo is not None and v < lo:
            raise SolverInconsistency(f"variable {j} below its lower bound")


def maximize(
    problem: LPProblem, exact: Optional[bool] = None, tol: Optional[float] = None
) -> LPSolution:
    """Maximize the objective of ``problem``; the reported value is the maximum."""
    sol = solve(problem.negated(), exact=exact, tol=tol)
    if not sol.optimal:
        return sol
    return LPSolution(Status.OPTIMAL, -sol.value, sol.point)


def solve_linear_system(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Exact Gauss-Jordan elimination for a square system.

    Returns the unique solution, or ``None`` when the matrix is singular.
    """
    n = len(matrix)
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]
