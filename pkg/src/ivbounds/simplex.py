"""Exact two-phase simplex over the rationals with Bland's pivoting rule.

The tableau is kept fraction-free: every row is scaled to integers once and
each pivot updates entries with the Edmonds/Bareiss rule

    T'[i][j] = (p * T[i][j] - T[i][c] * T[r][j]) // d

where ``p`` is the pivot entry and ``d`` the previous pivot.  The division is
exact, the true tableau is ``T / d``, and ``d`` is (up to sign) the
determinant of the current basis.  ``d`` is kept positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InputError, InternalUnbounded


@dataclass
class LinearProgram:
    """``min`` or ``max`` of ``objective . w`` subject to

    ``eq_rows @ w == eq_rhs``, ``ub_rows @ w <= ub_rhs`` and ``w >= 0``.
    Coefficients may be ints, floats or Fractions; floats are converted exactly.
    """

    objective: Sequence
    eq_rows: Sequence[Sequence] = ()
    eq_rhs: Sequence = ()
    ub_rows: Sequence[Sequence] = ()
    ub_rhs: Sequence = ()
    sense: str = "min"
    names: Sequence[str] | None = None

    @property
    def n(self) -> int:
        return len(self.objective)


@dataclass
class LPResult:
    status: str  # "optimal" or "infeasible"
    value: Fraction | None = None
    weights: tuple | None = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _lcm_denominators(values) -> int:
    lcm = 1
    for v in values:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return lcm


def _scaled_rows(A, b):
    """Integer rows and right-hand sides for ``A w = b`` with ``b >= 0``.

    Each coefficient row is cleared of denominators on its own; the
    right-hand sides share one extra factor ``L`` so the program's solution
    is ``L`` times the true one.  Returns ``(rows, rhs, L)``.
    """
    rows, rhs = [], []
    for coeffs, r in zip(A, b):
        vals = [Fraction(v) for v in coeffs]
        s = _lcm_denominators(vals)
        ints = [int(v * s) for v in vals]
        r = Fraction(r) * s
        if r < 0:
            ints, r = [-v for v in ints], -r
        rows.append(ints)
        rhs.append(r)
    L = _lcm_denominators(rhs)
    return rows, [int(r * L) for r in rhs], L


_INT64_SAFE = 2**62


@dataclass
class Tableau:
    """Feasible region ``{w >= 0 : A w = b}`` with a current feasible basis.

    Build it with :meth:`from_equalities`; then call :meth:`optimize` any number
    of times.  Each call starts from the basis the previous one ended on.

    Coefficient columns live in an int64 matrix while their entries stay small
    (they are minors of the input rows) and move to Python ints otherwise;
    the right-hand sides are always Python ints.
    """

    n: int
    A: np.ndarray = None
    b: list = field(default_factory=list)
    basis: list = field(default_factory=list)
    det: int = 1
    scale: int = 1
    feasible: bool = False
    pivots: int = 0

    @classmethod
    def from_equalities(cls, A: Sequence[Sequence], b: Sequence, n: int) -> "Tableau":
        m = len(A)
        for i, coeffs in enumerate(A):
            if len(coeffs) != n:
                raise InputError(f"row {i} has {len(coeffs)} coefficients, expected {n}")
        ints, rhs, L = _scaled_rows(A, b)
        tab = cls(n, scale=L)
        full = [row + [int(i == k) for k in range(m)] for i, row in enumerate(ints)]
        big = any(abs(v) >= 2**31 for row in full for v in row)
        tab.A = np.array(full, dtype=object if big else np.int64).reshape(m, n + m)
        tab.b = rhs
        tab.basis = [n + i for i in range(m)]
        tab._phase_one(m)
        return tab

    # -- core -------------------------------------------------------------

    def _widen_if_needed(self, r: int, c: int, obj) -> None:
        if self.A.dtype == object:
            return
        A = self.A
        amax = int(np.abs(A).max(initial=0))
        omax = int(np.abs(obj[0]).max(initial=0)) if obj is not None else 0
        p = abs(int(A[r, c]))
        colmax = max(int(np.abs(A[:, c]).max(initial=0)),
                     abs(int(obj[0][c])) if obj is not None else 0)
        rowmax = int(np.abs(A[r]).max(initial=0))
        if p * max(amax, omax) + colmax * rowmax >= _INT64_SAFE:
            self.A = A.astype(object)
            if obj is not None:
                obj[0] = obj[0].astype(object)

    def _pivot(self, r: int, c: int, obj=None) -> None:
        """Pivot on (r, c).  ``obj`` is a ``[cost_row_array, cost_rhs]`` pair."""
        self._widen_if_needed(r, c, obj)
        A, b, d = self.A, self.b, self.det
        p = A[r, c]
        pi = int(p)
        pr = A[r].copy()
        col = A[:, c].copy()
        A *= p
        A -= np.outer(col, pr)
        A //= d
        A[r] = pr
        br = b[r]
        for i in range(len(b)):
            if i != r:
                b[i] = (pi * b[i] - int(col[i]) * br) // d
        if obj is not None:
            f = obj[0][c]
            obj[0] = (p * obj[0] - f * pr) // d
            obj[1] = (pi * obj[1] - int(f) * br) // d
        self.basis[r] = c
        self.det = pi
        if pi < 0:
            self.det = -pi
            A *= -1
            self.b = [-v for v in b]
            if obj is not None:
                obj[0] = -obj[0]
                obj[1] = -obj[1]
        self.pivots += 1

    def _run(self, obj: list, ncols: int) -> None:
        """Bland's rule on cost row ``obj`` over columns ``< ncols``."""
        while True:
            neg = np.flatnonzero(obj[0][:ncols] < 0)
            if neg.size == 0:
                return
            c = int(neg[0])
            column = self.A[:, c]
            b = self.b
            best = None
            for i in np.flatnonzero(column > 0):
                i = int(i)
                if best is None:
                    best = i
                    continue
                # ratio b[i]/a vs b[best]/a_best; ties -> smaller basic index
                lhs = b[i] * int(column[best])
                rhs = b[best] * int(column[i])
                if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[best]):
                    best = i
            if best is None:
                raise InternalUnbounded(f"column {c} is an unbounded direction")
            self._pivot(best, c, obj)

    def _phase_one(self, m: int) -> None:
        n = self.n
        cost = -self.A[:, :n].sum(axis=0)
        cost = np.concatenate([cost, np.zeros(m, dtype=cost.dtype)])
        obj = [cost, -sum(self.b)]
        self._run(obj, n)
        if obj[1] != 0:
            # min sum of artificials is -obj[1]/det > 0
            self.feasible = False
            return
        self.feasible = True
        # drive zero-level artificials out of the basis; drop redundant rows
        i = 0
        while i < len(self.b):
            if self.basis[i] >= n:
                nz = np.flatnonzero(self.A[i, :n] != 0)
                if nz.size == 0:
                    self.A = np.delete(self.A, i, axis=0)
                    del self.b[i]
                    del self.basis[i]
                    continue
                self._pivot(i, int(nz[0]), None)
            i += 1
        self.A = np.ascontiguousarray(self.A[:, :n])

    # -- public -----------------------------------------------------------

    def point(self) -> tuple:
        x = [Fraction(0)] * self.n
        for i, j in enumerate(self.basis):
            x[j] = Fraction(self.b[i], self.det * self.scale)
        return tuple(x)

    def optimize(self, objective: Sequence, sense: str = "min") -> LPResult:
        if not self.feasible:
            return LPResult("infeasible", pivots=self.pivots)
        if sense not in ("min", "max"):
            raise InputError(f"sense must be 'min' or 'max', got {sense!r}")
        if len(objective) != self.n:
            raise InputError(f"objective has {len(objective)} entries, expected {self.n}")
        cost = [Fraction(v) for v in objective]
        if sense == "max":
            cost = [-v for v in cost]
        ic = [int(v * _lcm_denominators(cost)) for v in cost]
        d = self.det
        dtype = object if self.A.dtype == object or max(map(abs, ic), default=0) >= 2**31 \
            else np.int64
        row = np.array([d * v for v in ic], dtype=dtype)
        rhs = 0
        for i, bj in enumerate(self.basis):
            cb = ic[bj]
            if cb:
                row = row - cb * self.A[i]
                rhs -= cb * self.b[i]
        obj = [row, rhs]
        start = self.pivots
        self._run(obj, self.n)
        x = self.point()
        value = sum(Fraction(v) * xi for v, xi in zip(objective, x) if xi)
        return LPResult("optimal", Fraction(value), x, self.pivots - start)


def _standard_form(lp: LinearProgram):
    n = lp.n
    n_slack = len(lp.ub_rows)
    A, b = [], []
    for row, rhs in zip(lp.eq_rows, lp.eq_rhs):
        A.append(list(row) + [0] * n_slack)
        b.append(rhs)
    for k, (row, rhs) in enumerate(zip(lp.ub_rows, lp.ub_rhs)):
        slack = [0] * n_slack
        slack[k] = 1
        A.append(list(row) + slack)
        b.append(rhs)
    return A, b, n + n_slack


def solve_lp(lp: LinearProgram) -> LPResult:
    """Solve ``lp`` exactly; the optimal value and weights are Fractions."""
    if len(lp.eq_rows) != len(lp.eq_rhs) or len(lp.ub_rows) != len(lp.ub_rhs):
        raise InputError("constraint rows and right-hand sides differ in length")
    A, b, width = _standard_form(lp)
    tab = Tableau.from_equalities(A, b, width)
    result = tab.optimize(list(lp.objective) + [0] * (width - lp.n), lp.sense)
    if result.optimal:
        result.weights = result.weights[: lp.n]
    result.pivots = tab.pivots
    return result
