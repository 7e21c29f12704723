"""Exception hierarchy.

Data conditions that are part of the answer (an IV-infeasible law, an inverted
interval, a violated inequality) are returned as values.  The classes here are
raised only when an operation cannot produce its result.
"""

from __future__ import annotations


class IVBoundsError(Exception):
    """Base class for every error raised by this package."""


class InputError(IVBoundsError, ValueError):
    """Malformed or invalid user input (CLI exit code 1)."""


class EmptyLevel(InputError):
    def __init__(self, level):
        super().__init__(f"instrument level {level!r} has zero total count")
        self.level = level


class DuplicateCell(InputError):
    def __init__(self, level, x, y):
        super().__init__(f"cell (z={level!r}, x={x}, y={y}) appears more than once")
        self.cell = (level, x, y)


class InvalidLaw(InputError):
    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations[:3])
        more = "" if len(self.violations) <= 3 else f" (+{len(self.violations) - 3} more)"
        super().__init__(f"invalid observed law: {detail}{more}")


class InfeasibleTriple(InputError):
    def __init__(self, cells):
        self.cells = cells
        bad = ", ".join(f"q[{y0}][{y1}]={v}" for (y0, y1), v in cells)
        super().__init__(f"(pi0, pi1, pi_ar) implies negative cells: {bad}")


class InfeasibleLaw(IVBoundsError):
    """The observed law violates the instrumental inequalities."""

    def __init__(self, report):
        self.report = report
        super().__init__("observed law violates the instrumental inequalities")


class MembershipError(IVBoundsError):
    """A (joint, law) pair fails the characterizing inequalities."""

    def __init__(self, violations):
        self.violations = list(violations)
        levels = sorted({v.level for v in self.violations}, key=str)
        super().__init__(
            f"{len(self.violations)} characterizing inequalities violated at levels {levels}"
        )


class P000OutOfRange(IVBoundsError, ValueError):
    def __init__(self, value, interval):
        self.value = value
        self.interval = interval
        super().__init__(f"p000={value} outside [{interval.lo}, {interval.hi}]")


class MarginMismatch(IVBoundsError, ValueError):
    def __init__(self, level, cell, discrepancy):
        self.level = level
        self.cell = cell
        self.discrepancy = discrepancy
        super().__init__(
            f"part {level} disagrees with part 0 on outcome margin cell {cell} "
            f"by {discrepancy}"
        )


class OracleSizeExceeded(IVBoundsError, ValueError):
    def __init__(self, K, limit):
        super().__init__(f"oracle supports K <= {limit}, got K={K}")
        self.K = K
        self.limit = limit


class SizeExceeded(IVBoundsError, ValueError):
    pass


class InternalUnbounded(IVBoundsError, RuntimeError):
    """The simplex found an unbounded ray; for the programs built here that is a bug."""


class WrongK(IVBoundsError, ValueError):
    def __init__(self, K):
        super().__init__(f"expression tables are defined for K=2 only, got K={K}")
        self.K = K


class IdentityViolation(IVBoundsError, AssertionError):
    def __init__(self, row, lhs, rhs):
        self.row = row
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(f"identity {row} failed: lhs={lhs} rhs={rhs}")
