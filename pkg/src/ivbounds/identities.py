"""Executable checks of the binary-instrument bound expressions.

With two instrument levels every bound on pi0 and pi1 is one of four named
affine expressions in the observed cells.  The sixteen differences
(upper on pi1) - (lower on pi0) and (lower on pi1) - (upper on pi0) reduce to
eight surviving terms each; the remaining eight are exact multiples of, or a
surviving term plus a nonnegative cell.  This module evaluates every row and
asserts the identities, and it also replays the sixteen pairings of the
witness free-cell bounds against the inequalities they are equivalent to.

Tags follow the usual naming: ``u`` / ``l`` for upper / lower, the
superscript is the treatment arm, the subscript is the level (``0``, ``1``) or
the ordered level pair (``01``, ``10``) a cross-level term uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .bounds import ace_interval, membership_test
from .errors import IdentityViolation, InputError, WrongK
from .observed import ObservedLaw, OutcomeJoint, default_tol
from .witness import p000_bounds

TAU_IDENTITY = 1e-12


def _c(law, x, y, z):
    return law.p[z][x][y]


def _py(law, y, z):
    return law.p[z][0][y] + law.p[z][1][y]


# upper bounds on pi1 (min gives g(1,1))
# lower bounds on pi0 (max gives 1 - g(0,0))
# lower bounds on pi1 (max gives 1 - g(1,0))
# upper bounds on pi0 (min gives g(0,1))
EXPRESSIONS: dict[str, Callable] = {
    "u_0^1": lambda L: 1 - _c(L, 1, 0, 0),
    "u_1^1": lambda L: 1 - _c(L, 1, 0, 1),
    "u_01^1": lambda L: _py(L, 1, 0) + _c(L, 1, 1, 1) + _c(L, 0, 0, 1),
    "u_10^1": lambda L: _py(L, 1, 1) + _c(L, 1, 1, 0) + _c(L, 0, 0, 0),
    "l_0^0": lambda L: _c(L, 0, 1, 0),
    "l_1^0": lambda L: _c(L, 0, 1, 1),
    "l_01^0": lambda L: _py(L, 1, 0) - _c(L, 1, 1, 1) - _c(L, 0, 0, 1),
    "l_10^0": lambda L: _py(L, 1, 1) - _c(L, 1, 1, 0) - _c(L, 0, 0, 0),
    "l_0^1": lambda L: _c(L, 1, 1, 0),
    "l_1^1": lambda L: _c(L, 1, 1, 1),
    "l_01^1": lambda L: _py(L, 1, 0) - _c(L, 1, 0, 1) - _c(L, 0, 1, 1),
    "l_10^1": lambda L: _py(L, 1, 1) - _c(L, 1, 0, 0) - _c(L, 0, 1, 0),
    "u_0^0": lambda L: 1 - _c(L, 0, 0, 0),
    "u_1^0": lambda L: 1 - _c(L, 0, 0, 1),
    "u_01^0": lambda L: _c(L, 0, 1, 0) + _c(L, 1, 0, 0) + _py(L, 1, 1),
    "u_10^0": lambda L: _c(L, 0, 1, 1) + _c(L, 1, 0, 1) + _py(L, 1, 0),
}
TAGS = tuple(EXPRESSIONS)
SUFFIXES = ("0", "1", "01", "10")


@dataclass(frozen=True)
class BoundExpression:
    tag: str
    evaluator: Callable

    def __call__(self, law: ObservedLaw):
        return evaluate_expression(self.tag, law)


def bound_expression(tag: str) -> BoundExpression:
    if tag not in EXPRESSIONS:
        raise InputError(f"unknown bound expression {tag!r}")
    return BoundExpression(tag, EXPRESSIONS[tag])


def evaluate_expression(tag: str, law: ObservedLaw):
    """Literal value of the tagged expression on a two-level law."""
    if law.K != 2:
        raise WrongK(law.K)
    if tag not in EXPRESSIONS:
        raise InputError(f"unknown bound expression {tag!r}")
    return EXPRESSIONS[tag](law)


def expression_set(kind: str, arm: int) -> tuple[str, ...]:
    """The four tags of one bound family, e.g. ``("u", 1)`` -> u_0^1 .. u_10^1."""
    return tuple(f"{kind}_{s}^{arm}" for s in SUFFIXES)


# --------------------------------------------------------------------------
# difference tables


def _d(law, a, b):
    return EXPRESSIONS[a](law) - EXPRESSIONS[b](law)


@dataclass(frozen=True)
class RowSpec:
    left: str
    right: str
    status: str  # "surviving", "identity" or "dominated"
    expression: Callable
    pearl: int | None = None
    swanson: int | None = None
    note: str | None = None

    @property
    def row(self) -> str:
        return f"({self.left})-({self.right})"


def _row(left, right, status, expression, pearl=None, swanson=None, note=None):
    return RowSpec(left, right, status, expression, pearl, swanson, note)


c, py = _c, _py

UPPER_ROWS = (
    _row("u_0^1", "l_0^0", "surviving",
         lambda L: c(L, 0, 0, 0) + c(L, 1, 1, 0), 6, 1,
         "Pearl 2009 reprint prints p11.0 - p00.0; the 2000 edition has the sum"),
    _row("u_0^1", "l_1^0", "surviving",
         lambda L: 1 - c(L, 1, 0, 0) - c(L, 0, 1, 1), 2, 3,
         "Swanson et al. second form has a sign error on p(x0,y1|z1)"),
    _row("u_0^1", "l_01^0", "dominated",
         lambda L: _d(L, "u_1^1", "l_1^0") + c(L, 0, 0, 0)),
    _row("u_0^1", "l_10^0", "surviving",
         lambda L: py(L, 0, 1) - c(L, 1, 0, 0) + c(L, 1, 1, 0) + c(L, 0, 0, 0), 3, 5),
    _row("u_1^1", "l_0^0", "surviving",
         lambda L: 1 - c(L, 1, 0, 1) - c(L, 0, 1, 0), 1, 4,
         "Swanson et al. second form has a sign error on p(x0,y1|z0)"),
    _row("u_1^1", "l_1^0", "surviving",
         lambda L: c(L, 0, 0, 1) + c(L, 1, 1, 1), 5, 2),
    _row("u_1^1", "l_01^0", "surviving",
         lambda L: py(L, 0, 0) - c(L, 1, 0, 1) + c(L, 1, 1, 1) + c(L, 0, 0, 1), 4, 6),
    _row("u_1^1", "l_10^0", "dominated",
         lambda L: _d(L, "u_0^1", "l_0^0") + c(L, 0, 0, 1),
         note="the added cell is p(x0,y0|z1); a z0 subscript does not balance"),
    _row("u_01^1", "l_0^0", "dominated",
         lambda L: _d(L, "u_1^1", "l_1^0") + c(L, 1, 1, 0)),
    _row("u_01^1", "l_1^0", "surviving",
         lambda L: py(L, 1, 0) - c(L, 0, 1, 1) + c(L, 1, 1, 1) + c(L, 0, 0, 1), 7, 7),
    _row("u_01^1", "l_01^0", "identity",
         lambda L: 2 * _d(L, "u_1^1", "l_1^0")),
    _row("u_01^1", "l_10^0", "dominated",
         lambda L: _d(L, "u_0^1", "l_1^0") + c(L, 1, 1, 0) + c(L, 0, 0, 1)),
    _row("u_10^1", "l_0^0", "surviving",
         lambda L: py(L, 1, 1) - c(L, 0, 1, 0) + c(L, 1, 1, 0) + c(L, 0, 0, 0), 8, 8),
    _row("u_10^1", "l_1^0", "dominated",
         lambda L: _d(L, "u_0^1", "l_0^0") + c(L, 1, 1, 1)),
    _row("u_10^1", "l_01^0", "dominated",
         lambda L: _d(L, "u_1^1", "l_0^0") + c(L, 1, 1, 1) + c(L, 0, 0, 0)),
    _row("u_10^1", "l_10^0", "identity",
         lambda L: 2 * _d(L, "u_0^1", "l_0^0")),
)

LOWER_ROWS = (
    _row("l_0^1", "u_0^0", "surviving",
         lambda L: -c(L, 1, 0, 0) - c(L, 0, 1, 0), 6, 1),
    _row("l_0^1", "u_1^0", "surviving",
         lambda L: c(L, 1, 1, 0) + c(L, 0, 0, 1) - 1, 2, 3),
    _row("l_0^1", "u_01^0", "surviving",
         lambda L: -py(L, 1, 1) + c(L, 1, 1, 0) - c(L, 0, 1, 0) - c(L, 1, 0, 0), 3, 5),
    _row("l_0^1", "u_10^0", "dominated",
         lambda L: _d(L, "l_1^1", "u_1^0") - c(L, 0, 1, 0)),
    _row("l_1^1", "u_0^0", "surviving",
         lambda L: c(L, 1, 1, 1) + c(L, 0, 0, 0) - 1, 1, 4),
    _row("l_1^1", "u_1^0", "surviving",
         lambda L: -c(L, 1, 0, 1) - c(L, 0, 1, 1), 5, 2),
    _row("l_1^1", "u_01^0", "dominated",
         lambda L: _d(L, "l_0^1", "u_0^0") - c(L, 0, 1, 1)),
    _row("l_1^1", "u_10^0", "surviving",
         lambda L: -py(L, 1, 0) + c(L, 1, 1, 1) - c(L, 0, 1, 1) - c(L, 1, 0, 1), 4, 6,
         "often printed with a repeated u_01^0 label; the expression is the u_10^0 row"),
    _row("l_01^1", "u_0^0", "dominated",
         lambda L: _d(L, "l_1^1", "u_1^0") - c(L, 1, 0, 0)),
    _row("l_01^1", "u_1^0", "surviving",
         lambda L: -py(L, 0, 0) + c(L, 0, 0, 1) - c(L, 1, 0, 1) - c(L, 0, 1, 1), 7, 7),
    _row("l_01^1", "u_01^0", "dominated",
         lambda L: _d(L, "l_0^1", "u_1^0") - c(L, 1, 0, 0) - c(L, 0, 1, 1)),
    _row("l_01^1", "u_10^0", "identity",
         lambda L: 2 * _d(L, "l_1^1", "u_1^0")),
    _row("l_10^1", "u_0^0", "surviving",
         lambda L: -py(L, 0, 1) + c(L, 0, 0, 0) - c(L, 1, 0, 0) - c(L, 0, 1, 0), 8, 8),
    _row("l_10^1", "u_1^0", "dominated",
         lambda L: _d(L, "l_0^1", "u_0^0") - c(L, 1, 0, 1)),
    _row("l_10^1", "u_01^0", "identity",
         lambda L: 2 * _d(L, "l_0^1", "u_0^0")),
    _row("l_10^1", "u_10^0", "dominated",
         lambda L: _d(L, "l_1^1", "u_0^0") - c(L, 0, 1, 0) - c(L, 1, 0, 1)),
)


def _close(a, b, exact: bool, tol) -> bool:
    if exact:
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class TableRow:
    row: str
    lhs: object  # the literal difference
    rhs: object  # the tabulated expression or identity
    status: str
    pearl: int | None = None
    swanson: int | None = None
    note: str | None = None

    def to_json(self) -> dict:
        out = {"row": self.row, "lhs": self.lhs, "rhs": self.rhs, "status": self.status}
        if self.pearl is not None:
            out["pearl_row"] = self.pearl
            out["swanson_row"] = self.swanson
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class DifferenceTable:
    kind: str  # "upper" or "lower"
    rows: tuple
    surviving_extreme: object  # min (upper) or max (lower) over the surviving rows
    all_extreme: object
    ace_endpoint: object

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "rows": [r.to_json() for r in self.rows],
            "surviving_extreme": self.surviving_extreme,
            "all_extreme": self.all_extreme,
            "ace_endpoint": self.ace_endpoint,
        }


def _check_table(law: ObservedLaw, specs, kind: str, tol) -> DifferenceTable:
    if law.K != 2:
        raise WrongK(law.K)
    exact = law.exact
    tol = TAU_IDENTITY if tol is None else tol
    rows = []
    for spec in specs:
        lhs = _d(law, spec.left, spec.right)
        rhs = spec.expression(law)
        if not _close(lhs, rhs, exact, tol):
            raise IdentityViolation(spec.row, lhs, rhs)
        rows.append(TableRow(spec.row, lhs, rhs, spec.status, spec.pearl, spec.swanson,
                             spec.note))
    pick = min if kind == "upper" else max
    surviving = pick(r.lhs for r in rows if r.status == "surviving")
    everything = pick(r.lhs for r in rows)
    if not _close(surviving, everything, exact, tol):
        raise IdentityViolation(f"{kind} redundancy", surviving, everything)
    ace = ace_interval(law).ace
    endpoint = ace.hi if kind == "upper" else ace.lo
    if not _close(surviving, endpoint, exact, tol):
        raise IdentityViolation(f"{kind} ace endpoint", surviving, endpoint)
    return DifferenceTable(kind, tuple(rows), surviving, everything, endpoint)


def check_upper_difference_table(law: ObservedLaw, tol: float | None = None
                                 ) -> DifferenceTable:
    """All 16 (upper on pi1) - (lower on pi0) rows; raises IdentityViolation."""
    return _check_table(law, UPPER_ROWS, "upper", tol)


def check_lower_difference_table(law: ObservedLaw, tol: float | None = None
                                 ) -> DifferenceTable:
    """All 16 (lower on pi1) - (upper on pi0) rows; raises IdentityViolation."""
    return _check_table(law, LOWER_ROWS, "lower", tol)


# --------------------------------------------------------------------------
# free-cell pairings


def _marg(q):
    """P(Y(x0)=0), P(Y(x0)=1), P(Y(x1)=0), P(Y(x1)=1)."""
    return (q[0][0] + q[0][1], q[1][0] + q[1][1], q[0][0] + q[1][0], q[0][1] + q[1][1])


# (lower, upper) -> (kind, description, lhs, rhs) of "lhs <= rhs"
PAIRINGS = {
    ("a", "A"): ("observed_cell", "0 <= p(X=0,Y=0|z)", lambda q, o: (0, o[0][0])),
    ("a", "B"): ("marginal", "P(Y(x1)=1) <= 1 - p(X=1,Y=0|z)",
                 lambda q, o: (_marg(q)[3], 1 - o[1][0])),
    ("a", "C"): ("outcome_cell", "0 <= P(Y(x0)=0,Y(x1)=0)", lambda q, o: (0, q[0][0])),
    ("a", "D"): ("joint", "P(Y(x0)=0,Y(x1)=1) <= p(X=0,Y=0|z) + p(X=1,Y=1|z)",
                 lambda q, o: (q[0][1], o[0][0] + o[1][1])),
    ("b", "A"): ("marginal", "P(Y(x1)=0) <= 1 - p(X=1,Y=1|z)",
                 lambda q, o: (_marg(q)[2], 1 - o[1][1])),
    ("b", "B"): ("observed_cell", "0 <= p(X=0,Y=1|z)", lambda q, o: (0, o[0][1])),
    ("b", "C"): ("joint", "P(Y(x0)=1,Y(x1)=0) <= p(X=0,Y=1|z) + p(X=1,Y=0|z)",
                 lambda q, o: (q[1][0], o[0][1] + o[1][0])),
    ("b", "D"): ("outcome_cell", "0 <= P(Y(x0)=1,Y(x1)=1)", lambda q, o: (0, q[1][1])),
    ("c", "A"): ("outcome_cell", "0 <= P(Y(x0)=0,Y(x1)=1)", lambda q, o: (0, q[0][1])),
    ("c", "B"): ("joint", "P(Y(x0)=1,Y(x1)=1) <= p(X=0,Y=1|z) + p(X=1,Y=1|z)",
                 lambda q, o: (q[1][1], o[0][1] + o[1][1])),
    ("c", "C"): ("marginal", "P(Y(x0)=1) <= 1 - p(X=0,Y=0|z)",
                 lambda q, o: (_marg(q)[1], 1 - o[0][0])),
    ("c", "D"): ("observed_cell", "0 <= p(X=1,Y=1|z)", lambda q, o: (0, o[1][1])),
    ("d", "A"): ("joint", "P(Y(x0)=0,Y(x1)=0) <= p(X=0,Y=0|z) + p(X=1,Y=0|z)",
                 lambda q, o: (q[0][0], o[0][0] + o[1][0])),
    ("d", "B"): ("outcome_cell", "0 <= P(Y(x0)=1,Y(x1)=0)", lambda q, o: (0, q[1][0])),
    ("d", "C"): ("observed_cell", "0 <= p(X=1,Y=0|z)", lambda q, o: (0, o[1][0])),
    ("d", "D"): ("marginal", "P(Y(x0)=0) <= 1 - p(X=0,Y=1|z)",
                 lambda q, o: (_marg(q)[0], 1 - o[0][1])),
}

PAIRING_NOTES = {
    ("d", "A"): "equivalent form uses p(X=1,Y=0|z); a doubled p(X=0,Y=0|z) term is a misprint",
}


@dataclass(frozen=True)
class PairingRow:
    lower: str
    upper: str
    kind: str
    inequality: str
    slack: object  # upper bound minus lower bound on the free cell
    equivalent_slack: object  # rhs - lhs of the equivalent inequality
    pairing_holds: bool
    equivalent_holds: bool
    active: bool
    note: str | None = None

    @property
    def consistent(self) -> bool:
        return self.pairing_holds == self.equivalent_holds

    @property
    def row(self) -> str:
        return f"({self.lower})({self.upper})"

    def to_json(self) -> dict:
        out = {
            "row": self.row,
            "kind": self.kind,
            "inequality": self.inequality,
            "lhs": self.slack,
            "rhs": self.equivalent_slack,
            "pairing_holds": self.pairing_holds,
            "equivalent_holds": self.equivalent_holds,
            "consistent": self.consistent,
            "active": self.active,
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class AppendixAReport:
    level: int
    rows: tuple
    interval_feasible: bool
    membership_holds: bool

    @property
    def mismatches(self) -> list:
        return [r for r in self.rows if not r.consistent]

    @property
    def consistent(self) -> bool:
        return not self.mismatches and self.interval_feasible == self.membership_holds

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "rows": [r.to_json() for r in self.rows],
            "interval_feasible": self.interval_feasible,
            "membership_holds": self.membership_holds,
            "consistent": self.consistent,
        }


def check_appendix_a(joint: OutcomeJoint, law: ObservedLaw, k: int,
                     tol: float | None = None) -> AppendixAReport:
    """Replay the 16 free-cell pairings at level ``k`` (0-based).

    Pairing (lower bound) <= (upper bound) is compared with the inequality it
    is equivalent to; rows whose slack is within tolerance of zero are flagged
    ``active``.  Mismatches are reported, never raised.
    """
    if not 0 <= k < law.K:
        raise InputError(f"level {k} out of range for K={law.K}")
    if law.exact != joint.exact:
        law, joint = law.to_float(), joint.to_float()
    tau = default_tol(law.exact and joint.exact, tol)
    lower, upper = p000_bounds(joint, law, k)
    q, o = joint.q, law.p[k]
    rows = []
    for (lo_key, up_key), (kind, text, sides) in PAIRINGS.items():
        slack = upper[up_key] - lower[lo_key]
        lhs, rhs = sides(q, o)
        eq_slack = rhs - lhs
        rows.append(PairingRow(
            lo_key, up_key, kind, text, slack, eq_slack,
            slack >= -tau, eq_slack >= -tau, abs(slack) <= tau,
            PAIRING_NOTES.get((lo_key, up_key)),
        ))
    feasible = max(lower.values()) <= min(upper.values()) + tau
    member = bool(membership_test(joint, law, tol, levels=[k]))
    return AppendixAReport(k, tuple(rows), feasible, member)


def uniform_joint(exact: bool = True) -> OutcomeJoint:
    v = Fraction(1, 4) if exact else 0.25
    return OutcomeJoint([[v, v], [v, v]])
