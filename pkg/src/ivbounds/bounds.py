"""Closed-form sharp bounds on P(Y(x0)=1), P(Y(x1)=1) and the ACE.

``g(i, j)`` is the sharp upper bound on ``P(Y(x_i) = j)``: the minimum of the
single-level terms

    p(X=i, Y=j | z) + p(X=1-i | z)

and of the cross-level terms over ordered pairs ``z != z~``

    p(X=i, Y=j | z) + p(X=1-i, Y=0 | z) + p(X=i, Y=j | z~) + p(X=1-i, Y=1 | z~).

The two marginals are variation independent, so the ACE interval is the
difference of the marginal intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import InvalidLaw
from .observed import (
    Interval,
    ObservedLaw,
    OutcomeJoint,
    default_tol,
    validate_law,
)


@dataclass(frozen=True)
class SingleLevel:
    """A natural-bound term evaluated at one instrument level (0-based)."""

    z: int

    def to_json(self, labels=None):
        return {"type": "single", "z": self.z if labels is None else labels[self.z]}


@dataclass(frozen=True)
class LevelPair:
    """A cross-level term using levels ``z`` and ``z_tilde`` (0-based)."""

    z: int
    z_tilde: int

    def to_json(self, labels=None):
        if labels is None:
            return {"type": "pair", "z": self.z, "z_tilde": self.z_tilde}
        return {"type": "pair", "z": labels[self.z], "z_tilde": labels[self.z_tilde]}


def _require_valid(law: ObservedLaw) -> None:
    violations = validate_law(law)
    if violations:
        raise InvalidLaw(violations)


def upper_terms(law: ObservedLaw, i: int, j: int, distinct_pairs: bool = True
                ) -> Iterator[tuple]:
    """Yield ``(value, descriptor)`` for every term whose minimum is g(i, j).

    Order: single-level terms by z, then pairs lexicographically in (z, z~).
    ``distinct_pairs=False`` also yields the redundant z == z~ pairs.
    """
    p = law.p
    o = 1 - i
    for z in range(law.K):
        yield p[z][i][j] + p[z][o][0] + p[z][o][1], SingleLevel(z)
    for z in range(law.K):
        head = p[z][i][j] + p[z][o][0]
        for zt in range(law.K):
            if zt == z and distinct_pairs:
                continue
            yield head + p[zt][i][j] + p[zt][o][1], LevelPair(z, zt)


def _argmin(terms):
    best = None
    for value, desc in terms:
        if best is None or value < best[0]:
            best = (value, desc)
    return best


def marginal_upper(law: ObservedLaw, i: int, j: int, distinct_pairs: bool = True):
    """g(i, j), the sharp upper bound on P(Y(x_i) = j)."""
    _require_valid(law)
    return _argmin(upper_terms(law, i, j, distinct_pairs))[0]


def marginal_upper_argmin(law: ObservedLaw, i: int, j: int, distinct_pairs: bool = True):
    """``(g(i, j), descriptor of the first minimizing term)``."""
    _require_valid(law)
    return _argmin(upper_terms(law, i, j, distinct_pairs))


def marginal_interval(law: ObservedLaw, i: int, distinct_pairs: bool = True) -> Interval:
    """Sharp interval for ``pi_i = P(Y(x_i) = 1)``; may be empty (lo > hi)."""
    _require_valid(law)
    lo = 1 - _argmin(upper_terms(law, i, 0, distinct_pairs))[0]
    hi = _argmin(upper_terms(law, i, 1, distinct_pairs))[0]
    return Interval(lo, hi)


def natural_bounds(law: ObservedLaw, i: int) -> Interval:
    """Single-level bounds ``[max_z p(X=i,Y=1|z), min_z 1 - p(X=i,Y=0|z)]``."""
    _require_valid(law)
    lo = max(law.p[z][i][1] for z in range(law.K))
    hi = min(1 - law.p[z][i][0] for z in range(law.K))
    return Interval(lo, hi)


@dataclass(frozen=True)
class BoundsReport:
    pi0: Interval
    pi1: Interval
    ace: Interval
    feasible: bool
    active: dict = field(default_factory=dict)
    violations: tuple = ()
    labels: tuple | None = None

    def to_json(self) -> dict:
        return {
            "pi0": self.pi0.to_json(),
            "pi1": self.pi1.to_json(),
            "ace": self.ace.to_json(),
            "feasible": self.feasible,
            "active": {k: d.to_json(self.labels) for k, d in sorted(self.active.items())},
            "violations": [dict(v) for v in self.violations],
        }


def _violations(law: ObservedLaw, i: int, tol, distinct_pairs: bool) -> list[dict]:
    """Every (lower term, upper term) pair that crosses, for pi_i."""
    lowers = [(1 - v, d) for v, d in upper_terms(law, i, 0, distinct_pairs)]
    uppers = list(upper_terms(law, i, 1, distinct_pairs))
    out = []
    for lv, ld in lowers:
        for uv, ud in uppers:
            if lv > uv + tol:
                out.append({
                    "quantity": f"pi{i}",
                    "lower_term": ld.to_json(law.labels),
                    "upper_term": ud.to_json(law.labels),
                    "gap": lv - uv,
                })
    return out


def ace_interval(law: ObservedLaw, tol: float | None = None,
                 distinct_pairs: bool = True) -> BoundsReport:
    """Sharp bounds on pi0, pi1 and ACE = pi1 - pi0, with the active terms.

    An IV-infeasible law still gets a full report: its empty intervals and the
    crossing term pairs are the evidence of the violation.
    """
    _require_valid(law)
    tau = default_tol(law.exact, tol)
    intervals = {}
    active = {}
    for i in (0, 1):
        g0, d0 = _argmin(upper_terms(law, i, 0, distinct_pairs))
        g1, d1 = _argmin(upper_terms(law, i, 1, distinct_pairs))
        intervals[i] = Interval(1 - g0, g1)
        active[f"pi{i}.lo"] = d0
        active[f"pi{i}.hi"] = d1
    pi0, pi1 = intervals[0], intervals[1]
    ace = Interval(pi1.lo - pi0.hi, pi1.hi - pi0.lo)
    feasible = pi0.is_feasible(tol) and pi1.is_feasible(tol)
    violations = []
    if not feasible:
        for i in (0, 1):
            violations.extend(_violations(law, i, tau, distinct_pairs))
    return BoundsReport(pi0, pi1, ace, feasible, active, tuple(violations), law.labels)


# --------------------------------------------------------------------------
# membership


@dataclass(frozen=True)
class InequalityViolation:
    """One failed characterizing inequality at level ``level`` (a label).

    ``family`` is ``"marginal"`` (indices = (i, y)) for
    ``P(Y(x_i)=y) <= p(X=i,Y=y|z) + p(X=1-i|z)`` or ``"joint"``
    (indices = (y, y~)) for ``q[y][y~] <= p(X=0,Y=y|z) + p(X=1,Y=y~|z)``.
    """

    family: str
    indices: tuple
    level: object
    lhs: object
    rhs: object

    @property
    def residual(self):
        return self.lhs - self.rhs

    def to_json(self):
        return {"family": self.family, "indices": list(self.indices), "z": self.level,
                "lhs": self.lhs, "rhs": self.rhs, "residual": self.residual}


@dataclass(frozen=True)
class MembershipResult:
    holds: bool
    violations: tuple = ()

    def __bool__(self):
        return self.holds

    def to_json(self):
        return {"holds": self.holds, "violations": [v.to_json() for v in self.violations]}


def characterizing_inequalities(joint: OutcomeJoint, law: ObservedLaw, z: int):
    """Yield ``(family, indices, lhs, rhs)`` for the 8 inequalities at level z."""
    q = joint.q
    p = law.p[z]
    marg = {(0, 0): q[0][0] + q[0][1], (0, 1): q[1][0] + q[1][1],
            (1, 0): q[0][0] + q[1][0], (1, 1): q[0][1] + q[1][1]}
    for i in (0, 1):
        for y in (0, 1):
            yield "marginal", (i, y), marg[i, y], p[i][y] + p[1 - i][0] + p[1 - i][1]
    for y in (0, 1):
        for yt in (0, 1):
            yield "joint", (y, yt), q[y][yt], p[0][y] + p[1][yt]


def membership_test(joint: OutcomeJoint, law: ObservedLaw, tol: float | None = None,
                    levels=None) -> MembershipResult:
    """Check all 8K characterizing inequalities; the result lists every failure."""
    _require_valid(law)
    tau = default_tol(law.exact and joint.exact, tol)
    failed = []
    for z in range(law.K) if levels is None else levels:
        for family, idx, lhs, rhs in characterizing_inequalities(joint, law, z):
            if lhs > rhs + tau:
                failed.append(InequalityViolation(family, idx, law.labels[z], lhs, rhs))
    return MembershipResult(not failed, tuple(failed))
