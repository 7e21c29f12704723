"""Explicit counterfactual laws that realize a given (outcome joint, observed law).

For each instrument level k a trivariate law over (X(z_k), Y(x0), Y(x1)) is
pinned down by the outcome joint, the four observed cells of level k and one
free cell ``t = P(X(z_k)=0, Y(x0)=0, Y(x1)=0)``.  Any ``t`` inside
:func:`p000_interval` gives a valid table.  The K tables share their outcome
margin and are glued into one law in which the X(z_k) are conditionally
independent given (Y(x0), Y(x1)); an independent P(Z) completes the model.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .bounds import ace_interval, membership_test
from .errors import (
    InfeasibleLaw,
    InputError,
    MarginMismatch,
    MembershipError,
    P000OutOfRange,
    SizeExceeded,
)
from .observed import (
    CELLS,
    Interval,
    ObservedLaw,
    OutcomeJoint,
    default_tol,
    normalize_outcome_joint,
)

DENSE_MAX_K = 12
TAU_ROUND = 1e-12


@dataclass(frozen=True)
class TriJoint:
    """``r[j][y0][y1] = P(X(z_k)=j, Y(x0)=y0, Y(x1)=y1)`` for one level ``k``."""

    r: tuple
    level: int

    def margin(self):
        """The (Y(x0), Y(x1)) margin as a nested tuple."""
        r = self.r
        return tuple(tuple(r[0][a][b] + r[1][a][b] for b in (0, 1)) for a in (0, 1))

    def cells(self):
        for j in (0, 1):
            for y0, y1 in CELLS:
                yield (j, y0, y1), self.r[j][y0][y1]

    def clamped(self) -> "TriJoint":
        r = tuple(tuple(tuple(max(v, 0 * v) for v in row) for row in plane)
                  for plane in self.r)
        return TriJoint(r, self.level)


@dataclass(frozen=True)
class FullM1Law:
    """Law of (Z, X(z_1..z_K), Y(x0), Y(x1)) with Z independent of the rest.

    ``atoms`` maps ``(x_of_z, y0, y1)`` (``x_of_z`` a K-tuple of 0/1) to its
    probability; absent atoms have probability zero.
    """

    K: int
    pz: tuple
    atoms: dict

    def items(self):
        return sorted(self.atoms.items())

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.atoms.values())

    def total(self):
        return sum(self.atoms.values())

    def dense(self) -> list:
        """Probabilities for all 2^(K+2) assignments in lexicographic order."""
        if self.K > DENSE_MAX_K:
            raise SizeExceeded(f"dense export supports K <= {DENSE_MAX_K}")
        zero = Fraction(0) if self.exact else 0.0
        out = []
        for xs in itertools.product((0, 1), repeat=self.K):
            for y0, y1 in CELLS:
                out.append(self.atoms.get((xs, y0, y1), zero))
        return out

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "pz": list(self.pz),
            "atoms": [{"x_of_z": list(xs), "y0": y0, "y1": y1, "p": v}
                      for (xs, y0, y1), v in self.items()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FullM1Law":
        atoms = {}
        for a in obj["atoms"]:
            v = a["p"]
            v = Fraction(v) if isinstance(v, str) else v
            atoms[tuple(a["x_of_z"]), a["y0"], a["y1"]] = v
        pz = tuple(Fraction(v) if isinstance(v, str) else v for v in obj["pz"])
        return cls(obj["K"], pz, atoms)


def _obs(law: ObservedLaw, k: int):
    return law.p[k]


def p000_bounds(joint: OutcomeJoint, law: ObservedLaw, k: int):
    """The four lower bounds (a)-(d) and four upper bounds (A)-(D) on the free cell."""
    q = joint.q
    o = _obs(law, k)
    y1_zero = q[0][0] + q[1][0]  # P(Y(x1)=0)
    lower = {
        "a": 0 * q[0][0],
        "b": y1_zero - o[0][1] - o[1][0],
        "c": o[0][0] - q[0][1],
        "d": q[0][0] - o[1][0],
    }
    upper = {
        "A": o[0][0],
        "B": y1_zero - o[1][0],
        "C": q[0][0],
        "D": o[0][0] + o[1][1] - q[0][1],
    }
    return lower, upper


def p000_interval(joint: OutcomeJoint, law: ObservedLaw, k: int) -> Interval:
    """Range of ``P(X(z_k)=0, Y(x0)=0, Y(x1)=0)`` compatible with both inputs."""
    lower, upper = p000_bounds(joint, law, k)
    return Interval(max(lower.values()), min(upper.values()))


def build_trijoint(joint: OutcomeJoint, law: ObservedLaw, k: int, p000,
                   tol: float | None = None) -> TriJoint:
    """The eight cells of P(X(z_k), Y(x0), Y(x1)) given the free cell ``p000``."""
    iv = p000_interval(joint, law, k)
    exact = law.exact and joint.exact and isinstance(p000, (int, Fraction))
    tau = default_tol(exact, tol)
    if not (iv.lo - tau <= p000 <= iv.hi + tau):
        raise P000OutOfRange(p000, iv)
    q = joint.q
    o = _obs(law, k)
    t = Fraction(p000) if exact else p000
    y1_zero = q[0][0] + q[1][0]
    r = (
        (
            (t, o[0][0] - t),
            (y1_zero - o[1][0] - t, o[0][1] + o[1][0] - y1_zero + t),
        ),
        (
            (q[0][0] - t, q[0][1] - o[0][0] + t),
            (o[1][0] - q[0][0] + t, o[0][0] + o[1][1] - q[0][1] - t),
        ),
    )
    return TriJoint(r, k)


def combine_trijoints(parts: Sequence[TriJoint], tol: float | None = None) -> dict:
    """Glue per-level tables that share their (Y(x0), Y(x1)) margin.

    Returns ``{(x_of_z, y0, y1): prob}``, the product of the parts divided by
    the shared margin to the power K-1 (zero where that margin is zero).
    """
    if not parts:
        raise InputError("need at least one per-level table")
    exact = all(isinstance(v, Fraction) for part in parts for _, v in part.cells())
    tau = default_tol(exact, tol)
    base = parts[0].margin()
    for idx, part in enumerate(parts[1:], start=1):
        m = part.margin()
        worst = max(((abs(m[a][b] - base[a][b]), (a, b)) for a, b in CELLS))
        if worst[0] > tau:
            raise MarginMismatch(idx, worst[1], worst[0])
    K = len(parts)
    out = {}
    for y0, y1 in CELLS:
        denom = base[y0][y1]
        if denom <= 0:
            continue
        choices = [[(j, part.r[j][y0][y1]) for j in (0, 1) if part.r[j][y0][y1] > 0]
                   for part in parts]
        scale = denom ** (K - 1)
        for combo in itertools.product(*choices):
            value = 1
            for _, v in combo:
                value = value * v
            value = value / scale
            if value > 0:
                out[tuple(j for j, _ in combo), y0, y1] = value
    return out


def phi(full: FullM1Law) -> tuple[OutcomeJoint, ObservedLaw]:
    """Outcome margin and the observed conditionals implied by consistency."""
    zero = Fraction(0) if full.exact else 0.0
    q = [[zero, zero], [zero, zero]]
    p = [[[zero, zero], [zero, zero]] for _ in range(full.K)]
    for (xs, y0, y1), v in full.atoms.items():
        q[y0][y1] += v
        ys = (y0, y1)
        for z, j in enumerate(xs):
            p[z][j][ys[j]] += v
    return OutcomeJoint(q), ObservedLaw(p, full.pz)


# --------------------------------------------------------------------------
# choosing the outcome joint


@dataclass(frozen=True)
class Explicit:
    """Request a specific (pi0, pi1, pi_ar) point."""

    pi0: object
    pi1: object
    pi_ar: object


PickMode = Union[str, Explicit]


def pi_ar_bracket(law: ObservedLaw, pi0, pi1) -> Interval:
    """Admissible range of P(Y(x0)=1, Y(x1)=1) given both marginals."""
    p = law.p
    lows = [pi0 + pi1 - 1, 0 * pi0]
    highs = [pi0, pi1]
    for z in range(law.K):
        lows.append(pi0 - p[z][0][1] - p[z][1][0])
        lows.append(pi1 - p[z][1][1] - p[z][0][0])
        highs.append(pi0 + pi1 + law.py(z, 0) - 1)
        highs.append(law.py(z, 1))
    return Interval(max(lows), min(highs))


def pick_outcome_joint(law: ObservedLaw, mode: PickMode = "midpoint",
                       tol: float | None = None) -> OutcomeJoint:
    """An outcome joint compatible with ``law``.

    ``mode`` is ``"midpoint"`` (interval midpoints), ``"maximize_ace"`` /
    ``"minimize_ace"`` (the endpoint pair attaining that ACE extreme) or an
    :class:`Explicit` point.  The AR mass is the midpoint of its bracket.
    """
    report = ace_interval(law, tol)
    if not report.feasible:
        raise InfeasibleLaw(report)
    if isinstance(mode, Explicit):
        joint = normalize_outcome_joint(mode.pi0, mode.pi1, mode.pi_ar, tol)
        if law.exact and not joint.exact:
            joint = joint.to_exact()
        result = membership_test(joint, law, tol)
        if not result:
            raise MembershipError(result.violations)
        return joint
    if mode == "midpoint":
        pi0, pi1 = report.pi0.midpoint, report.pi1.midpoint
    elif mode == "maximize_ace":
        pi0, pi1 = report.pi0.lo, report.pi1.hi
    elif mode == "minimize_ace":
        pi0, pi1 = report.pi0.hi, report.pi1.lo
    else:
        raise InputError(f"unknown outcome-joint mode {mode!r}")
    pi_ar = pi_ar_bracket(law, pi0, pi1).midpoint
    return normalize_outcome_joint(pi0, pi1, pi_ar, tol)


_RULES = ("midpoint", "lower", "upper")


def construct_witness(law: ObservedLaw, joint: OutcomeJoint, p000_rule: str = "midpoint",
                      tol: float | None = None) -> FullM1Law:
    """A model-(i) law whose image under :func:`phi` is ``(joint, law)``.

    Without ``law.pz`` a uniform P(Z) is attached.
    """
    if p000_rule not in _RULES:
        raise InputError(f"p000 rule must be one of {_RULES}, got {p000_rule!r}")
    if law.exact != joint.exact:
        law, joint = law.to_float(), joint.to_float()
    result = membership_test(joint, law, tol)
    if not result:
        raise MembershipError(result.violations)
    parts = []
    for k in range(law.K):
        iv = p000_interval(joint, law, k)
        if p000_rule == "lower":
            t = iv.lo
        elif p000_rule == "upper":
            t = iv.hi
        else:
            t = iv.midpoint
        parts.append(build_trijoint(joint, law, k, t, tol).clamped())
    atoms = combine_trijoints(parts, tol)
    if law.pz is not None:
        pz = law.pz
    elif law.exact:
        pz = tuple(Fraction(1, law.K) for _ in range(law.K))
    else:
        pz = tuple(1.0 / law.K for _ in range(law.K))
    return FullM1Law(law.K, tuple(pz), atoms)


def round_trip_residual(full: FullM1Law, joint: OutcomeJoint, law: ObservedLaw):
    """Largest absolute cell difference between ``phi(full)`` and the inputs."""
    j2, l2 = phi(full)
    diffs = [abs(j2.q[a][b] - joint.q[a][b]) for a, b in CELLS]
    for z in range(law.K):
        diffs.extend(abs(l2.p[z][x][y] - law.p[z][x][y]) for x, y in CELLS)
    return max(diffs)


def witness_ace(full: FullM1Law):
    """ACE of a counterfactual law: HE mass minus HU mass."""
    he = sum(v for (_, y0, y1), v in full.atoms.items() if (y0, y1) == (0, 1))
    hu = sum(v for (_, y0, y1), v in full.atoms.items() if (y0, y1) == (1, 0))
    return he - hu
