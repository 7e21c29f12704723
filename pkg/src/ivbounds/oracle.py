"""Ground truth by linear programming over canonical response types.

A response atom fixes the whole compliance pattern ``(X(z_1), ..., X(z_K))``
and the outcome type ``(Y(x0), Y(x1))``.  Under full independence of Z from
all counterfactuals the observed law is a mixture of atoms, so any quantity
of the outcome types is bounded by an LP over the 4 * 2^K mixture weights.
All programs are solved exactly; float inputs are converted to rationals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import OracleSizeExceeded
from .observed import Interval, ObservedLaw, OutcomeJoint
from .simplex import LinearProgram, Tableau, solve_lp
from .witness import FullM1Law

K_MAX_ORACLE = 6

YTYPES = {"NR": (0, 0), "HE": (0, 1), "HU": (1, 0), "AR": (1, 1)}
# Y(x1) - Y(x0) per outcome type
ACE_COEF = {"NR": 0, "HE": 1, "HU": -1, "AR": 0}

# observed cells kept as equality rows; (1, 1) is implied by the total-mass row
_KEPT_CELLS = ((0, 0), (0, 1), (1, 0))


@dataclass(frozen=True, order=True)
class ResponseAtom:
    compliance: tuple  # X(z) at each level, 0/1
    ytype: str

    @property
    def y0(self) -> int:
        return YTYPES[self.ytype][0]

    @property
    def y1(self) -> int:
        return YTYPES[self.ytype][1]

    def outcome(self, x: int) -> int:
        return YTYPES[self.ytype][x]


@lru_cache(maxsize=None)
def response_atoms(K: int) -> tuple:
    """All 4 * 2^K atoms; compliance patterns in lexicographic order."""
    return tuple(ResponseAtom(c, t) for c in itertools.product((0, 1), repeat=K)
                 for t in YTYPES)


def atom_margin(atom: ResponseAtom, z: int, x: int, y: int) -> int:
    """1 iff the atom lands in observed cell (X=x, Y=y) when Z=z (0-based)."""
    return int(atom.compliance[z] == x and atom.outcome(x) == y)


def _check_size(K: int) -> None:
    if K > K_MAX_ORACLE:
        raise OracleSizeExceeded(K, K_MAX_ORACLE)


def oracle_law(law: ObservedLaw) -> ObservedLaw:
    """Exact copy of ``law`` with every slice summing to exactly one."""
    return law if law.exact else law.to_exact(renormalize=True)


@lru_cache(maxsize=None)
def _structure(K: int, patterns: tuple | None):
    atoms = response_atoms(K)
    if patterns is not None:
        atoms = tuple(a for a in atoms if a.compliance in patterns)
    rows = [[1] * len(atoms)]
    for z in range(K):
        for x, y in _KEPT_CELLS:
            rows.append([atom_margin(a, z, x, y) for a in atoms])
    return atoms, rows


def _rhs(law: ObservedLaw):
    b = [Fraction(1)]
    for z in range(law.K):
        for x, y in _KEPT_CELLS:
            b.append(law.p[z][x][y])
    return b


def objective_vector(atoms, objective: str) -> list[int]:
    if objective == "pi0":
        return [a.y0 for a in atoms]
    if objective == "pi1":
        return [a.y1 for a in atoms]
    if objective == "ace":
        return [ACE_COEF[a.ytype] for a in atoms]
    raise ValueError(f"unknown objective {objective!r}")


def build_lp(law: ObservedLaw, objective: str, sense: str = "min",
             patterns: tuple | None = None) -> LinearProgram:
    """The LP whose optimum is the sharp bound on ``objective``."""
    _check_size(law.K)
    law = oracle_law(law)
    atoms, rows = _structure(law.K, patterns)
    return LinearProgram(objective_vector(atoms, objective), rows, _rhs(law), sense=sense,
                         names=[f"{''.join(map(str, a.compliance))}:{a.ytype}" for a in atoms])


class OracleRegion:
    """Mixture weights compatible with one observed law, solved incrementally."""

    def __init__(self, law: ObservedLaw, patterns: tuple | None = None):
        _check_size(law.K)
        self.law = oracle_law(law)
        self.atoms, rows = _structure(law.K, None if patterns is None else tuple(patterns))
        self.tableau = Tableau.from_equalities(rows, _rhs(self.law), len(self.atoms))

    @property
    def feasible(self) -> bool:
        return self.tableau.feasible

    def bounds(self, objective: str) -> Interval:
        if not self.feasible:
            return Interval(float("inf"), float("-inf"))
        c = objective_vector(self.atoms, objective)
        lo = self.tableau.optimize(c, "min").value
        hi = self.tableau.optimize(c, "max").value
        return Interval(lo, hi)

    def solve(self, objective: str, sense: str):
        return self.tableau.optimize(objective_vector(self.atoms, objective), sense)


def oracle_bounds(law: ObservedLaw, objective: str, patterns=None) -> Interval:
    """Exact [min, max] of ``objective`` (``"pi0"``, ``"pi1"`` or ``"ace"``).

    An empty feasible region gives ``Interval(inf, -inf)``.  ``patterns``
    restricts the atoms to the listed compliance patterns.
    """
    return OracleRegion(law, patterns).bounds(objective)


def oracle_all_bounds(law: ObservedLaw) -> dict:
    """``{"pi0": Interval, "pi1": Interval, "ace": Interval, "feasible": bool}``."""
    region = OracleRegion(law)
    out = {name: region.bounds(name) for name in ("pi0", "pi1", "ace")}
    out["feasible"] = region.feasible
    return out


def oracle_membership(joint: OutcomeJoint, law: ObservedLaw) -> bool:
    """True iff some mixture of atoms reproduces both ``law`` and ``joint``."""
    _check_size(law.K)
    law = oracle_law(law)
    q = [[Fraction(v) for v in row] for row in joint.q]
    if not joint.exact:
        total = sum(q[0]) + sum(q[1])
        q = [[v / total for v in row] for row in q]
    atoms, rows = _structure(law.K, None)
    rows = rows[1:]  # total mass now follows from the outcome-type rows
    b = _rhs(law)[1:]
    for name, (y0, y1) in YTYPES.items():
        rows = rows + [[int(a.ytype == name) for a in atoms]]
        b.append(q[y0][y1])
    lp = LinearProgram([0] * len(atoms), rows, b)
    return solve_lp(lp).optimal


def weights_to_full(atoms, weights, pz) -> FullM1Law:
    """Expand atom weights into a counterfactual law (zero weights dropped)."""
    table = {}
    for a, w in zip(atoms, weights):
        if w:
            table[a.compliance, a.y0, a.y1] = w
    return FullM1Law(len(atoms[0].compliance), tuple(pz), table)


def full_to_weights(full: FullM1Law) -> list:
    """Atom weights (in :func:`response_atoms` order) of a counterfactual law."""
    zero = Fraction(0) if full.exact else 0.0
    inverse = {v: k for k, v in YTYPES.items()}
    lookup = {(xs, inverse[y0, y1]): p for (xs, y0, y1), p in full.atoms.items()}
    return [lookup.get((a.compliance, a.ytype), zero) for a in response_atoms(full.K)]


def weights_feasible(law: ObservedLaw, weights) -> bool:
    """Exact check that nonnegative ``weights`` satisfy every equality row."""
    law = oracle_law(law)
    atoms, rows = _structure(law.K, None)
    w = [Fraction(v) for v in weights]
    if any(v < 0 for v in w):
        return False
    return all(sum(a * v for a, v in zip(row, w)) == rhs
               for row, rhs in zip(rows, _rhs(law)))
