"""Observed conditional laws P(X, Y | Z), potential-outcome joints and intervals.

Every table holds either floats or ``fractions.Fraction`` values, never a mix.
A table made only of rationals is in *exact* mode and every tolerance used on
it is zero; otherwise the floating tolerances ``TAU_SUM`` / ``TAU_FEAS`` apply.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DuplicateCell, EmptyLevel, InfeasibleTriple, InputError

Number = Union[float, Fraction]

TAU_SUM = 1e-9
TAU_FEAS = 1e-9

CELLS = ((0, 0), (0, 1), (1, 0), (1, 1))


def is_exact_value(v) -> bool:
    return isinstance(v, (Fraction, int)) and not isinstance(v, bool)


def all_exact(values: Iterable) -> bool:
    return all(is_exact_value(v) for v in values)


def _coerce(values: Sequence, exact: bool) -> list:
    if exact:
        return [Fraction(v) for v in values]
    return [float(v) for v in values]


def parse_number(v, exact: bool = False) -> Number:
    """Parse a JSON/CSV scalar; strings may be ``"num/den"`` rationals."""
    if isinstance(v, bool) or v is None:
        raise InputError(f"expected a number, got {v!r}")
    if isinstance(v, str):
        try:
            r = Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse number {v!r}") from exc
        return r if exact else float(r)
    if isinstance(v, (int, Fraction)):
        return Fraction(v) if exact else float(v)
    if isinstance(v, float):
        return Fraction(v) if exact else v
    raise InputError(f"expected a number, got {v!r}")


def format_number(v) -> Union[str, float, int]:
    """JSON-friendly value: rationals become ``"num/den"`` strings."""
    if isinstance(v, Fraction):
        return str(v)
    return v


# --------------------------------------------------------------------------
# violations


@dataclass(frozen=True)
class SumViolation:
    level: object
    residual: Number

    def __str__(self):
        return f"level {self.level}: cells sum to 1 - ({self.residual})"

    def to_json(self):
        return {"kind": "sum", "level": self.level, "residual": self.residual}


@dataclass(frozen=True)
class RangeViolation:
    level: object
    x: int
    y: int
    value: Number

    def __str__(self):
        return f"level {self.level}: p[x={self.x}][y={self.y}]={self.value} outside [0, 1]"

    def to_json(self):
        return {"kind": "range", "level": self.level, "x": self.x, "y": self.y,
                "value": self.value}


@dataclass(frozen=True)
class MarginalViolation:
    """A defect in the optional P(Z) vector."""

    kind: str  # "pz-sum", "pz-range", "pz-zero"
    level: object
    residual: Number

    def __str__(self):
        return f"P(Z): {self.kind} at level {self.level} (residual {self.residual})"

    def to_json(self):
        return {"kind": self.kind, "level": self.level, "residual": self.residual}


# --------------------------------------------------------------------------
# observed law


@dataclass(frozen=True)
class ObservedLaw:
    """The K conditional tables ``p[z][x][y] = P(X=x, Y=y | Z=z)``.

    ``z`` is a 0-based position; ``labels[z]`` is the caller's name for it.
    Construction checks shapes only.  Use :func:`validate_law` for the
    probabilistic invariants.
    """

    p: tuple
    pz: tuple | None = None
    labels: tuple | None = None

    def __post_init__(self):
        rows = list(self.p)
        if not rows:
            raise InputError("observed law needs at least one instrument level")
        flat = []
        for z, slice_ in enumerate(rows):
            if len(slice_) != 2 or any(len(r) != 2 for r in slice_):
                raise InputError(f"level {z}: expected a 2x2 table indexed [x][y]")
            flat.extend(slice_[0])
            flat.extend(slice_[1])
        pz = None if self.pz is None else list(self.pz)
        if pz is not None and len(pz) != len(rows):
            raise InputError(f"pz has {len(pz)} entries for K={len(rows)} levels")
        exact = all_exact(flat + (pz or []))
        flat = _coerce(flat, exact)
        p = tuple(
            ((flat[4 * z], flat[4 * z + 1]), (flat[4 * z + 2], flat[4 * z + 3]))
            for z in range(len(rows))
        )
        object.__setattr__(self, "p", p)
        if pz is not None:
            object.__setattr__(self, "pz", tuple(_coerce(pz, exact)))
        labels = self.labels
        if labels is None:
            labels = tuple(range(1, len(rows) + 1))
        elif len(labels) != len(rows):
            raise InputError(f"{len(labels)} labels for K={len(rows)} levels")
        object.__setattr__(self, "labels", tuple(labels))

    @property
    def K(self) -> int:
        return len(self.p)

    @property
    def exact(self) -> bool:
        return isinstance(self.p[0][0][0], Fraction)

    def cell(self, z: int, x: int, y: int) -> Number:
        return self.p[z][x][y]

    def px(self, z: int, x: int) -> Number:
        """P(X=x | Z=z)."""
        return self.p[z][x][0] + self.p[z][x][1]

    def py(self, z: int, y: int) -> Number:
        """P(Y=y | Z=z)."""
        return self.p[z][0][y] + self.p[z][1][y]

    def to_exact(self, renormalize: bool = False) -> "ObservedLaw":
        """Rational copy by exact binary-fraction conversion.

        With ``renormalize`` each slice (and P(Z)) is divided by its exact sum,
        so a float law whose slices sum to 1 only up to rounding becomes an
        exactly normalized rational law.
        """
        p = [[[Fraction(v) for v in row] for row in s] for s in self.p]
        pz = None if self.pz is None else [Fraction(v) for v in self.pz]
        if renormalize:
            for s in p:
                total = sum(s[0]) + sum(s[1])
                if total > 0:
                    for row in s:
                        row[:] = [v / total for v in row]
            if pz is not None and sum(pz) > 0:
                total = sum(pz)
                pz = [v / total for v in pz]
        return ObservedLaw(p, pz, self.labels)

    def to_float(self) -> "ObservedLaw":
        p = [[[float(v) for v in row] for row in s] for s in self.p]
        pz = None if self.pz is None else [float(v) for v in self.pz]
        return ObservedLaw(p, pz, self.labels)

    def permuted(self, order: Sequence[int]) -> "ObservedLaw":
        """Reorder levels: new level ``i`` is old level ``order[i]``."""
        p = [self.p[z] for z in order]
        pz = None if self.pz is None else [self.pz[z] for z in order]
        return ObservedLaw(p, pz, tuple(self.labels[z] for z in order))

    def with_pz(self, pz) -> "ObservedLaw":
        return ObservedLaw(self.p, pz, self.labels)

    def to_json(self) -> dict:
        out = {"K": self.K, "p": [[list(r) for r in s] for s in self.p]}
        if self.pz is not None:
            out["pz"] = list(self.pz)
        if self.labels != tuple(range(1, self.K + 1)):
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, obj: dict, exact: bool = False) -> "ObservedLaw":
        if not isinstance(obj, dict) or "p" not in obj:
            raise InputError("observed law JSON must be an object with key 'p'")
        try:
            p = [[[parse_number(v, exact) for v in row] for row in s] for s in obj["p"]]
        except TypeError as exc:
            raise InputError("'p' must be a K x 2 x 2 nested array") from exc
        if "K" in obj and obj["K"] != len(p):
            raise InputError(f"'K'={obj['K']} but 'p' has {len(p)} levels")
        pz = obj.get("pz")
        if pz is not None:
            pz = [parse_number(v, exact) for v in pz]
        labels = obj.get("labels")
        return cls(p, pz, None if labels is None else tuple(labels))


def default_tol(exact: bool, tol: float | None = None):
    if tol is not None:
        return Fraction(tol) if exact else tol
    return 0 if exact else TAU_FEAS


def validate_law(law: ObservedLaw, tol: float | None = None) -> list:
    """Every invariant violation of ``law`` (empty list when valid)."""
    tau = 0 if law.exact and tol is None else (TAU_SUM if tol is None else tol)
    out = []
    for z, s in enumerate(law.p):
        label = law.labels[z]
        for x, y in CELLS:
            v = s[x][y]
            if isinstance(v, float) and math.isnan(v) or v < -tau or v > 1 + tau:
                out.append(RangeViolation(label, x, y, v))
        total = s[0][0] + s[0][1] + s[1][0] + s[1][1]
        if abs(total - 1) > tau or total != total:
            out.append(SumViolation(label, abs(1 - total)))
    if law.pz is not None:
        for z, v in enumerate(law.pz):
            label = law.labels[z]
            if v < -tau or v > 1 + tau or v != v:
                out.append(MarginalViolation("pz-range", label, v))
            elif v <= 0:
                out.append(MarginalViolation("pz-zero", label, v))
        total = sum(law.pz)
        if abs(total - 1) > tau:
            out.append(MarginalViolation("pz-sum", None, abs(1 - total)))
    return out


# --------------------------------------------------------------------------
# outcome joint


@dataclass(frozen=True)
class OutcomeJoint:
    """``q[y0][y1] = P(Y(x0)=y0, Y(x1)=y1)``.

    Cells by response type: NR=q[0][0], HE=q[0][1], HU=q[1][0], AR=q[1][1].
    """

    q: tuple

    def __post_init__(self):
        rows = list(self.q)
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise InputError("outcome joint must be a 2x2 table indexed [y0][y1]")
        flat = [rows[0][0], rows[0][1], rows[1][0], rows[1][1]]
        flat = _coerce(flat, all_exact(flat))
        object.__setattr__(self, "q", ((flat[0], flat[1]), (flat[2], flat[3])))

    @property
    def exact(self) -> bool:
        return isinstance(self.q[0][0], Fraction)

    @property
    def pi0(self) -> Number:
        return self.q[1][0] + self.q[1][1]

    @property
    def pi1(self) -> Number:
        return self.q[0][1] + self.q[1][1]

    @property
    def pi_ar(self) -> Number:
        return self.q[1][1]

    @property
    def ace(self) -> Number:
        return self.q[0][1] - self.q[1][0]

    def to_exact(self) -> "OutcomeJoint":
        return OutcomeJoint([[Fraction(v) for v in r] for r in self.q])

    def to_float(self) -> "OutcomeJoint":
        return OutcomeJoint([[float(v) for v in r] for r in self.q])

    def to_json(self) -> dict:
        return {"q": [list(r) for r in self.q], "pi0": self.pi0, "pi1": self.pi1,
                "pi_ar": self.pi_ar}


def validate_joint(joint: OutcomeJoint, tol: float | None = None) -> list[str]:
    tau = 0 if joint.exact and tol is None else (TAU_SUM if tol is None else tol)
    out = []
    for y0, y1 in CELLS:
        v = joint.q[y0][y1]
        if v < -tau or v != v:
            out.append(f"q[{y0}][{y1}]={v} is negative")
    total = sum(joint.q[0]) + sum(joint.q[1])
    if abs(total - 1) > tau:
        out.append(f"cells sum to {total}")
    return out


def normalize_outcome_joint(pi0, pi1, pi_ar, tol: float | None = None) -> OutcomeJoint:
    """Build the outcome joint with the given marginals and AR mass.

    Cells within ``tol`` below zero are clamped and the table renormalized.
    """
    exact = all_exact((pi0, pi1, pi_ar))
    if exact:
        pi0, pi1, pi_ar = Fraction(pi0), Fraction(pi1), Fraction(pi_ar)
    else:
        pi0, pi1, pi_ar = float(pi0), float(pi1), float(pi_ar)
    tau = default_tol(exact, tol)
    cells = {
        (1, 1): pi_ar,
        (1, 0): pi0 - pi_ar,
        (0, 1): pi1 - pi_ar,
        (0, 0): 1 - pi0 - pi1 + pi_ar,
    }
    bad = [(c, v) for c, v in sorted(cells.items()) if v < -tau or v != v]
    if bad:
        raise InfeasibleTriple(bad)
    if any(v < 0 for v in cells.values()):
        cells = {c: max(v, 0 * v) for c, v in cells.items()}
        total = sum(cells.values())
        cells = {c: v / total for c, v in cells.items()}
    return OutcomeJoint([[cells[0, 0], cells[0, 1]], [cells[1, 0], cells[1, 1]]])


# --------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class Interval:
    """A closed interval; ``lo > hi`` is allowed and means *empty*.

    An empty feasible region from an LP is ``[+inf, -inf]``.
    """

    lo: Number
    hi: Number

    @property
    def exact(self) -> bool:
        return is_exact_value(self.lo) and is_exact_value(self.hi)

    def is_feasible(self, tol: float | None = None) -> bool:
        return self.lo <= self.hi + default_tol(self.exact, tol)

    @property
    def feasible(self) -> bool:
        return self.is_feasible()

    @property
    def width(self) -> Number:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Number:
        return (self.lo + self.hi) / 2

    def contains(self, value, tol: float | None = None) -> bool:
        tau = default_tol(self.exact and is_exact_value(value), tol)
        return self.lo - tau <= value <= self.hi + tau

    def to_exact(self) -> "Interval":
        return Interval(Fraction(self.lo), Fraction(self.hi))

    def to_float(self) -> "Interval":
        return Interval(float(self.lo), float(self.hi))

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}


# --------------------------------------------------------------------------
# counts


@dataclass(frozen=True)
class CountRecord:
    z: object
    x: int
    y: int
    n: int


def _as_binary(v, name):
    try:
        b = int(v)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} must be 0 or 1, got {v!r}") from exc
    if b not in (0, 1) or (isinstance(v, float) and v != b):
        raise InputError(f"{name} must be 0 or 1, got {v!r}")
    return b


def _as_count(v):
    try:
        n = int(v)
    except (TypeError, ValueError) as exc:
        raise InputError(f"count must be a nonnegative integer, got {v!r}") from exc
    if n < 0 or (isinstance(v, float) and v != n) or isinstance(v, bool):
        raise InputError(f"count must be a nonnegative integer, got {v!r}")
    return n


def make_counts(rows: Iterable) -> list[CountRecord]:
    """Records from ``(z, x, y, n)`` tuples or ``{"z":..,"x":..,"y":..,"n":..}`` dicts."""
    out = []
    for row in rows:
        if isinstance(row, CountRecord):
            z, x, y, n = row.z, row.x, row.y, row.n
        elif isinstance(row, dict):
            try:
                z, x, y, n = row["z"], row["x"], row["y"], row["n"]
            except KeyError as exc:
                raise InputError(f"count record missing key {exc}") from exc
        else:
            try:
                z, x, y, n = row
            except (TypeError, ValueError) as exc:
                raise InputError(f"count record must have 4 fields: {row!r}") from exc
        out.append(CountRecord(z, _as_binary(x, "x"), _as_binary(y, "y"), _as_count(n)))
    return out


def ingest_counts(counts: Iterable, exact: bool = False) -> ObservedLaw:
    """Maximum-likelihood law from cell counts; levels keep first-seen order."""
    records = make_counts(counts)
    labels: list = []
    table: dict = {}
    for r in records:
        if r.z not in table:
            labels.append(r.z)
            table[r.z] = {}
        if (r.x, r.y) in table[r.z]:
            raise DuplicateCell(r.z, r.x, r.y)
        table[r.z][r.x, r.y] = r.n
    if not labels:
        raise InputError("count table is empty")
    totals = {z: sum(table[z].values()) for z in labels}
    for z in labels:
        if totals[z] == 0:
            raise EmptyLevel(z)
    grand = sum(totals.values())

    def ratio(a, b):
        return Fraction(a, b) if exact else a / b

    p = [
        [[ratio(table[z].get((x, y), 0), totals[z]) for y in (0, 1)] for x in (0, 1)]
        for z in labels
    ]
    pz = [ratio(totals[z], grand) for z in labels]
    return ObservedLaw(p, pz, tuple(labels))


def read_counts_csv(text: str) -> list[CountRecord]:
    reader = csv.DictReader(io.StringIO(text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    if sorted(header) != ["n", "x", "y", "z"]:
        raise InputError(f"CSV header must be z,x,y,n; got {','.join(header)}")
    rows = []
    for raw in reader:
        row = {k.strip(): (v.strip() if isinstance(v, str) else v) for k, v in raw.items()}
        if any(v in (None, "") for v in row.values()):
            raise InputError(f"incomplete CSV row: {raw}")
        z = row["z"]
        rows.append({"z": int(z) if z.lstrip("-").isdigit() else z,
                     "x": row["x"], "y": row["y"], "n": row["n"]})
    return make_counts(rows)


def load_law(text: str, fmt: str | None = None, exact: bool = False) -> ObservedLaw:
    """Parse a count table (CSV or JSON array) or a law JSON object.

    The schema is auto-detected unless ``fmt`` is ``"json"`` or ``"csv"``.  In
    exact mode JSON decimal literals are read as exact decimal rationals.
    """
    stripped = text.lstrip()
    if fmt is None:
        fmt = "json" if stripped[:1] in ("{", "[") else "csv"
    if fmt == "csv":
        return ingest_counts(read_counts_csv(text), exact=exact)
    if fmt != "json":
        raise InputError(f"unknown input format {fmt!r}")
    try:
        obj = json.loads(text, parse_float=Fraction if exact else float)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc.msg} at line {exc.lineno}") from exc
    if isinstance(obj, list):
        return ingest_counts(obj, exact=exact)
    return ObservedLaw.from_json(obj, exact=exact)
