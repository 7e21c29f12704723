"""Hypothesis strategies: exact laws built from small integer weights."""

from fractions import Fraction

from hypothesis import strategies as st

from ivbounds.observed import ObservedLaw, OutcomeJoint
from ivbounds.oracle import response_atoms
from ivbounds.witness import FullM1Law, phi


def _simplex(weights):
    total = sum(weights)
    return [Fraction(w, total) for w in weights]


def positive_weights(n, hi=20):
    return st.lists(st.integers(0, hi), min_size=n, max_size=n).filter(lambda w: sum(w) > 0)


@st.composite
def observed_laws(draw, k_min=1, k_max=4, exact=True):
    """Arbitrary normalized laws; may violate the instrumental inequalities."""
    K = draw(st.integers(k_min, k_max))
    slices = [_simplex(draw(positive_weights(4))) for _ in range(K)]
    p = [[[s[0], s[1]], [s[2], s[3]]] for s in slices]
    law = ObservedLaw(p)
    return law if exact else law.to_float()


@st.composite
def full_laws(draw, k_min=1, k_max=3):
    K = draw(st.integers(k_min, k_max))
    atoms = response_atoms(K)
    # sparse supports keep the draws small and exercise zero cells
    idx = draw(st.lists(st.integers(0, len(atoms) - 1), min_size=1, max_size=6))
    w = draw(st.lists(st.integers(1, 9), min_size=len(idx), max_size=len(idx)))
    table = {}
    for i, v in zip(idx, w):
        a = atoms[i]
        key = (a.compliance, a.y0, a.y1)
        table[key] = table.get(key, 0) + v
    total = sum(table.values())
    table = {k: Fraction(v, total) for k, v in table.items()}
    pz = tuple(_simplex(draw(st.lists(st.integers(1, 5), min_size=K, max_size=K))))
    return FullM1Law(K, pz, table)


@st.composite
def feasible_laws(draw, k_min=1, k_max=3):
    return phi(draw(full_laws(k_min, k_max)))[1]


@st.composite
def outcome_joints(draw):
    s = _simplex(draw(positive_weights(4)))
    return OutcomeJoint([[s[0], s[1]], [s[2], s[3]]])
