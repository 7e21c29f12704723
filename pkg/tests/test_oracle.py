from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import uniform_joint
from ivbounds.bounds import ace_interval, membership_test
from ivbounds.errors import InputError, InternalUnbounded, OracleSizeExceeded
from ivbounds.observed import ObservedLaw, OutcomeJoint
from ivbounds.oracle import (
    K_MAX_ORACLE,
    OracleRegion,
    ResponseAtom,
    atom_margin,
    build_lp,
    oracle_all_bounds,
    oracle_bounds,
    oracle_membership,
    response_atoms,
    weights_feasible,
    weights_to_full,
)
from ivbounds.simplex import LinearProgram, Tableau, solve_lp
from ivbounds.witness import phi
from strategies import feasible_laws, observed_laws, outcome_joints

# -- simplex -------------------------------------------------------------------


def test_simplex_vertex():
    res = solve_lp(LinearProgram([1, 0], [[1, 1]], [1], sense="max"))
    assert res.optimal and res.value == 1 and res.weights == (1, 0)


def test_simplex_contradiction():
    res = solve_lp(LinearProgram([1], [[1], [1]], [1, 0]))
    assert res.status == "infeasible"


def test_simplex_inequality_rows():
    # max x + y  s.t.  x + 2y <= 4,  3x + y <= 6
    res = solve_lp(LinearProgram([1, 1], ub_rows=[[1, 2], [3, 1]], ub_rhs=[4, 6],
                                 sense="max"))
    assert res.value == F(14, 5)
    assert res.weights == (F(8, 5), F(6, 5))


def test_simplex_unbounded_is_internal_error():
    with pytest.raises(InternalUnbounded):
        solve_lp(LinearProgram([1, 0], [[1, -1]], [0], sense="max"))


def test_simplex_rejects_ragged_rows():
    with pytest.raises(InputError):
        Tableau.from_equalities([[1, 2], [1]], [1, 1], 2)


def test_redundant_rows_are_dropped():
    res = solve_lp(LinearProgram([1, 2, 3], [[1, 1, 1], [2, 2, 2], [1, 0, 0]],
                                 [1, 2, F(1, 3)]))
    assert res.value == F(1, 3) + 2 * F(2, 3)


@st.composite
def random_lps(draw, big=False):
    n = draw(st.integers(2, 7))
    m = draw(st.integers(1, 4))
    hi = 10**7 if big else 5
    coef = st.integers(-hi, hi)
    A = [draw(st.lists(coef, min_size=n, max_size=n)) for _ in range(m)]
    # right-hand sides from a nonnegative point keep the system feasible
    x = draw(st.lists(st.integers(0, 4), min_size=n, max_size=n))
    b = [sum(a * v for a, v in zip(row, x)) for row in A]
    c = draw(st.lists(st.integers(-5, 5), min_size=n, max_size=n))
    return A, b, c


def _scipy(A, b, c, sense):
    sign = -1 if sense == "max" else 1
    out = linprog([sign * v for v in c], A_eq=np.array(A, float), b_eq=np.array(b, float),
                  bounds=[(0, None)] * len(c), method="highs")
    return out, sign


@given(random_lps(), st.sampled_from(["min", "max"]))
def test_simplex_matches_scipy(lp, sense):
    A, b, c = lp
    try:
        res = solve_lp(LinearProgram(c, A, b, sense=sense))
    except InternalUnbounded:
        return
    ref, sign = _scipy(A, b, c, sense)
    assert res.optimal and ref.status == 0
    assert float(res.value) == pytest.approx(sign * ref.fun, abs=1e-6)
    assert all(w >= 0 for w in res.weights)
    assert all(sum(a * w for a, w in zip(row, res.weights)) == r for row, r in zip(A, b))


@given(random_lps(big=True))
def test_simplex_large_coefficients_stay_exact(lp):
    # minors of these rows overflow int64, forcing the Python-int tableau
    A, b, c = lp
    try:
        res = solve_lp(LinearProgram(c, A, b))
    except InternalUnbounded:
        return
    assert res.optimal
    assert all(w >= 0 for w in res.weights)
    assert all(sum(a * w for a, w in zip(row, res.weights)) == r for row, r in zip(A, b))


def test_warm_started_tableau_reuses_basis():
    tab = Tableau.from_equalities([[1, 1, 1]], [1], 3)
    assert tab.optimize([1, 2, 3], "max").value == 3
    assert tab.optimize([1, 2, 3], "min").value == 1


# -- atoms ---------------------------------------------------------------------


def test_atom_count():
    for K in range(1, 5):
        atoms = response_atoms(K)
        assert len(atoms) == 4 * 2**K == len(set(atoms))


def test_atom_margins():
    always_he = ResponseAtom((1, 1), "HE")
    assert atom_margin(always_he, 0, 1, 1) == 1
    assert all(atom_margin(always_he, 0, 0, y) == 0 for y in (0, 1))
    never_nr = ResponseAtom((0, 0), "NR")
    assert all(atom_margin(never_nr, z, 0, 0) == 1 for z in (0, 1))


# -- bounds ---------------------------------------------------------------------


def test_oracle_perfect_compliance(perfect_compliance):
    iv = oracle_bounds(perfect_compliance, "pi1")
    assert (iv.lo, iv.hi) == (F(3, 5), F(3, 5))


def test_oracle_uniform_ace(uniform2):
    iv = oracle_bounds(uniform2, "ace")
    assert (iv.lo, iv.hi) == (F(-1, 2), F(1, 2))
    lp = build_lp(uniform2, "ace", "min")
    assert solve_lp(lp).value == F(-1, 2)
    assert len(lp.eq_rows) == 1 + 3 * 2


def test_oracle_infeasible(iv_violation):
    region = OracleRegion(iv_violation)
    assert not region.feasible
    assert not region.bounds("ace").feasible


def test_oracle_size_limit():
    law = ObservedLaw([[[0.25, 0.25], [0.25, 0.25]]] * (K_MAX_ORACLE + 1))
    with pytest.raises(OracleSizeExceeded):
        oracle_bounds(law, "ace")


def test_float_law_is_rationalized():
    law = ObservedLaw([[[0.1, 0.2], [0.3, 0.4]], [[0.4, 0.3], [0.2, 0.1]]])
    orc = oracle_all_bounds(law)
    rep = ace_interval(law)
    assert abs(float(orc["ace"].lo) - rep.ace.lo) < 1e-12
    assert abs(float(orc["ace"].hi) - rep.ace.hi) < 1e-12


@given(feasible_laws(1, 3))
def test_optimal_weights_reproduce_law(law):
    region = OracleRegion(law)
    res = region.solve("ace", "max")
    full = weights_to_full(region.atoms, res.weights, (F(1, law.K),) * law.K)
    assert phi(full)[1].p == law.p
    assert weights_feasible(law, res.weights)


@given(feasible_laws(2, 3))
def test_constant_compliance_shrinks_interval(law):
    full = oracle_bounds(law, "ace")
    patterns = ((0,) * law.K, (1,) * law.K)
    small = oracle_bounds(law, "ace", patterns=patterns)
    if small.feasible:
        assert full.lo <= small.lo and small.hi <= full.hi


# -- membership ----------------------------------------------------------------


def test_oracle_membership_examples(uniform2):
    assert oracle_membership(uniform_joint(), uniform2)
    law = ObservedLaw([[[1, 0], [0, 0]]])
    assert not oracle_membership(OutcomeJoint([[0, 0], [0, 1]]), law)


@given(observed_laws(1, 3), outcome_joints())
def test_oracle_membership_agrees_with_inequalities(law, joint):
    assert oracle_membership(joint, law) == bool(membership_test(joint, law))
