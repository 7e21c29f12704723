from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import uniform_joint, uniform_law
from ivbounds.bounds import (
    LevelPair,
    SingleLevel,
    ace_interval,
    marginal_interval,
    marginal_upper,
    membership_test,
    natural_bounds,
    upper_terms,
)
from ivbounds.errors import InvalidLaw
from ivbounds.observed import ObservedLaw, OutcomeJoint
from ivbounds.oracle import oracle_all_bounds, oracle_bounds
from ivbounds.witness import pick_outcome_joint
from strategies import feasible_laws, observed_laws

# -- g(i, j) -------------------------------------------------------------------


def test_uniform_upper_bound_matches_hand_value_and_oracle(uniform2):
    assert marginal_upper(uniform2, 1, 1) == F(3, 4)
    terms = list(upper_terms(uniform2, 1, 1))
    assert [v for v, d in terms if isinstance(d, SingleLevel)] == [F(3, 4)] * 2
    assert [v for v, d in terms if isinstance(d, LevelPair)] == [1, 1]
    assert oracle_bounds(uniform2, "pi1").hi == F(3, 4)


def test_perfect_compliance_single_level(perfect_compliance):
    law = perfect_compliance
    assert marginal_upper(law, 1, 1) == F(3, 5)
    assert marginal_upper(law, 1, 0) == F(2, 5)
    assert marginal_upper(law, 0, 1) == marginal_upper(law, 0, 0) == 1
    iv1 = marginal_interval(law, 1)
    assert (iv1.lo, iv1.hi) == (F(3, 5), F(3, 5))
    iv0 = marginal_interval(law, 0)
    assert (iv0.lo, iv0.hi) == (0, 1)


def test_unobserved_arm_falls_back_to_cross_terms():
    # nobody is ever treated: single-level terms for arm 1 are all 1
    law = ObservedLaw([[[F(1, 5), F(4, 5)], [0, 0]], [[F(3, 5), F(2, 5)], [0, 0]]])
    for j in (0, 1):
        singles = [v for v, d in upper_terms(law, 1, j) if isinstance(d, SingleLevel)]
        pairs = [v for v, d in upper_terms(law, 1, j) if isinstance(d, LevelPair)]
        assert singles == [1, 1]
        assert marginal_upper(law, 1, j) == min([1] + pairs)
    # here the pair terms are P(Y=0|z) + P(Y=1|z~) and can be below one
    assert marginal_upper(law, 1, 1) == F(1, 5) + F(2, 5)


def test_uniform_intervals(uniform2):
    iv = marginal_interval(uniform2, 0)
    assert (iv.lo, iv.hi) == (F(1, 4), F(3, 4))
    rep = ace_interval(uniform2)
    assert (rep.ace.lo, rep.ace.hi) == (F(-1, 2), F(1, 2))
    assert rep.feasible and rep.violations == ()
    orc = oracle_bounds(uniform2, "ace")
    assert (orc.lo, orc.hi) == (rep.ace.lo, rep.ace.hi)


def test_perfect_compliance_ace(perfect_compliance):
    rep = ace_interval(perfect_compliance)
    assert (rep.ace.lo, rep.ace.hi) == (F(-2, 5), F(3, 5))


def test_infeasibility_witness(iv_violation):
    rep = ace_interval(iv_violation)
    assert (rep.pi1.lo, rep.pi1.hi) == (1, 0)
    assert not rep.feasible
    assert rep.violations
    assert any(v["quantity"] == "pi1" for v in rep.violations)
    assert all(v["gap"] > 0 for v in rep.violations)
    assert not oracle_all_bounds(iv_violation)["feasible"]


def test_float_law_infeasible_certificate_uses_labels():
    law = ObservedLaw([[[0.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [1.0, 0.0]]],
                      labels=("low", "high"))
    rep = ace_interval(law)
    assert not rep.feasible
    js = rep.to_json()
    assert js["violations"][0]["lower_term"]["z"] in ("low", "high")


def test_invalid_law_is_rejected():
    with pytest.raises(InvalidLaw):
        ace_interval(ObservedLaw([[[0.5, 0.5], [0.5, 0.5]]]))


def test_active_ties_go_to_lowest_level(uniform2):
    rep = ace_interval(uniform2)
    assert rep.active["pi1.hi"] == SingleLevel(0)
    assert rep.to_json()["active"]["pi1.hi"] == {"type": "single", "z": 1}


# -- membership ----------------------------------------------------------------


def test_membership_uniform(uniform2):
    assert membership_test(uniform_joint(), uniform2)


def test_membership_always_recover_contradiction():
    law = ObservedLaw([[[1, 0], [0, 0]]])
    joint = OutcomeJoint([[0, 0], [0, 1]])
    res = membership_test(joint, law)
    assert not res
    joint_fail = [v for v in res.violations if v.family == "joint"]
    assert [(v.indices, v.lhs, v.rhs) for v in joint_fail] == [((1, 1), 1, 0)]
    assert all(v.residual > 0 for v in res.violations)


@given(feasible_laws(1, 3))
def test_picked_joints_pass_membership(law):
    for mode in ("midpoint", "maximize_ace", "minimize_ace"):
        assert membership_test(pick_outcome_joint(law, mode), law)


# -- properties ----------------------------------------------------------------


@given(observed_laws(1, 4))
def test_within_natural_bounds(law):
    for i in (0, 1):
        iv, nat = marginal_interval(law, i), natural_bounds(law, i)
        assert nat.lo <= iv.lo and iv.hi <= nat.hi


@given(observed_laws(1, 4))
def test_ace_decomposes(law):
    r = ace_interval(law)
    assert r.ace.lo == r.pi1.lo - r.pi0.hi
    assert r.ace.hi == r.pi1.hi - r.pi0.lo
    assert r.ace.width == r.pi1.width + r.pi0.width


@given(observed_laws(2, 4), st.randoms(use_true_random=False))
def test_label_invariance(law, rnd):
    order = list(range(law.K))
    rnd.shuffle(order)
    a, b = ace_interval(law), ace_interval(law.permuted(order))
    assert (a.pi0, a.pi1, a.ace, a.feasible) == (b.pi0, b.pi1, b.ace, b.feasible)


@given(observed_laws(1, 4))
def test_same_level_pairs_are_redundant(law):
    for i in (0, 1):
        for j in (0, 1):
            assert marginal_upper(law, i, j) == marginal_upper(law, i, j, distinct_pairs=False)


@given(observed_laws(1, 3))
def test_feasible_iff_oracle_feasible(law):
    assert ace_interval(law).feasible == oracle_all_bounds(law)["feasible"]


@given(feasible_laws(1, 3))
def test_oracle_equivalence_exact(law):
    rep = ace_interval(law)
    orc = oracle_all_bounds(law)
    assert rep.feasible and orc["feasible"]
    for name in ("pi0", "pi1", "ace"):
        mine, theirs = getattr(rep, name), orc[name]
        assert (mine.lo, mine.hi) == (theirs.lo, theirs.hi)


@given(observed_laws(1, 3, exact=False))
def test_float_matches_exact(law):
    a = ace_interval(law)
    b = ace_interval(law.to_exact(renormalize=True))
    for name in ("pi0", "pi1", "ace"):
        assert abs(getattr(a, name).lo - float(getattr(b, name).lo)) < 1e-12
        assert abs(getattr(a, name).hi - float(getattr(b, name).hi)) < 1e-12


def test_uniform_float_law():
    rep = ace_interval(uniform_law(3, exact=False))
    assert rep.ace.to_json() == {"lo": -0.5, "hi": 0.5}
