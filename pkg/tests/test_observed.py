import json
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import uniform_law
from ivbounds.errors import DuplicateCell, EmptyLevel, InfeasibleTriple, InputError
from ivbounds.observed import (
    Interval,
    MarginalViolation,
    ObservedLaw,
    OutcomeJoint,
    RangeViolation,
    SumViolation,
    ingest_counts,
    load_law,
    normalize_outcome_joint,
    parse_number,
    validate_joint,
    validate_law,
)

# -- ingest_counts -------------------------------------------------------------


def test_ingest_single_level_treated_only():
    law = ingest_counts([(1, 1, 1, 60), (1, 1, 0, 40)])
    assert law.K == 1
    assert law.p[0][1][1] == pytest.approx(0.6)
    assert law.p[0][1][0] == pytest.approx(0.4)
    assert law.p[0][0] == (0.0, 0.0)


def test_ingest_symmetric_counts_uniform():
    law = ingest_counts([(1, 0, 0, 25), (1, 0, 1, 25), (1, 1, 0, 25), (1, 1, 1, 25)],
                        exact=True)
    assert all(v == F(1, 4) for s in law.p for row in s for v in row)


def test_ingest_two_levels_with_pz():
    law = ingest_counts([(1, 1, 1, 3), (2, 0, 0, 2), (2, 1, 1, 2)], exact=True)
    assert law.p[0][1][1] == 1
    assert law.p[1][0][0] == law.p[1][1][1] == F(1, 2)
    assert law.pz == (F(3, 7), F(4, 7))
    assert law.labels == (1, 2)


def test_ingest_keeps_original_labels_in_input_order():
    law = ingest_counts([("b", 0, 0, 1), ("a", 1, 1, 1)])
    assert law.labels == ("b", "a")
    assert law.p[0][0][0] == 1.0


def test_ingest_errors():
    with pytest.raises(DuplicateCell):
        ingest_counts([(1, 0, 0, 1), (1, 0, 0, 2)])
    with pytest.raises(EmptyLevel):
        ingest_counts([(1, 0, 0, 1), (2, 0, 0, 0)])
    with pytest.raises(InputError):
        ingest_counts([(1, 2, 0, 1)])
    with pytest.raises(InputError):
        ingest_counts([(1, 0, 0, -1)])
    with pytest.raises(InputError):
        ingest_counts([])


@given(st.lists(st.tuples(st.integers(1, 4), st.integers(0, 1), st.integers(0, 1),
                          st.integers(1, 50)),
                min_size=1, max_size=16, unique_by=lambda r: r[:3]))
def test_ingested_counts_always_validate(rows):
    for exact in (False, True):
        assert validate_law(ingest_counts(rows, exact=exact)) == []


# -- loading -------------------------------------------------------------------


def test_load_csv_and_json_array_agree():
    csv_text = "z,x,y,n\n1,0,0,2\n1,1,1,2\n2,0,1,5\n"
    arr = [{"z": 1, "x": 0, "y": 0, "n": 2}, {"z": 1, "x": 1, "y": 1, "n": 2},
           {"z": 2, "x": 0, "y": 1, "n": 5}]
    a = load_law(csv_text, exact=True)
    b = load_law(json.dumps(arr), exact=True)
    assert a.p == b.p and a.pz == b.pz


def test_load_law_object_exact_decimals():
    law = load_law('{"K": 1, "p": [[[0.1, 0.2], [0.3, 0.4]]]}', exact=True)
    assert law.p[0][0][0] == F(1, 10)
    assert validate_law(law) == []


def test_load_law_rational_strings():
    law = load_law('{"p": [[["1/3", "1/6"], ["1/4", "1/4"]]]}', exact=True)
    assert law.p[0][0] == (F(1, 3), F(1, 6))


def test_load_errors():
    with pytest.raises(InputError):
        load_law('{"p": [[[0.25')
    with pytest.raises(InputError):
        load_law("a,b\n1,2\n")
    with pytest.raises(InputError):
        load_law('{"K": 3, "p": [[[1, 0], [0, 0]]]}')


def test_json_round_trip():
    law = ObservedLaw([[[F(1, 2), 0], [0, F(1, 2)]]], pz=[1], labels=("only",))
    again = ObservedLaw.from_json(json.loads(json.dumps(
        law.to_json(), default=str)), exact=True)
    assert again == law


def test_parse_number():
    assert parse_number("3/8", exact=True) == F(3, 8)
    assert parse_number("3/8") == 0.375
    with pytest.raises(InputError):
        parse_number("x")
    with pytest.raises(InputError):
        parse_number(True)


# -- validate_law --------------------------------------------------------------


def test_uniform_law_is_valid():
    assert validate_law(uniform_law(2)) == []
    assert validate_law(uniform_law(3, exact=False)) == []


def test_sum_violation_reports_residual():
    law = ObservedLaw([[[0.3, 0.2], [0.2, 0.2]]])
    (v,) = validate_law(law)
    assert isinstance(v, SumViolation)
    assert v.level == 1
    assert v.residual == pytest.approx(0.1)


def test_range_violation():
    law = ObservedLaw([[[-0.01, 0.51], [0.25, 0.25]]])
    out = validate_law(law)
    assert any(isinstance(v, RangeViolation) and (v.x, v.y) == (0, 0) for v in out)


def test_pz_must_be_positive_and_normalized():
    assert any(isinstance(v, MarginalViolation)
               for v in validate_law(uniform_law(2).with_pz([1, 0])))
    assert any(v.kind == "pz-sum" for v in validate_law(uniform_law(2).with_pz([0.5, 0.6])))


def test_float_tolerance_accepts_rounding():
    law = ObservedLaw([[[0.1, 0.2], [0.3, 0.4 + 1e-12]]])
    assert validate_law(law) == []
    assert validate_law(law.to_exact()) != []


# -- outcome joints ------------------------------------------------------------


def test_normalize_independent_coins():
    j = normalize_outcome_joint(0.5, 0.5, 0.25)
    assert j.q == ((0.25, 0.25), (0.25, 0.25))


def test_normalize_always_recover():
    j = normalize_outcome_joint(1, 1, 1)
    assert j.q == ((0, 0), (0, 1))
    assert j.exact


def test_normalize_infeasible_triple():
    with pytest.raises(InfeasibleTriple) as info:
        normalize_outcome_joint(0.5, 0.5, 0.6)
    cells = dict(info.value.cells)
    assert cells[1, 0] == pytest.approx(-0.1)


def test_normalize_clamps_within_tolerance():
    j = normalize_outcome_joint(0.5, 0.5, 0.5 + 1e-12)
    assert min(min(r) for r in j.q) >= 0
    assert validate_joint(j) == []


@given(st.fractions(0, 1), st.fractions(0, 1), st.fractions(0, 1))
def test_accessors_invert_normalization(pi0, pi1, t):
    lo, hi = max(F(0), pi0 + pi1 - 1), min(pi0, pi1)
    pi_ar = lo + t * (hi - lo)
    j = normalize_outcome_joint(pi0, pi1, pi_ar)
    assert (j.pi0, j.pi1, j.pi_ar) == (pi0, pi1, pi_ar)
    assert j.ace == pi1 - pi0
    assert validate_joint(j) == []


def test_response_type_cells():
    j = OutcomeJoint([[0.1, 0.2], [0.3, 0.4]])
    assert j.pi0 == pytest.approx(0.7)
    assert j.pi1 == pytest.approx(0.6)
    assert j.pi_ar == 0.4


# -- intervals -----------------------------------------------------------------


def test_interval_feasibility():
    assert Interval(0.2, 0.2).feasible
    assert Interval(0.2 + 1e-10, 0.2).feasible
    assert not Interval(0.3, 0.2).feasible
    assert not Interval(F(1, 3) + F(1, 10**12), F(1, 3)).feasible
    assert not Interval(float("inf"), float("-inf")).feasible
    assert Interval(F(0), F(1)).midpoint == F(1, 2)
