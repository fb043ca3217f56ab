import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathgeom import exprcore as ec
from pathgeom import fixtures as fx
from pathgeom import pathsys as ps
from pathgeom import symmetry as sy
from pathgeom.exprcore import expr as E

VF = sy.VectorField3.parse
JET = ec.Context(sy.JET2)
q1 = E.var("q1")


def test_prolong_translation():
    pr = sy.prolong(VF("0", "1", "0"))
    assert all(e.is_zero for e in pr.eta1 + pr.eta2)


def test_prolong_galilean_boost():
    pr = sy.prolong(VF("0", "X", "0"))
    assert pr.eta1[0] is ec.ONE and pr.eta1[1].is_zero
    assert pr.eta2[0].is_zero


def test_prolong_scaling():
    pr = sy.prolong(VF("X", "2*Y", "Z"))
    assert pr.eta1[0] is E.var("p0") and pr.eta1[1].is_zero
    assert pr.eta2[0].is_zero and pr.eta2[1] is -q1


def test_vector_field_rejects_jet_variables():
    with pytest.raises(ec.UndeclaredVariableError):
        VF("p0", "0", "0")


@pytest.mark.parametrize(
    "alg, system",
    [("L9_submax", "submax"), ("L9", "submax_swapped"), ("L5", "fourdexam"), ("L4", "ode_sym_4")],
)
def test_reference_algebras_are_symmetries(alg, system):
    s = fx.system(system)
    assert all(sy.symmetry_check(f, s) for f in fx.algebra(alg))


def test_seven_dimensional_family():
    s = ps.SecondOrderSystem.parse("p1^4", "0")
    assert all(sy.symmetry_check(f, s) for f in fx.algebra("L7_4"))
    assert sy.span_dimension(list(fx.algebra("L7_4"))) == 7


def test_non_symmetry():
    assert not sy.symmetry_check(VF("Y", "0", "0"), fx.system("submax"))


def test_bracket_examples():
    assert sy.lie_bracket(VF("1", "0", "0"), VF("0", "X", "0")) == VF("0", "1", "0")
    assert sy.lie_bracket(VF("0", "1", "0"), VF("0", "Z", "0")).is_zero()
    e6, e8 = VF("X", "2*Y", "Z"), VF("0", "3*Z^2/2", "X")
    assert sy.lie_bracket(e6, e8).is_zero()
    assert sy.lie_bracket(VF("X", "0", "0"), VF("X^2", "0", "0")) == VF("X^2", "0", "0")


def test_span_examples():
    assert sy.span_dimension([VF("1", "0", "0"), VF("0", "1", "0"), VF("0", "0", "1")]) == 3
    assert sy.span_dimension([VF("1", "0", "0"), VF("2", "0", "0")]) == 1
    assert sy.span_dimension(list(fx.algebra("L9"))) == 9


def test_span_with_transcendental_components():
    fields = [VF("exp(X)", "0", "0"), VF("2*exp(X)", "0", "0"), VF("0", "sin(Y)", "0")]
    assert sy.span_dimension(fields) == 2
    assert sy._numeric_rank(fields, 20, None) == 2


@pytest.mark.parametrize(
    "name, dim, solvable",
    [("L9", 9, False), ("L9_submax", 9, False), ("L6", 6, True), ("L5", 5, True), ("L4", 4, True),
     ("L4a", 4, True), ("L4b", 4, True), ("L7_4", 7, True)],
)
def test_algebra_structure(name, dim, solvable):
    fields = list(fx.algebra(name))
    assert sy.span_dimension(fields) == dim
    assert sy.is_closed_and_solvable(fields) == (True, solvable)


def test_single_translation_is_closed_and_solvable():
    assert sy.is_closed_and_solvable([VF("1", "0", "0")]) == (True, True)


def test_pushforward_preserves_brackets():
    new = {k: ec.parse(v, ec.Context(sy.BASE)) for k, v in fx.SUBMAX_NEW_OF_OLD.items()}
    old = {k: ec.parse(v, ec.Context(sy.BASE)) for k, v in fx.SUBMAX_OLD_OF_NEW.items()}
    L = fx.algebra("L9")
    for a, b in [(0, 3), (3, 5), (5, 8), (6, 7)]:
        lhs = sy.pushforward(sy.lie_bracket(L[a], L[b]), new, old)
        rhs = sy.lie_bracket(sy.pushforward(L[a], new, old), sy.pushforward(L[b], new, old))
        assert all(ec.exact_is_zero(u - v) for u, v in zip(lhs.c, rhs.c))


ALL_FIELDS = [f for n in ("L9", "L5", "L4", "L4a", "L4b") for f in fx.algebra(n)]
pick = st.sampled_from(ALL_FIELDS)


@given(pick, pick, pick)
def test_jacobi_identity(a, b, c):
    br = sy.lie_bracket
    total = br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))
    assert ec.all_zero(list(total.c), ec.Context(sy.BASE))


def _jet_field(chi):
    pr = sy.prolong(chi)
    return list(chi.c) + list(pr.eta1) + list(pr.eta2)


def _jet_bracket(u, v):
    apply = lambda f, g: E.add(*(E.mul(c, ec.diff(g, n)) for c, n in zip(f, sy.JET2)))  # noqa: E731
    return [apply(u, vc) - apply(v, uc) for uc, vc in zip(u, v)]


@given(st.sampled_from(fx.algebra("L6")), st.sampled_from(fx.algebra("L6")))
def test_prolongation_commutes_with_brackets(a, b):
    lhs = _jet_field(sy.lie_bracket(a, b))
    rhs = _jet_bracket(_jet_field(a), _jet_field(b))
    assert ec.all_zero([u - v for u, v in zip(lhs, rhs)], JET)


def test_symmetry_report_shape():
    rep = sy.symmetry_report(list(fx.algebra("L4")), fx.system("ode_sym_4"))
    assert [r["generator"] for r in rep] == [1, 2, 3, 4]
    assert all(r["is_symmetry"] for r in rep)
