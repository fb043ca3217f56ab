import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathgeom import curvature as cv
from pathgeom import exprcore as ec
from pathgeom import fixtures as fx
from pathgeom import pathsys as ps
from pathgeom import twistor as tw
from pathgeom.exprcore import expr as E

TH = ec.Context(ps.THETA_VARS)
w, z, x, y, lam = ec.symbols("w z x y X")


def test_series_of_zero_potential():
    s = tw.twistor_series(ec.ZERO, order=4)
    assert s.curve(0) is w + lam * y
    assert s.curve(1) is z - lam * x
    assert s.exact_truncation == (True, True)


def test_series_of_quartic_potential():
    s = tw.twistor_series(fx.theta("y4"), order=6)
    assert s.curve(0) is w + lam * y
    assert ec.exact_equal(s.curve(1), z - lam * x - lam**2 * y**3)
    assert all(c.is_zero for c in s.b[3:])
    assert s.exact_truncation == (True, True)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_low_order_coefficients_match_potential(seed):
    th = fx.random_heavenly_theta(np.random.default_rng(seed))
    s = tw.twistor_series(th, order=4)
    assert tw.expansion_mismatch(s) == []
    t = tw.strip_low_order(th)
    assert ec.exact_equal(s.a[2], -ec.diff(t, "x"))
    assert ec.exact_equal(s.a[3], ec.diff(t, "z"))


def test_series_rejects_rational_potential():
    with pytest.raises(tw.NonPolynomialThetaError):
        tw.twistor_series(fx.theta("reciprocal"))


def test_series_rejects_off_shell_potential():
    with pytest.raises(tw.InconsistentRecursionError):
        tw.twistor_series(fx.theta("x2y2"), order=3)


# -- extraction -------------------------------------------------------------------------


def _points(n, seed, **boxes):
    ctx = ec.Context(ps.COORDS, boxes)
    return ctx.sample(np.random.default_rng(seed), n)


def test_extract_from_lines():
    for pt in _points(5, 1):
        assert np.allclose(tw.extract_system(fx.curves("lines"), pt), 0, atol=1e-12)


@pytest.mark.parametrize("name", ["y4", None])
def test_extraction_agrees_with_system_from_theta(name):
    th = fx.theta(name) if name else ec.ZERO
    series = tw.twistor_series(th, order=6)
    s = ps.system_from_theta(th)
    for pt in _points(20, 2):
        want = ec.eval_many([s.F, s.G], dict(zip(ps.COORDS, pt)))
        assert np.allclose(tw.extract_system(series, pt), want, atol=1e-8, rtol=1e-8)


def test_extraction_from_gibbons_hawking_curves():
    s = fx.system("fourdexam")
    for pt in _points(10, 3, **fx.GH_BOX):
        want = ec.eval_many([s.F, s.G], dict(zip(ps.COORDS, pt)))
        assert np.allclose(tw.extract_system(fx.curves("gh_yt2"), pt), want, atol=1e-6, rtol=1e-6)


def test_extraction_singular_jacobian():
    fam = tw.CurveFamily.parse("w + X*y", "z + X*y", ("w", "z", "x", "y"))
    with pytest.raises(tw.SingularJacobianError):
        tw.extract_system(fam, (1.0, 1.0, 1.0, 1.0, 2.0))


def test_curve_family_needs_four_parameters():
    with pytest.raises(ValueError):
        tw.CurveFamily.parse("w + X*y", "z", ("w", "z", "y"))


# -- null cone ---------------------------------------------------------------------------------

FLAT = cv.Metric4.from_quadratic(ps.THETA_VARS, {("w", "x"): E.ONE, ("z", "y"): E.ONE})


def test_null_cone_of_lines_is_flat():
    q = tw.null_cone(fx.curves("lines"))
    assert tw.proportional(q, FLAT, TH)


@pytest.mark.parametrize("fam", ["boris", "ode_sym_4"])
def test_null_cone_recovers_reference_metric(fam):
    m = fx.metric(fam)
    assert tw.proportional(tw.null_cone(fx.curves(fam)), m, m.ctx)


def test_null_cone_of_closed_form_submax_family():
    fam = tw.CurveFamily.parse("w + X*y", "z - X*x - X^2*y^3")
    assert tw.proportional(tw.null_cone(fam), cv.heavenly_metric(fx.theta("y4")), TH)


def test_null_cone_rejects_transcendental_variation():
    fam = tw.CurveFamily.parse("w + y*exp(X)", "z - X*x")
    with pytest.raises(tw.NotRationalError):
        tw.null_cone(fam)


def test_null_cone_degree_limit():
    fam = tw.CurveFamily.parse("w + X^5*y", "z - X*x")
    with pytest.raises(tw.DegreeOverflowError):
        tw.null_cone(fam)


def test_proportional_examples():
    g = FLAT
    five = g.scaled(5)
    bumped = cv.Metric4.from_quadratic(ps.THETA_VARS, {("w", "x"): E.ONE, ("z", "y"): E.ONE, ("w", "w"): E.ONE})
    assert tw.proportional(g, five, TH)
    assert not tw.proportional(g, bumped, TH)
    m = fx.metric("boris")
    assert tw.proportional(tw.null_cone(fx.curves("boris")), m, m.ctx)


def test_proportional_is_an_equivalence_relation():
    forms = {
        "flat": FLAT,
        "flat3": FLAT.scaled(ec.parse("x^2 + 1", TH)),
        "y4": cv.heavenly_metric(fx.theta("y4")),
        "y4_cone": tw.null_cone(tw.CurveFamily.parse("w + X*y", "z - X*x - X^2*y^3")),
        "boris": fx.metric("boris"),
        "boris_cone": tw.null_cone(fx.curves("boris")),
    }
    names = list(forms)
    rel = {(a, b): tw.proportional(forms[a], forms[b], TH) for a in names for b in names}
    for a in names:
        assert rel[(a, a)]
        for b in names:
            assert rel[(a, b)] == rel[(b, a)]
            for c in names:
                if rel[(a, b)] and rel[(b, c)]:
                    assert rel[(a, c)]
    assert rel[("flat", "flat3")] and rel[("y4", "y4_cone")] and rel[("boris", "boris_cone")]
    assert not rel[("flat", "y4")] and not rel[("y4", "boris")]


def test_quadratic_form_terms():
    terms = tw.null_cone(fx.curves("lines")).as_terms()
    assert set(terms) == {"dw dx", "dz dy"}
