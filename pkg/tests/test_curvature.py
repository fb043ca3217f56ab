import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathgeom import curvature as cv
from pathgeom import exprcore as ec
from pathgeom import fixtures as fx
from pathgeom import pathsys as ps
from pathgeom.exprcore import expr as E

TH = ec.Context(cv.THETA_COORDS)
GH = ec.Context(cv.GH_COORDS)


def quad(terms, boxes=None):
    ctx = ec.Context(cv.THETA_COORDS, boxes)
    return cv.Metric4.from_quadratic(cv.THETA_COORDS, {k: ec.parse(v, ctx) for k, v in terms.items()}, boxes)


FLAT = {("w", "x"): "1", ("z", "y"): "1"}


# -- a finite-difference curvature oracle, independent of the symbolic pack ---------


def _fd_scalar(m, x, h=1e-3):
    """Scalar curvature at x from central differences of the numeric metric."""
    exprs = [m.g[i][j] for i in range(4) for j in range(4)]
    names = m.coords

    def g(p):
        return ec.eval_many(exprs, dict(zip(names, p))).reshape(4, 4)

    def dg(p):
        out = np.zeros((4, 4, 4))
        for c in range(4):
            e = np.zeros(4)
            e[c] = h
            out[c] = (-g(p + 2 * e) + 8 * g(p + e) - 8 * g(p - e) + g(p - 2 * e)) / (12 * h)
        return out

    def gamma(p):
        gi = np.linalg.inv(g(p))
        d = dg(p)  # d[c, a, b] = ∂_c g_ab
        # Γ_l,bc = ½(∂_b g_lc + ∂_c g_lb − ∂_l g_bc)
        low = np.zeros((4, 4, 4))
        for l_, b, c in itertools.product(range(4), repeat=3):
            low[l_, b, c] = 0.5 * (d[b, l_, c] + d[c, l_, b] - d[l_, b, c])
        return np.einsum("al,lbc->abc", gi, low)

    G = gamma(x)
    dG = np.zeros((4, 4, 4, 4))  # dG[c, a, b, d] = ∂_c Γ^a_bd
    for c in range(4):
        e = np.zeros(4)
        e[c] = h
        dG[c] = (gamma(x + e) - gamma(x - e)) / (2 * h)
    # R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
    R = (
        np.einsum("cadb->abcd", dG)
        - np.einsum("dacb->abcd", dG)
        + np.einsum("ace,edb->abcd", G, G)
        - np.einsum("ade,ecb->abcd", G, G)
    )
    ric = np.einsum("abad->bd", R)
    return float(np.einsum("bd,bd->", np.linalg.inv(g(x)), ric))


def test_oracle_sign_on_round_sphere():
    m = cv.Metric4.from_matrix(("a", "b", "c", "d"), [[1, 0, 0, 0], [0, E.sin(E.var("a")) ** 2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert _fd_scalar(m, np.array([1.0, 0.3, 0.2, 0.1])) == pytest.approx(2.0, rel=1e-5)
    assert ec.eval(cv.curvature(m).scalar, {"a": 1.0, "b": 0.3, "c": 0.2, "d": 0.1}) == pytest.approx(2.0)


@pytest.mark.parametrize("name", ["boris", "reciprocal", "ode_sym_4", "gh_yt2"])
def test_scalar_curvature_matches_finite_differences(name):
    m = fx.metric(name)
    X, _, _ = ec.sample_good_points(list(m.g[0]) + [cv.curvature_cached(m).scalar], m.ctx, 3, seed=7)
    for x in X:
        sym = ec.eval(cv.curvature_cached(m).scalar, dict(zip(m.coords, x)))
        assert _fd_scalar(m, x) == pytest.approx(sym, abs=1e-5 * (1 + abs(sym)))


# -- examples ------------------------------------------------------------------------


def test_flat_riemann_vanishes():
    pack = cv.curvature(quad(FLAT))
    assert all(c.is_zero for c in pack.components("riemann"))


def test_reciprocal_is_ricci_flat_and_asd():
    m = fx.metric("reciprocal")
    assert cv.is_ricci_flat(m)
    assert cv.is_asd(m)


def test_boris_metric_is_einstein_and_asd():
    m = fx.metric("boris")
    assert cv.einstein_lambda(m) == pytest.approx(6.0, rel=1e-9)
    assert ec.zero_test(cv.curvature_cached(m).scalar - 24, m.ctx)
    assert cv.is_asd(m)


def test_heavenly_metric_examples():
    assert cv.heavenly_metric(ec.ZERO).g == quad(FLAT).g
    y4 = cv.heavenly_metric(fx.theta("y4"))
    assert y4.g == quad({**FLAT, ("w", "w"): "-3*y^2"}).g
    st_ = cv.heavenly_metric(fx.theta("reciprocal"))
    reference = fx.metric("reciprocal")
    assert all(ec.exact_is_zero(a - b) for ra, rb in zip(st_.g, reference.g) for a, b in zip(ra, rb))


def test_heavenly_metric_is_asd_ricci_flat():
    m = cv.heavenly_metric(fx.theta("y4"))
    assert cv.is_ricci_flat(m)
    assert cv.sd_weyl_norm(m) == (True, "+")


def test_linear_null_perturbation_is_flat():
    pack = cv.curvature(quad({**FLAT, ("y", "y"): "w"}))
    assert all(c.is_zero or ec.exact_is_zero(c) for c in pack.components("riemann"))


def test_half_flat_perturbation_picks_an_orientation():
    m = quad({**FLAT, ("y", "y"): "w^2*x"})
    assert cv.sd_weyl_norm(m) == (True, "+")
    assert cv.sd_residual(m, -1) > 0.1


def test_generic_perturbation_is_not_asd():
    m = quad({**FLAT, ("w", "w"): "y^2", ("x", "x"): "z^2"})
    assert cv.sd_weyl_norm(m) == (False, None)
    assert not cv.is_ricci_flat(m)


def test_curvature_report_keys():
    rep = cv.curvature_report(fx.metric("boris"))
    assert rep["asd"] and not rep["ricci_flat"]
    assert rep["einstein_lambda"] == pytest.approx(6.0)
    assert rep["orientation"] in "+-"


def test_degenerate_metric_detected():
    m = quad({("w", "x"): "1"})
    with pytest.raises(cv.DegenerateMetricError):
        m.check_nondegenerate()


def test_weyl_spinor_examples():
    assert cv.weyl_spinor(fx.theta("y4")) == (ec.num(6),) + (ec.ZERO,) * 4
    assert all(c.is_zero for c in cv.weyl_spinor(ec.parse("x^2 + 3*w*y - z*x", TH)))
    psi0 = cv.weyl_spinor(fx.theta("reciprocal"))[0]
    assert ec.eval_exact(psi0, dict.fromkeys(cv.THETA_COORDS, 1)) == Fraction(3, 4)


def test_lax_examples():
    assert cv.lax_frobenius(ec.ZERO)
    assert cv.lax_frobenius(fx.theta("y4"))
    assert cv.lax_frobenius(fx.theta("reciprocal"))
    assert not cv.lax_frobenius(fx.theta("x2y2"))


def test_gibbons_hawking_examples():
    d = fx.gh_data()
    assert cv.gh_wave_residual(d).is_zero
    assert all(c.is_zero or ec.exact_is_zero(c) for c in cv.monopole_residual(d))
    assert cv.is_asd(fx.gh_metric_fixture())
    assert cv.is_ricci_flat(fx.gh_metric_fixture())
    assert cv.gh_wave_residual(cv.GHData(ec.parse("w*t", GH))) is ec.ONE
    assert cv.gh_wave_residual(cv.GHData(ec.parse("t^3", GH))).is_zero


def test_gibbons_hawking_degenerate_potential():
    with pytest.raises(ec.DomainError):
        cv.gh_metric(cv.GHData(ec.parse("w*t + y", GH)))


# -- invariants ----------------------------------------------------------------------


@pytest.mark.parametrize("name", fx.metric_names())
def test_curvature_identities(name):
    m = fx.metric(name)
    res = cv.identity_residuals(cv.curvature_cached(m))
    for kind, exprs in res.items():
        assert ec.all_zero(exprs, m.ctx, trials=30, tol=1e-8), kind


@settings(max_examples=8)
@given(st.sampled_from(["boris", "reciprocal", "heavenly_y4"]), st.fractions(min_value=Fraction(1, 8), max_value=10, max_denominator=9))
def test_asd_is_conformally_invariant(name, c):
    m = fx.metric(name)
    assert cv.sd_weyl_norm(m.scaled(c)) == cv.sd_weyl_norm(m)


def test_asd_invariant_under_nonconstant_factor():
    m = fx.metric("reciprocal")
    assert cv.sd_weyl_norm(m.scaled(ec.parse("(x*w + y*z)^2", TH))) == cv.sd_weyl_norm(m)


@settings(max_examples=6)
@given(st.integers(0, 2**32 - 1))
def test_heavenly_solutions_give_ricci_flat_metrics(seed):
    th = fx.random_heavenly_theta(np.random.default_rng(seed))
    assert ps.satisfies_heavenly(th)
    assert cv.is_ricci_flat(cv.heavenly_metric(th))
    assert cv.lax_frobenius(th)
