from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathgeom import curvature as cv
from pathgeom import exprcore as ec
from pathgeom import finsler as fn
from pathgeom import fixtures as fx
from pathgeom import pathsys as ps
from pathgeom.exprcore import expr as E

X, Y, Z = ec.symbols("X Y Z")
BASE = ec.Context(fn.BASE)
TANGENT = ec.Context(fn.TANGENT)
EUCLID = fn.FinslerFunction.parse("sqrt(v0^2 + v1^2 + v2^2)")


def zermelo(h, W, **boxes):
    return fn.ZermeloData.parse(h, W, boxes)


def randers(h, W, fiber=None, **boxes):
    return fn.randers_from_zermelo(zermelo(h, W, **boxes)).finsler(fiber)


def rand_tangent(rng, ctx, n):
    return ctx.sample(rng, n)


# -- metric tensor --------------------------------------------------------------------------


def test_euclidean_metric_tensor_is_identity():
    f = fn.metric_tensor(EUCLID)
    for i in range(3):
        for j in range(3):
            assert ec.exact_equal(f[i][j], ec.ONE if i == j else ec.ZERO)


def test_riemannian_metric_tensor():
    f = fn.metric_tensor(fn.FinslerFunction.parse("sqrt(v0^2 + v1^2 + Y^2*v2^2)"))
    want = [[1, 0, 0], [0, 1, 0], [0, 0, Y**2]]
    assert all(ec.exact_equal(f[i][j], E._coerce(want[i][j])) for i in range(3) for j in range(3))


def test_randers_metric_tensor_matches_finite_difference_hessian():
    F4 = fn.randers_from_zermelo(fx.rotating_zermelo()).finsler(fx.ROTATING_FIBER)
    f = fn.metric_tensor(F4)
    x = np.array([1.0, 0.5, 1.0])
    v = np.array([1.0, 1.0, 1.0])
    half_sq = lambda u: 0.5 * ec.eval(F4.F, dict(zip(fn.TANGENT, np.concatenate([x, u])))) ** 2  # noqa: E731
    h = 1e-3
    for i in range(3):
        for j in range(3):
            ei, ej = np.eye(3)[i] * h, np.eye(3)[j] * h
            fd = (half_sq(v + ei + ej) - half_sq(v + ei - ej) - half_sq(v - ei + ej) + half_sq(v - ei - ej)) / (4 * h * h)
            sym = ec.eval(f[i][j], dict(zip(fn.TANGENT, np.concatenate([x, v]))))
            assert sym == pytest.approx(fd, abs=1e-6)


def test_homogeneity_and_positivity():
    F4 = fn.randers_from_zermelo(fx.rotating_zermelo()).finsler(fx.ROTATING_FIBER)
    assert ec.zero_test(F4.homogeneity_residual(), F4.ctx)
    assert fn.positive_definite(F4)
    assert not ec.zero_test(fn.FinslerFunction.parse("v0^2 + v1").homogeneity_residual(), TANGENT)


# -- sprays ------------------------------------------------------------------------------------


def test_euclidean_spray_vanishes():
    S = fn.geodesic_spray(EUCLID)
    assert all(ec.exact_is_zero(g) for g in S.Gamma)


def test_riemannian_christoffel_symbols():
    gam = fn.christoffel_like([[1, 0, 0], [0, 1, 0], [0, 0, Y**2]])
    assert gam[1][2][2] is -Y
    assert ec.exact_equal(gam[2][1][2], 1 / Y)
    assert gam[0][0][0].is_zero


def test_energy_spray_needs_finsler_function():
    with pytest.raises(TypeError):
        fn.geodesic_spray([[1, 0, 0], [0, 1, 0], [0, 0, 1]], verbatim=False)


def test_singular_metric_tensor():
    with pytest.raises(fn.SingularMetricError):
        fn.christoffel_like([[1, 0, 0], [0, 0, 0], [0, 0, 1]])


@pytest.mark.parametrize("verbatim", [True, False])
def test_randers_spray_is_two_homogeneous(verbatim):
    F4 = fn.randers_from_zermelo(fx.rotating_zermelo()).finsler(fx.ROTATING_FIBER)
    S = fn.geodesic_spray(F4, verbatim)
    assert ec.all_zero(S.homogeneity_residuals(), S.ctx)


def test_verbatim_and_energy_sprays_agree_on_randers_example():
    F4 = fn.randers_from_zermelo(fx.rotating_zermelo()).finsler(fx.ROTATING_FIBER)
    a = fn.geodesic_spray(F4, True).Gamma
    b = fn.geodesic_spray(F4, False).Gamma
    assert ec.all_zero([u - w for u, w in zip(a, b)], F4.ctx)


# -- curvature ---------------------------------------------------------------------------------

HYPERBOLIC = "sqrt(v0^2 + v1^2 + v2^2)/X"
WARPED = "sqrt((1 + Y^2)*v0^2 + v1^2 + (X^2 + 1)*v2^2)"


def test_flat_spray_curvature_vanishes():
    c = fn.spray_curvature(fn.geodesic_spray(EUCLID))
    assert all(ec.exact_is_zero(e) for row in c.jacobi for e in row)
    assert fn.isotropy_check(fn.geodesic_spray(EUCLID))


@pytest.mark.parametrize("F", [HYPERBOLIC, WARPED])
def test_jacobi_endomorphism_matches_levi_civita_riemann(F):
    ff = fn.FinslerFunction.parse(F)
    c = fn.spray_curvature(fn.geodesic_spray(ff))
    # the same metric as a 4-metric h ⊕ dt², with v held as constants
    coords = ("X", "Y", "Z", "t")
    rng = np.random.default_rng(5)
    for pt in rand_tangent(rng, TANGENT, 4):
        env = dict(zip(fn.TANGENT, pt))
        if F == HYPERBOLIC:
            h = [[E._coerce(1 / X**2 if i == j else 0) for j in range(3)] for i in range(3)]
        else:
            h = [[E._coerce(d if i == j else 0) for j in range(3)] for i, d in enumerate([1 + Y**2, 1, X**2 + 1])]
        g = [[h[i][j] if i < 3 and j < 3 else E._coerce(1 if i == j else 0) for j in range(4)] for i in range(4)]
        pack = cv.curvature(cv.Metric4.from_matrix(coords, g))
        v = pt[3:]
        genv = {"X": env["X"], "Y": env["Y"], "Z": env["Z"], "t": 0.0}
        Rl = np.zeros((3, 3, 3, 3))
        for (a, b, cc, d), e in pack.riemann.items():
            if max(a, b, cc, d) < 3:
                Rl[a, b, cc, d] = ec.eval(e, genv)
        want = np.einsum("abkd,b,d->ak", Rl, v, v)
        got = np.array([[ec.eval(c.jacobi[i][k], env) for k in range(3)] for i in range(3)])
        assert np.allclose(got, want, atol=1e-9)


def test_full_tensor_contracts_to_jacobi_endomorphism():
    c = fn.spray_curvature(fn.geodesic_spray(fn.FinslerFunction.parse(WARPED)))
    full = c.contracted()
    diffs = [full[i][j] - c.jacobi[i][j] for i in range(3) for j in range(3)]
    assert ec.all_zero(diffs, TANGENT)


def test_tensor_is_antisymmetric():
    R = fn.spray_curvature(fn.geodesic_spray(fn.FinslerFunction.parse(WARPED))).R
    assert all(R[(l, k, i, j)] is -R[(l, k, j, i)] for (l, k, i, j) in R)


def test_hyperbolic_flag_curvature_is_minus_one():
    ff = fn.FinslerFunction.parse(HYPERBOLIC)
    rng = np.random.default_rng(9)
    for pt in rand_tangent(rng, TANGENT, 5):
        W = rng.normal(size=3)
        assert fn.flag_curvature(ff, pt[:3], pt[3:], W) == pytest.approx(-1.0, abs=1e-9)


def test_euclidean_flag_curvature_vanishes():
    assert fn.flag_curvature(EUCLID, [1, 1, 1], [1, 0, 0], [0, 1, 0]) == 0.0


def test_degenerate_flag():
    with pytest.raises(fn.DegenerateFlagError):
        fn.flag_curvature(EUCLID, [1, 1, 1], [1, 2, 0], [2, 4, 0])


def test_non_isotropic_spray():
    S = fn.Spray((ec.ZERO, ec.parse("v0^2*v1/sqrt(v0^2 + v1^2 + v2^2)", TANGENT), ec.ZERO), TANGENT)
    assert ec.all_zero(S.homogeneity_residuals(), TANGENT)
    assert not fn.isotropy_check(S)
    assert max(f["residual"] for f in fn.isotropy_fit(S)) > 1e-3


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_flag_curvature_ignores_pole_component(seed, c):
    F4 = fn.randers_from_zermelo(fx.rotating_zermelo()).finsler(fx.ROTATING_FIBER)
    rng = np.random.default_rng(seed)
    pt = F4.ctx.sample(rng, 1)[0]
    W = rng.normal(size=3)
    k1 = fn.flag_curvature(F4, pt[:3], pt[3:], W)
    k2 = fn.flag_curvature(F4, pt[:3], pt[3:], W + c * pt[3:])
    assert k2 == pytest.approx(k1, rel=1e-7, abs=1e-9)


# -- Zermelo and Randers -----------------------------------------------------------------------


def test_zermelo_without_wind_gives_riemannian_data():
    rd = fn.randers_from_zermelo(zermelo(["1", "0", "0", "1", "0", "Y^2"], ["0", "0", "0"]))
    assert all(c.is_zero for c in rd.b)
    assert ec.exact_equal(rd.a[2][2], Y**2) and ec.exact_equal(rd.a[0][0], ec.ONE)


def test_example_zermelo_values():
    zd = fx.rotating_zermelo()
    rd = fn.randers_from_zermelo(zd)
    at = {"X": Fraction(1), "Y": Fraction(1, 2), "Z": Fraction(1)}
    assert ec.eval_exact(zd.lam(), at) == Fraction(3, 4)
    assert ec.eval_exact(rd.b[2], at) == Fraction(-1, 3)
    assert rd.b[0].is_zero and rd.b[1].is_zero


def test_zermelo_domain_error():
    with pytest.raises(ec.DomainError):
        fn.randers_from_zermelo(fx.rotating_zermelo((("Y", (0.5, 1.5)),)))


def test_example_randers_is_isotropic_with_constant_flag_curvature():
    F4 = fn.randers_from_zermelo(fx.rotating_zermelo()).finsler(fx.ROTATING_FIBER)
    assert fn.isotropy_check(fn.geodesic_spray(F4))
    rng = np.random.default_rng(11)
    ks = []
    for pt in F4.ctx.sample(rng, 10):
        for _ in range(3):
            ks.append(fn.flag_curvature(F4, pt[:3], pt[3:], rng.normal(size=3)))
    assert np.ptp(ks) <= 1e-6


# -- unparametrised geodesics -----------------------------------------------------------------


def test_euclidean_geodesics_are_lines():
    oracle = fn.unparametrized_geodesics(EUCLID)
    assert oracle(1.0, 1.0, 1.0, 0.3, -0.7) == (0.0, 0.0)
    with pytest.raises(fn.ChartError):
        oracle(1.0, 1.0, 1.0, 0.3, -0.7, v0=0)


def test_riemannian_geodesics_match_christoffel_oracle():
    F = randers(["1 + Y^2", "0", "0", "1", "0", "X^2 + 1"], ["0", "0", "0"])
    oracle = fn.unparametrized_geodesics(F)
    coords = ("X", "Y", "Z", "t")
    g = cv.Metric4.from_matrix(coords, [[1 + Y**2, 0, 0, 0], [0, 1, 0, 0], [0, 0, X**2 + 1, 0], [0, 0, 0, 1]])
    gam = cv.curvature(g).christoffel
    rng = np.random.default_rng(4)
    for x, y, z, p0, p1 in ec.Context(ps.COORDS).sample(rng, 10):
        v = np.array([1.0, p0, p1])
        env = {"X": x, "Y": y, "Z": z, "t": 0.0}
        G = np.array([[[ec.eval(gam[a][b][c], env) for c in range(3)] for b in range(3)] for a in range(3)])
        acc = -np.einsum("abc,b,c->a", G, v, v)
        want = (acc[1] - p0 * acc[0], acc[2] - p1 * acc[0])
        assert np.allclose(oracle(x, y, z, p0, p1), want, atol=1e-10)


def test_randers_geodesics_match_corrected_system():
    F4 = fn.randers_from_zermelo(fx.rotating_zermelo()).finsler(fx.ROTATING_FIBER)
    oracle = fn.unparametrized_geodesics(F4)
    s = fx.system("dsym")
    rng = np.random.default_rng(2)
    for pt in s.ctx.sample(rng, 10):
        want = ec.eval_many([s.F, s.G], dict(zip(ps.COORDS, pt)))
        assert np.allclose(oracle(*pt), want, rtol=1e-6, atol=1e-9)


def test_projective_reduction_of_submax_finsler():
    sys5 = fn.projective_system(fn.geodesic_spray(fx.submax_finsler()))
    assert ec.exact_is_zero(sys5.F)
    assert ec.exact_equal(sys5.G, ec.parse("-2*p0^3", ps.CANONICAL))


@settings(max_examples=6)
@given(st.integers(0, 2**32 - 1))
def test_killing_wind_over_flat_space_is_torsion_free(seed):
    rng = np.random.default_rng(seed)
    k, t = rng.uniform(-0.3, 0.3, size=2)
    W = [f"{Fraction(-k).limit_denominator(100)}*Y + {Fraction(t).limit_denominator(100)}",
         f"{Fraction(k).limit_denominator(100)}*X", "1/3"]
    F = randers(["1", "0", "0", "1", "0", "1"], W)
    oracle = fn.unparametrized_geodesics(F)
    for pt in ec.Context(ps.COORDS, {"p0": (-0.5, 0.5), "p1": (-0.5, 0.5)}).sample(rng, 10):
        assert np.max(np.abs(fn.numeric_wilczynski(oracle, pt))) <= 1e-4


def test_numeric_wilczynski_detects_torsion():
    oracle = lambda X, Y, Z, p0, p1: (Y, 0.0)  # noqa: E731
    T = fn.numeric_wilczynski(oracle, [1.0, 1.0, 1.0, 0.0, 0.0])
    assert np.allclose(T, np.diag([-0.5, 0.5]), atol=1e-8)


def test_submax_finsler_flag_curvature_vanishes():
    F5 = fx.submax_finsler()
    rng = np.random.default_rng(8)
    for pt in F5.ctx.sample(rng, 8):
        assert abs(fn.flag_curvature(F5, pt[:3], pt[3:], rng.normal(size=3))) <= 1e-7


# -- Euler–Lagrange ---------------------------------------------------------------------------


def el(text):
    return fn.euler_lagrange(ec.parse(text, ps.CANONICAL))


def test_euler_lagrange_examples():
    s5 = fn.euler_lagrange(fx.submax_lagrangian())
    assert ec.exact_is_zero(s5.F) and ec.exact_equal(s5.G, fx.system("submax").G)
    assert ps.is_torsion_free(s5)
    free = el("p0^2 + p1^2")
    assert free.F.is_zero and free.G.is_zero
    forced = el("2*p0*p1 + Y^2")
    assert forced.F.is_zero and ec.exact_equal(forced.G, Y)


def test_degenerate_lagrangian():
    with pytest.raises(fn.DegenerateLagrangianError):
        el("p0 + Y*p1")
