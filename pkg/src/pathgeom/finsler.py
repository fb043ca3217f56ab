"""Finsler functions, geodesic sprays, Jacobi endomorphisms and Zermelo navigation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import exprcore as ec
from .exprcore import Context, Expr, diff, subs
from .exprcore import expr as E
from .exprcore.errors import DomainError, PathGeomError
from .pathsys import COORDS, SecondOrderSystem

BASE = ("X", "Y", "Z")
FIBER = ("v0", "v1", "v2")
TANGENT = BASE + FIBER
V = tuple(E.var(n) for n in FIBER)
HALF = E.num(Fraction(1, 2))


class SingularMetricError(PathGeomError):
    pass


class DegenerateFlagError(PathGeomError):
    pass


class ChartError(PathGeomError):
    pass


class DegenerateLagrangianError(PathGeomError):
    pass


def _det3(m):
    return E.add(
        E.mul(m[0][0], E.sub(E.mul(m[1][1], m[2][2]), E.mul(m[1][2], m[2][1]))),
        E.neg(E.mul(m[0][1], E.sub(E.mul(m[1][0], m[2][2]), E.mul(m[1][2], m[2][0])))),
        E.mul(m[0][2], E.sub(E.mul(m[1][0], m[2][1]), E.mul(m[1][1], m[2][0]))),
    )


def inverse3(m):
    det = _det3(m)
    if det.is_zero:
        raise SingularMetricError("metric tensor is singular")
    inv_det = E.pow_(det, -1)
    out = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != j]
            c = [k for k in range(3) if k != i]
            minor = E.sub(E.mul(m[r[0]][c[0]], m[r[1]][c[1]]), E.mul(m[r[0]][c[1]], m[r[1]][c[0]]))
            out[i][j] = E.mul(minor, inv_det) if (i + j) % 2 == 0 else E.neg(E.mul(minor, inv_det))
    return out, det


@dataclass(frozen=True)
class FinslerFunction:
    F: Expr
    ctx: Context

    @classmethod
    def parse(cls, text: str, boxes: Mapping[str, tuple] | None = None):
        ctx = Context(TANGENT, boxes)
        return cls(ec.parse(text, ctx), ctx)

    @classmethod
    def of(cls, F: Expr, boxes=None):
        ctx = Context(TANGENT, boxes)
        ctx.check(F)
        return cls(F, ctx)

    def homogeneity_residual(self, c: Fraction = Fraction(3, 2)) -> Expr:
        scaled = subs(self.F, {n: E.mul(E.num(c), v) for n, v in zip(FIBER, V)})
        return E.sub(scaled, E.mul(E.num(c), self.F))


def metric_tensor(F: FinslerFunction):
    """f_ij = ½ ∂²ℱ²/∂v_i∂v_j."""
    F2 = E.pow_(F.F, 2)
    d1 = [diff(F2, v) for v in FIBER]
    return tuple(tuple(E.mul(HALF, diff(d1[i], FIBER[j])) for j in range(3)) for i in range(3))


def positive_definite(F: FinslerFunction, trials=ec.DEFAULT_TRIALS, seed=None) -> bool:
    f = metric_tensor(F)
    exprs = [f[i][j] for i in range(3) for j in range(3)]
    _, vals, _ = ec.sample_good_points(exprs, F.ctx, trials, seed)
    return all(np.all(np.linalg.eigvalsh(v.reshape(3, 3)) > 0) for v in vals)


@dataclass(frozen=True)
class Spray:
    """Geodesics solve ẍ^i + 2Γ^i(x, ẋ) = 0."""

    Gamma: tuple
    ctx: Context

    def first(self):
        return [[diff(self.Gamma[i], FIBER[j]) for j in range(3)] for i in range(3)]

    def second(self):
        g1 = self.first()
        return [[[diff(g1[i][j], FIBER[k]) for k in range(3)] for j in range(3)] for i in range(3)]

    def homogeneity_residuals(self) -> list:
        return [
            E.sub(E.add(*(E.mul(v, diff(G, n)) for v, n in zip(V, FIBER))), E.mul(E.num(2), G))
            for G in self.Gamma
        ]


def christoffel_like(f, verbatim: bool = True):
    """γ^i_jk = ½ f^il (∂_j f_lk + ∂_k f_jl − ∂_l f_jk), base derivatives only."""
    f = [[E._coerce(c) for c in row] for row in f]
    fi, _ = inverse3([list(r) for r in f])
    df = [[[diff(f[a][b], BASE[c]) for c in range(3)] for b in range(3)] for a in range(3)]
    gam = [[[None] * 3 for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            for k in range(j, 3):
                terms = []
                for l in range(3):
                    inner = E.add(df[l][k][j], df[j][l][k], E.neg(df[j][k][l]))
                    if not inner.is_zero:
                        terms.append(E.mul(fi[i][l], inner))
                gam[i][j][k] = gam[i][k][j] = E.mul(HALF, E.add(*terms))
    return gam


def geodesic_spray(source, verbatim: bool = True, boxes=None) -> Spray:
    """Spray of a Finsler function (or of a metric tensor f_ij with ``boxes``).

    ``verbatim`` contracts γ^i_jk built from base derivatives of f; otherwise
    Γ^i = ¼ f^il (∂²ℱ²/∂v_l∂X^m v^m − ∂ℱ²/∂X^l).
    """
    if isinstance(source, FinslerFunction):
        f = metric_tensor(source)
        ctx = source.ctx
    else:
        f = tuple(tuple(E._coerce(c) for c in row) for row in source)
        ctx = Context(TANGENT, boxes)
    if verbatim:
        gam = christoffel_like(f)
        G = []
        for i in range(3):
            terms = [E.mul(gam[i][j][k], V[j], V[k]) for j in range(3) for k in range(3) if not gam[i][j][k].is_zero]
            G.append(E.mul(HALF, E.add(*terms)))
        return Spray(tuple(G), ctx)
    if not isinstance(source, FinslerFunction):
        raise TypeError("the energy form of the spray needs the Finsler function itself")
    F2 = E.pow_(source.F, 2)
    fi, _ = inverse3([list(r) for r in f])
    dv = [diff(F2, n) for n in FIBER]
    rhs = []
    for l in range(3):
        mixed = E.add(*(E.mul(diff(dv[l], BASE[m]), V[m]) for m in range(3)))
        rhs.append(E.sub(mixed, diff(F2, BASE[l])))
    quarter = E.num(Fraction(1, 4))
    G = tuple(E.mul(quarter, E.add(*(E.mul(fi[i][l], rhs[l]) for l in range(3)))) for i in range(3))
    return Spray(G, ctx)


class SprayCurvature:
    """Riemann tensor R^l_kij of the Berwald connection and the Jacobi endomorphism.

    The endomorphism comes from first and second derivatives of Γ directly;
    the full tensor is built on demand and contracts to the same thing.
    """

    def __init__(self, S: Spray):
        self.spray = S
        self._R = None
        self._jac = None

    @property
    def jacobi(self) -> list:
        if self._jac is None:
            G = self.spray.Gamma
            G1 = self.spray.first()
            out = [[None] * 3 for _ in range(3)]
            for i in range(3):
                for k in range(3):
                    t = [E.mul(E.num(2), diff(G[i], BASE[k]))]
                    t += [E.neg(E.mul(V[j], diff(G1[i][k], BASE[j]))) for j in range(3)]
                    t += [E.mul(E.num(2), G[j], diff(G1[i][k], FIBER[j])) for j in range(3)]
                    t += [E.neg(E.mul(G1[i][j], G1[j][k])) for j in range(3)]
                    out[i][k] = E.add(*t)
            self._jac = out
        return self._jac

    @property
    def R(self) -> dict:
        if self._R is None:
            G1 = self.spray.first()
            G2 = self.spray.second()

            def H(i, e):
                return E.sub(diff(e, BASE[i]), E.add(*(E.mul(G1[j][i], diff(e, FIBER[j])) for j in range(3))))

            R = {}
            for l in range(3):
                for k in range(3):
                    for i in range(3):
                        R[(l, k, i, i)] = E.ZERO
                        for j in range(i + 1, 3):
                            t = [H(i, G2[l][j][k]), E.neg(H(j, G2[l][i][k]))]
                            for m in range(3):
                                t.append(E.mul(G2[l][i][m], G2[m][j][k]))
                                t.append(E.neg(E.mul(G2[l][j][m], G2[m][i][k])))
                            R[(l, k, i, j)] = E.add(*t)
                            R[(l, k, j, i)] = E.neg(R[(l, k, i, j)])
            self._R = R
        return self._R

    def contracted(self) -> list:
        """R^i_kjl v^k v^l."""
        R = self.R
        return [
            [E.add(*(E.mul(R[(i, k, j, l)], V[k], V[l]) for k in range(3) for l in range(3))) for j in range(3)]
            for i in range(3)
        ]


def spray_curvature(S: Spray) -> SprayCurvature:
    return SprayCurvature(S)


def _fit_isotropic(Rm: np.ndarray, v: np.ndarray):
    """Least-squares fit R^i_j ≈ ρ δ^i_j + τ_j v^i; returns (ρ, τ, residual)."""
    A = np.zeros((9, 4))
    b = Rm.reshape(9)
    for i in range(3):
        for j in range(3):
            r = 3 * i + j
            A[r, 0] = 1.0 if i == j else 0.0
            A[r, 1 + j] = v[i]
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = np.max(np.abs(A @ sol - b))
    return sol[0], sol[1:], res


def isotropy_fit(S: Spray, trials=ec.DEFAULT_TRIALS, seed=None, curv: SprayCurvature | None = None):
    curv = curv or spray_curvature(S)
    exprs = [curv.jacobi[i][j] for i in range(3) for j in range(3)]
    X, vals, _ = ec.sample_good_points(exprs, S.ctx, trials, seed)
    out = []
    for x, r in zip(X, vals):
        rho, tau, res = _fit_isotropic(r.reshape(3, 3), x[3:])
        out.append({"rho": float(rho), "tau": [float(t) for t in tau], "residual": float(res / (1 + np.max(np.abs(r))))})
    return out


def isotropy_check(S: Spray, trials=ec.DEFAULT_TRIALS, tol=1e-8, seed=None) -> bool:
    return all(f["residual"] <= tol for f in isotropy_fit(S, trials, seed))


class FlagCurvature:
    """Compiled flag-curvature evaluator K(x, v, V) for a Finsler function."""

    def __init__(self, F: FinslerFunction, verbatim: bool = True):
        self.F = F
        self.f = metric_tensor(F)
        self.spray = geodesic_spray(F, verbatim)
        self.curv = spray_curvature(self.spray)
        self.exprs = [self.f[i][j] for i in range(3) for j in range(3)] + [
            self.curv.jacobi[i][j] for i in range(3) for j in range(3)
        ]

    def __call__(self, x, v, W) -> float:
        pt = np.concatenate([np.asarray(x, float), np.asarray(v, float)])
        vals, _, bad = ec.evaluate_batch(self.exprs, TANGENT, pt[None, :])
        if bad[0] >= 0:
            raise ec.SingularEvaluationError(ec.evaluate._offender(self.exprs, TANGENT, bad[0]))
        f = vals[0, :9].reshape(3, 3)
        Rj = vals[0, 9:].reshape(3, 3)
        v = np.asarray(v, float)
        W = np.asarray(W, float)
        den = (v @ f @ v) * (W @ f @ W) - (v @ f @ W) ** 2
        scale = (v @ f @ v) * (W @ f @ W)
        if abs(den) <= 1e-12 * max(1.0, abs(scale)):
            raise DegenerateFlagError("flag direction is parallel to the pole")
        return float((W @ f @ (Rj @ W)) / den)


def flag_curvature(F: FinslerFunction, x, v, W, verbatim: bool = True) -> float:
    return _flag(F, verbatim)(x, v, W)


_flag_cache: dict = {}


def _flag(F, verbatim):
    key = (F.F, verbatim)
    fc = _flag_cache.get(key)
    if fc is None:
        fc = _flag_cache[key] = FlagCurvature(F, verbatim)
    return fc


# ---------------------------------------------------------------------------
# Zermelo navigation


@dataclass(frozen=True)
class ZermeloData:
    h: tuple  # 3x3 over (X, Y, Z)
    W: tuple
    ctx: Context

    @classmethod
    def parse(cls, upper: Sequence[str], W: Sequence[str], boxes=None):
        ctx = Context(BASE, boxes)
        vals = iter(ec.parse(s, ctx) for s in upper)
        h = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(i, 3):
                h[i][j] = h[j][i] = next(vals)
        return cls(tuple(map(tuple, h)), tuple(ec.parse(s, ctx) for s in W), ctx)

    def lowered_wind(self) -> tuple:
        return tuple(E.add(*(E.mul(self.h[i][j], self.W[j]) for j in range(3))) for i in range(3))

    def lam(self) -> Expr:
        Wl = self.lowered_wind()
        return E.sub(E.ONE, E.add(*(E.mul(Wl[i], self.W[i]) for i in range(3))))


@dataclass(frozen=True)
class RandersData:
    a: tuple
    b: tuple
    ctx: Context

    def finsler(self, fiber_boxes=None) -> FinslerFunction:
        quad = E.add(*(E.mul(self.a[i][j], V[i], V[j]) for i in range(3) for j in range(3)))
        lin = E.add(*(E.mul(self.b[i], V[i]) for i in range(3)))
        boxes = dict(self.ctx.boxes)
        boxes.update(fiber_boxes or {})
        return FinslerFunction.of(E.add(E.sqrt(quad), lin), boxes)


def _box_corners(ctx: Context):
    import itertools

    return np.array(list(itertools.product(*[ctx.box(n) for n in ctx.names])))


def randers_from_zermelo(zd: ZermeloData, trials=ec.DEFAULT_TRIALS, seed=None) -> RandersData:
    """a_ij = (λh_ij + W_iW_j)/λ², b_i = −W_i/λ with λ = 1 − h(W, W)."""
    lam = zd.lam()
    pts = np.vstack([_box_corners(zd.ctx), zd.ctx.sample(ec.evaluate.rng_for(seed), trials)])
    vals, _, bad = ec.evaluate_batch([lam], zd.ctx, pts)
    if np.any(bad >= 0) or np.any(vals[:, 0] <= 0):
        k = int(np.argmax((bad >= 0) | (vals[:, 0] <= 0)))
        raise DomainError(f"Zermelo condition 1 − h(W, W) > 0 fails at {dict(zip(zd.ctx.names, map(float, pts[k])))}")
    Wl = zd.lowered_wind()
    inv2 = E.pow_(lam, -2)
    a = tuple(
        tuple(E.mul(inv2, E.add(E.mul(lam, zd.h[i][j]), E.mul(Wl[i], Wl[j]))) for j in range(3)) for i in range(3)
    )
    b = tuple(E.neg(E.div(Wl[i], lam)) for i in range(3))
    return RandersData(a, b, zd.ctx)


# ---------------------------------------------------------------------------
# unparametrised geodesics and Lagrangians

_P = {"v0": E.ONE, "v1": E.var("p0"), "v2": E.var("p1")}


def projective_system(S: Spray, boxes=None) -> SecondOrderSystem:
    """Y'' = −2Γ^1 + 2p0Γ^0, Z'' = −2Γ^2 + 2p1Γ^0 with v = (1, p0, p1)."""
    G = [subs(g, _P) for g in S.Gamma]
    p0, p1 = E.var("p0"), E.var("p1")
    F = E.add(E.mul(E.num(-2), G[1]), E.mul(E.num(2), p0, G[0]))
    Gz = E.add(E.mul(E.num(-2), G[2]), E.mul(E.num(2), p1, G[0]))
    return SecondOrderSystem(F, Gz, Context(COORDS, boxes), "geodesics")


def unparametrized_geodesics(source, verbatim: bool = True) -> Callable:
    """Oracle (X, Y, Z, p0, p1) ↦ (Y'', Z'') for the geodesics in the chart v0 ≠ 0."""
    S = source if isinstance(source, Spray) else geodesic_spray(source, verbatim)
    exprs = list(S.Gamma)

    def oracle(X, Y, Z, p0, p1, v0: float = 1.0):
        if v0 == 0:
            raise ChartError("the chart needs v0 ≠ 0")
        pt = np.array([X, Y, Z, v0, v0 * p0, v0 * p1], float)
        vals, _, bad = ec.evaluate_batch(exprs, TANGENT, pt[None, :])
        if bad[0] >= 0:
            raise ec.SingularEvaluationError(ec.evaluate._offender(exprs, TANGENT, bad[0]))
        g0, g1, g2 = vals[0] / v0**2
        return float(-2 * g1 + 2 * p0 * g0), float(-2 * g2 + 2 * p1 * g0)

    oracle.spray = S
    return oracle


def euler_lagrange(L: Expr, boxes=None, trials=ec.DEFAULT_TRIALS, seed=None) -> SecondOrderSystem:
    """Solve d/dX ∂L/∂p^A − ∂L/∂Y^A = 0 for (Y'', Z'')."""
    ctx = Context(COORDS, boxes)
    ctx.check(L)
    ps = ("p0", "p1")
    ys = ("Y", "Z")
    Lp = [diff(L, p) for p in ps]
    H = [[diff(Lp[a], ps[b]) for b in range(2)] for a in range(2)]
    det = E.sub(E.mul(H[0][0], H[1][1]), E.mul(H[0][1], H[1][0]))
    if det.is_zero or ec.zero_test(det, ctx, trials, 1e-12, seed):
        raise DegenerateLagrangianError("the fiber Hessian of L is singular")
    rhs = []
    for a in range(2):
        t = [diff(L, ys[a]), E.neg(diff(Lp[a], "X"))]
        t += [E.neg(E.mul(E.var(ps[b]), diff(Lp[a], ys[b]))) for b in range(2)]
        rhs.append(E.add(*t))
    inv = E.pow_(det, -1)
    q0 = E.mul(inv, E.sub(E.mul(H[1][1], rhs[0]), E.mul(H[0][1], rhs[1])))
    q1 = E.mul(inv, E.sub(E.mul(H[0][0], rhs[1]), E.mul(H[1][0], rhs[0])))
    return SecondOrderSystem(ec.simplify(q0), ec.simplify(q1), ctx, "euler-lagrange")


def numeric_wilczynski(oracle: Callable, pt, h: float = 1e-3) -> np.ndarray:
    """Trace-free Wilczynski tensor of a black-box system by central differences."""
    pt = np.asarray(pt, float)

    def Fv(q):
        return np.array(oracle(*q))

    def d(fun, q, i):
        e = np.zeros(5)
        e[i] = h
        return (fun(q + e) - fun(q - e)) / (2 * h)

    def dP(q):  # 2x2, dP[a, b] = ∂F^a/∂p_b
        return np.stack([d(Fv, q, 3), d(Fv, q, 4)], axis=1)

    F0 = Fv(pt)
    J = dP(pt)
    dY = np.stack([d(Fv, pt, 1), d(Fv, pt, 2)], axis=1)
    total = d(dP, pt, 0) + pt[3] * d(dP, pt, 1) + pt[4] * d(dP, pt, 2) + F0[0] * d(dP, pt, 3) + F0[1] * d(dP, pt, 4)
    T = -dY - 0.25 * J @ J + 0.5 * total
    return T - 0.5 * np.trace(T) * np.eye(2)
