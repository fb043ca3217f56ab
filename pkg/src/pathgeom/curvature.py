"""Levi-Civita curvature of split-signature 4-metrics, heavenly and Gibbons–Hawking data."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import exprcore as ec
from .exprcore import Context, Expr, diff, simplify
from .exprcore import expr as E
from .exprcore.errors import DomainError, PathGeomError

HALF = E.num(Fraction(1, 2))


class DegenerateMetricError(PathGeomError):
    pass


def det_expr(m) -> Expr:
    """Cofactor expansion, skipping structural zeros."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return E.sub(E.mul(m[0][0], m[1][1]), E.mul(m[0][1], m[1][0]))
    terms = []
    for j in range(n):
        if m[0][j].is_zero:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        t = E.mul(m[0][j], det_expr(minor))
        terms.append(t if j % 2 == 0 else E.neg(t))
    return E.add(*terms)


def inverse_expr(m, simp=True):
    n = len(m)
    det = det_expr(m)
    if simp:
        det = simplify(det)
    if det.is_zero:
        raise DegenerateMetricError("metric determinant vanishes identically")
    inv_det = E.pow_(det, -1)
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:i] + row[i + 1:] for k, row in enumerate(m) if k != j]
            c = det_expr(minor)
            if (i + j) % 2:
                c = E.neg(c)
            v = E.mul(c, inv_det)
            inv[i][j] = simplify(v) if simp else v
    return inv, det


@dataclass(frozen=True)
class Metric4:
    coords: tuple
    g: tuple
    ctx: Context = field(compare=False)
    simplify: bool = field(default=True, compare=False)

    def __post_init__(self):
        n = len(self.coords)
        if n != 4 or len(self.g) != 4 or any(len(r) != 4 for r in self.g):
            raise ValueError("Metric4 needs 4 coordinates and a 4x4 matrix")
        for i in range(4):
            for j in range(i + 1, 4):
                if self.g[i][j] is not self.g[j][i]:
                    raise ValueError("metric matrix must be symmetric")
        for row in self.g:
            for c in row:
                self.ctx.check(c)

    @classmethod
    def from_matrix(cls, coords: Sequence[str], g, boxes: Mapping[str, tuple] | None = None, simplify=True):
        ctx = Context(coords, boxes)
        gg = [[E._coerce(g[i][j]) for j in range(4)] for i in range(4)]
        for i in range(4):
            for j in range(i):
                gg[i][j] = gg[j][i]
        return cls(tuple(coords), tuple(map(tuple, gg)), ctx, simplify)

    @classmethod
    def from_quadratic(cls, coords, terms: Mapping[tuple, Expr], boxes=None, simplify=True):
        """Build from a quadratic form Σ c_(a,b) d a d b; ``dw dx`` means g_wx = 1/2."""
        g = [[E.ZERO] * 4 for _ in range(4)]
        for (a, b), c in terms.items():
            i, j = coords.index(a), coords.index(b)
            c = E._coerce(c)
            if i == j:
                g[i][i] = E.add(g[i][i], c)
            else:
                h = E.mul(HALF, c)
                g[i][j] = E.add(g[i][j], h)
                g[j][i] = g[i][j]
        return cls.from_matrix(coords, g, boxes, simplify)

    @classmethod
    def parse(cls, coords, upper: Sequence[str], boxes=None):
        """``upper`` lists g_00, g_01, g_02, g_03, g_11, ... (10 strings)."""
        if len(upper) != 10:
            raise ValueError("expected 10 upper-triangle components")
        ctx = Context(coords, boxes)
        vals = iter(ec.parse(s, ctx) for s in upper)
        g = [[None] * 4 for _ in range(4)]
        for i in range(4):
            for j in range(i, 4):
                g[i][j] = next(vals)
                g[j][i] = g[i][j]
        return cls(tuple(coords), tuple(map(tuple, g)), ctx)

    def scaled(self, factor) -> "Metric4":
        f = E._coerce(factor)
        g = [[E.mul(f, self.g[i][j]) for j in range(4)] for i in range(4)]
        return Metric4.from_matrix(self.coords, g, dict(self.ctx.boxes), self.simplify)

    def quadratic(self):
        return self.g

    @cached_property
    def _inverse(self):
        return inverse_expr([list(r) for r in self.g], self.simplify)

    @property
    def inverse(self):
        return self._inverse[0]

    @property
    def det(self) -> Expr:
        return self._inverse[1]

    def check_nondegenerate(self, trials=ec.DEFAULT_TRIALS, seed=None):
        if ec.zero_test(self.det, self.ctx, trials, 1e-12, seed):
            raise DegenerateMetricError("metric determinant vanishes on the domain box")


@dataclass
class CurvaturePack:
    metric: Metric4
    christoffel: list  # [a][b][c]
    riemann: dict  # (a, b, c, d) -> R^a_bcd
    riemann_lower: dict
    ricci: list
    scalar: Expr
    weyl: dict

    def components(self, which: str) -> list:
        if which == "ricci":
            return [self.ricci[i][j] for i in range(4) for j in range(i, 4)]
        if which == "weyl":
            return list(self.weyl.values())
        if which == "riemann":
            return list(self.riemann_lower.values())
        raise KeyError(which)


def curvature(m: Metric4) -> CurvaturePack:
    simp = simplify if m.simplify else (lambda e: e)
    g, gi = m.g, m.inverse
    xs = m.coords
    n = 4
    dg = [[[diff(g[a][b], xs[c]) for c in range(n)] for b in range(n)] for a in range(n)]
    # Γ_d,bc lowered first, then raised
    low = [[[E.mul(HALF, E.add(dg[d][c][b], dg[d][b][c], E.neg(dg[b][c][d]))) for c in range(n)] for b in range(n)] for d in range(n)]
    gam = [[[None] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(b, n):
                v = simp(E.add(*(E.mul(gi[a][d], low[d][b][c]) for d in range(n) if not gi[a][d].is_zero and not low[d][b][c].is_zero)))
                gam[a][b][c] = gam[a][c][b] = v
    riem = {}
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(c + 1, n):
                    t = [diff(gam[a][d][b], xs[c]), E.neg(diff(gam[a][c][b], xs[d]))]
                    for e in range(n):
                        t.append(E.mul(gam[a][c][e], gam[e][d][b]))
                        t.append(E.neg(E.mul(gam[a][d][e], gam[e][c][b])))
                    v = simp(E.add(*t))
                    riem[(a, b, c, d)] = v
                    riem[(a, b, d, c)] = E.neg(v)
                riem[(a, b, c, c)] = E.ZERO
    lower = {}
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    lower[(a, b, c, d)] = E.add(*(E.mul(g[a][e], riem[(e, b, c, d)]) for e in range(n) if not g[a][e].is_zero))
    ric = [[None] * n for _ in range(n)]
    for b in range(n):
        for d in range(b, n):
            v = simp(E.add(*(riem[(a, b, a, d)] for a in range(n))))
            ric[b][d] = ric[d][b] = v
    R = simp(E.add(*(E.mul(gi[b][d], ric[b][d]) for b in range(n) for d in range(n) if not gi[b][d].is_zero)))
    weyl = {}
    sixth = E.mul(E.num(Fraction(1, 6)), R)
    for a, b, c, d in itertools.product(range(n), repeat=4):
        t = E.add(
            lower[(a, b, c, d)],
            E.mul(E.num(Fraction(-1, 2)), E.add(
                E.mul(g[a][c], ric[b][d]), E.neg(E.mul(g[a][d], ric[b][c])),
                E.neg(E.mul(g[b][c], ric[a][d])), E.mul(g[b][d], ric[a][c]),
            )),
            E.mul(sixth, E.sub(E.mul(g[a][c], g[b][d]), E.mul(g[a][d], g[b][c]))),
        )
        weyl[(a, b, c, d)] = t
    return CurvaturePack(m, gam, riem, lower, ric, R, weyl)


_pack_cache: dict = {}


def curvature_cached(m: Metric4) -> CurvaturePack:
    key = (m.coords, m.g)
    hit = _pack_cache.get(key)
    if hit is None:
        hit = _pack_cache[key] = curvature(m)
    return hit


def identity_residuals(pack: CurvaturePack) -> dict:
    """Expressions that vanish for any Levi-Civita curvature."""
    R = pack.riemann_lower
    n = 4
    out = {"pair_antisymmetry": [], "pair_symmetry": [], "bianchi": [], "weyl_trace": []}
    for a, b, c, d in itertools.product(range(n), repeat=4):
        if a < b and c < d:
            out["pair_antisymmetry"].append(E.add(R[(a, b, c, d)], R[(b, a, c, d)]))
            if (a, b) < (c, d):
                out["pair_symmetry"].append(E.sub(R[(a, b, c, d)], R[(c, d, a, b)]))
        if b < c < d:
            out["bianchi"].append(E.add(R[(a, b, c, d)], R[(a, c, d, b)], R[(a, d, b, c)]))
    gi = pack.metric.inverse
    C = pack.weyl
    for b in range(n):
        for d in range(b, n):
            out["weyl_trace"].append(
                E.add(*(E.mul(gi[a][c], C[(a, b, c, d)]) for a in range(n) for c in range(n) if not gi[a][c].is_zero))
            )
    return out


def is_ricci_flat(m: Metric4, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> bool:
    return ec.all_zero(curvature_cached(m).components("ricci"), m.ctx, trials, tol, seed)


def einstein_residuals(pack: CurvaturePack) -> list:
    g = pack.metric.g
    q = E.mul(E.num(Fraction(1, 4)), pack.scalar)
    return [E.sub(pack.ricci[i][j], E.mul(q, g[i][j])) for i in range(4) for j in range(i, 4)]


def einstein_lambda(m: Metric4, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None):
    """Λ with R_ab = Λ g_ab if the metric is Einstein with constant Λ, else None."""
    pack = curvature_cached(m)
    if not ec.all_zero(einstein_residuals(pack), m.ctx, trials, tol, seed):
        return None
    lam = E.mul(E.num(Fraction(1, 4)), pack.scalar)
    X, vals, _ = ec.sample_good_points([lam], m.ctx, trials, seed)
    v = vals[:, 0]
    if np.ptp(v) > tol * (1 + np.max(np.abs(v))) * 1e3:
        return None
    return float(np.mean(v))


# ---------------------------------------------------------------------------
# self-duality through the Hodge star on two-forms

PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _levi_civita():
    eps = np.zeros((4, 4, 4, 4))
    for p in itertools.permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j])
        eps[p] = -1.0 if inv % 2 else 1.0
    return eps


_EPS = _levi_civita()


def star_matrix(g: np.ndarray, orientation: int = 1) -> np.ndarray:
    """Matrix of the Hodge star on the basis dx^a∧dx^b (a<b) of 2-forms."""
    gi = np.linalg.inv(g)
    vol = orientation * np.sqrt(abs(np.linalg.det(g)))
    S = np.zeros((6, 6))
    for col, (e, f) in enumerate(PAIRS):
        # ω = dx^e∧dx^f: ω_cd = δ^ef_cd, raised ω^cd = gi[c,e]gi[d,f] − gi[c,f]gi[d,e]
        up = np.outer(gi[:, e], gi[:, f]) - np.outer(gi[:, f], gi[:, e])
        for row, (a, b) in enumerate(PAIRS):
            S[row, col] = 0.5 * vol * np.sum(_EPS[a, b] * up)
    return S


def weyl_operator(C: np.ndarray, g: np.ndarray) -> np.ndarray:
    """ω_ab ↦ ½ C_ab^cd ω_cd on the same 2-form basis."""
    gi = np.linalg.inv(g)
    Cup = np.einsum("abef,ec,fd->abcd", C, gi, gi)
    W = np.zeros((6, 6))
    for col, (e, f) in enumerate(PAIRS):
        for row, (a, b) in enumerate(PAIRS):
            W[row, col] = Cup[a, b, e, f]
    return W


def _weyl_samples(m: Metric4, trials, seed):
    pack = curvature_cached(m)
    exprs = [m.g[i][j] for i in range(4) for j in range(4)] + [pack.weyl[k] for k in itertools.product(range(4), repeat=4)]
    _, vals, scales = ec.sample_good_points(exprs, m.ctx, trials, seed)
    gs = vals[:, :16].reshape(-1, 4, 4)
    Cs = vals[:, 16:].reshape(-1, 4, 4, 4, 4)
    return gs, Cs, scales[:, 16:]


def sd_residual(m: Metric4, orientation: int, trials=ec.DEFAULT_TRIALS, seed=None) -> float:
    """Largest relative size of the self-dual Weyl part over sampled points."""
    gs, Cs, scales = _weyl_samples(m, trials, seed)
    worst = 0.0
    for g, C, sc in zip(gs, Cs, scales):
        S = star_matrix(g, orientation)
        W = weyl_operator(C, g)
        proj = W @ (0.5 * (np.eye(6) + S))
        size = np.max(np.abs(proj))
        ref = 1.0 + max(np.max(np.abs(W)), np.max(np.abs(sc)))
        worst = max(worst, size / ref)
    return worst


def sd_weyl_norm(m: Metric4, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> tuple:
    """(asd, orientation): whether some orientation kills the self-dual Weyl part."""
    for orientation, label in ((1, "+"), (-1, "-")):
        if sd_residual(m, orientation, trials, seed) <= tol:
            return True, label
    return False, None


def is_asd(m: Metric4, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> bool:
    return sd_weyl_norm(m, trials, tol, seed)[0]


def curvature_report(m: Metric4, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> dict:
    asd, orient = sd_weyl_norm(m, trials, tol, seed)
    return {
        "ricci_flat": is_ricci_flat(m, trials, tol, seed),
        "einstein_lambda": einstein_lambda(m, trials, tol, seed),
        "asd": asd,
        "orientation": orient if orient is not None else "+",
    }


# ---------------------------------------------------------------------------
# heavenly potentials

THETA_COORDS = ("w", "z", "x", "y")


def _d(theta, *vs):
    return ec.diff_many(theta, vs)


def heavenly_metric(theta: Expr, boxes=None) -> Metric4:
    """dw dx + dz dy − Θ_xx dz² − Θ_yy dw² + 2Θ_xy dw dz."""
    terms = {
        ("w", "x"): E.ONE,
        ("z", "y"): E.ONE,
        ("z", "z"): E.neg(_d(theta, "x", "x")),
        ("w", "w"): E.neg(_d(theta, "y", "y")),
        ("w", "z"): E.mul(E.num(2), _d(theta, "x", "y")),
    }
    return Metric4.from_quadratic(THETA_COORDS, terms, boxes)


def weyl_spinor(theta: Expr) -> tuple:
    """ψ_k, k = 0..4: fourth derivatives with index 0 ↦ ∂_y and 1 ↦ −∂_x."""
    out = []
    for k in range(5):
        e = ec.diff_many(theta, ["y"] * (4 - k) + ["x"] * k)
        out.append(E.neg(e) if k % 2 else e)
    return tuple(out)


def lax_commutator(theta: Expr):
    """Components of [L0, L1] on (w, z, x, y), polynomial in the variable ``lam``."""
    lam = E.var("lam")
    txy, tyy, txx = _d(theta, "x", "y"), _d(theta, "y", "y"), _d(theta, "x", "x")
    # component order (w, z, x, y)
    L0 = (E.neg(lam), E.ZERO, E.neg(E.mul(lam, tyy)), E.add(E.ONE, E.mul(lam, txy)))
    L1 = (E.ZERO, lam, E.add(E.ONE, E.neg(E.mul(lam, txy))), E.mul(lam, txx))

    def apply(v, f):
        return E.add(*(E.mul(c, diff(f, x)) for c, x in zip(v, THETA_COORDS) if not c.is_zero))

    comm = tuple(E.sub(apply(L0, b), apply(L1, a)) for a, b in zip(L0, L1))
    # remove the part along L0 and L1 read off from the w and z slots
    alpha = E.div(comm[0], E.neg(lam))
    beta = E.div(comm[1], lam)
    red = tuple(E.sub(comm[i], E.add(E.mul(alpha, L0[i]), E.mul(beta, L1[i]))) for i in range(4))
    return comm, red


def lax_frobenius(theta: Expr, ctx: Context | None = None, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None, degree: int = 4) -> bool:
    ctx = ctx or Context(THETA_COORDS)
    _, red = lax_commutator(theta)
    coeffs = []
    for comp in red:
        for k in range(degree + 1):
            ck = ec.subs(ec.diff(comp, "lam", k), {"lam": E.ZERO})
            coeffs.append(ck)
    return ec.all_zero(coeffs, ctx, trials, tol, seed)


# ---------------------------------------------------------------------------
# Gibbons–Hawking

GH_COORDS = ("w", "y", "t", "z")


@dataclass(frozen=True)
class GHData:
    H: Expr

    @property
    def V(self) -> Expr:
        return _d(self.H, "t", "t")

    @property
    def A(self) -> tuple:
        """Components (A_w, A_y, A_t)."""
        return (_d(self.H, "t", "y"), E.mul(E.num(Fraction(-1, 2)), self.V), E.ZERO)


def gh_metric(d: GHData, boxes=None, trials=ec.DEFAULT_TRIALS, seed=None) -> Metric4:
    V = d.V
    ctx = Context(GH_COORDS, boxes)
    if V.is_zero or ec.zero_test(V, ctx, trials, 1e-12, seed):
        raise DomainError("V = H_tt vanishes; Gibbons–Hawking metric is degenerate")
    Aw, Ay, _ = d.A
    # one-form dz + A over (w, y, t, z)
    form = (Aw, Ay, E.ZERO, E.ONE)
    flat = {("y", "y"): E.num(Fraction(1, 4)), ("w", "t"): HALF}
    g = [[E.ZERO] * 4 for _ in range(4)]
    for (a, b), c in flat.items():
        i, j = GH_COORDS.index(a), GH_COORDS.index(b)
        g[i][j] = g[j][i] = E.mul(V, c)
    inv_v = E.pow_(V, -1)
    for i in range(4):
        for j in range(4):
            g[i][j] = E.sub(g[i][j], E.mul(inv_v, form[i], form[j]))
    return Metric4.from_matrix(GH_COORDS, g, boxes)


def gh_wave_residual(d: GHData) -> Expr:
    return E.add(_d(d.H, "t", "w"), _d(d.H, "y", "y"))


def monopole_residual(d: GHData) -> tuple:
    """Components (wy, wt, yt) of *dV − dA on ¼dy² + dw dt, orientation dw∧dy∧dt."""
    V = d.V
    Aw, Ay, At = d.A
    h = np.array([[0, 0, 0.5], [0, 0.25, 0], [0.5, 0, 0]])
    hinv = np.linalg.inv(h)
    vol = Fraction(1, 4)  # sqrt|det h|
    coords = ("w", "y", "t")
    dV = [diff(V, c) for c in coords]
    up = [E.add(*(E.mul(E.num(Fraction(hinv[a, b]).limit_denominator()), dV[b]) for b in range(3) if hinv[a, b])) for a in range(3)]
    eps3 = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}

    def star(b, c):
        return E.add(*(E.mul(E.num(vol * eps3[(a, b, c)]), up[a]) for a in range(3) if (a, b, c) in eps3))

    A = (Aw, Ay, At)

    def dA(b, c):
        return E.sub(diff(A[c], coords[b]), diff(A[b], coords[c]))

    return tuple(E.sub(star(b, c), dA(b, c)) for b, c in ((0, 1), (0, 2), (1, 2)))
