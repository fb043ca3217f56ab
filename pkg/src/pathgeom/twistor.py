"""Twistor lines from heavenly potentials, ODE extraction and the null-cone construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exprcore as ec
from .exprcore import Context, Expr, diff, subs
from .exprcore import expr as E
from .exprcore.errors import PathGeomError
from .exprcore.poly import Poly, Q, from_expr, gen_expr, gen_index, is_atom, resultant
from .exprcore.ratfunc import to_ratfunc

THETA_VARS = ("w", "z", "x", "y")
W, Zv, Xv, Yv = (E.var(n) for n in THETA_VARS)
LAM = E.var("X")


class NonPolynomialThetaError(PathGeomError):
    pass


class InconsistentRecursionError(PathGeomError):
    pass


class NoConvergenceError(PathGeomError):
    pass


class SingularJacobianError(PathGeomError):
    pass


class NotQuadraticError(PathGeomError):
    pass


class DegreeOverflowError(PathGeomError):
    pass


class NotRationalError(PathGeomError):
    pass


def _poly_integrate(p: Poly, v: str) -> Poly:
    g = gen_index(E.var(v))
    out = {}
    for m, c in p.terms.items():
        d = dict(m)
        e = d.get(g, 0) + 1
        d[g] = e
        out[tuple(sorted(d.items()))] = c / e
    return Poly(out)


def _poly_has(p: Poly, v: str) -> bool:
    return gen_index(E.var(v)) in p.gens()


def _check_polynomial_theta(theta: Expr):
    for node in E.postorder([theta]):
        if node.op == E.FUN or (node.op == E.POW and (node.val < 0 or node.val.denominator != 1)):
            raise NonPolynomialThetaError(f"Θ must be polynomial; found {node}")
    extra = theta.free - set(THETA_VARS)
    if extra:
        raise ec.UndeclaredVariableError(sorted(extra)[0], THETA_VARS)


def strip_low_order(theta: Expr) -> Expr:
    """Drop the part of Θ of degree ≤ 1 in (x, y); it does not affect the metric."""
    p = from_expr(theta)
    gx, gy = gen_index(Xv), gen_index(Yv)
    keep = {m: c for m, c in p.terms.items() if sum(e for g, e in m if g in (gx, gy)) >= 2}
    return Poly(keep).to_expr()


@dataclass(frozen=True)
class TwistorSeries:
    theta: Expr
    order: int
    a: tuple
    b: tuple
    exact_truncation: tuple  # (for 𝒴, for 𝒵)

    def curve(self, which: int = 0, param: Expr = LAM) -> Expr:
        cs = self.a if which == 0 else self.b
        return E.add(*(E.mul(c, E.pow_(param, k)) for k, c in enumerate(cs)))

    def family(self) -> "CurveFamily":
        return CurveFamily(self.curve(0), self.curve(1), THETA_VARS)


def _step(theta_d, prev: Poly):
    """Right-hand sides (∂_y a_k, ∂_x a_k) from a_{k-1}."""
    txy, tyy, txx = theta_d
    dw = prev_d(prev, "w")
    dz = prev_d(prev, "z")
    dx = prev_d(prev, "x")
    dy = prev_d(prev, "y")
    r1 = dw - txy * dy + tyy * dx
    r2 = -(dz + txx * dy - txy * dx)
    return r1, r2


def prev_d(p: Poly, v: str) -> Poly:
    g = gen_index(E.var(v))
    out = {}
    for m, c in p.terms.items():
        d = dict(m)
        e = d.get(g, 0)
        if e == 0:
            continue
        if e == 1:
            del d[g]
        else:
            d[g] = e - 1
        out[tuple(sorted(d.items()))] = c * e
    return Poly(out)


def _solve_order(r1: Poly, r2: Poly) -> Poly:
    cross = prev_d(r1, "x") - prev_d(r2, "y")
    if not cross.is_zero():
        raise InconsistentRecursionError("cross derivatives disagree; Θ violates the heavenly equation")
    part = _poly_integrate(r1, "y")
    rest = r2 - prev_d(part, "x")
    if _poly_has(rest, "y"):  # pragma: no cover - excluded by the cross check
        raise InconsistentRecursionError("x-equation depends on y")
    return part + _poly_integrate(rest, "x")


def twistor_series(theta: Expr, order: int = 8, check: bool = True) -> TwistorSeries:
    """Coefficients of 𝒴 = Σ a_k λ^k, 𝒵 = Σ b_k λ^k through λ^order."""
    _check_polynomial_theta(theta)
    if order < 1:
        raise ValueError("order must be at least 1")
    th = from_expr(theta)
    txy = prev_d(prev_d(th, "x"), "y")
    tyy = prev_d(prev_d(th, "y"), "y")
    txx = prev_d(prev_d(th, "x"), "x")
    a = [Poly.gen(W)]
    b = [Poly.gen(Zv)]
    for _ in range(order):
        a.append(_solve_order(*_step((txy, tyy, txx), a[-1])))
        b.append(_solve_order(*_step((txy, tyy, txx), b[-1])))

    def truncates(cs):
        return any(cs[k].is_zero() and cs[k + 1].is_zero() for k in range(1, len(cs) - 1))

    series = TwistorSeries(
        theta, order, tuple(p.to_expr() for p in a), tuple(p.to_expr() for p in b), (truncates(a), truncates(b))
    )
    if check:
        mism = expansion_mismatch(series)
        if mism:
            raise InconsistentRecursionError(f"low-order coefficients disagree with Θ: {mism}")
    return series


def expected_low_orders(theta: Expr) -> dict:
    """a1 = y, b1 = −x, a2 = −Θ_x, b2 = −Θ_y, a3 = Θ_z, b3 = −Θ_w, for Θ without its low (x, y) part."""
    t = strip_low_order(theta)
    return {
        ("a", 0): W, ("b", 0): Zv, ("a", 1): Yv, ("b", 1): E.neg(Xv),
        ("a", 2): E.neg(diff(t, "x")), ("b", 2): E.neg(diff(t, "y")),
        ("a", 3): diff(t, "z"), ("b", 3): E.neg(diff(t, "w")),
    }


def expansion_mismatch(series: TwistorSeries) -> list:
    bad = []
    for (which, k), want in expected_low_orders(series.theta).items():
        cs = series.a if which == "a" else series.b
        if k >= len(cs):
            continue
        if not from_expr(E.sub(cs[k], want)).is_zero():
            bad.append(f"{which}{k}")
    return bad


# ---------------------------------------------------------------------------
# curve families


@dataclass(frozen=True)
class CurveFamily:
    """Curves X ↦ (𝒴, 𝒵) labelled by four parameters."""

    Y: Expr
    Z: Expr
    params: tuple = THETA_VARS
    seed: tuple | None = None  # expressions in (X, Y, Z, p0, p1) for the Newton start
    boxes: tuple = field(default=())

    def __post_init__(self):
        allowed = set(self.params) | {"X"}
        for e in (self.Y, self.Z):
            extra = e.free - allowed
            if extra:
                raise ec.UndeclaredVariableError(sorted(extra)[0], tuple(allowed))
        if len(self.params) != 4:
            raise ValueError("a curve family needs four parameters")

    @classmethod
    def parse(cls, Ys: str, Zs: str, params=THETA_VARS, seed=None, boxes=None):
        ctx = Context(("X",) + tuple(params))
        sd = None
        if seed is not None:
            sctx = Context(("X", "Y", "Z", "p0", "p1"))
            sd = tuple(ec.parse(s, sctx) for s in seed)
        return cls(ec.parse(Ys, ctx), ec.parse(Zs, ctx), tuple(params), sd, tuple((boxes or {}).items()))

    @property
    def ctx(self) -> Context:
        return Context(("X",) + self.params, dict(self.boxes))


def default_seed(X, Y, Z, p0, p1):
    return np.array([Y - X * p0, Z - X * p1, -p1, p0])


@dataclass
class _Solver:
    fam: CurveFamily

    def __post_init__(self):
        f = self.fam
        self.names = ("X",) + f.params
        dY, dZ = diff(f.Y, "X"), diff(f.Z, "X")
        self.eqs = [f.Y, f.Z, dY, dZ]
        self.jac = [diff(e, p) for e in self.eqs for p in f.params]
        self.second = [diff(dY, "X"), diff(dZ, "X")]
        seed = list(f.seed) if f.seed is not None else []
        self.seed_exprs = seed

    def _eval(self, exprs, x, u):
        vals, _, bad = ec.evaluate_batch(exprs, self.names, np.concatenate(([x], u))[None, :])
        if bad[0] >= 0:
            raise ec.SingularEvaluationError(ec.evaluate._offender(exprs, self.names, bad[0]))
        return vals[0]

    def solve(self, pt, tol=1e-12, max_iter=50, seed=None):
        x, Yv_, Zv_, p0, p1 = map(float, pt)
        target = np.array([Yv_, Zv_, p0, p1])
        if seed is not None:
            u = np.asarray(seed, float)
        elif self.seed_exprs:
            env = {"X": x, "Y": Yv_, "Z": Zv_, "p0": p0, "p1": p1}
            u = np.array([ec.eval(s, env) for s in self.seed_exprs])
        else:
            u = default_seed(x, Yv_, Zv_, p0, p1)

        def resid(u):
            return self._eval(self.eqs, x, u) - target

        r = resid(u)
        for _ in range(max_iter):
            nr = np.linalg.norm(r)
            if nr <= tol * (1 + np.linalg.norm(target)):
                return u
            J = self._eval(self.jac, x, u).reshape(4, 4)
            try:
                if np.linalg.cond(J) > 1e14:
                    raise np.linalg.LinAlgError
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                raise SingularJacobianError(f"singular Jacobian at parameters {u}") from None
            t = 1.0
            for _ in range(30):
                cand = u + t * step
                try:
                    rc = resid(cand)
                except ec.SingularEvaluationError:
                    rc = None
                if rc is not None and np.linalg.norm(rc) < nr:
                    break
                t *= 0.5
            else:
                raise NoConvergenceError("line search failed")
            u, r = cand, rc
        if np.linalg.norm(r) <= max(tol, 1e-10) * (1 + np.linalg.norm(target)):
            return u
        raise NoConvergenceError(f"Newton did not converge in {max_iter} iterations")


_solvers: dict = {}


def _solver(fam: CurveFamily) -> _Solver:
    key = (fam.Y, fam.Z, fam.params, fam.seed)
    s = _solvers.get(key)
    if s is None:
        s = _solvers[key] = _Solver(fam)
    return s


def extract_system(source, pt, tol=1e-12, max_iter=50, seed=None):
    """(F, G) at pt = (X, Y, Z, p0, p1) from the curve through it."""
    fam = source.family() if isinstance(source, TwistorSeries) else source
    s = _solver(fam)
    u = s.solve(pt, tol, max_iter, seed)
    F, G = s._eval(s.second, float(pt[0]), u)
    return float(F), float(G)


def extract_parameters(source, pt, tol=1e-12, max_iter=50, seed=None) -> np.ndarray:
    fam = source.family() if isinstance(source, TwistorSeries) else source
    return _solver(fam).solve(pt, tol, max_iter, seed)


# ---------------------------------------------------------------------------
# null cone


@dataclass(frozen=True)
class QuadraticForm4:
    coords: tuple
    q: tuple  # 4x4 symmetric matrix of expressions

    def components(self) -> list:
        return [self.q[i][j] for i in range(4) for j in range(i, 4)]

    def to_metric(self, boxes=None):
        from .curvature import Metric4

        return Metric4.from_matrix(self.coords, self.q, boxes)

    def as_terms(self) -> dict:
        out = {}
        for i in range(4):
            for j in range(i, 4):
                c = self.q[i][j]
                if not c.is_zero:
                    key = f"d{self.coords[i]}^2" if i == j else f"d{self.coords[i]} d{self.coords[j]}"
                    out[key] = ec.to_text(c if i == j else E.mul(E.num(2), c))
        return out


def _deltas(params):
    return tuple(E.var(f"d_{p}") for p in params)


def variations(fam: CurveFamily):
    ds = _deltas(fam.params)
    dY = E.add(*(E.mul(diff(fam.Y, p), d) for p, d in zip(fam.params, ds)))
    dZ = E.add(*(E.mul(diff(fam.Z, p), d) for p, d in zip(fam.params, ds)))
    return dY, dZ, ds


def _cleared_numerator(e: Expr) -> Poly:
    r = to_ratfunc(e)
    polys = [r.num] + [f for f, _ in r.den.values()]
    for p in polys:
        for g in p.gens():
            atom = gen_expr(g)
            if atom.op != E.VAR and "X" in atom.free:
                raise NotRationalError(f"variation is not rational in X (atom {atom}); supply the cleared form")
    return r.num


def _linear_factor_candidates(p: Poly, ds) -> list:
    out = []
    coeffs = p.coeffs_in(LAM)
    for k in (max(coeffs), min(coeffs)):
        c = coeffs[k]
        hp = c.homogeneous_parts(ds)
        if set(hp) == {1}:
            _, prim = c.primitive()
            mono = prim.monomial_content()
            ds_idx = {gen_index(d) for d in ds}
            mono = tuple((g, e) for g, e in mono if g not in ds_idx)
            if mono:
                prim = prim.div_monomial(mono)
            out.append(prim)
    return out


def null_cone(fam: CurveFamily, max_degree: int = 4) -> QuadraticForm4:
    dY, dZ, ds = variations(fam)
    A = _cleared_numerator(dY)
    B = _cleared_numerator(dZ)
    for p in (A, B):
        if p.degree(LAM) > max_degree:
            raise DegreeOverflowError(f"degree {p.degree(LAM)} in X exceeds {max_degree}")
    res = resultant(A, B, LAM)
    if res.is_zero():
        raise NotQuadraticError("resultant vanishes identically")
    for f in _linear_factor_candidates(A, ds) + _linear_factor_candidates(B, ds):
        while res.total_degree(ds) > 2:
            q = res.exact_div(f)
            if q is None:
                break
            res = q
    parts = res.homogeneous_parts(ds)
    low = min(parts)
    if low != 2:
        raise NotQuadraticError(f"lowest homogeneous part in the variations has degree {low}")
    quad = parts[2]
    _, quad = quad.primitive()
    mono = quad.monomial_content()
    ds_idx = {gen_index(d) for d in ds}
    mono = tuple((g, e) for g, e in mono if g not in ds_idx)
    if mono:
        quad = quad.div_monomial(mono)
    idx = [gen_index(d) for d in ds]
    q = [[E.ZERO] * 4 for _ in range(4)]
    for m, c in quad.terms.items():
        dpart = [(g, e) for g, e in m if g in idx]
        rest = tuple((g, e) for g, e in m if g not in idx)
        mono_expr = Poly({rest: c}).to_expr()
        if len(dpart) == 1:
            i = idx.index(dpart[0][0])
            q[i][i] = E.add(q[i][i], mono_expr)
        else:
            i, j = sorted(idx.index(g) for g, _ in dpart)
            h = E.mul(E.num(Fraction(1, 2)), mono_expr)
            q[i][j] = E.add(q[i][j], h)
    for i in range(4):
        for j in range(i):
            q[i][j] = q[j][i]
    return QuadraticForm4(tuple(fam.params), tuple(map(tuple, q)))


def proportional(q1, q2, ctx: Context, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> bool:
    """True iff the two symmetric forms agree up to a scalar function."""
    a = _components(q1)
    b = _components(q2)
    minors = []
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            minors.append(E.sub(E.mul(a[i], b[j]), E.mul(a[j], b[i])))
    nonzero = [m for m in minors if not m.is_zero]
    if not ec.all_zero(nonzero, ctx, trials, tol, seed):
        return False
    # both zero forms are proportional; one zero and one nonzero is not
    za = ec.all_zero(a, ctx, trials, tol, seed)
    zb = ec.all_zero(b, ctx, trials, tol, seed)
    return za == zb


def _components(q) -> list:
    if isinstance(q, QuadraticForm4):
        return q.components()
    if hasattr(q, "g"):
        m = q.g
    else:
        m = q
    return [m[i][j] for i in range(4) for j in range(i, 4)]
