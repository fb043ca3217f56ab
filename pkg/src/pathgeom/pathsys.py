"""Second-order ODE pairs Y'' = F, Z'' = G and their point invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping

from . import exprcore as ec
from .exprcore import Context, Expr, diff, subs
from .exprcore import expr as E
from .exprcore.errors import NotIntegrableError
from .exprcore.linalg import rank

X, Y, Z, P0, P1 = ec.symbols("X Y Z p0 p1")
COORDS = ("X", "Y", "Z", "p0", "p1")
YS = ("Y", "Z")
PS = ("p0", "p1")
CANONICAL = Context(COORDS)
THETA_VARS = ("w", "z", "x", "y")
THETA_CTX = Context(THETA_VARS)
W_, Z_, X_, Y_ = ec.symbols("w z x y")

# eps[A][B], with eps_01 = +1
EPS = ((0, 1), (-1, 0))


@dataclass(frozen=True)
class SecondOrderSystem:
    F: Expr
    G: Expr
    ctx: Context = field(default=CANONICAL)
    name: str = ""

    def __post_init__(self):
        if tuple(self.ctx.names) != COORDS:
            raise ValueError(f"system context must be {COORDS}")
        self.ctx.check(self.F)
        self.ctx.check(self.G)

    @classmethod
    def parse(cls, F: str, G: str, boxes: Mapping[str, tuple] | None = None, name: str = ""):
        ctx = Context(COORDS, boxes)
        return cls(ec.parse(F, ctx), ec.parse(G, ctx), ctx, name)

    @property
    def rhs(self) -> tuple:
        return (self.F, self.G)

    def with_boxes(self, **boxes) -> "SecondOrderSystem":
        return SecondOrderSystem(self.F, self.G, self.ctx.with_boxes(**boxes), self.name)

    def same_as(self, other: "SecondOrderSystem") -> bool:
        """Structural equality of the right-hand sides."""
        return self.F is other.F and self.G is other.G

    def __str__(self):
        return f"Y'' = {self.F}, Z'' = {self.G}"


def total_derivative(e: Expr, sys: SecondOrderSystem) -> Expr:
    """d/dX along solutions: ∂_X + p0 ∂_Y + p1 ∂_Z + F ∂_p0 + G ∂_p1."""
    return E.add(
        diff(e, "X"),
        E.mul(P0, diff(e, "Y")),
        E.mul(P1, diff(e, "Z")),
        E.mul(sys.F, diff(e, "p0")),
        E.mul(sys.G, diff(e, "p1")),
    )


@dataclass(frozen=True)
class WilczynskiTensor:
    T: tuple
    trace_free: tuple

    def independent(self) -> list:
        return [self.trace_free[0][0], self.trace_free[0][1], self.trace_free[1][0]]


def wilczynski(sys: SecondOrderSystem) -> WilczynskiTensor:
    Fs = sys.rhs
    dP = [[diff(Fs[a], PS[b]) for b in range(2)] for a in range(2)]
    T = [[None, None], [None, None]]
    for a in range(2):
        for b in range(2):
            quad = E.add(*(E.mul(dP[a][c], dP[c][b]) for c in range(2)))
            T[a][b] = E.add(
                E.neg(diff(Fs[a], YS[b])),
                E.mul(E.num(Fraction(-1, 4)), quad),
                E.mul(E.num(Fraction(1, 2)), total_derivative(dP[a][b], sys)),
            )
    half_trace = E.mul(E.num(Fraction(1, 2)), E.add(T[0][0], T[1][1]))
    t00 = E.sub(T[0][0], half_trace)
    tf = ((t00, T[0][1]), (T[1][0], E.neg(t00)))
    return WilczynskiTensor(((T[0][0], T[0][1]), (T[1][0], T[1][1])), tf)


def is_torsion_free(sys: SecondOrderSystem, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> bool:
    return ec.all_zero(wilczynski(sys).independent(), sys.ctx, trials, tol, seed)


@dataclass(frozen=True)
class FelsTensor:
    S: dict  # (A, B, C, D) -> Expr
    symmetric: dict  # (A, B, C, D) with B <= C <= D -> Expr

    def component(self, a, b, c, d, symmetrized=True) -> Expr:
        if symmetrized:
            return self.symmetric[(a,) + tuple(sorted((b, c, d)))]
        return self.S[(a, b, c, d)]


def fels(sys: SecondOrderSystem) -> FelsTensor:
    Fs = sys.rhs
    third = {}
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    key = (a,) + tuple(sorted((b, c, d)))
                    if key not in third:
                        third[key] = ec.diff_many(Fs[a], [PS[b], PS[c], PS[d]])

    def d3(a, b, c, d):
        return third[(a,) + tuple(sorted((b, c, d)))]

    trace = {(b, c): E.add(d3(0, 0, b, c), d3(1, 1, b, c)) for b in range(2) for c in range(2)}
    S = {}
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    corr = E.mul(E.num(Fraction(-3, 4)), trace[(b, c)]) if a == d else E.ZERO
                    S[(a, b, c, d)] = E.add(d3(a, b, c, d), corr)
    sym = {}
    perms = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))
    for a in range(2):
        for b in range(2):
            for c in range(b, 2):
                for d in range(c, 2):
                    idx = (b, c, d)
                    terms = [S[(a,) + tuple(idx[p] for p in perm)] for perm in perms]
                    sym[(a, b, c, d)] = E.mul(E.num(Fraction(1, 6)), E.add(*terms))
    return FelsTensor(S, sym)


def fels_vanishes(sys: SecondOrderSystem, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> bool:
    return ec.all_zero(list(fels(sys).symmetric.values()), sys.ctx, trials, tol, seed)


@dataclass(frozen=True)
class CorrespondenceMetric:
    matrix: tuple  # 5x5 over COORDS
    phi: tuple
    omega2: Expr

    def component(self, i: str, j: str) -> Expr:
        return self.matrix[COORDS.index(i)][COORDS.index(j)]


def divergence(sys: SecondOrderSystem) -> Expr:
    return E.add(diff(sys.F, "p0"), diff(sys.G, "p1"))


def phi_tensor(sys: SecondOrderSystem):
    Fs = sys.rhs
    dP = [[diff(Fs[c], PS[b]) for b in range(2)] for c in range(2)]
    div = E.add(dP[0][0], dP[1][1])
    phi = [[None, None], [None, None]]
    for a in range(2):
        for b in range(2):
            t = E.add(*(E.mul(E.num(EPS[a][c]), dP[c][b]) for c in range(2) if EPS[a][c]))
            phi[a][b] = E.add(
                E.mul(E.num(Fraction(-1, 2)), t),
                E.mul(E.num(Fraction(EPS[a][b], 4)), div),
            )
    # the formula is symmetric; use one representative for the off-diagonal pair
    phi[1][0] = phi[0][1]
    return tuple(map(tuple, phi)), E.mul(E.num(Fraction(1, 2)), div)


def correspondence_metric(sys: SecondOrderSystem) -> CorrespondenceMetric:
    phi, omega2 = phi_tensor(sys)
    g = [[E.ZERO] * 5 for _ in range(5)]
    iy = [COORDS.index(n) for n in YS]
    ip = [COORDS.index(n) for n in PS]
    half = Fraction(1, 2)
    for a in range(2):
        for b in range(2):
            if EPS[a][b]:
                i, j = iy[a], ip[b]
                g[i][j] = E.add(g[i][j], E.num(half * EPS[a][b]))
                g[j][i] = g[i][j]
            g[iy[a]][iy[b]] = phi[a][b]
    return CorrespondenceMetric(tuple(map(tuple, g)), phi, omega2)


def conformal_evolution_components(sys: SecondOrderSystem) -> list:
    """Residual of dφ/dX + ∂F^C/∂Y^(B ε_A)C − Ω² φ for the three independent AB."""
    phi, omega2 = phi_tensor(sys)
    Fs = sys.rhs
    out = []
    for a, b in ((0, 0), (0, 1), (1, 1)):
        sym = []
        for c in range(2):
            if EPS[a][c]:
                sym.append(E.mul(E.num(Fraction(EPS[a][c], 2)), diff(Fs[c], YS[b])))
            if EPS[b][c]:
                sym.append(E.mul(E.num(Fraction(EPS[b][c], 2)), diff(Fs[c], YS[a])))
        out.append(E.add(total_derivative(phi[a][b], sys), *sym, E.neg(E.mul(omega2, phi[a][b]))))
    return out


def conformal_evolution_residual(sys: SecondOrderSystem, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> bool:
    return ec.all_zero(conformal_evolution_components(sys), sys.ctx, trials, tol, seed)


# ---------------------------------------------------------------------------
# potentials


def _split_linear(base: Expr, v: str):
    """(a, b) with base == a*v + b and a, b free of v, else None."""
    if base.op != E.ADD:
        return None
    a_terms, b_terms = [], []
    for t in base.args:
        if v not in t.free:
            b_terms.append(t)
            continue
        c = diff(t, v)
        if v in c.free:
            return None
        a_terms.append(c)
    return E.add(*a_terms), E.add(*b_terms)


def antiderivative(e: Expr, v: str) -> Expr:
    """∫ e dv for sums of terms c·v^k·(a v + b)^m; raises NotIntegrableError otherwise."""
    if v not in e.free:
        return E.mul(e, E.var(v))
    terms = e.args if e.op == E.ADD else (e,)
    out = []
    V = E.var(v)
    for t in terms:
        factors = t.args if t.op == E.MUL else (t,)
        const, k, lin, m = [], 0, None, 0
        for f in factors:
            if v not in f.free:
                const.append(f)
                continue
            base, ex = (f.args[0], f.val) if f.op == E.POW else (f, Fraction(1))
            if base is V and ex.denominator == 1 and ex >= 0:
                k += int(ex)
                continue
            split = _split_linear(base, v)
            if split is None or lin is not None or ex.denominator != 1:
                raise NotIntegrableError(f"cannot integrate {t} in {v}")
            lin, m = split, int(ex)
        c = E.mul(*const)
        if lin is None:
            out.append(E.mul(c, E.div(E.pow_(V, k + 1), E.num(k + 1))))
            continue
        a, b = lin
        u = E.add(E.mul(a, V), b)
        pieces = []
        for j in range(k + 1):
            n = m + j + 1
            if n == 0:
                raise NotIntegrableError(f"logarithmic antiderivative for {t}")
            pieces.append(
                E.mul(E.num(Fraction(comb(k, j), n)), E.pow_(E.neg(b), k - j), E.pow_(u, n))
            )
        out.append(E.mul(c, E.pow_(a, -(k + 1)), E.add(*pieces)))
    return E.add(*out)


def lambda_potential(sys: SecondOrderSystem, trials=ec.DEFAULT_TRIALS, tol=1e-8, seed=None):
    """Λ with F = 2∂Λ/∂p1, G = −2∂Λ/∂p0, or None when ∂F/∂p0 + ∂G/∂p1 ≠ 0."""
    if not ec.zero_test(divergence(sys), sys.ctx, trials, tol, seed):
        return None
    part = antiderivative(E.mul(E.num(Fraction(-1, 2)), sys.G), "p0")
    rest = E.sub(E.mul(E.num(Fraction(1, 2)), sys.F), diff(part, "p1"))
    rest = ec.canonical(rest) if not _has_atoms(rest) else rest
    if "p0" in rest.free and not ec.zero_test(diff(rest, "p0"), sys.ctx, trials, tol, seed):
        raise NotIntegrableError("cross-derivative consistency check failed")
    rest = subs(rest, {"p0": E.ZERO}) if "p0" in rest.free else rest
    lam = E.add(part, antiderivative(rest, "p1")) if "p1" in rest.free else E.add(part, E.mul(rest, P1))
    lam = _drop_fiber_constant(lam)
    checks = [
        E.sub(E.mul(E.num(2), diff(lam, "p1")), sys.F),
        E.add(E.mul(E.num(2), diff(lam, "p0")), sys.G),
    ]
    if not ec.all_zero(checks, sys.ctx, trials, tol, seed):
        raise NotIntegrableError("antiderivative does not reproduce the system")
    return lam


def _has_atoms(e: Expr) -> bool:
    return any(n.op == E.FUN or (n.op == E.POW and n.val.denominator != 1) for n in E.postorder([e]))


def _drop_fiber_constant(lam: Expr) -> Expr:
    if lam.op != E.ADD:
        return lam if ("p0" in lam.free or "p1" in lam.free) else E.ZERO
    return E.add(*(t for t in lam.args if "p0" in t.free or "p1" in t.free))


def lambda_from_theta(theta: Expr) -> Expr:
    """Λ = Θ(w=Y, z=Z, x=−p1, y=p0)."""
    return subs(theta, {"w": Y, "z": Z, "x": E.neg(P1), "y": P0})


def heavenly_residual(theta: Expr) -> Expr:
    d = lambda *vs: ec.diff_many(theta, vs)  # noqa: E731
    return E.add(d("x", "w"), d("y", "z"), E.mul(d("x", "x"), d("y", "y")), E.neg(E.pow_(d("x", "y"), 2)))


def satisfies_heavenly(theta: Expr, ctx: Context = THETA_CTX, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> bool:
    return ec.zero_test(heavenly_residual(theta), ctx, trials, tol, seed)


class HeavenlyViolationWarning(UserWarning):
    pass


def system_from_theta(theta: Expr, ctx: Context = THETA_CTX, check: bool = True, boxes=None) -> SecondOrderSystem:
    """Torsion-free system whose twistor lines at X = 0 realise Θ."""
    if check and not satisfies_heavenly(theta, ctx):
        import warnings

        warnings.warn("Θ does not satisfy the heavenly equation", HeavenlyViolationWarning, stacklevel=2)
    lam = lambda_from_theta(theta)
    F = E.mul(E.num(2), diff(lam, "p1"))
    G = E.mul(E.num(-2), diff(lam, "p0"))
    return SecondOrderSystem(F, G, Context(COORDS, boxes), "from-theta")


# correspondence-space coordinates at X = 0 in terms of (w, z, x, y)
THETA_IDENTIFICATION = {"X": E.ZERO, "Y": W_, "Z": Z_, "p0": Y_, "p1": E.neg(X_)}


def correspondence_at_origin(sys: SecondOrderSystem):
    """Quadratic form of the correspondence metric at X = 0 as a 4×4 matrix over (w, z, x, y).

    Uses dY = dw, dZ = dz, dp0 = dy, dp1 = −dx.
    """
    cm = correspondence_metric(sys)
    # columns of the pull-back: d(coordinate)/d(w,z,x,y)
    jac = {"Y": (1, 0, 0, 0), "Z": (0, 1, 0, 0), "p0": (0, 0, 0, 1), "p1": (0, 0, -1, 0)}
    names = ("Y", "Z", "p0", "p1")
    q = [[E.ZERO] * 4 for _ in range(4)]
    for i in names:
        for j in names:
            gij = cm.component(i, j)
            if gij.is_zero:
                continue
            gij = subs(gij, THETA_IDENTIFICATION)
            for a in range(4):
                for b in range(4):
                    c = jac[i][a] * jac[j][b]
                    if c:
                        q[a][b] = E.add(q[a][b], E.mul(E.num(c), gij))
    return tuple(map(tuple, q))


# ---------------------------------------------------------------------------
# the β family


@dataclass(frozen=True)
class BetaFamily:
    """β(Y') = Σ ξ_k (Y')^k.

    With ``series=False`` the sum is a polynomial and ξ_k = 0 beyond the
    largest listed k.  With ``series=True`` the listed coefficients are a
    truncation of an infinite series and only rows whose entries are all
    known enter the rank count.
    """

    xi: tuple  # ((k, Fraction), ...)
    series: bool = False
    order: int | None = None

    @classmethod
    def from_mapping(cls, xi: Mapping[int, object], series=False, order=None):
        items = tuple(sorted((int(k), Fraction(v)) for k, v in xi.items()))
        for k, _ in items:
            if k < 0:
                raise ValueError("negative power in β")
        return cls(items, series, order)

    def coeff(self, k: int) -> Fraction:
        for kk, v in self.xi:
            if kk == k:
                return v
        return Fraction(0)

    def last(self) -> int:
        nz = [k for k, v in self.xi if v != 0]
        return max(nz) if nz else -1

    def is_quadratic(self) -> bool:
        return all(v == 0 for k, v in self.xi if k >= 3)

    def as_system(self) -> SecondOrderSystem:
        beta = E.add(*(E.mul(E.num(v), E.pow_(P0, k)) for k, v in self.xi))
        return SecondOrderSystem(E.ZERO, beta, CANONICAL, "beta")


def beta_matrices(fam: BetaFamily):
    if fam.series:
        top = fam.order if fam.order is not None else max((k for k, _ in fam.xi), default=3)
        ks = range(3, top)
    else:
        ks = range(3, max(fam.last(), 3) + 2)
    xi = fam.coeff
    m1 = [(xi(k), xi(k + 1)) for k in ks]
    m2 = [(xi(k), (k - 2) * xi(k), (k - 3) * xi(k - 1), -(k + 1) * xi(k + 1)) for k in ks]
    return m1, m2


def beta_symmetry_dimension(fam: BetaFamily) -> int:
    if fam.is_quadratic():
        return 15
    m1, m2 = beta_matrices(fam)
    return 12 - rank(m1) - rank(m2)


def wilczynski_report(sys: SecondOrderSystem, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> dict:
    comps = wilczynski(sys).independent()
    return {
        "invariant": "wilczynski",
        "vanishes": ec.all_zero(comps, sys.ctx, trials, tol, seed),
        "components": [ec.to_text(c) for c in comps],
    }


def fels_report(sys: SecondOrderSystem, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> dict:
    f = fels(sys)
    comps = [f.symmetric[k] for k in sorted(f.symmetric)]
    return {
        "invariant": "fels",
        "vanishes": ec.all_zero(comps, sys.ctx, trials, tol, seed),
        "components": [ec.to_text(c) for c in comps],
    }
