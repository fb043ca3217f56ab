"""Point symmetries: prolongation, verification, brackets and algebra structure."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import exprcore as ec
from .exprcore import Context, Expr, diff, subs
from .exprcore import expr as E
from .exprcore.errors import NotPolynomialError
from .exprcore.linalg import rank
from .exprcore.poly import from_expr, to_fraction
from .pathsys import COORDS, SecondOrderSystem

BASE = ("X", "Y", "Z")
JET2 = COORDS + ("q0", "q1")
P = (E.var("p0"), E.var("p1"))
Q = (E.var("q0"), E.var("q1"))


@dataclass(frozen=True)
class VectorField3:
    """χ = c[0] ∂_X + c[1] ∂_Y + c[2] ∂_Z."""

    c: tuple

    def __post_init__(self):
        if len(self.c) != 3:
            raise ValueError("a vector field on (X, Y, Z) has three components")
        for comp in self.c:
            extra = comp.free - set(BASE)
            if extra:
                raise ec.UndeclaredVariableError(sorted(extra)[0], BASE)

    @classmethod
    def parse(cls, cx: str, cy: str, cz: str) -> "VectorField3":
        ctx = Context(BASE)
        return cls(tuple(ec.parse(s, ctx) for s in (cx, cy, cz)))

    @classmethod
    def of(cls, cx=0, cy=0, cz=0) -> "VectorField3":
        return cls(tuple(E._coerce(v) for v in (cx, cy, cz)))

    def apply(self, f: Expr) -> Expr:
        return E.add(*(E.mul(c, diff(f, v)) for c, v in zip(self.c, BASE) if not c.is_zero))

    def scale(self, k) -> "VectorField3":
        return VectorField3(tuple(E.mul(E._coerce(k), c) for c in self.c))

    def __add__(self, other):
        return VectorField3(tuple(E.add(a, b) for a, b in zip(self.c, other.c)))

    def __sub__(self, other):
        return VectorField3(tuple(E.sub(a, b) for a, b in zip(self.c, other.c)))

    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.c)

    def __str__(self):
        parts = [f"({c})*d{v}" for c, v in zip(self.c, BASE) if not c.is_zero]
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class ProlongedField:
    base: VectorField3
    eta1: tuple
    eta2: tuple


def _jet_total(e: Expr) -> Expr:
    """Total X-derivative on the second jet, with q0, q1 symbolic."""
    return E.add(
        diff(e, "X"),
        E.mul(P[0], diff(e, "Y")),
        E.mul(P[1], diff(e, "Z")),
        E.mul(Q[0], diff(e, "p0")),
        E.mul(Q[1], diff(e, "p1")),
    )


def prolong(chi: VectorField3, sys: SecondOrderSystem | None = None) -> ProlongedField:
    dxi = _jet_total(chi.c[0])
    eta1 = tuple(E.sub(_jet_total(chi.c[a + 1]), E.mul(P[a], dxi)) for a in range(2))
    eta2 = tuple(E.sub(_jet_total(eta1[a]), E.mul(Q[a], dxi)) for a in range(2))
    return ProlongedField(chi, eta1, eta2)


def symmetry_residuals(chi: VectorField3, sys: SecondOrderSystem) -> list:
    """pr²χ(q^A − F^A) restricted to q = F."""
    pr = prolong(chi, sys)
    on_shell = {"q0": sys.F, "q1": sys.G}
    out = []
    for a, Fa in enumerate(sys.rhs):
        r = [pr.eta2[a]]
        r += [E.neg(E.mul(c, diff(Fa, v))) for c, v in zip(chi.c, BASE) if not c.is_zero]
        r += [E.neg(E.mul(pr.eta1[b], diff(Fa, ("p0", "p1")[b]))) for b in range(2)]
        out.append(subs(E.add(*r), on_shell))
    return out


def symmetry_check(chi: VectorField3, sys: SecondOrderSystem, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> bool:
    return ec.all_zero(symmetry_residuals(chi, sys), sys.ctx, trials, tol, seed)


def lie_bracket(a: VectorField3, b: VectorField3) -> VectorField3:
    return VectorField3(tuple(E.sub(a.apply(bc), b.apply(ac)) for ac, bc in zip(a.c, b.c)))


def pushforward(chi: VectorField3, new_of_old: Mapping[str, Expr], old_of_new: Mapping[str, Expr]) -> VectorField3:
    """Image of χ under the point map (X,Y,Z) ↦ new_of_old, with inverse old_of_new."""
    comps = []
    for v in BASE:
        phi = new_of_old[v]
        comps.append(subs(chi.apply(phi), old_of_new))
    return VectorField3(tuple(comps))


# ---------------------------------------------------------------------------
# linear algebra on spans of fields


def _coefficient_vectors(fields: Sequence[VectorField3]):
    """Exact coefficient rows over a shared monomial basis."""
    rows = []
    keys: dict = {}
    for f in fields:
        row = {}
        for i, comp in enumerate(f.c):
            p = from_expr(comp)
            for m, c in p.terms.items():
                k = (i, m)
                if k not in keys:
                    keys[k] = len(keys)
                row[keys[k]] = to_fraction(c)
        rows.append(row)
    n = len(keys)
    return [[r.get(j, 0) for j in range(n)] for r in rows]


def _numeric_rank(fields, trials, seed) -> int:
    ctx = Context(BASE)
    rng = ec.evaluate.rng_for(seed)
    exprs = [c for f in fields for c in f.c]
    X, vals, _ = ec.sample_good_points(exprs, ctx, max(trials, 3 * len(fields)), rng)
    mat = vals.reshape(len(X), len(fields), 3).transpose(1, 0, 2).reshape(len(fields), -1)
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > 1e-9 * max(1.0, s[0] if len(s) else 1.0)))


def span_dimension(fields: Sequence[VectorField3], trials=ec.DEFAULT_TRIALS, seed=None, exact: bool | None = None) -> int:
    """Dimension of the real span of the fields, as functions on (X, Y, Z)."""
    if not fields:
        raise ValueError("span of an empty list")
    try:
        return rank(_coefficient_vectors(fields))
    except NotPolynomialError:
        if exact:
            raise
        return _numeric_rank(fields, trials, seed)


def independent_subset(fields: Sequence[VectorField3]) -> list:
    basis: list = []
    r = 0
    for f in fields:
        if f.is_zero():
            continue
        trial = basis + [f]
        nr = span_dimension(trial, exact=True)
        if nr > r:
            basis, r = trial, nr
    return basis


def in_span(f: VectorField3, fields: Sequence[VectorField3]) -> bool:
    if f.is_zero():
        return True
    base = span_dimension(fields, exact=True) if fields else 0
    return span_dimension(list(fields) + [f], exact=True) == base


def derived_algebra(fields: Sequence[VectorField3]) -> list:
    brackets = [lie_bracket(a, b) for i, a in enumerate(fields) for b in fields[i + 1:]]
    return independent_subset(brackets)


def is_closed_and_solvable(fields: Sequence[VectorField3]) -> tuple:
    fields = independent_subset(fields)
    closed = all(
        in_span(lie_bracket(a, b), fields) for i, a in enumerate(fields) for b in fields[i + 1:]
    )
    current = fields
    solvable = False
    for _ in range(len(fields) + 1):
        if not current:
            solvable = True
            break
        nxt = derived_algebra(current)
        if len(nxt) >= len(current):
            break
        current = nxt
    return closed, solvable


def symmetry_report(fields: Sequence[VectorField3], sys: SecondOrderSystem, trials=ec.DEFAULT_TRIALS, tol=ec.DEFAULT_TOL, seed=None) -> list:
    return [
        {"generator": i + 1, "is_symmetry": symmetry_check(f, sys, trials, tol, seed)}
        for i, f in enumerate(fields)
    ]
