"""Sparse multivariate polynomials with exact rational coefficients.

Monomials are tuples of ``(generator index, exponent)`` pairs sorted by
index; generators are expression atoms registered in a process-wide table
so that polynomials built from different expressions share indices.
"""

from __future__ import annotations

import threading
from fractions import Fraction

from . import expr as E
from .errors import NotPolynomialError

try:
    from gmpy2 import mpq as Q

    def to_fraction(c) -> Fraction:
        return Fraction(int(c.numerator), int(c.denominator))

except ImportError:  # pragma: no cover
    Q = Fraction

    def to_fraction(c) -> Fraction:
        return Fraction(c)


_gens: list = []
_gen_index: dict = {}
_lock = threading.Lock()


def gen_index(atom: E.Expr) -> int:
    i = _gen_index.get(atom)
    if i is None:
        with _lock:
            i = _gen_index.get(atom)
            if i is None:
                i = len(_gens)
                _gens.append(atom)
                _gen_index[atom] = i
    return i


def gen_expr(i: int) -> E.Expr:
    return _gens[i]


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        ga, ea = a[i]
        gb, eb = b[j]
        if ga == gb:
            out.append((ga, ea + eb))
            i += 1
            j += 1
        elif ga < gb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _mono_div(a: tuple, b: tuple):
    """a / b if b divides a, else None."""
    da = dict(a)
    for g, e in b:
        have = da.get(g, 0)
        if have < e:
            return None
        if have == e:
            del da[g]
        else:
            da[g] = have - e
    return tuple(sorted(da.items()))


def _lex_key(m: tuple):
    return tuple((-g, e) for g, e in m)


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    @staticmethod
    def const(c) -> "Poly":
        c = Q(c)
        return Poly({(): c} if c != 0 else {})

    @staticmethod
    def gen(atom: E.Expr, power: int = 1) -> "Poly":
        return Poly({((gen_index(atom), power),): Q(1)})

    def copy(self):
        return Poly(dict(self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self):
        return self.terms.get((), Q(0))

    def __add__(self, other):
        other = _as_poly(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m)
            if v is None:
                t[m] = c
            else:
                v = v + c
                if v == 0:
                    del t[m]
                else:
                    t[m] = v
        return Poly(t)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if not self.terms or not other.terms:
            return Poly()
        if len(other.terms) == 1 and () in other.terms:
            c = other.terms[()]
            return Poly({m: v * c for m, v in self.terms.items()})
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                v = t.get(m)
                t[m] = c1 * c2 if v is None else v + c1 * c2
        return Poly({m: c for m, c in t.items() if c != 0})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c):
        c = Q(c)
        if c == 0:
            return Poly()
        return Poly({m: v * c for m, v in self.terms.items()})

    def gens(self) -> set:
        return {g for m in self.terms for g, _ in m}

    def degree(self, atom: E.Expr) -> int:
        g = gen_index(atom)
        return max((dict(m).get(g, 0) for m in self.terms), default=-1 if not self.terms else 0)

    def total_degree(self, atoms=None) -> int:
        if not self.terms:
            return -1
        sel = None if atoms is None else {gen_index(a) for a in atoms}
        return max(sum(e for g, e in m if sel is None or g in sel) for m in self.terms)

    def coeffs_in(self, atom: E.Expr) -> dict:
        """Split into {exponent: coefficient polynomial} with respect to ``atom``."""
        g = gen_index(atom)
        out: dict = {}
        for m, c in self.terms.items():
            e = 0
            rest = []
            for gg, ee in m:
                if gg == g:
                    e = ee
                else:
                    rest.append((gg, ee))
            out.setdefault(e, {})[tuple(rest)] = c
        return {e: Poly(t) for e, t in out.items()}

    def homogeneous_parts(self, atoms) -> dict:
        sel = {gen_index(a) for a in atoms}
        out: dict = {}
        for m, c in self.terms.items():
            d = sum(e for g, e in m if g in sel)
            out.setdefault(d, {})[m] = c
        return {d: Poly(t) for d, t in out.items()}

    def leading(self):
        m = max(self.terms, key=_lex_key)
        return m, self.terms[m]

    def content(self):
        """Positive rational content: gcd of numerators over lcm of denominators."""
        from math import gcd

        g = 0
        lden = 1
        for c in self.terms.values():
            f = to_fraction(c)
            g = gcd(g, f.numerator)
            lden = lden * f.denominator // gcd(lden, f.denominator)
        return Fraction(g, lden) if g else Fraction(0)

    def primitive(self):
        """(content with sign of the leading term, primitive polynomial)."""
        if not self.terms:
            return Fraction(0), Poly()
        c = self.content()
        if self.leading()[1] < 0:
            c = -c
        return c, self.scale(Q(1) / Q(c))

    def monomial_content(self) -> tuple:
        it = iter(self.terms)
        common = dict(next(it))
        for m in it:
            dm = dict(m)
            for g in list(common):
                e = min(common[g], dm.get(g, 0))
                if e == 0:
                    del common[g]
                else:
                    common[g] = e
            if not common:
                break
        return tuple(sorted(common.items()))

    def div_monomial(self, mono: tuple) -> "Poly":
        return Poly({_mono_div(m, mono): c for m, c in self.terms.items()})

    def exact_div(self, d: "Poly"):
        """Quotient if ``d`` divides ``self`` exactly, else None."""
        if not d.terms:
            raise ZeroDivisionError("polynomial division by zero")
        if not self.terms:
            return Poly()
        if d.is_const():
            return self.scale(Q(1) / d.const_value())
        lm_d, lc_d = d.leading()
        rem = dict(self.terms)
        quot: dict = {}
        while rem:
            m = max(rem, key=_lex_key)
            qm = _mono_div(m, lm_d)
            if qm is None:
                return None
            qc = rem[m] / lc_d
            quot[qm] = qc
            for md, cd in d.terms.items():
                mm = _mono_mul(qm, md)
                v = rem.get(mm, 0) - qc * cd
                if v == 0:
                    rem.pop(mm, None)
                else:
                    rem[mm] = v
        return Poly(quot)

    def key(self):
        return frozenset(self.terms.items())

    def to_expr(self) -> E.Expr:
        terms = []
        for m, c in self.terms.items():
            factors = [E.num(to_fraction(c))]
            for g, e in m:
                factors.append(E.pow_(_gens[g], e))
            terms.append(E.mul(*factors))
        return E.add(*terms)

    def __repr__(self):
        return f"Poly({self.to_expr()})"


def _as_poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    return Poly.const(x)


def is_atom(e: E.Expr) -> bool:
    """Nodes that polynomial arithmetic treats as opaque generators."""
    return e.op in (E.VAR, E.FUN) or (e.op == E.POW and e.val.denominator != 1)


def from_expr(e: E.Expr) -> Poly:
    """Expand ``e`` as a polynomial in its atoms; raises on negative powers."""
    memo: dict = {}
    for node in E.postorder([e]):
        op = node.op
        if op == E.NUM:
            p = Poly.const(Q(node.val.numerator, node.val.denominator))
        elif is_atom(node):
            p = Poly.gen(node)
        elif op == E.ADD:
            p = Poly()
            for a in node.args:
                p = p + memo[id(a)]
        elif op == E.MUL:
            p = Poly.const(1)
            for a in node.args:
                p = p * memo[id(a)]
        elif op == E.POW:
            if node.val < 0:
                raise NotPolynomialError(f"negative power in {node}")
            p = memo[id(node.args[0])] ** int(node.val)
        else:  # pragma: no cover
            raise AssertionError(op)
        memo[id(node)] = p
    return memo[id(e)]


def expand(e: E.Expr) -> E.Expr:
    """Fully expanded polynomial form of a polynomial expression."""
    return from_expr(e).to_expr()


def bareiss_det(matrix):
    """Fraction-free determinant of a square matrix of Polys."""
    n = len(matrix)
    if n == 0:
        return Poly.const(1)
    a = [[_as_poly(x) for x in row] for row in matrix]
    sign = 1
    prev = Poly.const(1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not a[i][k].is_zero()), None)
            if swap is None:
                return Poly()
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                q = num.exact_div(prev)
                if q is None:  # pragma: no cover - Bareiss guarantees exactness
                    raise ArithmeticError("non-exact Bareiss step")
                a[i][j] = q
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def sylvester(p: Poly, q: Poly, atom: E.Expr):
    """Sylvester matrix of p and q as polynomials in ``atom``."""
    cp = p.coeffs_in(atom)
    cq = q.coeffs_in(atom)
    m = max(cp) if cp else 0
    n = max(cq) if cq else 0
    size = m + n
    zero = Poly()
    rows = []
    for i in range(n):
        row = [zero] * size
        for e, c in cp.items():
            row[i + m - e] = c
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for e, c in cq.items():
            row[i + n - e] = c
        rows.append(row)
    return rows


def resultant(p: Poly, q: Poly, atom: E.Expr) -> Poly:
    if p.is_zero() or q.is_zero():
        return Poly()
    if p.degree(atom) == 0 and q.degree(atom) == 0:
        return Poly.const(1)
    return bareiss_det(sylvester(p, q, atom))
