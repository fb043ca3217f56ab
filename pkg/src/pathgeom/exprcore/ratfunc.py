"""Exact rational-function arithmetic over expression atoms.

A :class:`RatFunc` is a numerator polynomial over a product of denominator
factors kept in factored form.  Radicals and transcendental functions are
treated as independent generators, so a vanishing numerator proves an
identity while a non-vanishing one is only conclusive when no such atoms
occur.
"""

from __future__ import annotations

from fractions import Fraction

from . import expr as E
from .poly import Poly, Q, is_atom


class RatFunc:
    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: dict | None = None):
        self.num = num
        # key -> [primitive factor Poly, multiplicity]
        self.den = den or {}

    @staticmethod
    def from_poly(p: Poly) -> "RatFunc":
        return RatFunc(p, {})

    def den_poly(self) -> Poly:
        out = Poly.const(1)
        for f, k in self.den.values():
            out = out * f**k
        return out

    def _lift(self, target: dict) -> Poly:
        out = self.num
        for key, (f, k) in target.items():
            have = self.den.get(key, (None, 0))[1]
            if k > have:
                out = out * f ** (k - have)
        return out

    def __add__(self, other: "RatFunc") -> "RatFunc":
        common = {k: list(v) for k, v in self.den.items()}
        for k, (f, m) in other.den.items():
            if k in common:
                common[k][1] = max(common[k][1], m)
            else:
                common[k] = [f, m]
        return RatFunc(self._lift(common) + other._lift(common), common)

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        den = {k: list(v) for k, v in self.den.items()}
        for k, (f, m) in other.den.items():
            if k in den:
                den[k][1] += m
            else:
                den[k] = [f, m]
        return RatFunc(self.num * other.num, den)

    def pow(self, n: int) -> "RatFunc":
        if n >= 0:
            return RatFunc(self.num**n, {k: [f, m * n] for k, (f, m) in self.den.items()})
        return self.inverse().pow(-n)

    def inverse(self) -> "RatFunc":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of the zero rational function")
        c, prim = self.num.primitive()
        mono = prim.monomial_content()
        num = Poly.const(Q(1) / Q(c))
        for f, m in self.den.values():
            num = num * f**m
        den: dict = {}
        for g, e in mono:
            p = Poly({((g, 1),): Q(1)})
            den[p.key()] = [p, e]
        rest = prim.div_monomial(mono) if mono else prim
        if not rest.is_const():
            den.setdefault(rest.key(), [rest, 0])[1] += 1
        elif rest.const_value() != 1:
            num = num.scale(Q(1) / rest.const_value())
        return RatFunc(num, den)

    def cancel(self) -> "RatFunc":
        """Divide common factors out of numerator and denominator."""
        num = self.num
        den = {}
        for key, (f, m) in self.den.items():
            left = m
            while left and not num.is_zero():
                q = num.exact_div(f)
                if q is None:
                    break
                num = q
                left -= 1
            if num.is_zero():
                return RatFunc(Poly(), {})
            if left:
                den[key] = [f, left]
        return RatFunc(num, den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def has_atoms(self) -> bool:
        gens = set(self.num.gens())
        for f, _ in self.den.values():
            gens |= f.gens()
        from .poly import gen_expr

        return any(gen_expr(g).op != E.VAR for g in gens)

    def to_expr(self) -> E.Expr:
        n = self.num.to_expr()
        if not self.den:
            return n
        d = [E.pow_(f.to_expr(), m) for f, m in self.den.values()]
        return E.div(n, E.mul(*d))


def to_ratfunc(e: E.Expr) -> RatFunc:
    memo: dict = {}
    for node in E.postorder([e]):
        op = node.op
        if op == E.NUM:
            r = RatFunc(Poly.const(Q(node.val.numerator, node.val.denominator)))
        elif op == E.POW and node.val.denominator != 1:
            q = node.val
            root = E._intern(E.POW, (node.args[0],), Fraction(1, q.denominator))
            r = RatFunc(Poly.gen(root)).pow(q.numerator)
        elif is_atom(node):
            r = RatFunc(Poly.gen(node))
        elif op == E.ADD:
            r = memo[id(node.args[0])]
            for a in node.args[1:]:
                r = r + memo[id(a)]
        elif op == E.MUL:
            r = memo[id(node.args[0])]
            for a in node.args[1:]:
                r = r * memo[id(a)]
        elif op == E.POW:
            r = memo[id(node.args[0])].pow(int(node.val))
        else:  # pragma: no cover
            raise AssertionError(op)
        memo[id(node)] = r
    return memo[id(e)]


def exact_is_zero(e: E.Expr):
    """True if provably zero, False if provably nonzero, None if undecided."""
    if e.is_zero:
        return True
    r = to_ratfunc(e)
    if r.is_zero():
        return True
    return None if r.has_atoms() else False


def exact_equal(a: E.Expr, b: E.Expr):
    if a is b:
        return True
    return exact_is_zero(E.sub(a, b))


def canonical(e: E.Expr) -> E.Expr:
    """Expanded numerator over factored denominator, common factors cancelled."""
    if e.op in (E.NUM, E.VAR):
        return e
    return to_ratfunc(e).cancel().to_expr()


def numerator(e: E.Expr) -> Poly:
    return to_ratfunc(e).num


def simplify(e: E.Expr, growth: int = 4) -> E.Expr:
    """``canonical(e)`` when that does not blow up the DAG, else ``e``."""
    if e.op in (E.NUM, E.VAR):
        return e
    if any(n.op == E.FUN for n in E.postorder([e])):
        return e
    c = canonical(e)
    if E.dag_size(c) > growth * max(E.dag_size(e), 8):
        return e
    return c
