"""Exact differentiation and simultaneous substitution."""

from __future__ import annotations

from typing import Mapping

from . import expr as E
from .expr import ADD, FUN, MUL, NUM, POW, VAR, Expr


def _name(v) -> str:
    if isinstance(v, Expr):
        if v.op != VAR:
            raise TypeError("can only differentiate with respect to a variable")
        return v.val
    return v


def diff(e: Expr, v, n: int = 1) -> Expr:
    """Partial derivative of ``e`` with respect to ``v``, ``n`` times."""
    name = _name(v)
    for _ in range(n):
        e = _diff1(e, name)
    return e


def diff_many(e: Expr, names) -> Expr:
    for v in names:
        e = _diff1(e, _name(v))
    return e


def _diff1(root: Expr, v: str) -> Expr:
    hit = root.dcache.get(v)
    if hit is not None:
        return hit
    order = E.postorder([root], skip=lambda n: v not in n.free or v in n.dcache)
    for node in order:
        node.dcache[v] = _rule(node, v)
    return root.dcache[v] if v in root.free else E.ZERO


def _d(node: Expr, v: str) -> Expr:
    if v not in node.free:
        return E.ZERO
    return node.dcache[v]


def _rule(e: Expr, v: str) -> Expr:
    op = e.op
    if op == VAR:
        return E.ONE if e.val == v else E.ZERO
    if op == NUM:
        return E.ZERO
    if op == ADD:
        return E.add(*(_d(a, v) for a in e.args))
    if op == MUL:
        terms = []
        args = e.args
        for i, a in enumerate(args):
            da = _d(a, v)
            if da.is_zero:
                continue
            terms.append(E.mul(da, *args[:i], *args[i + 1:]))
        return E.add(*terms)
    if op == POW:
        b = e.args[0]
        q = e.val
        return E.mul(E.num(q), E.pow_(b, q - 1), _d(b, v))
    if op == FUN:
        u = e.args[0]
        du = _d(u, v)
        name = e.val
        if name == "exp":
            return E.mul(e, du)
        if name == "log":
            return E.div(du, u)
        if name == "sin":
            return E.mul(E.cos(u), du)
        if name == "cos":
            return E.neg(E.mul(E.sin(u), du))
    raise AssertionError(op)


def subs(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution of variables by expressions."""
    table = {}
    for k, val in bindings.items():
        table[_name(k)] = E._coerce(val)
    if not table:
        return e
    keys = frozenset(table)
    memo = {}
    for node in E.postorder([e], skip=lambda n: not (n.free & keys)):
        if node.op == VAR:
            memo[id(node)] = table[node.val]
        else:
            memo[id(node)] = E.rebuild(
                node, [memo[id(a)] if (a.free & keys) else a for a in node.args]
            )
    return memo[id(e)] if (e.free & keys) else e


def subs_many(exprs, bindings):
    return [subs(x, bindings) for x in exprs]


def jacobian(funcs, names):
    return [[diff(f, v) for v in names] for f in funcs]


def is_polynomial_in(e: Expr, names) -> bool:
    """True if ``e`` is a polynomial in ``names`` (coefficients may involve anything else)."""
    names = frozenset(_name(n) for n in names)
    memo = {}
    for node in E.postorder([e]):
        if not (node.free & names):
            ok = True
        elif node.op == VAR:
            ok = True
        elif node.op in (ADD, MUL):
            ok = all(memo[id(a)] for a in node.args)
        elif node.op == POW:
            q = node.val
            ok = q.denominator == 1 and q > 0 and memo[id(node.args[0])]
        else:
            ok = False
        memo[id(node)] = ok
    return memo[id(e)]
