"""Hash-consed symbolic expression nodes and their normalizing constructors.

Every node is built through :func:`num`, :func:`var`, :func:`add`, :func:`mul`,
:func:`pow_` or :func:`func`, which normalize on the way in and intern the
result.  Two structurally equal normalized expressions are therefore the same
Python object, and ``a is b`` is structural equality.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction
from math import gcd
from typing import Iterable, Union

NUM, VAR, ADD, MUL, POW, FUN = range(6)
FUNCTIONS = ("exp", "log", "sin", "cos")

Number = Union[int, Fraction]

_table: dict = {}


class Expr:
    """Immutable expression node.  Do not instantiate directly."""

    __slots__ = ("op", "args", "val", "digest", "key", "free", "dcache", "__weakref__")

    def __init__(self, op, args, val, digest, key, free):
        self.op = op
        self.args = args
        self.val = val
        self.digest = digest
        self.key = key
        self.free = free
        self.dcache = {}

    # arithmetic sugar ------------------------------------------------------
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return add(self, neg(_coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), neg(self))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        if isinstance(exponent, Expr):
            if exponent.op != NUM:
                raise TypeError("only rational exponents are supported")
            exponent = exponent.val
        return pow_(self, Fraction(exponent))

    def __repr__(self):
        from .printer import to_text

        text = to_text(self)
        if len(text) > 200:
            text = text[:200] + "..."
        return f"Expr({text})"

    def __str__(self):
        from .printer import to_text

        return to_text(self)

    def __reduce__(self):
        from .printer import to_text

        return (_unpickle, (to_text(self),))

    # queries ---------------------------------------------------------------
    @property
    def is_number(self) -> bool:
        return self.op == NUM

    @property
    def is_zero(self) -> bool:
        return self.op == NUM and self.val == 0

    @property
    def name(self) -> str:
        if self.op != VAR:
            raise AttributeError("only variables have a name")
        return self.val


def _unpickle(text):
    from .parse import parse_unchecked

    return parse_unchecked(text)


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return num(x)
    raise TypeError(f"cannot use {type(x).__name__} in an exact expression")


def _hash(*parts) -> bytes:
    h = hashlib.blake2b(digest_size=12)
    for p in parts:
        if isinstance(p, bytes):
            h.update(p)
        else:
            h.update(str(p).encode())
        h.update(b"|")
    return h.digest()


_ZERO_F = Fraction(0)
_ONE_F = Fraction(1)


def _intern(op, args, val):
    k = (op, val, tuple(id(a) for a in args))
    node = _table.get(k)
    if node is not None:
        return node
    digest = _hash(op, val, *(a.digest for a in args))
    if op == NUM:
        key = (0, "", val, b"")
        free = frozenset()
    elif op == VAR:
        key = (1, val, _ONE_F, b"")
        free = frozenset((val,))
    else:
        if op == POW and args[0].op == VAR:
            key = (1, args[0].val, val, b"")
        elif op == FUN:
            key = (2, val, _ZERO_F, digest)
        elif op == POW:
            key = (3, "", val, digest)
        elif op == ADD:
            key = (4, "", _ZERO_F, digest)
        else:
            key = (5, "", _ZERO_F, digest)
        free = frozenset().union(*(a.free for a in args))
    node = Expr(op, args, val, digest, key, free)
    _table[k] = node
    return node


def num(value: Number) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise TypeError(f"exact rational required, got {value!r}")
    return _intern(NUM, (), Fraction(value))


def var(name: str) -> Expr:
    return _intern(VAR, (), name)


ZERO = num(0)
ONE = num(1)
MINUS_ONE = num(-1)


def _split_coeff(term: Expr):
    """Return (rational coefficient, rest) with rest free of a numeric factor."""
    if term.op == NUM:
        return term.val, ONE
    if term.op == MUL and term.args[0].op == NUM:
        rest = term.args[1:]
        if len(rest) == 1:
            return term.args[0].val, rest[0]
        return term.args[0].val, _intern(MUL, rest, None)
    return _ONE_F, term


def add(*terms) -> Expr:
    coeffs: dict = {}
    order: list = []
    const = _ZERO_F
    stack = [_coerce(t) for t in reversed(terms)]
    while stack:
        t = stack.pop()
        if t.op == ADD:
            stack.extend(reversed(t.args))
            continue
        c, rest = _split_coeff(t)
        if rest is ONE:
            const += c
            continue
        if c != 1 and rest.op == ADD:
            # scalar multiples of sums are distributed so like terms meet
            sc = _scale_sum(c, rest)
            stack.extend(reversed(sc.args) if sc.op == ADD else [sc])
            continue
        if rest in coeffs:
            coeffs[rest] += c
        else:
            coeffs[rest] = c
            order.append(rest)
    out = []
    for rest in order:
        c = coeffs[rest]
        if c == 0:
            continue
        out.append((rest.key, _scaled(c, rest)))
    out.sort(key=lambda kv: kv[0])
    items = [t for _, t in out]
    if const != 0:
        items.insert(0, num(const))
    if not items:
        return ZERO
    if len(items) == 1:
        return items[0]
    return _intern(ADD, tuple(items), None)


def _scaled(c: Fraction, rest: Expr) -> Expr:
    if c == 1:
        return rest
    if rest.op == MUL:
        return _intern(MUL, (num(c),) + rest.args, None)
    return _intern(MUL, (num(c), rest), None)


_CONTENT = ("content",)  # tuple keys never clash with variable names


def _sum_content(s: Expr):
    """Split an ADD node into (rational content, primitive sum).

    The primitive sum has integer coefficients with gcd 1 and a positive
    coefficient on its first term.
    """
    hit = s.dcache.get(_CONTENT)
    if hit is None:
        hit = s.dcache[_CONTENT] = _sum_content_raw(s)
    return hit


def _scale_sum(c: Fraction, s: Expr) -> Expr:
    """c * s distributed over the terms of the sum s, memoized per node."""
    key = ("scaled", c)
    hit = s.dcache.get(key)
    if hit is None:
        hit = s.dcache[key] = add(*(mul(num(c), t) for t in s.args))
    return hit


def _sum_content_raw(s: Expr):
    cs = [_split_coeff(t)[0] for t in s.args]
    g = 0
    lcm_den = 1
    for c in cs:
        g = gcd(g, c.numerator)
        lcm_den = lcm_den * c.denominator // gcd(lcm_den, c.denominator)
    content = Fraction(g, lcm_den)
    if cs[0] < 0:
        content = -content
    if content == 1:
        return _ONE_F, s
    inv = 1 / content
    return content, _scale_sum(inv, s)


def _exact_root(value: Fraction, q: int):
    if value < 0:
        if q % 2 == 0:
            return None
        r = _exact_root(-value, q)
        return None if r is None else -r
    n = _iroot(value.numerator, q)
    d = _iroot(value.denominator, q)
    if n is None or d is None:
        return None
    return Fraction(n, d)


def _iroot(n: int, q: int):
    if n < 2:
        return n
    r = int(round(n ** (1.0 / q)))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**q == n:
            return cand
    lo, hi = 0, 1 << (n.bit_length() // q + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**q < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**q == n else None


def pow_(base, exponent) -> Expr:
    base = _coerce(base)
    e = Fraction(exponent)
    if e == 0:
        return ONE
    if e == 1:
        return base
    if base.op == NUM:
        b = base.val
        if e.denominator == 1:
            if b == 0 and e < 0:
                raise ZeroDivisionError("0 raised to a negative power")
            return num(b ** int(e))
        if b == 0:
            if e < 0:
                raise ZeroDivisionError("0 raised to a negative power")
            return ZERO
        if b == 1:
            return ONE
        root = _exact_root(b, e.denominator)
        if root is not None:
            return pow_(num(root), e.numerator)
        whole = e.numerator // e.denominator
        if whole != 0 and e > 1:
            # keep the irrational part's exponent in (0, 1)
            return mul(num(b**whole), _intern(POW, (base,), e - whole))
        return _intern(POW, (base,), e)
    if base.op == POW:
        inner = base.val
        if e.denominator == 1 or inner.denominator != 1:
            return pow_(base.args[0], inner * e)
        return _intern(POW, (base,), e)
    if base.op == MUL and e.denominator == 1:
        return mul(*(pow_(f, e) for f in base.args))
    if base.op == ADD and e.denominator == 1:
        c, prim = _sum_content(base)
        if c != 1:
            return mul(num(c**int(e)), _intern(POW, (prim,), e))
        return _intern(POW, (base,), e)
    return _intern(POW, (base,), e)


def mul(*factors) -> Expr:
    coeff = _ONE_F
    powers: dict = {}
    order: list = []
    stack = [_coerce(f) for f in reversed(factors)]
    while stack:
        f = stack.pop()
        if f.op == NUM:
            coeff *= f.val
            if coeff == 0:
                return ZERO
            continue
        if f.op == MUL:
            stack.extend(reversed(f.args))
            continue
        if f.op == POW:
            b, e = f.args[0], f.val
        else:
            b, e = f, _ONE_F
        if b in powers:
            powers[b] += e
        else:
            powers[b] = e
            order.append(b)
    if coeff == 0:
        return ZERO
    rebuilt = []
    for b in order:
        e = powers[b]
        if e == 0:
            continue
        p = pow_(b, e) if e != 1 else b
        if p.op == NUM:
            coeff *= p.val
        elif p.op == MUL:
            # pow_ may split off a rational coefficient
            for g in p.args:
                if g.op == NUM:
                    coeff *= g.val
                else:
                    rebuilt.append(g)
        else:
            rebuilt.append(p)
    if coeff == 0:
        return ZERO
    # bare sums next to other factors give up their content
    if len(rebuilt) > 1:
        fixed = []
        for f in rebuilt:
            if f.op == ADD:
                c, prim = _sum_content(f)
                coeff *= c
                fixed.append(prim)
            else:
                fixed.append(f)
        rebuilt = fixed
    # merging after content extraction can produce repeated bases
    merged: dict = {}
    morder = []
    for f in rebuilt:
        b, e = (f.args[0], f.val) if f.op == POW else (f, _ONE_F)
        if b in merged:
            merged[b] += e
        else:
            merged[b] = e
            morder.append(b)
    if len(morder) != len(rebuilt):
        return mul(num(coeff), *(pow_(b, merged[b]) for b in morder))
    rebuilt.sort(key=lambda f: f.key)
    if not rebuilt:
        return num(coeff)
    if len(rebuilt) == 1:
        f = rebuilt[0]
        if coeff == 1:
            return f
        if f.op == ADD:
            return _scale_sum(coeff, f)
        return _intern(MUL, (num(coeff), f), None)
    if coeff == 1:
        return _intern(MUL, tuple(rebuilt), None)
    return _intern(MUL, (num(coeff),) + tuple(rebuilt), None)


def neg(e) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a, b) -> Expr:
    return add(a, neg(b))


def div(a, b) -> Expr:
    return mul(a, pow_(b, -1))


def sqrt(e) -> Expr:
    return pow_(e, Fraction(1, 2))


def func(name: str, arg) -> Expr:
    arg = _coerce(arg)
    if name == "sqrt":
        return sqrt(arg)
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if arg.op == NUM and arg.val == 0:
        if name in ("exp", "cos"):
            return ONE
        if name == "sin":
            return ZERO
    if name == "log" and arg.op == NUM and arg.val == 1:
        return ZERO
    if name == "exp" and arg.op == FUN and arg.val == "log":
        pass  # exp(log(u)) == u only for u > 0; left alone
    return _intern(FUN, (arg,), name)


def exp(e) -> Expr:
    return func("exp", e)


def log(e) -> Expr:
    return func("log", e)


def sin(e) -> Expr:
    return func("sin", e)


def cos(e) -> Expr:
    return func("cos", e)


def symbols(names: Union[str, Iterable[str]]):
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    return tuple(var(n) for n in names)


def rebuild(e: Expr, args) -> Expr:
    """Reconstruct a node of the same kind with new children."""
    op = e.op
    if op == ADD:
        return add(*args)
    if op == MUL:
        return mul(*args)
    if op == POW:
        return pow_(args[0], e.val)
    if op == FUN:
        return func(e.val, args[0])
    return e


def postorder(roots: Iterable[Expr], skip=None) -> list:
    """Distinct nodes reachable from ``roots``, children before parents.

    ``skip(node)`` returning True prunes the node (it is not emitted and its
    children are not visited).
    """
    seen = set()
    out = []
    for root in roots:
        if id(root) in seen or (skip is not None and skip(root)):
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for a in reversed(node.args):
                if id(a) not in seen and not (skip is not None and skip(a)):
                    stack.append((a, False))
    return out


def dag_size(*roots: Expr) -> int:
    return len(postorder(roots))


def normalize(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the normalizing constructors."""
    memo = {}
    for node in postorder([e]):
        if node.args:
            memo[id(node)] = rebuild(node, [memo[id(a)] for a in node.args])
        else:
            memo[id(node)] = node
    return memo[id(e)]
