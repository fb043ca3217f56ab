"""Text rendering in the input grammar, so that ``parse(to_text(e)) is e``."""

from __future__ import annotations

from fractions import Fraction

from .expr import ADD, FUN, MUL, NUM, POW, VAR, Expr, postorder

# precedence levels: sum < product < power < atom
_SUM, _PROD, _POW, _ATOM = range(4)


def _frac_text(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _exp_text(q: Fraction) -> str:
    if q.denominator == 1 and q >= 0:
        return str(q.numerator)
    return f"({_frac_text(q)})"


class _Printer:
    def __init__(self):
        self.memo = {}

    def text(self, e: Expr) -> tuple:
        """Return (string, precedence, leading_minus)."""
        m = self.memo.get(id(e))
        if m is not None:
            return m
        out = self._render(e)
        self.memo[id(e)] = out
        return out

    def wrap(self, e: Expr, level: int) -> str:
        s, p, neg = self.text(e)
        if p < level or (neg and level > _SUM):
            return f"({s})"
        return s

    def _render(self, e: Expr):
        op = e.op
        if op == NUM:
            q = e.val
            s = _frac_text(q)
            if q < 0:
                return s, _SUM, True
            return s, (_PROD if q.denominator != 1 else _ATOM), False
        if op == VAR:
            return e.val, _ATOM, False
        if op == FUN:
            return f"{e.val}({self.text(e.args[0])[0]})", _ATOM, False
        if op == POW:
            q = e.val
            if q < 0:
                return self._product(Fraction(1), [e])
            return self._power(e.args[0], q), _POW, False
        if op == MUL:
            coeff = Fraction(1)
            factors = list(e.args)
            if factors[0].op == NUM:
                coeff = factors[0].val
                factors = factors[1:]
            return self._product(coeff, factors)
        if op == ADD:
            parts = []
            for i, t in enumerate(e.args):
                s, _, neg = self.text(t)
                if i == 0:
                    parts.append(s)
                elif neg:
                    parts.append(" - " + self.text(-t)[0])
                else:
                    parts.append(" + " + s)
            return "".join(parts), _SUM, self.text(e.args[0])[2]
        raise AssertionError(op)

    def _power(self, base: Expr, q: Fraction) -> str:
        if q == Fraction(1, 2):
            return f"sqrt({self.text(base)[0]})"
        return f"{self.wrap(base, _ATOM)}^{_exp_text(q)}"

    def _product(self, coeff: Fraction, factors):
        num, den = [], []
        for f in factors:
            if f.op == POW and f.val < 0:
                inv = -f.val
                if inv == 1:
                    den.append(self.wrap(f.args[0], _PROD + 1))
                else:
                    den.append(self._power(f.args[0], inv))
            else:
                num.append(self.wrap(f, _PROD + 1) if f.op != POW else self._power(f.args[0], f.val))
        n, d = abs(coeff.numerator), coeff.denominator
        if n != 1 or not num:
            num.insert(0, str(n))
        if d != 1:
            den.insert(0, str(d))
        s = "*".join(num)
        if den:
            s += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
        if coeff < 0:
            return "-" + s, _SUM, True
        return s, _PROD, False


def to_text(e: Expr) -> str:
    p = _Printer()
    # render children first so deep trees do not hit the recursion limit
    for node in postorder([e]):
        p.text(node)
    return p.text(e)[0]
