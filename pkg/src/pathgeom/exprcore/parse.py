"""Recursive-descent parser for the expression grammar.

    expr     := ['+'|'-'] term (('+'|'-') ['+'|'-'] term)*
    term     := factor (('*'|'/') factor)*
    factor   := base ('^' exponent)?
    exponent := integer | '(' ['-'] integer ['/' integer] ')'
    base     := identifier | integer | '(' expr ')' | func '(' expr ')'
"""

from __future__ import annotations

from fractions import Fraction

from . import expr as E
from .context import Context
from .errors import ExprSyntaxError, UndeclaredVariableError

_FUNCS = ("sqrt", "exp", "log", "sin", "cos")
_SINGLE = set("+-*/^()")


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col


def tokenize(source: str):
    toks = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch.isascii() and ch.isdigit():
            j = i
            while j < n and source[j].isascii() and source[j].isdigit():
                j += 1
            if j < n and (source[j] == "." or source[j].isalpha()):
                raise ExprSyntaxError(f"malformed number {source[i:j + 1]!r}", line, col, source)
            toks.append(_Token("int", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isascii() and ch.isalpha():
            j = i
            while j < n and source[j].isascii() and (source[j].isalnum() or source[j] == "_"):
                j += 1
            toks.append(_Token("name", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _SINGLE:
            toks.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", line, col, source)
    toks.append(_Token("end", "", line, col))
    return toks


class _Parser:
    def __init__(self, source, declared):
        self.source = source
        self.toks = tokenize(source)
        self.pos = 0
        self.declared = declared

    @property
    def tok(self):
        return self.toks[self.pos]

    def fail(self, message, tok=None):
        tok = tok or self.tok
        raise ExprSyntaxError(message, tok.line, tok.col, self.source)

    def eat(self, kind):
        if self.tok.kind != kind:
            what = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            self.fail(f"expected {kind!r}, found {what}")
        t = self.tok
        self.pos += 1
        return t

    def parse(self):
        if self.tok.kind == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}")
        return e

    def signed_term(self):
        sign = 1
        while self.tok.kind in ("+", "-"):
            if self.tok.kind == "-":
                sign = -sign
            self.pos += 1
        t = self.term()
        return t if sign > 0 else E.neg(t)

    def expr(self):
        terms = [self.signed_term()]
        while self.tok.kind in ("+", "-"):
            negate = self.tok.kind == "-"
            self.pos += 1
            t = self.signed_term()
            terms.append(E.neg(t) if negate else t)
        return E.add(*terms)

    def term(self):
        num = [self.factor()]
        den = []
        while self.tok.kind in ("*", "/"):
            op = self.tok.kind
            self.pos += 1
            f = self.factor()
            if op == "*":
                num.append(f)
            else:
                # left associative: a/b*c == (a/b)*c
                den.append(f)
        if not den:
            return E.mul(*num)
        return E.mul(*num, *(E.pow_(d, -1) for d in den))

    def factor(self):
        b = self.base()
        if self.tok.kind == "^":
            self.pos += 1
            q = self.exponent()
            b = E.pow_(b, q)
        return b

    def exponent(self):
        if self.tok.kind == "int":
            return Fraction(int(self.eat("int").text))
        if self.tok.kind == "(":
            self.pos += 1
            sign = 1
            if self.tok.kind == "-":
                sign = -1
                self.pos += 1
            elif self.tok.kind == "+":
                self.pos += 1
            p = int(self.eat("int").text)
            q = 1
            if self.tok.kind == "/":
                self.pos += 1
                tq = self.tok
                q = int(self.eat("int").text)
                if q == 0:
                    self.fail("zero denominator in exponent", tq)
            self.eat(")")
            return Fraction(sign * p, q)
        self.fail("expected an exponent")

    def base(self):
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            return E.num(int(t.text))
        if t.kind == "(":
            self.pos += 1
            e = self.expr()
            self.eat(")")
            return e
        if t.kind == "name":
            self.pos += 1
            if t.text in _FUNCS:
                if self.tok.kind != "(":
                    self.fail(f"function {t.text} needs an argument")
                self.pos += 1
                arg = self.expr()
                self.eat(")")
                return E.func(t.text, arg)
            if self.declared is not None and t.text not in self.declared:
                raise UndeclaredVariableError(t.text, self.declared)
            return E.var(t.text)
        if t.kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {t.text!r}")


def parse(source: str, ctx: Context | None) -> E.Expr:
    """Parse ``source``; every identifier must be declared in ``ctx``."""
    declared = None if ctx is None else ctx.names
    try:
        return _Parser(source, declared).parse()
    except ZeroDivisionError:
        raise ExprSyntaxError("division by the constant zero", 1, 1, source) from None


def parse_unchecked(source: str) -> E.Expr:
    return parse(source, None)
