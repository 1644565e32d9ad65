"""Expression parser and printer for sphere-algebra elements.

Grammar (precedence: power > juxtaposition > unary minus > addition):

    expr     := term (('+' | '-') term)*
    term     := '-'* factors
    factors  := factor (('*')? factor)*
    factor   := atom ('^' exponent)?
    atom     := RATIONAL | 'q' | GEN | '(' expr ')'
    exponent := ['-'] INT [ '/' INT ]      (halves allowed only on q)
    GEN      := 'z' DIGIT '*'?

Juxtaposition multiplies; a '*' directly after a generator is the star,
anywhere else it is multiplication.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Tuple

from .ncpoly import NCPoly, Presentation, normalize
from .qcoeff import QScalar, qpow


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} (at position {pos})")
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<gen>z\d\*?)|(?P<num>\d+(?:/\d+)?)|(?P<q>q)|(?P<op>[-+*^()]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        for kind in ("gen", "num", "q", "op"):
            val = m.group(kind)
            if val is not None:
                out.append((kind, val, m.start(kind)))
                break
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, P: Presentation):
        self.toks = _tokenize(text)
        self.i = 0
        self.P = P
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect_op(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)

    def parse(self) -> NCPoly:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind is not None:
            raise ParseError(f"trailing input {val!r}", pos)
        return normalize(e, self.P)

    def expr(self) -> NCPoly:
        acc = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                acc = acc + (t if val == "+" else -t)
            else:
                return acc

    def term(self) -> NCPoly:
        sign = 1
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "-":
                self.take()
                sign = -sign
            else:
                break
        f = self.factors()
        return f if sign > 0 else -f

    def factors(self) -> NCPoly:
        from .ncpoly import mul

        acc = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = mul(acc, self.factor(), self.P)
            elif kind in ("gen", "num", "q") or (kind == "op" and val == "("):
                acc = mul(acc, self.factor(), self.P)
            else:
                return acc

    def factor(self) -> NCPoly:
        base, is_q = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            e = self.exponent(halves=is_q)
            if is_q:
                return NCPoly.scalar(qpow(e))
            if e.denominator != 1 or e < 0:
                raise ParseError("only nonnegative integer powers on this base", self.peek()[2])
            from .ncpoly import mul

            out = NCPoly.one()
            for _ in range(int(e)):
                out = mul(out, base, self.P)
            return out
        return base

    def exponent(self, halves: bool) -> Fraction:
        sign = 1
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.take()
            sign = -1
        kind, val, pos = self.take()
        if kind != "num":
            raise ParseError("expected an exponent", pos)
        f = Fraction(val) * sign
        if f.denominator not in (1, 2) or (f.denominator == 2 and not halves):
            raise ParseError("fractional exponents only as halves of q", pos)
        return f

    def atom(self) -> Tuple[NCPoly, bool]:
        kind, val, pos = self.take()
        if kind == "num":
            return NCPoly.scalar(QScalar.from_fraction(Fraction(val))), False
        if kind == "q":
            return NCPoly.scalar(qpow(1)), True
        if kind == "gen":
            starred = val.endswith("*")
            idx = int(val[1])
            if idx > self.P.n:
                raise ParseError(f"generator z{idx} out of range for n={self.P.n}", pos)
            return NCPoly.gen(idx, starred), False
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e, False
        raise ParseError(f"unexpected token {val!r}", pos)


def parse_expr(text: str, n: int, P: Presentation | None = None) -> NCPoly:
    """Parse and normalize a sphere-algebra expression at level n."""
    return _Parser(text, P or Presentation(n)).parse()


def _word_str(w: tuple) -> str:
    parts = []
    i = 0
    while i < len(w):
        g = w[i]
        j = i
        while j < len(w) and w[j] == g:
            j += 1
        name = f"z{g >> 1}" + ("*" if g & 1 else "")
        parts.append(name if j - i == 1 else f"{name}^{j - i}")
        i = j
    return " ".join(parts)


def _exp_str(e2: int) -> str:
    """Render q^{e2/2} within the grammar (halves as 1/2 etc.)."""
    f = Fraction(e2, 2)
    if f.denominator == 1:
        return f"q^{f.numerator}"
    return f"q^{f.numerator}/2"


def _coeff_str(c: QScalar) -> str:
    """Grammar-safe rendering of a coefficient with constant denominator."""
    if len(c.den) != 1 or 0 not in c.den:
        raise ValueError("coefficient with polynomial denominator cannot be printed in the grammar")
    d = c.den[0]
    pieces = []
    for e in sorted(c.num, reverse=True):
        a = Fraction(c.num[e], d)
        mag = abs(a)
        if e == 0:
            body = str(mag)
        elif mag == 1:
            body = _exp_str(e)
        else:
            body = f"{mag} {_exp_str(e)}"
        pieces.append((a < 0, body))
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for neg, body in pieces[1:]:
        out += (" - " if neg else " + ") + body
    return out


def print_expr(a: NCPoly) -> str:
    """Canonical text form; round-trips through parse_expr."""
    if not a.terms:
        return "0"
    parts = []
    for w in sorted(a.terms):
        c = a.terms[w]
        cs = _coeff_str(c)
        multi = len(c.num) > 1
        if not w:
            parts.append(f"({cs})" if multi else cs)
        elif cs == "1":
            parts.append(_word_str(w))
        elif cs == "-1":
            parts.append("-" + _word_str(w))
        else:
            head = f"({cs})" if multi else cs
            parts.append(f"{head} * {_word_str(w)}")
    out = parts[0]
    for p in parts[1:]:
        out += (" - " + p[1:]) if p.startswith("-") else (" + " + p)
    return out
