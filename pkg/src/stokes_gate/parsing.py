"""Text form of operators and coefficients.

Grammar (whitespace insignificant)::

    expr     := ['+'|'-'] term (('+'|'-') term)*
    term     := factor (['*'|'/'] factor)*        # juxtaposition multiplies
    factor   := atom ['^' exponent]
    atom     := NUMBER | 'i' | 'z' | 'd' | '(' expr ')'
    exponent := ['-'] INT | '(' ['-'] INT ['/' INT] ')'

``d`` stands for d/dz and must be the last factor of its term, so that
every term reads ``coefficient * d^k`` without commutation ambiguity.
The printer emits exactly this form, so ``parse(format(op)) == op``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import OperatorSyntaxError, ZeroLeadingCoefficient
from .gaussian import GaussianRational
from .operators import ScalarOperator
from .puiseux import PuiseuxPoly

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([izd])|(\^)|(\*)|(/)|(\+)|(-)|(\()|(\)))")
_KINDS = ("num", "name", "^", "*", "/", "+", "-", "(", ")")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise OperatorSyntaxError(f"unexpected character {text[bad]!r}",
                                      len(text[:bad].encode()))
        for kind, val in zip(_KINDS, m.groups()):
            if val is not None:
                start = m.start(_KINDS.index(kind) + 1)
                tokens.append((kind, val, len(text[:start].encode())))
                break
        pos = m.end()
    tokens.append(("end", "", len(text.encode())))
    return tokens


class _Parser:
    # values are dicts: derivative order -> PuiseuxPoly coefficient

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.max_order = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise OperatorSyntaxError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise OperatorSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return value

    def expr(self):
        sign = 1
        if self.peek()[0] in "+-":
            sign = -1 if self.take()[0] == "-" else 1
        acc = _scale(self.term(), sign)
        while self.peek()[0] in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
            acc = _add(acc, _scale(self.term(), sign))
        return acc

    def term(self):
        value = self.factor()
        while True:
            tok = self.peek()
            if tok[0] in ("*", "/"):
                self.take()
                if _order(value) > 0:
                    raise OperatorSyntaxError("d must be the last factor of a term", tok[2])
                rhs = self.factor()
                if tok[0] == "/":
                    value = self._divide(value, rhs, tok[2])
                else:
                    value = _mul(value, rhs)
            elif tok[0] in ("num", "name", "("):
                if _order(value) > 0:
                    raise OperatorSyntaxError("d must be the last factor of a term", tok[2])
                value = _mul(value, self.factor())
            else:
                return value

    def _divide(self, value, rhs, offset):
        if set(rhs) != {0} or rhs[0].valuation() != 0 or rhs[0].degree() != 0:
            raise OperatorSyntaxError("division is only allowed by nonzero constants", offset)
        inv = 1 / rhs[0].coeff(0)
        return {k: c.scale(inv) for k, c in value.items()}

    def factor(self):
        start = self.peek()
        base = self.atom()
        if self.peek()[0] != "^":
            return base
        tok = self.take()
        exp = self.exponent()
        if _order(base) > 0:
            if exp.denominator != 1 or exp < 0 or set(base) != {1}:
                raise OperatorSyntaxError("d must be raised to a nonnegative integer", tok[2])
            k = int(exp)
            self.max_order = max(self.max_order, k)
            return {k: PuiseuxPoly.constant(1)}
        poly = base.get(0)
        if set(base) != {0}:
            raise OperatorSyntaxError("bad base for exponent", start[2])
        items = list(poly.items())
        if len(items) == 1:
            e, c = items[0]
            if exp.denominator != 1 and c != 1:
                raise OperatorSyntaxError("fractional powers apply to z only", tok[2])
            return {0: PuiseuxPoly.monomial(c ** int(exp) if exp.denominator == 1 else c, e * exp)}
        if exp.denominator != 1 or exp < 0:
            raise OperatorSyntaxError("sums may only be raised to nonnegative integers", tok[2])
        return {0: poly ** int(exp)}

    def exponent(self) -> Fraction:
        tok = self.peek()
        if tok[0] == "(":
            self.take()
            neg = False
            if self.peek()[0] == "-":
                self.take()
                neg = True
            num = self._int()
            den = 1
            if self.peek()[0] == "/":
                self.take()
                den = self._int()
                if den == 0:
                    raise OperatorSyntaxError("zero denominator in exponent", tok[2])
            self.take(")")
            q = Fraction(num, den)
            return -q if neg else q
        neg = False
        if tok[0] in ("-", "+"):
            neg = self.take()[0] == "-"
        q = Fraction(self._int())
        return -q if neg else q

    def _int(self) -> int:
        tok = self.take("num")
        if "." in tok[1]:
            raise OperatorSyntaxError("exponent must be an integer", tok[2])
        return int(tok[1])

    def atom(self):
        tok = self.take()
        kind, val, off = tok
        if kind == "num":
            return {0: PuiseuxPoly.constant(Fraction(val))}
        if kind == "name":
            if val == "i":
                return {0: PuiseuxPoly.constant(GaussianRational(0, 1))}
            if val == "z":
                return {0: PuiseuxPoly.monomial(1, 1)}
            self.max_order = max(self.max_order, 1)
            return {1: PuiseuxPoly.constant(1)}
        if kind == "(":
            inner = self.expr()
            self.take(")")
            if _order(inner) > 0:
                raise OperatorSyntaxError("d may not appear inside parentheses", off)
            return inner
        raise OperatorSyntaxError(f"unexpected {val or 'end of input'!r}", off)


def _order(value) -> int:
    return max((k for k, c in value.items() if c), default=0)


def _add(a, b):
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, PuiseuxPoly.zero()) + c
    return out


def _scale(a, s):
    return {k: c.scale(s) for k, c in a.items()}


def _mul(a, b):
    # only (coefficient) * (coefficient or d^k) products reach here
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            out[ka + kb] = out.get(ka + kb, PuiseuxPoly.zero()) + ca * cb
    return out


def parse_operator(text: str) -> ScalarOperator:
    """Parse operator text such as ``"z^2*d + 1"``."""
    p = _Parser(text)
    value = p.parse()
    n = p.max_order
    if n == 0 or not value.get(n):
        raise ZeroLeadingCoefficient(
            "no derivative term survives" if n == 0 else f"coefficient of d^{n} cancels to zero")
    coeffs = tuple(value.get(k, PuiseuxPoly.zero()) for k in range(n + 1))
    for c in coeffs:
        if not c.is_laurent():
            raise OperatorSyntaxError("operator coefficients must have integer exponents", 0)
    return ScalarOperator(coeffs)


def parse_coefficient(text: str) -> PuiseuxPoly:
    """Parse a d-free expression in z (used for system matrices)."""
    value = _Parser(text).parse()
    if _order(value) > 0:
        raise OperatorSyntaxError("coefficient expressions may not contain d", 0)
    return value.get(0, PuiseuxPoly.zero())


def parse_gaussian(text: str) -> GaussianRational:
    poly = parse_coefficient(text)
    if poly and (poly.valuation() != 0 or poly.degree() != 0):
        raise OperatorSyntaxError("expected a constant", 0)
    return poly.coeff(0)


# -- printing ----------------------------------------------------------------

def _magnitude(c: GaussianRational) -> tuple[int, str]:
    """Sign and unsigned text of a coefficient; '' stands for 1."""
    if c.im == 0:
        q = c.re
        return (1 if q > 0 else -1), ("" if abs(q) == 1 else str(abs(q)))
    if c.re == 0:
        q = c.im
        mag = abs(q)
        return (1 if q > 0 else -1), ("i" if mag == 1 else f"{mag}i")
    im = c.im
    sign = "+" if im > 0 else "-"
    imtxt = "i" if abs(im) == 1 else f"{abs(im)}i"
    return 1, f"({c.re}{sign}{imtxt})"


def _zpow(e: Fraction) -> str:
    if e == 0:
        return ""
    if e == 1:
        return "z"
    if e.denominator == 1:
        return f"z^{e.numerator}"
    return f"z^({e})"


def _monomials(poly: PuiseuxPoly, dpart: str):
    out = []
    for e, c in sorted(poly.items(), key=lambda t: -t[0]):
        sign, mag = _magnitude(c)
        parts = [p for p in (mag, _zpow(e), dpart) if p]
        out.append((sign, "*".join(parts) if parts else "1"))
    return out


def _join(monos) -> str:
    if not monos:
        return "0"
    text = ""
    for idx, (sign, body) in enumerate(monos):
        if idx == 0:
            text = body if sign > 0 else f"-{body}"
        else:
            text += (" + " if sign > 0 else " - ") + body
    return text


def format_coefficient(poly: PuiseuxPoly) -> str:
    return _join(_monomials(poly, ""))


def format_operator(op: ScalarOperator) -> str:
    monos = []
    for k in range(op.order, -1, -1):
        dpart = "" if k == 0 else ("d" if k == 1 else f"d^{k}")
        monos.extend(_monomials(op.coeffs[k], dpart))
    return _join(monos)
