"""Finite Puiseux (and Laurent) polynomials in ``z`` over Q(i).

A :class:`PuiseuxPoly` stores a ramification index ``ram`` and a map
``k -> c`` meaning ``sum c * z**(k/ram)``. Instances are immutable and
always canonical: zero coefficients are dropped and ``ram`` is reduced by
the gcd of the stored exponents, so structurally equal values compare and
hash equal.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .gaussian import GaussianRational, ZERO


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class PuiseuxPoly:
    __slots__ = ("ram", "_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None, ram: int = 1):
        if ram < 1:
            raise ValueError("ramification index must be positive")
        cleaned = {}
        for k, c in (terms or {}).items():
            c = GaussianRational.coerce(c)
            if c:
                cleaned[int(k)] = c
        g = ram
        for k in cleaned:
            g = math.gcd(g, k)
        if g > 1:
            cleaned = {k // g: c for k, c in cleaned.items()}
            ram //= g
        if not cleaned:
            ram = 1
        self.ram = ram
        self._terms = tuple(sorted(cleaned.items()))
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "PuiseuxPoly":
        return cls()

    @classmethod
    def constant(cls, c) -> "PuiseuxPoly":
        return cls({0: c})

    @classmethod
    def monomial(cls, c, exponent) -> "PuiseuxPoly":
        """``c * z**exponent`` with a rational exponent."""
        e = Fraction(exponent)
        return cls({e.numerator: c}, e.denominator)

    @classmethod
    def from_exponents(cls, pairs: Iterable[tuple[object, object]]) -> "PuiseuxPoly":
        """Build from (rational exponent, coefficient) pairs; repeated exponents add."""
        acc = cls.zero()
        for e, c in pairs:
            acc = acc + cls.monomial(c, e)
        return acc

    # -- views ------------------------------------------------------------
    @property
    def terms(self) -> dict[int, GaussianRational]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Fraction, GaussianRational]]:
        """(exponent, coefficient) pairs in increasing exponent order."""
        for k, c in self._terms:
            yield Fraction(k, self.ram), c

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_laurent(self) -> bool:
        return self.ram == 1

    def valuation(self) -> Fraction | None:
        """z-adic valuation (lowest exponent), None for the zero polynomial."""
        if not self._terms:
            return None
        return Fraction(self._terms[0][0], self.ram)

    def degree(self) -> Fraction | None:
        if not self._terms:
            return None
        return Fraction(self._terms[-1][0], self.ram)

    def lowest_term(self) -> tuple[Fraction, GaussianRational]:
        if not self._terms:
            raise ValueError("zero polynomial has no lowest term")
        k, c = self._terms[0]
        return Fraction(k, self.ram), c

    def coeff(self, exponent) -> GaussianRational:
        e = Fraction(exponent)
        if self.ram % e.denominator:
            return ZERO
        k = e.numerator * (self.ram // e.denominator)
        for kk, c in self._terms:
            if kk == k:
                return c
        return ZERO

    def _at_ram(self, ram: int) -> dict[int, GaussianRational]:
        f = ram // self.ram
        return {k * f: c for k, c in self._terms}

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(x) -> "PuiseuxPoly":
        if isinstance(x, PuiseuxPoly):
            return x
        return PuiseuxPoly.constant(GaussianRational.coerce(x))

    def __add__(self, other):
        try:
            o = PuiseuxPoly._coerce(other)
        except TypeError:
            return NotImplemented
        ram = _lcm(self.ram, o.ram)
        acc = self._at_ram(ram)
        for k, c in o._at_ram(ram).items():
            acc[k] = acc.get(k, ZERO) + c
        return PuiseuxPoly(acc, ram)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxPoly({k: -c for k, c in self._terms}, self.ram)

    def __sub__(self, other):
        try:
            o = PuiseuxPoly._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return PuiseuxPoly._coerce(other) - self

    def __mul__(self, other):
        try:
            o = PuiseuxPoly._coerce(other)
        except TypeError:
            return NotImplemented
        ram = _lcm(self.ram, o.ram)
        a, b = self._at_ram(ram), o._at_ram(ram)
        acc: dict[int, GaussianRational] = {}
        for ka, ca in a.items():
            for kb, cb in b.items():
                acc[ka + kb] = acc.get(ka + kb, ZERO) + ca * cb
        return PuiseuxPoly(acc, ram)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result, base = PuiseuxPoly.constant(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c) -> "PuiseuxPoly":
        c = GaussianRational.coerce(c)
        return PuiseuxPoly({k: v * c for k, v in self._terms}, self.ram)

    def shift(self, exponent) -> "PuiseuxPoly":
        """Multiply by ``z**exponent``."""
        return self * PuiseuxPoly.monomial(1, exponent)

    def derivative(self) -> "PuiseuxPoly":
        """d/dz, termwise: z^(k/l) -> (k/l) z^((k-l)/l)."""
        l = self.ram
        return PuiseuxPoly({k - l: c * Fraction(k, l) for k, c in self._terms if k}, l)

    def truncate_below(self, exponent) -> "PuiseuxPoly":
        """Keep only the terms with exponent strictly below ``exponent``."""
        e = Fraction(exponent)
        return PuiseuxPoly({k: c for k, c in self._terms
                            if Fraction(k, self.ram) < e}, self.ram)

    def divide_exact(self, other: "PuiseuxPoly") -> "PuiseuxPoly | None":
        """Quotient in the Laurent ring, or None if ``other`` does not divide ``self``.

        Both operands must be Laurent polynomials (ram == 1).
        """
        if self.ram != 1 or other.ram != 1:
            raise ValueError("exact division is only defined for Laurent polynomials")
        if not other:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self:
            return PuiseuxPoly.zero()
        # strip monomial factors so both are polynomials with nonzero constant term
        vs, vo = self._terms[0][0], other._terms[0][0]
        num = {k - vs: c for k, c in self._terms}
        den = {k - vo: c for k, c in other._terms}
        dd = max(den)
        lead = den[dd]
        quot: dict[int, GaussianRational] = {}
        while num:
            dn = max(num)
            if dn < dd:
                return None
            q = num[dn] / lead
            quot[dn - dd] = q
            for k, c in den.items():
                kk = k + dn - dd
                v = num.get(kk, ZERO) - q * c
                if v:
                    num[kk] = v
                else:
                    num.pop(kk, None)
        return PuiseuxPoly(quot).shift(vs - vo)

    # -- evaluation -------------------------------------------------------
    def evaluate_polar(self, rho, theta, ctx=None):
        """Evaluate at ``rho * exp(i theta)`` with z^(1/ram) = rho^(1/ram) exp(i theta/ram).

        ``ctx`` is an mpmath context (``mpmath.mp`` or ``mpmath.iv``); the
        angle ``theta`` selects the branch, so lifted angles are meaningful.
        """
        import mpmath
        ctx = ctx or mpmath.mp
        root = ctx.mpf(rho) ** (ctx.mpf(1) / self.ram) if self.ram > 1 else ctx.mpf(rho)
        acc = ctx.mpc(0)
        for k, c in self._terms:
            mag = root ** k
            ang = theta * k / self.ram
            acc += ctx.mpc(_ctx_num(ctx, c.re), _ctx_num(ctx, c.im)) * mag * ctx.mpc(ctx.cos(ang), ctx.sin(ang))
        return acc

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, PuiseuxPoly):
            return self.ram == other.ram and self._terms == other._terms
        try:
            return self == PuiseuxPoly._coerce(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ram, self._terms))
        return self._hash

    def __repr__(self):
        return f"PuiseuxPoly({self})"

    def __str__(self):
        from .parsing import format_coefficient
        return format_coefficient(self)


def _ctx_num(ctx, q: Fraction):
    if q.denominator == 1:
        return ctx.mpf(q.numerator)
    return ctx.mpf(q.numerator) / q.denominator
