"""Angles that are either exact rational multiples of pi or certified enclosures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import iv

from .gaussian import GaussianRational
from .intervals import ivq


@dataclass(frozen=True)
class Angle:
    """An angle in radians.

    Exactly one of ``pi_mult`` (the angle is ``pi_mult * pi``) or
    ``arg_of`` (the angle is ``arg(arg_of)`` taken in ``[0, 2 pi)``) is
    set. Enclosures are recomputed on demand at the current interval
    precision, so their width tracks the working precision.
    """

    pi_mult: Fraction | None = None
    arg_of: GaussianRational | None = None

    @classmethod
    def pi(cls, q) -> "Angle":
        return cls(pi_mult=Fraction(q))

    @classmethod
    def argument(cls, w: GaussianRational) -> "Angle":
        """arg(w) in [0, 2 pi); exact for the eight axis/diagonal directions."""
        if not w:
            raise ValueError("argument of zero is undefined")
        re, im = w.re, w.im
        exact = None
        if im == 0:
            exact = Fraction(0) if re > 0 else Fraction(1)
        elif re == 0:
            exact = Fraction(1, 2) if im > 0 else Fraction(3, 2)
        elif abs(re) == abs(im):
            quad = {(True, True): 1, (False, True): 3, (False, False): 5, (True, False): 7}
            exact = Fraction(quad[(re > 0, im > 0)], 4)
        if exact is not None:
            return cls(pi_mult=exact)
        return cls(arg_of=w)

    @property
    def is_exact(self) -> bool:
        return self.pi_mult is not None

    def interval(self):
        if self.pi_mult is not None:
            return ivq(self.pi_mult) * iv.pi
        w = self.arg_of
        a = iv.atan2(ivq(w.im), ivq(w.re))
        if w.im < 0:
            a = a + 2 * iv.pi
        return a

    def __float__(self):
        if self.pi_mult is not None:
            return float(self.pi_mult) * float(mpmath.pi)
        a = mpmath.atan2(float(self.arg_of.im), float(self.arg_of.re))
        return float(a + 2 * mpmath.pi) if self.arg_of.im < 0 else float(a)

    def __str__(self):
        if self.pi_mult is not None:
            return f"{self.pi_mult}*pi"
        return f"arg({self.arg_of})"
