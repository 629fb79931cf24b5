"""Certified interval helpers on top of :mod:`mpmath.iv`.

All certified sign decisions in the package funnel through here. Working
precision defaults to 50 significant digits and can be overridden with
the ``STOKES_GATE_PRECISION`` environment variable.
"""

from __future__ import annotations

import contextlib
import math
import os
from fractions import Fraction

import mpmath
from mpmath import iv

from .errors import BranchAmbiguity, DomainError
from .puiseux import PuiseuxPoly

DEFAULT_DIGITS = 50


def working_digits() -> int:
    raw = os.environ.get("STOKES_GATE_PRECISION")
    if raw:
        try:
            return max(20, int(raw))
        except ValueError:
            pass
    return DEFAULT_DIGITS


@contextlib.contextmanager
def precision(digits: int | None = None):
    """Set both the point and interval mpmath contexts to ``digits``."""
    digits = digits or working_digits()
    old_iv, old_mp = iv.prec, mpmath.mp.prec
    iv.dps = digits
    mpmath.mp.dps = digits
    try:
        yield digits
    finally:
        iv.prec = old_iv
        mpmath.mp.prec = old_mp


def ivq(q) -> "iv.mpf":
    """Tight enclosure of an exact rational (int/Fraction) or float."""
    if isinstance(q, float):
        return iv.mpf(q)
    q = Fraction(q)
    if q.denominator == 1:
        return iv.mpf(q.numerator)
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def pi_multiple(q) -> "iv.mpf":
    """Enclosure of ``q * pi``."""
    return ivq(q) * iv.pi


def _raw_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    if not man:
        return Fraction(0)
    v = Fraction(int(man)) * (Fraction(2) ** exp)
    return -v if sign else v


def endpoints(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of a real interval."""
    a, b = x._mpi_
    return _raw_to_fraction(a), _raw_to_fraction(b)


def lower(x) -> Fraction:
    return endpoints(x)[0]


def upper(x) -> Fraction:
    return endpoints(x)[1]


def round_down(q: Fraction, digits: int = 12) -> Fraction:
    """A rational with a short decimal denominator that is <= q."""
    scale = 10 ** digits
    r = Fraction(math.floor(q * scale), scale)
    if q > 0 and r <= 0:
        # q is tiny; fall back to the exact binary value
        return q
    return r


def round_up(q: Fraction, digits: int = 12) -> Fraction:
    scale = 10 ** digits
    return Fraction(math.ceil(q * scale), scale)


def is_positive(x) -> bool:
    return lower(x) > 0


def is_negative(x) -> bool:
    return upper(x) < 0


def width(x) -> Fraction:
    a, b = endpoints(x)
    return b - a


def to_iv(x):
    if isinstance(x, (int, Fraction)):
        return ivq(x)
    return iv.mpf(x)


# -- complex boxes ---------------------------------------------------------

def box(re_lo, re_hi=None, im_lo=0, im_hi=None):
    """Complex interval from exact/float endpoints."""
    re_hi = re_lo if re_hi is None else re_hi
    im_hi = im_lo if im_hi is None else im_hi
    with precision(max(working_digits(), iv.dps)):
        re = iv.mpf([to_iv(re_lo).a, to_iv(re_hi).b])
        im = iv.mpf([to_iv(im_lo).a, to_iv(im_hi).b])
        return iv.mpc(re, im)


def _as_box(z):
    if isinstance(z, iv.mpc):
        return z
    if isinstance(z, tuple) and len(z) == 4:
        return box(*z)
    if hasattr(z, "re") and hasattr(z, "im") and isinstance(getattr(z, "re"), Fraction):
        return box(z.re, z.re, z.im, z.im)
    if isinstance(z, (complex, float, int, Fraction)):
        zc = complex(z)
        return box(zc.real, zc.real, zc.imag, zc.imag)
    if isinstance(z, mpmath.mpc) or isinstance(z, mpmath.mpf):
        zc = mpmath.mpc(z)
        return iv.mpc(iv.mpf(zc.real), iv.mpf(zc.imag))
    raise TypeError(f"cannot interpret {z!r} as a complex box")


def arg_enclosure(zbox, reference=0):
    """Enclosure of the argument lifted to ``(reference - pi, reference + pi)``.

    Raises BranchAmbiguity when the box meets the cut ray at
    ``reference + pi``, where the lift is discontinuous.
    """
    zbox = _as_box(zbox)
    ref = to_iv(reference) if not isinstance(reference, iv.mpf) else reference
    # rotate so the cut sits on the negative real axis
    rot = iv.mpc(iv.cos(ref), -iv.sin(ref))
    w = zbox * rot
    re_lo, re_hi = endpoints(w.real)
    im_lo, im_hi = endpoints(w.imag)
    if re_hi <= 0 and im_lo <= 0 <= im_hi:
        raise BranchAmbiguity("complex box crosses the branch cut")
    if re_lo <= 0 <= re_hi and im_lo <= 0 <= im_hi:
        raise DomainError("complex box contains 0; argument undefined")
    # the argument over a box avoiding 0 and the cut is attained at corners
    corners = [iv.atan2(iv.mpf(b), iv.mpf(a))
               for a in (w.real.a, w.real.b) for b in (w.imag.a, w.imag.b)]
    lo = min(lower(c) for c in corners)
    hi = max(upper(c) for c in corners)
    return iv.mpf([ivq(lo).a, ivq(hi).b]) + ref


def eval_enclosure(p: PuiseuxPoly, z, branch=0, digits: int | None = None):
    """Outward-rounded enclosure of ``p`` over the complex box ``z``.

    ``branch`` is the reference angle of the lift used for ``z^(1/ram)``:
    arguments are taken in ``(branch - pi, branch + pi)``; the default is
    the principal branch, positive on ``arg z = 0``.
    """
    with precision(digits):
        zb = _as_box(z)
        has_negative = bool(p) and p.valuation() < 0
        re_lo, re_hi = endpoints(zb.real)
        im_lo, im_hi = endpoints(zb.imag)
        contains_zero = re_lo <= 0 <= re_hi and im_lo <= 0 <= im_hi
        if contains_zero:
            if has_negative:
                raise DomainError("box contains 0 and p has negative exponents")
            if p.ram != 1:
                raise BranchAmbiguity("fractional powers are ambiguous on a box containing 0")
            acc = iv.mpc(0)
            for e, c in p.items():
                acc += iv.mpc(ivq(c.re), ivq(c.im)) * zb ** int(e)
            return acc
        if p.ram == 1 and not has_negative:
            acc = iv.mpc(0)
            for e, c in p.items():
                acc += iv.mpc(ivq(c.re), ivq(c.im)) * zb ** int(e)
            return acc
        theta = arg_enclosure(zb, branch)
        modulus = iv.sqrt(zb.real ** 2 + zb.imag ** 2)
        return p.evaluate_polar(modulus, theta, ctx=iv)


def eval_polar_enclosure(p: PuiseuxPoly, rho, theta, digits: int | None = None):
    """Enclosure of ``p(rho e^{i theta})`` with the branch fixed by the lifted ``theta``."""
    with precision(digits):
        return p.evaluate_polar(to_iv(rho), to_iv(theta), ctx=iv)
