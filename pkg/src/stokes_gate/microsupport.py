"""Conic subsets of the cotangent space and the irregularity witness.

Points of ``T*X`` are pairs ``(z; zeta)`` of Gaussian rationals, the
covector ``(xi, eta)`` being written ``zeta = xi + i eta``. All membership
predicates are exact except the open-angle test, which is decided with
certified intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import NoIrregularityWitness, PreconditionError
from .formal import FormalData
from .gaussian import GaussianRational, I
from .intervals import precision
from .sectors import SectorCertificate, select_sector
from .temperance import Sector, _angle_inside


@dataclass(frozen=True)
class ZeroSectionOver:
    """``{(z; 0)}`` over the sector (or all of X when ``sector`` is None),
    restricted to ``|z| >= min_modulus``."""

    sector: Sector | None = None
    min_modulus: Fraction = Fraction(0)

    def contains(self, z: GaussianRational, zeta: GaussianRational) -> bool:
        if zeta:
            return False
        if self.sector is None:
            return True
        return _in_sector(z, self.sector) and z.abs2() >= self.min_modulus ** 2


@dataclass(frozen=True)
class OutwardNormalCircle:
    """``{(z; lambda z) : lambda < 0, |z| = delta, z in S}``."""

    delta: Fraction
    sector: Sector

    def contains(self, z: GaussianRational, zeta: GaussianRational) -> bool:
        if z.abs2() != self.delta ** 2 or not _in_sector(z, self.sector):
            return False
        # zeta = lambda z with lambda < 0  <=>  zeta * conj(z) is a negative real
        w = zeta * z.conjugate()
        return w.im == 0 and w.re < 0


@dataclass(frozen=True)
class ConormalAtOrigin:
    """``{(0; zeta)}`` for every zeta."""

    def contains(self, z: GaussianRational, zeta: GaussianRational) -> bool:
        return not z


def _in_sector(z: GaussianRational, s: Sector) -> bool:
    return bool(z) and z.abs2() < s.R ** 2 and _angle_inside(z, s.theta0, s.theta1)


@dataclass(frozen=True)
class ConicSubset:
    components: tuple

    def contains(self, z, zeta) -> bool:
        z, zeta = _gr(z), _gr(zeta)
        return any(c.contains(z, zeta) for c in self.components)

    __contains__ = lambda self, pt: self.contains(*pt)  # noqa: E731


def _gr(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (tuple, list)):
        return GaussianRational(Fraction(x[0]), Fraction(x[1]))
    return GaussianRational(Fraction(x))


def _cert_sector(cert: SectorCertificate) -> Sector:
    return Sector(cert.theta0, cert.theta1, cert.R)


def ss_Fdelta(delta, cert: SectorCertificate) -> ConicSubset:
    """``SS(F_delta)``: zero section over ``|z| >= delta``, the conormal circle, and ``T*_S S``."""
    delta = Fraction(delta)
    if not 0 < delta < cert.R:
        raise PreconditionError("need 0 < delta < R")
    s = _cert_sector(cert)
    return ConicSubset((ZeroSectionOver(s, delta), OutwardNormalCircle(delta, s), ZeroSectionOver(s)))


def char_variety(fd: FormalData | None = None) -> ConicSubset:
    """Zero section over X together with the fibre over the origin."""
    return ConicSubset((ZeroSectionOver(None), ConormalAtOrigin()))


@dataclass(frozen=True)
class Witness:
    delta: Fraction
    z: GaussianRational
    xi: GaussianRational
    r: Fraction
    checks: dict

    @property
    def ok(self) -> bool:
        return self.checks["in_SS_Fdelta"] and not self.checks["in_Char"] and self.checks["in_U"]

    def to_dict(self) -> dict:
        return {"delta": str(self.delta),
                "z": [str(self.z.re), str(self.z.im)],
                "xi": [str(self.xi.re), str(self.xi.im)],
                "checks": dict(self.checks)}


def _unit_point(theta_pi: Fraction, max_den: int) -> GaussianRational:
    """Rational point of the unit circle near angle ``theta_pi * pi``."""
    k = round(theta_pi * 2)
    with precision():
        q = theta_pi - Fraction(k, 2)
        psi = mpmath.mpf(q.numerator) / q.denominator * mpmath.pi  # in [-pi/4, pi/4]
        t = Fraction(mpmath.nstr(mpmath.tan(psi / 2), 45)).limit_denominator(max_den)
    w = GaussianRational((1 - t * t) / (1 + t * t), 2 * t / (1 + t * t))
    return w * I ** (k % 4)


def check_witness(cert: SectorCertificate, delta, z, xi, r) -> dict:
    r = Fraction(r)
    return {
        "in_SS_Fdelta": ss_Fdelta(delta, cert).contains(z, xi),
        "in_Char": char_variety().contains(z, xi),
        "in_U": z.abs2() < r * r and xi.abs2() < r * r,
    }


def irregularity_witness(cert: SectorCertificate | FormalData, r) -> Witness:
    """A covector in ``SS(F_delta)`` inside ``{|z|<r} x {|zeta|<r}`` but outside Char.

    Accepts a certificate or formal data (certified on the fly).
    """
    if isinstance(cert, FormalData):
        if not cert.nonzero_indices():
            raise NoIrregularityWitness("operator is regular at 0: no exponential growth to witness")
        cert = select_sector(cert)
    if cert is None or not cert.I:
        raise NoIrregularityWitness("no index with condition (i): the operator is regular at 0")
    r = Fraction(r)
    if r <= 0:
        raise PreconditionError("r must be positive")
    delta = min(r, cert.R) / 2
    mid = cert.midpoint()
    s = _cert_sector(cert)
    den = 16
    while True:
        w = _unit_point(mid, den)
        if _angle_inside(w, s.theta0, s.theta1):
            break
        den *= 16
        if den > 10 ** 60:
            raise NoIrregularityWitness("could not place a rational point inside the sector")
    z = w * delta
    xi = z * (-r / (2 * delta))
    checks = check_witness(cert, delta, z, xi, r)
    wit = Witness(delta, z, xi, r, checks)
    if not wit.ok:
        raise NoIrregularityWitness(f"witness failed its own checks: {checks}")
    return wit
