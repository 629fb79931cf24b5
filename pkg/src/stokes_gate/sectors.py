"""Certified sector selection.

Given exponential parts ``Lambda_j`` with leading data ``(n_j, phi_j)``
(``phi_j = arg(-a_{n_j})``), find a closed angular range ``[theta0, theta1]``
of amplitude in ``(0, 2 pi)`` and constants ``C_j`` such that each nonzero
part satisfies either

    (i)   cos(phi_j - n_j theta / l) >= C_j        for all theta in range, or
    (ii)  cos(phi_j - n_j theta / l) <= -C_j       for all theta in range,

with at least one part of type (i). Parts of type (ii) decay toward the
origin inside a radius ``R_j`` computed from the lower-order coefficients;
``R`` is the minimum of those radii.

Angles are stored as exact rational multiples of pi. Every inequality is
decided with interval arithmetic, never with bare floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from mpmath import iv

from .angles import Angle
from .errors import CertificationFailure, PreconditionError
from .formal import ExponentialPart, FormalData
from .gaussian import sqrt_bounds
from .intervals import endpoints, ivq, lower, precision, upper, working_digits

#: theta1 is placed at this fraction of the admissible range (strict shrink)
SHRINK = Fraction(99, 100)
#: relative slack taken off certified cosine bounds before rounding
C_SLACK = Fraction(1, 2 ** 20)
MAX_SPLITS = 400


def round_down_sig(q: Fraction, sig: int = 12) -> Fraction:
    """Largest rational <= q with ``sig`` significant decimal digits (q > 0)."""
    if q <= 0:
        raise ValueError("expected a positive rational")
    e = math.floor(math.log10(q.numerator) - math.log10(q.denominator))
    scale = Fraction(10) ** (sig - 1 - e)
    r = Fraction(math.floor(q * scale)) / scale
    return r if 0 < r <= q else q


def round_up_sig(q: Fraction, sig: int = 12) -> Fraction:
    if q <= 0:
        raise ValueError("expected a positive rational")
    e = math.floor(math.log10(q.numerator) - math.log10(q.denominator))
    scale = Fraction(10) ** (sig - 1 - e)
    r = Fraction(math.ceil(q * scale)) / scale
    return r if r >= q else q


@dataclass(frozen=True)
class IndexCondition:
    j: int            # 1-based
    cond: str         # "i", "ii" or "zero-part"
    C: Fraction | None = None


@dataclass(frozen=True)
class SectorCertificate:
    """Certified sector ``theta0*pi <= arg z <= theta1*pi`` (lifted), radius ``R``."""

    theta0: Fraction
    theta1: Fraction
    indices: tuple[IndexCondition, ...]
    R: Fraction
    R_j: dict = field(default_factory=dict)

    @property
    def I(self) -> tuple[int, ...]:
        return tuple(c.j for c in self.indices if c.cond == "i")

    @property
    def J(self) -> tuple[int, ...]:
        return tuple(c.j for c in self.indices if c.cond != "i")

    @property
    def amplitude(self) -> Fraction:
        """Amplitude in units of pi."""
        return self.theta1 - self.theta0

    def condition(self, j: int) -> IndexCondition:
        return self.indices[j - 1]

    def midpoint(self) -> Fraction:
        return (self.theta0 + self.theta1) / 2

    def to_dict(self) -> dict:
        return {
            "theta0": {"pi_mult": str(self.theta0)},
            "theta1": {"pi_mult": str(self.theta1)},
            "indices": [
                {"j": c.j, "cond": c.cond, "C": None if c.C is None else str(c.C)}
                for c in self.indices
            ],
            "I": list(self.I),
            "J": list(self.J),
            "R": str(self.R),
            "R_j": {str(j): str(r) for j, r in sorted(self.R_j.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SectorCertificate":
        indices = tuple(
            IndexCondition(int(c["j"]), c["cond"], None if c.get("C") is None else Fraction(c["C"]))
            for c in d["indices"])
        return cls(Fraction(d["theta0"]["pi_mult"]), Fraction(d["theta1"]["pi_mult"]), indices,
                   Fraction(d["R"]), {int(j): Fraction(r) for j, r in d.get("R_j", {}).items()})


# -- interval helpers ---------------------------------------------------------

def _image(phi: Angle, n: int, l: int, lo: Fraction, hi: Fraction):
    """Enclosure of {phi - n theta / l : theta in [lo, hi]*pi}."""
    return phi.interval() - ivq(Fraction(n, l)) * iv.mpf([ivq(lo).a, ivq(hi).b]) * iv.pi


def _cos_range(phi: Angle, n: int, l: int, lo: Fraction, hi: Fraction):
    return iv.cos(_image(phi, n, l, lo, hi))


def _zero_distance(img) -> float:
    """Distance (radians) from an image interval to the nearest zero of cos."""
    a, b = (float(x) / math.pi for x in endpoints(img))
    ka, kb = math.floor(a - 0.5), math.floor(b - 0.5)
    if ka != kb:
        return 0.0
    return math.pi * min(a - (ka + 0.5), (ka + 1.5) - b)


def _slacked(bound: Fraction) -> Fraction:
    return round_down_sig(bound * (1 - C_SLACK))


# -- operations --------------------------------------------------------------

def base_sector(phi: Angle, n: int, l: int) -> tuple[Fraction, Fraction, Fraction]:
    """Base case: a range where ``cos(phi - n theta/l) >= 1/2``.

    Returns ``(theta0, theta1, C)`` with angles as multiples of pi.
    """
    if n < 1 or l < 1:
        raise PreconditionError("n and l must be positive")
    ratio = Fraction(l, n)
    with precision():
        if phi.is_exact and phi.pi_mult == 0:
            theta0, theta1p = Fraction(0), ratio / 4
        elif phi.is_exact:
            theta0 = max(Fraction(0), ratio * (phi.pi_mult - Fraction(1, 4)))
            theta1p = ratio * phi.pi_mult
        else:
            phi_pi = phi.interval() / iv.pi
            t0 = ivq(ratio) * (phi_pi - ivq(Fraction(1, 4)))
            theta0 = max(Fraction(0), round_up_sig(upper(t0), 15)) if upper(t0) > 0 else Fraction(0)
            theta1p = round_down_sig(lower(ivq(ratio) * phi_pi), 15)
        k = math.floor(theta0 / 2)
        theta1 = theta0 + SHRINK * (theta1p - theta0)
        if theta1 >= 2 * (k + 1):
            theta1 = theta0 + SHRINK * (2 * (k + 1) - theta0)
        C = Fraction(1, 2)
        cr = _cos_range(phi, n, l, theta0, theta1)
        if not lower(cr) >= C:
            raise CertificationFailure("base sector does not certify condition (i)")
    return theta0, theta1, C


def refine_sector(theta0: Fraction, theta1: Fraction, phi: Angle, n: int, l: int,
                  digits: int | None = None) -> tuple[Fraction, Fraction, str, Fraction]:
    """Shrink ``[theta0, theta1]`` until one more index gets condition (i) or (ii).

    Returns ``(theta0', theta1', cond, C)``. The new range is contained in
    the old one, so conditions certified earlier stay valid.
    """
    digits = digits or working_digits()
    lo, hi = Fraction(theta0), Fraction(theta1)
    with precision(digits):
        for _ in range(MAX_SPLITS):
            cr = _cos_range(phi, n, l, lo, hi)
            c_lo, c_hi = endpoints(cr)
            if c_lo > 0:
                return lo, hi, "i", _slacked(c_lo)
            if c_hi < 0:
                return lo, hi, "ii", _slacked(-c_hi)
            step = (hi - lo) / 3
            thirds = [(lo + t * step, lo + (t + 1) * step) for t in range(3)]
            dists = [_zero_distance(_image(phi, n, l, a, b)) for a, b in thirds]
            lo, hi = thirds[dists.index(max(dists))]
    if digits < 4 * working_digits():
        return refine_sector(theta0, theta1, phi, n, l, digits * 2)
    raise CertificationFailure("could not separate cosine signs on any subinterval")


def compute_radius(part: ExponentialPart, C: Fraction, R_max: Fraction = Fraction(1)) -> Fraction:
    """Radius below which a type (ii) part has Re(-Lambda) < 0 on the sector.

    With ``T = sum_{k<n} |a_k|`` (upper bound) and ``|a_n|`` (lower bound),
    ``rho < (|a_n| C / T)^l`` and ``rho < 1`` give
    ``sum_{k<n} |a_k| rho^{(n-k)/l} < |a_n| C``.
    """
    n, l = part.n_lead, part.ram
    T = sum((sqrt_bounds(part.coeff(k).abs2())[1] for k in range(1, n)), Fraction(0))
    if T == 0:
        return Fraction(R_max)
    alpha_lo = sqrt_bounds(part.leading.abs2())[0]
    bound = (alpha_lo * Fraction(C) / T) ** l
    return min(Fraction(1), round_down_sig(bound))


def _assemble(fd: FormalData, theta0, theta1, conds: dict, R_max) -> SectorCertificate:
    indices = []
    R_j = {}
    for j, part in enumerate(fd.parts, start=1):
        if part.is_zero:
            indices.append(IndexCondition(j, "zero-part"))
            R_j[j] = Fraction(R_max)
            continue
        cond, C = conds[j]
        indices.append(IndexCondition(j, cond, C))
        if cond == "ii":
            R_j[j] = compute_radius(part, C, R_max)
    R = min([Fraction(R_max)] + list(R_j.values()))
    return SectorCertificate(theta0, theta1, tuple(indices), R, R_j)


def select_sector(fd: FormalData, R_max=Fraction(1), verify: bool = True) -> SectorCertificate:
    """Fold the base case over the first nonzero part, then refine for the rest."""
    nonzero = fd.nonzero_indices()
    if not nonzero:
        raise PreconditionError("select_sector needs an irregular operator (some nonzero part)")
    l = fd.l
    first = fd.parts[nonzero[0]]
    theta0, theta1, C = base_sector(first.phi(first.n_lead), first.n_lead, l)
    conds = {nonzero[0] + 1: ("i", C)}
    for j in nonzero[1:]:
        part = fd.parts[j]
        theta0, theta1, cond, Cj = refine_sector(theta0, theta1, part.phi(part.n_lead),
                                                 part.n_lead, l)
        conds[j + 1] = (cond, Cj)
    cert = _assemble(fd, theta0, theta1, conds, R_max)
    if verify:
        report = verify_certificate(cert, fd)
        if not report.ok:
            raise CertificationFailure("emitted certificate failed verification: "
                                       + "; ".join(report.failures))
    return cert


def certify_sector(fd: FormalData, theta0, theta1, R_max=Fraction(1)) -> SectorCertificate:
    """Certify a caller-chosen range as is (no subdivision).

    Raises CertificationFailure if some nonzero part changes cosine sign on
    the range or if no part gets condition (i).
    """
    theta0, theta1 = Fraction(theta0), Fraction(theta1)
    if not 0 < theta1 - theta0 < 2:
        raise PreconditionError("amplitude must lie in (0, 2 pi)")
    conds = {}
    with precision():
        for j in fd.nonzero_indices():
            part = fd.parts[j]
            c_lo, c_hi = endpoints(_cos_range(part.phi(part.n_lead), part.n_lead, fd.l,
                                              theta0, theta1))
            if c_lo > 0:
                conds[j + 1] = ("i", _slacked(c_lo))
            elif c_hi < 0:
                conds[j + 1] = ("ii", _slacked(-c_hi))
            else:
                raise CertificationFailure(f"index {j + 1} changes sign on the requested range")
    if not any(c == "i" for c, _ in conds.values()):
        raise CertificationFailure("no index satisfies condition (i) on the requested range")
    cert = _assemble(fd, theta0, theta1, conds, R_max)
    report = verify_certificate(cert, fd)
    if not report.ok:
        raise CertificationFailure("; ".join(report.failures))
    return cert


# -- verification ------------------------------------------------------------

@dataclass
class VerificationReport:
    ok: bool = True
    failures: list = field(default_factory=list)
    checked_points: int = 0

    def fail(self, msg: str):
        self.ok = False
        self.failures.append(msg)


def _sample_check(phi: Angle, n: int, l: int, thetas: list[Fraction], cond: str, C: Fraction) -> int:
    """Number of sampled angles where the condition is not certified."""
    # fast path: float evaluation with an explicit error radius
    phi_f = float(phi)
    th = np.array([float(t) for t in thetas]) * math.pi
    x = phi_f - (n / l) * th
    err = 1e-13 * (1.0 + np.abs(x)) + 1e-15
    cx = np.cos(x)
    Cf = float(C)
    if cond == "i":
        bad = np.nonzero(cx - err < Cf)[0]
    else:
        bad = np.nonzero(cx + err > -Cf)[0]
    failures = 0
    for idx in bad:
        cr = _cos_range(phi, n, l, thetas[idx], thetas[idx])
        if cond == "i" and not lower(cr) >= C:
            failures += 1
        elif cond == "ii" and not upper(cr) <= -C:
            failures += 1
    return failures


def verify_certificate(cert: SectorCertificate, fd: FormalData, samples: int = 1000) -> VerificationReport:
    """Re-check every claim of a certificate against the formal data."""
    rep = VerificationReport()
    if not 0 < cert.amplitude < 2:
        rep.fail(f"amplitude {cert.amplitude}*pi not in (0, 2 pi)")
    if len(cert.indices) != fd.m:
        rep.fail("certificate and formal data disagree on m")
        return rep
    if fd.nonzero_indices() and not cert.I:
        rep.fail("I is empty")
    if cert.R <= 0:
        rep.fail("R must be positive")
    thetas = [cert.theta0 + (cert.theta1 - cert.theta0) * Fraction(s, samples - 1)
              for s in range(samples)]
    with precision():
        for c, part in zip(cert.indices, fd.parts):
            if part.is_zero:
                if c.cond != "zero-part":
                    rep.fail(f"index {c.j}: zero part must be flagged zero-part")
                continue
            if c.cond not in ("i", "ii") or c.C is None or not 0 < c.C < 1:
                rep.fail(f"index {c.j}: malformed condition")
                continue
            phi, n = part.phi(part.n_lead), part.n_lead
            cr = _cos_range(phi, n, fd.l, cert.theta0, cert.theta1)
            if c.cond == "i" and not lower(cr) >= c.C:
                rep.fail(f"index {c.j}: condition (i) not certified on the whole range")
            if c.cond == "ii" and not upper(cr) <= -c.C:
                rep.fail(f"index {c.j}: condition (ii) not certified on the whole range")
            bad = _sample_check(phi, n, fd.l, thetas, c.cond, c.C)
            rep.checked_points += samples
            if bad:
                rep.fail(f"index {c.j}: {bad} sampled angles violate condition ({c.cond})")
            if c.cond == "ii":
                bound = compute_radius(part, c.C, max(cert.R_j.get(c.j, cert.R), cert.R))
                if cert.R > bound:
                    rep.fail(f"index {c.j}: R={cert.R} exceeds the certified radius {bound}")
    return rep


def radius_violations(cert: SectorCertificate, fd: FormalData, samples: int = 1000,
                      seed: int = 0) -> int:
    """Sampled points (rho, theta) in the sector where a J-part has Re(-Lambda_j) >= 0."""
    rng = np.random.default_rng(seed)
    total = 0
    t0, t1 = float(cert.theta0) * math.pi, float(cert.theta1) * math.pi
    for c, part in zip(cert.indices, fd.parts):
        if c.cond != "ii":
            continue
        rho = rng.uniform(0, 1, samples) * float(cert.R)
        rho = np.where(rho == 0, float(cert.R) / 2, rho)
        theta = rng.uniform(t0, t1, samples)
        total += int(np.count_nonzero(re_minus_lambda(part, rho, theta) >= 0))
    return total


def re_minus_lambda(part: ExponentialPart, rho, theta):
    """Re(-Lambda(rho e^{i theta})) in floating point (vectorised), lifted branch."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(np.broadcast(rho, theta).shape)
    l = part.ram
    for k, a in enumerate(part.coeffs, start=1):
        if not a:
            continue
        ac = complex(a)
        out += np.real(-ac * rho ** (-k / l) * np.exp(-1j * k * theta / l))
    return out
