"""Temperance of exp(-Lambda_j) on regions, tempered solution counts,
and the filtrant family presenting the tempered solutions.

Regions are built from a base sector ``S(theta0, theta1, R)`` (angles as
multiples of pi) cut down by finitely many constraints of two kinds:
``|z| > delta`` and ``|z - c| > r``. Every question asked here about such
a region has a closed-form answer; sampling is used only as a second,
independent check of containment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from mpmath import iv
from scipy.stats import qmc

from .errors import PreconditionError, RegionOutsideSector
from .formal import ExponentialPart, FormalData
from .gaussian import GaussianRational, sqrt_bounds
from .intervals import arg_enclosure, endpoints, ivq, lower, precision, upper
from .sectors import SectorCertificate, round_up_sig, round_down_sig, _cos_range


# -- region DSL --------------------------------------------------------------

@dataclass(frozen=True)
class Sector:
    theta0: Fraction
    theta1: Fraction
    R: Fraction

    def __post_init__(self):
        object.__setattr__(self, "theta0", Fraction(self.theta0))
        object.__setattr__(self, "theta1", Fraction(self.theta1))
        object.__setattr__(self, "R", Fraction(self.R))
        if not 0 < self.theta1 - self.theta0 < 2:
            raise PreconditionError("sector amplitude must lie in (0, 2 pi)")
        if self.R <= 0:
            raise PreconditionError("sector radius must be positive")


@dataclass(frozen=True)
class MinModulus:
    delta: Fraction


@dataclass(frozen=True)
class OutsideClosedDisk:
    center: GaussianRational
    radius: Fraction


@dataclass(frozen=True)
class Region:
    """``{z in S(theta0, theta1, R)}`` intersected with every constraint."""

    sector: Sector
    constraints: tuple = ()

    def __post_init__(self):
        for c in self.constraints:
            if isinstance(c, MinModulus) and not 0 <= c.delta < self.sector.R:
                raise PreconditionError("MinModulus needs 0 <= delta < R")
            if isinstance(c, OutsideClosedDisk) and c.radius <= 0:
                raise PreconditionError("disk radius must be positive")

    @classmethod
    def make_sector(cls, theta0, theta1, R) -> "Region":
        return cls(Sector(theta0, theta1, R))

    def truncated(self, delta) -> "Region":
        """``S_delta``: the points with ``|z| > delta``."""
        return Region(self.sector, self.constraints + (MinModulus(Fraction(delta)),))

    def outside_disk(self, center, radius) -> "Region":
        if not isinstance(center, GaussianRational):
            center = GaussianRational(Fraction(center))
        return Region(self.sector, self.constraints + (OutsideClosedDisk(center, Fraction(radius)),))

    def ball_complement(self, eps) -> "Region":
        """``U_eps`` restricted to the sector: outside the closed disk of radius eps centred at eps."""
        return self.outside_disk(GaussianRational(Fraction(eps)), Fraction(eps))

    def contains(self, z: GaussianRational) -> bool:
        """Exact membership for moduli and disks, certified intervals for the angle.

        Points on the bounding rays count as outside (the sector is open).
        """
        r2 = z.abs2()
        if r2 == 0 or r2 >= self.sector.R ** 2:
            return False
        for c in self.constraints:
            if isinstance(c, MinModulus) and r2 <= c.delta ** 2:
                return False
            if isinstance(c, OutsideClosedDisk) and (z - c.center).abs2() <= c.radius ** 2:
                return False
        return _angle_inside(z, self.sector.theta0, self.sector.theta1)

    def to_dict(self) -> dict:
        cons = []
        for c in self.constraints:
            if isinstance(c, MinModulus):
                cons.append({"min_modulus": str(c.delta)})
            else:
                cons.append({"outside_disk": {"center_re": str(c.center.re),
                                              "center_im": str(c.center.im),
                                              "radius": str(c.radius)}})
        s = self.sector
        return {"sector": {"theta0": {"pi_mult": str(s.theta0)},
                           "theta1": {"pi_mult": str(s.theta1)}, "R": str(s.R)},
                "constraints": cons}

    @classmethod
    def from_dict(cls, d: dict) -> "Region":
        def angle(v):
            return Fraction(v["pi_mult"]) if isinstance(v, dict) else Fraction(v)
        s = d["sector"]
        out = cls(Sector(angle(s["theta0"]), angle(s["theta1"]), Fraction(s["R"])))
        for c in d.get("constraints", []):
            if "min_modulus" in c:
                out = out.truncated(Fraction(c["min_modulus"]))
            else:
                disk = c["outside_disk"]
                out = out.outside_disk(GaussianRational(Fraction(disk["center_re"]),
                                                        Fraction(disk.get("center_im", "0"))),
                                       Fraction(disk["radius"]))
        return out


_MARGIN = 1e-9


def _angle_inside(z: GaussianRational, theta0: Fraction, theta1: Fraction) -> bool:
    # float decision when far from the rays and the cut, intervals otherwise
    mid = float(theta0 + theta1) / 2 * math.pi
    a = math.atan2(float(z.im), float(z.re))
    a += 2 * math.pi * round((mid - a) / (2 * math.pi))
    if abs(a - mid) < math.pi - _MARGIN:
        lo, hi = float(theta0) * math.pi, float(theta1) * math.pi
        if lo + _MARGIN < a < hi - _MARGIN:
            return True
        if a < lo - _MARGIN or a > hi + _MARGIN:
            return False
    with precision():
        mid = ivq((theta0 + theta1) / 2) * iv.pi
        try:
            a = arg_enclosure(z, mid)
        except Exception:
            return False
        lo, hi = endpoints(a)
        return lo > upper(ivq(theta0) * iv.pi) and hi < lower(ivq(theta1) * iv.pi)


def _abs_bounds(c: GaussianRational) -> tuple[Fraction, Fraction]:
    return sqrt_bounds(c.abs2())


def _min_cos(theta0: Fraction, theta1: Fraction, psi) -> Fraction:
    """Certified lower bound of ``cos(theta - psi)`` for theta in [theta0, theta1]*pi."""
    th = iv.mpf([ivq(theta0).a, ivq(theta1).b]) * iv.pi
    return lower(iv.cos(th - psi))


def inf_modulus(V: Region) -> tuple[Fraction, bool]:
    """Certified ``b`` with ``|z| > b`` on V, and whether 0 lies in the closure of V."""
    bound = Fraction(0)
    s = V.sector
    with precision():
        for c in V.constraints:
            if isinstance(c, MinModulus):
                bound = max(bound, c.delta)
                continue
            a2, r2 = c.center.abs2(), c.radius ** 2
            if a2 > r2:
                continue  # the disk stays away from 0
            if a2 < r2:
                # 0 is inside the disk: |z| >= r - |c|
                bound = max(bound, c.radius - _abs_bounds(c.center)[1])
                continue
            # 0 on the circle: |z|^2 > 2 Re(z conj c) gives rho > 2|c| cos(theta - psi)
            psi = iv.atan2(ivq(c.center.im), ivq(c.center.re))
            factor = 2 * _min_cos(s.theta0, s.theta1, psi)
            if factor >= 1:
                bound = max(bound, c.radius)
            elif factor > 0:
                bound = max(bound, round_down_sig(c.radius * factor))
    return bound, bound == 0


# -- verdicts ----------------------------------------------------------------

@dataclass(frozen=True)
class Tempered:
    """``Re(-Lambda) <= A`` on the region."""
    A: Fraction

    def __str__(self):
        return f"Tempered(A={self.A})"


@dataclass(frozen=True)
class NotTempered:
    """``Re(-Lambda) -> +infinity`` along the ray ``arg z = theta_star * pi`` as ``|z| -> 0``."""
    theta_star: Fraction

    def __str__(self):
        return f"NotTempered(theta*={self.theta_star}*pi)"


@dataclass(frozen=True)
class Indeterminate:
    reason: str


def _check_inside(V: Region, cert: SectorCertificate):
    s = V.sector
    if s.theta0 < cert.theta0 or s.theta1 > cert.theta1 or s.R > cert.R:
        raise RegionOutsideSector(
            f"region S({s.theta0}pi, {s.theta1}pi, {s.R}) is not inside the certified "
            f"sector S({cert.theta0}pi, {cert.theta1}pi, {cert.R})")


def _sup_bound(part: ExponentialPart, V: Region, rho_min: Fraction) -> Fraction:
    """Certified upper bound of Re(-Lambda) over V, given |z| > rho_min > 0."""
    s = V.sector
    l = part.ram
    total = iv.mpf(0)
    th = iv.mpf([ivq(s.theta0).a, ivq(s.theta1).b]) * iv.pi
    for k, a in enumerate(part.coeffs, start=1):
        if not a:
            continue
        # Re(-a z^{-k/l}) = |a| rho^{-k/l} cos(arg(-a) - k theta / l)
        cmax = upper(iv.cos(part.phi(k).interval() - ivq(Fraction(k, l)) * th))
        alpha = ivq(sqrt_bounds((-a).abs2())[1])
        rho = rho_min if cmax >= 0 else s.R
        total += alpha * ivq(cmax) * iv.exp(-ivq(Fraction(k, l)) * iv.log(ivq(rho)))
    return upper(total)


def _ray_in_closure_near_zero(V: Region, t: Fraction) -> bool:
    """Does the ray at angle t*pi meet V arbitrarily close to 0?"""
    if not V.sector.theta0 < t < V.sector.theta1:
        return False
    for c in V.constraints:
        if isinstance(c, MinModulus):
            if c.delta > 0:
                return False
        else:
            a2, r2 = c.center.abs2(), c.radius ** 2
            if a2 < r2:
                return False
            if a2 == r2:
                psi = iv.atan2(ivq(c.center.im), ivq(c.center.re))
                if not upper(iv.cos(ivq(t) * iv.pi - psi)) < 0:
                    return False
    return True


def _growth_direction(V: Region) -> Fraction:
    s = V.sector
    mid = (s.theta0 + s.theta1) / 2
    with precision():
        candidates = [mid] + [s.theta0 + (s.theta1 - s.theta0) * Fraction(k, 64) for k in range(1, 64)]
        for t in candidates:
            if _ray_in_closure_near_zero(V, t):
                return t
    return mid


def is_tempered_exp(part: ExponentialPart, V: Region, cert: SectorCertificate,
                    j: int | None = None):
    """Temperance verdict for ``exp(-Lambda)`` on V.

    ``j`` (1-based) picks the index condition in ``cert``; without it the
    condition is recomputed from the part's leading term.
    """
    _check_inside(V, cert)
    if part.is_zero:
        return Tempered(Fraction(0))
    cond = cert.condition(j).cond if j is not None else _condition_of(part, cert)
    bound, touches = inf_modulus(V)
    with precision():
        if cond == "i":
            if touches:
                return NotTempered(_growth_direction(V))
            return Tempered(_round_up_signed(_sup_bound(part, V, bound)))
        # cond ii: Re(-Lambda) < 0 on the whole certified sector below R
        if touches:
            return Tempered(Fraction(0))
        A = _sup_bound(part, V, bound)
        return Tempered(min(Fraction(0), _round_up_signed(A)))


def _round_up_signed(q: Fraction) -> Fraction:
    if q > 0:
        return round_up_sig(q)
    if q < 0:
        return -round_down_sig(-q)
    return q


def _condition_of(part: ExponentialPart, cert: SectorCertificate) -> str:
    with precision():
        lo, hi = endpoints(_cos_range(part.phi(part.n_lead), part.n_lead, part.ram,
                                      cert.theta0, cert.theta1))
    if lo > 0:
        return "i"
    if hi < 0:
        return "ii"
    raise RegionOutsideSector("part changes growth behaviour on the certified sector")


def tempered_count(fd: FormalData, cert: SectorCertificate, V: Region) -> tuple[int, tuple[int, ...]]:
    """``(n(V), J(V))``: how many ``exp(-Lambda_j)`` are tempered on V, and which (1-based)."""
    J = tuple(j for j, part in enumerate(fd.parts, start=1)
              if isinstance(is_tempered_exp(part, V, cert, j), Tempered))
    return len(J), J


@dataclass(frozen=True)
class FiltrantPresentation:
    """The family ``F_delta = C^n_{S_delta} + C^{m-n}_S`` for ``0 < delta < R``."""

    m: int
    n: int
    theta0: Fraction
    theta1: Fraction
    R: Fraction

    def section_dimension(self, V: Region) -> int:
        """Dimension of sections of the limit over V: ``n [V inside some S_delta] + (m - n)``."""
        bound, _ = inf_modulus(V)
        return self.n * (1 if bound > 0 else 0) + (self.m - self.n)

    def describe(self) -> str:
        parts = []
        if self.n:
            parts.append("C_{S_delta}" if self.n == 1 else f"C^{self.n}_{{S_delta}}")
        if self.m - self.n:
            parts.append("C_S" if self.m - self.n == 1 else f"C^{self.m - self.n}_S")
        return " + ".join(parts)

    def to_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "family": self.describe(),
                "sector": {"theta0": {"pi_mult": str(self.theta0)},
                           "theta1": {"pi_mult": str(self.theta1)}, "R": str(self.R)}}


def filtrant_presentation(fd: FormalData, cert: SectorCertificate) -> FiltrantPresentation:
    if not fd.nonzero_indices():
        raise PreconditionError("filtrant presentation needs an irregular operator")
    if len(cert.indices) != fd.m:
        raise PreconditionError("certificate does not match the formal data")
    return FiltrantPresentation(fd.m, len(cert.I), cert.theta0, cert.theta1, cert.R)


# -- containment -------------------------------------------------------------

@dataclass(frozen=True)
class Verified:
    samples: int
    closed_form: bool

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Refuted:
    witness: GaussianRational

    def __bool__(self):
        return False


def _closed_form_contains(outer: Region, inner: Region) -> bool:
    so, si = outer.sector, inner.sector
    if si.theta0 < so.theta0 or si.theta1 > so.theta1 or si.R > so.R:
        return False
    b, _ = inf_modulus(inner)
    for c in outer.constraints:
        if isinstance(c, MinModulus):
            if b < c.delta:
                return False
            continue
        # |z| > |c| + r forces |z - c| > r
        if b >= _abs_bounds(c.center)[1] + c.radius:
            continue
        # a disk of inner that contains this one
        if any(isinstance(d, OutsideClosedDisk) and
               _abs_bounds(d.center - c.center)[1] + c.radius <= d.radius
               for d in inner.constraints):
            continue
        return False
    return True


def _sample_points(V: Region, count: int, seed: int) -> Iterable[GaussianRational]:
    s = V.sector
    rho_min = float(inf_modulus(V)[0])
    R = float(s.R)
    pts = qmc.Halton(d=3, seed=seed).random(count)
    t0, t1 = float(s.theta0) * math.pi, float(s.theta1) * math.pi
    for u, v, w in pts:
        if w < 0.5:
            rho = rho_min + (R - rho_min) * u
        else:  # log-spaced toward the inner boundary
            lo = max(rho_min, R * 1e-6)
            rho = lo * (R / lo) ** u
        th = t0 + (t1 - t0) * v
        yield GaussianRational(Fraction(rho * math.cos(th)).limit_denominator(10 ** 12),
                               Fraction(rho * math.sin(th)).limit_denominator(10 ** 12))


def region_contains(outer: Region, inner: Region, samples: int = 1000, seed: int = 0):
    """Is ``inner`` a subset of ``outer``?

    Returns Refuted(z) with an exactly checked ``z in inner \\ outer``, or
    Verified after ``samples`` points of ``inner`` all landed in ``outer``
    (plus whether a closed-form argument confirms the inclusion).
    """
    closed = _closed_form_contains(outer, inner)
    tested = 0
    attempts = 0
    while tested < samples and attempts < 20 * samples:
        batch = samples - tested
        for z in _sample_points(inner, 2 * batch, seed + attempts):
            attempts += 1
            if not inner.contains(z):
                continue
            tested += 1
            if not outer.contains(z):
                return Refuted(z)
            if tested >= samples:
                break
    return Verified(tested, closed)


def _candidates(x: Fraction, grid: Sequence[Fraction]) -> list[Fraction]:
    out = [x] + [x / 2 ** k for k in range(1, 31)]
    out += [g for g in sorted(grid, reverse=True) if g not in out]
    return out


def cofinal_check(family1: Callable, family2: Callable, grid: Sequence, forward: Callable | None = None,
                  backward: Callable | None = None, samples: int = 1000) -> dict:
    """Mutual domination of two decreasing families of regions over ``grid``.

    For each ``d`` find ``e`` with ``family1(d) <= family2(e)`` and for each
    ``e`` a ``d`` with ``family2(e) <= family1(d)``. Explicit maps can be
    supplied; otherwise candidates ``x / 2^k`` and the grid are tried, closed
    forms first. Every chosen pair is then confirmed by region_contains.
    """
    grid = [Fraction(g) for g in grid]
    report = {"forward": [], "backward": [], "ok": True, "failures": []}

    def dominate(x, src, dst, mapping, key):
        if mapping is not None:
            options = [Fraction(mapping(x))]
        else:
            options = _candidates(x, grid)
            closed = [y for y in options if _safe(lambda: _closed_form_contains(dst(y), src(x)))]
            options = closed[:1] or options
        for y in options:
            try:
                verdict = region_contains(dst(y), src(x), samples)
            except PreconditionError:
                continue
            if verdict:
                report[key].append({"from": x, "to": y, "samples": verdict.samples,
                                    "closed_form": verdict.closed_form})
                return
            if mapping is not None:
                report["failures"].append({"direction": key, "from": x, "to": y,
                                           "witness": verdict.witness})
                report["ok"] = False
                return
        report["failures"].append({"direction": key, "from": x, "to": None})
        report["ok"] = False

    for d in grid:
        dominate(d, family1, family2, forward, "forward")
    for e in grid:
        dominate(e, family2, family1, backward, "backward")
    return report


def _safe(fn) -> bool:
    try:
        return bool(fn())
    except PreconditionError:
        return False
