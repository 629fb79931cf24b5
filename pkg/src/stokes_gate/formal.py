"""Newton polygons and exponential parts of irregular singular operators.

For a scalar operator ``sum a_i d^i`` the Newton polygon is built from the
points ``(i, v(a_i) - i)``: a horizontal part of length ``i*`` (the largest
index where the minimum is attained) carries the solutions without
exponential growth, and each edge of positive slope ``k`` carries solutions
``exp(c z^{-k}/(-k) + ...)`` where ``c`` runs over the nonzero roots of the
edge's characteristic polynomial. Each root is followed by substituting
``u = exp(int omega) v`` and recursing on the conjugated operator until the
remaining slope is 0.

Systems ``z^N w' + A(z) w = 0`` with ``A(0)`` having distinct eigenvalues
are block-diagonalised order by order (block splitting) up to degree
``N - 2``; the diagonal entries then integrate to the exponential parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from . import algebra
from .angles import Angle
from .errors import UnsupportedOperator
from .gaussian import GaussianRational, ZERO
from .intervals import ivq
from .operators import ScalarOperator, SystemOperator
from .puiseux import PuiseuxPoly

from mpmath import iv


@dataclass(frozen=True)
class ExponentialPart:
    """``Lambda(z) = sum_{k=1}^{n} a_k z^{-k/ram}``; solutions behave like exp(-Lambda)."""

    ram: int
    coeffs: tuple[GaussianRational, ...]  # coeffs[k-1] = a_k

    def __post_init__(self):
        coeffs = tuple(GaussianRational.coerce(c) for c in self.coeffs)
        while coeffs and not coeffs[-1]:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, ram: int = 1) -> "ExponentialPart":
        return cls(ram, ())

    @classmethod
    def from_poly(cls, lam: PuiseuxPoly, ram: int | None = None) -> "ExponentialPart":
        ram = ram or lam.ram
        coeffs: dict[int, GaussianRational] = {}
        for e, c in lam.items():
            k = -e * ram
            if k.denominator != 1 or k <= 0:
                raise ValueError(f"exponent {e} is not of the form -k/{ram} with k >= 1")
            coeffs[int(k)] = c
        n = max(coeffs, default=0)
        return cls(ram, tuple(coeffs.get(k, ZERO) for k in range(1, n + 1)))

    def as_poly(self) -> PuiseuxPoly:
        return PuiseuxPoly({-k: c for k, c in enumerate(self.coeffs, start=1)}, self.ram)

    def at_ram(self, ram: int) -> "ExponentialPart":
        if ram % self.ram:
            raise ValueError("target ramification must be a multiple of the current one")
        f = ram // self.ram
        out = [ZERO] * (len(self.coeffs) * f)
        for k, c in enumerate(self.coeffs, start=1):
            out[k * f - 1] = c
        return ExponentialPart(ram, tuple(out))

    def canonical(self) -> "ExponentialPart":
        return ExponentialPart.from_poly(self.as_poly()) if self.coeffs else ExponentialPart.zero()

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def n_lead(self) -> int:
        return len(self.coeffs)

    @property
    def leading(self) -> GaussianRational:
        return self.coeffs[-1]

    @property
    def growth_order(self) -> Fraction:
        """n / ram: the exponent of 1/|z| in the growth rate."""
        return Fraction(self.n_lead, self.ram)

    def coeff(self, k: int) -> GaussianRational:
        return self.coeffs[k - 1] if 1 <= k <= len(self.coeffs) else ZERO

    def alpha(self, k: int):
        """Enclosure of |a_k|."""
        return iv.sqrt(ivq(self.coeff(k).abs2()))

    def phi(self, k: int) -> Angle:
        """arg(-a_k) in [0, 2 pi)."""
        return Angle.argument(-self.coeff(k))

    def __str__(self):
        return str(self.as_poly()) if self.coeffs else "0"


@dataclass(frozen=True)
class FormalData:
    l: int
    parts: tuple[ExponentialPart, ...]
    source: object = field(default=None, compare=False)

    def __post_init__(self):
        parts = tuple(p.canonical().at_ram(self.l) for p in self.parts)
        object.__setattr__(self, "parts", parts)

    @classmethod
    def from_parts(cls, parts: Sequence[ExponentialPart], source=None) -> "FormalData":
        l = 1
        for p in parts:
            if not p.is_zero:
                p = p.canonical()
                l = l * p.ram // math.gcd(l, p.ram)
        return cls(l, tuple(parts), source)

    @property
    def m(self) -> int:
        return len(self.parts)

    def lambdas(self) -> list[PuiseuxPoly]:
        return [p.as_poly() for p in self.parts]

    def nonzero_indices(self) -> list[int]:
        return [j for j, p in enumerate(self.parts) if not p.is_zero]

    def to_dict(self) -> dict:
        return {"l": self.l,
                "parts": [{"coeffs": [{"k": k, "re": str(c.re), "im": str(c.im)}
                                      for k, c in enumerate(p.coeffs, start=1) if c]}
                          for p in self.parts]}

    @classmethod
    def from_dict(cls, d: dict) -> "FormalData":
        parts = []
        for p in d["parts"]:
            coeffs = {int(c["k"]): GaussianRational(Fraction(c["re"]), Fraction(c["im"]))
                      for c in p["coeffs"]}
            n = max(coeffs, default=0)
            parts.append(ExponentialPart(int(d["l"]), tuple(coeffs.get(k, ZERO) for k in range(1, n + 1))))
        return cls(int(d["l"]), tuple(parts))


class Edge(NamedTuple):
    slope: Fraction
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start


def _newton_edges(coeffs: Sequence[PuiseuxPoly]) -> tuple[int, list[Edge]]:
    """Length of the horizontal part and the edges of positive slope."""
    pts = [(i, c.valuation() - i) for i, c in enumerate(coeffs) if c]
    ymin = min(y for _, y in pts)
    istar = max(i for i, y in pts if y == ymin)
    right = [(i, y) for i, y in pts if i >= istar]
    hull: list[tuple[int, Fraction]] = []
    for p in right:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above the chord hull[-2] -> p
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    edges = [Edge(Fraction(y2 - y1) / (x2 - x1), x1, x2)
             for (x1, y1), (x2, y2) in zip(hull, hull[1:])]
    return istar, edges


def newton_polygon(op: ScalarOperator) -> list[tuple[Fraction, int]]:
    """(slope, length) pairs in ascending slope; lengths sum to the order."""
    h0, edges = _newton_edges(op.coeffs)
    out = [(Fraction(0), h0)] if h0 else []
    out.extend((e.slope, e.length) for e in edges)
    return out


def _lead(c: PuiseuxPoly) -> GaussianRational:
    return c.lowest_term()[1]


def _edge_polynomial(coeffs, edge: Edge) -> list[GaussianRational]:
    y0 = coeffs[edge.start].valuation() - edge.start - edge.slope * edge.start
    out = []
    for i in range(edge.start, edge.end + 1):
        c = coeffs[i]
        if c and c.valuation() - i - edge.slope * i == y0:
            out.append(_lead(c))
        else:
            out.append(ZERO)
    return out


def _conjugate(coeffs: Sequence[PuiseuxPoly], omega: PuiseuxPoly) -> list[PuiseuxPoly]:
    """Coefficients of exp(-q) o L o exp(q) where q' = omega, i.e. L(d + omega)."""
    n = len(coeffs) - 1
    result = [PuiseuxPoly.zero()] * (n + 1)
    power = [PuiseuxPoly.constant(1)]  # (d + omega)^i as a list of d^j coefficients
    for i, b in enumerate(coeffs):
        if i:
            nxt = [PuiseuxPoly.zero()] * (len(power) + 1)
            for j, d in enumerate(power):
                nxt[j] = nxt[j] + d.derivative() + omega * d
                nxt[j + 1] = nxt[j + 1] + d
            power = nxt
        if b:
            for j, d in enumerate(power):
                if d:
                    result[j] = result[j] + b * d
    return result


def _follow_root(coeffs, slope: Fraction, root: GaussianRational) -> PuiseuxPoly:
    """Exponential part -Lambda = q for the formal solution starting with ``root``."""
    q = PuiseuxPoly.zero()
    while True:
        omega = PuiseuxPoly.monomial(root, -slope - 1)
        q = q + PuiseuxPoly.monomial(-root / slope, -slope)
        coeffs = _conjugate(coeffs, omega)
        h0, edges = _newton_edges(coeffs)
        below = [e for e in edges if e.slope < slope]
        if h0 + sum(e.length for e in below) != 1:
            raise UnsupportedOperator(
                f"characteristic root {root} at slope {slope} is not simple")
        if h0 == 1:
            return q
        edge = below[0]
        poly = _edge_polynomial(coeffs, edge)
        slope, root = edge.slope, -poly[0] / poly[1]


def _scalar_parts(op: ScalarOperator) -> list[ExponentialPart]:
    h0, edges = _newton_edges(op.coeffs)
    parts = [ExponentialPart.zero() for _ in range(h0)]
    for edge in edges:
        poly = _edge_polynomial(op.coeffs, edge)
        roots, complete = algebra.gaussian_roots(poly)
        if not complete:
            raise UnsupportedOperator(
                f"characteristic polynomial of slope {edge.slope} does not split over Q(i)")
        for root, mult in roots:
            if mult > 1:
                raise UnsupportedOperator(
                    f"repeated characteristic root {root} at slope {edge.slope}")
        for root, _ in roots:
            q = _follow_root(op.coeffs, edge.slope, root)
            parts.append(ExponentialPart.from_poly(-q))
    return parts


def _truncated_mul(a, b, K):
    """Product of matrix power series (lists of matrices) truncated at degree K."""
    m = len(a[0])
    out = [algebra.zeros(m) for _ in range(K + 1)]
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            if i + j <= K:
                out[i + j] = algebra.matadd(out[i + j], algebra.matmul(ai, bj))
    return out


def _system_parts(sys: SystemOperator) -> list[ExponentialPart]:
    m, N = sys.m, sys.N
    if N == 1:
        return [ExponentialPart.zero() for _ in range(m)]
    K = N - 2
    A0 = sys.coefficient_matrix(0)
    roots, complete = algebra.gaussian_roots(algebra.charpoly(A0))
    if not complete or any(mult > 1 for _, mult in roots):
        raise UnsupportedOperator(
            "A(0) must have m distinct eigenvalues in Q(i) for the system reduction")
    eig = [r for r, _ in roots]
    P = [[None] * m for _ in range(m)]
    for j, lam in enumerate(eig):
        shifted = [[A0[r][c] - (lam if r == c else ZERO) for c in range(m)] for r in range(m)]
        vec = algebra.nullspace_vector(shifted)
        for r in range(m):
            P[r][j] = vec[r]
    Pinv = algebra.inverse(P)
    series = [algebra.matmul(Pinv, algebra.matmul(sys.coefficient_matrix(k), P))
              for k in range(K + 1)]
    for k in range(1, K + 1):
        T = algebra.zeros(m)
        for i in range(m):
            for j in range(m):
                if i != j and series[k][i][j]:
                    T[i][j] = -series[k][i][j] / (eig[i] - eig[j])
        gauge = [algebra.identity(m)] + [algebra.zeros(m)] * (K)
        gauge[k] = T
        inv = [algebra.identity(m)] + [algebra.zeros(m) for _ in range(K)]
        negT_pow = algebra.identity(m)
        for r in range(1, K // k + 1):
            negT_pow = algebra.matscale(algebra.matmul(negT_pow, T), -1)
            inv[r * k] = negT_pow
        series = _truncated_mul(inv, _truncated_mul(series, gauge, K), K)
    parts = []
    for j in range(m):
        lam = PuiseuxPoly.zero()
        for k in range(K + 1):
            c = series[k][j][j]
            if c:
                # -Lambda = -int z^{-N} lambda(z) dz ; z^{k-N} -> z^{k-N+1}/(k-N+1)
                lam = lam + PuiseuxPoly.monomial(c / (k - N + 1), k - N + 1)
        parts.append(ExponentialPart.from_poly(lam) if lam else ExponentialPart.zero())
    return parts


def exponential_parts(op: ScalarOperator | SystemOperator) -> FormalData:
    """Exponential parts Lambda_j with solutions F(z) exp(-Lambda_j(z))."""
    if isinstance(op, SystemOperator):
        parts = _system_parts(op)
    else:
        parts = _scalar_parts(op)
    return FormalData.from_parts(parts, source=op)


@dataclass(frozen=True)
class Classification:
    regular: bool
    slopes: tuple[Fraction, ...] = ()

    def __str__(self):
        if self.regular:
            return "Regular"
        return "Irregular([" + ", ".join(str(s) for s in self.slopes) + "])"


def classify_singularity(fd: FormalData) -> Classification:
    slopes = sorted({p.growth_order for p in fd.parts if not p.is_zero})
    if not slopes:
        return Classification(True)
    return Classification(False, tuple(slopes))
