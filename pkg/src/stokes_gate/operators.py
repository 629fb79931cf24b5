"""Scalar operators ``sum a_i(z) d^i`` and systems ``z^N d + A(z)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import NonLaurentQuotient, PreconditionError, ZeroLeadingCoefficient
from .puiseux import PuiseuxPoly


@dataclass(frozen=True)
class ScalarOperator:
    """``a_n d^n + ... + a_1 d + a_0`` with Laurent polynomial coefficients."""

    coeffs: tuple[PuiseuxPoly, ...]

    def __post_init__(self):
        coeffs = tuple(PuiseuxPoly._coerce(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 2:
            raise ZeroLeadingCoefficient("operator must have order at least 1")
        if not coeffs[-1]:
            raise ZeroLeadingCoefficient("leading coefficient a_n vanishes")
        for i, c in enumerate(coeffs):
            if not c.is_laurent():
                raise PreconditionError(f"coefficient a_{i} is not a Laurent polynomial")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> PuiseuxPoly:
        return self.coeffs[i]

    def compose(self, other: "ScalarOperator") -> "ScalarOperator":
        """The product ``self o other`` (apply ``other`` first)."""
        # d^i o (b d^j) = sum_r C(i, r) b^(r) d^(i - r + j)
        result: dict[int, PuiseuxPoly] = {}
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if not b:
                    continue
                deriv = b
                binom = 1
                for r in range(i + 1):
                    if r:
                        deriv = deriv.derivative()
                        binom = binom * (i - r + 1) // r
                    if not deriv:
                        break
                    k = i - r + j
                    result[k] = result.get(k, PuiseuxPoly.zero()) + a * deriv.scale(binom)
        n = max(result)
        return ScalarOperator(tuple(result.get(k, PuiseuxPoly.zero()) for k in range(n + 1)))

    def apply_series(self, u: PuiseuxPoly) -> PuiseuxPoly:
        """Apply the operator to a finite Puiseux polynomial."""
        acc = PuiseuxPoly.zero()
        deriv = u
        for a in self.coeffs:
            acc = acc + a * deriv
            deriv = deriv.derivative()
        return acc

    def __str__(self):
        from .parsing import format_operator
        return format_operator(self)


@dataclass(frozen=True)
class SystemOperator:
    """``z^N d I_m + A(z)`` with every entry of ``A`` holomorphic at 0."""

    N: int
    A: tuple[tuple[PuiseuxPoly, ...], ...]

    def __post_init__(self):
        A = tuple(tuple(PuiseuxPoly._coerce(e) for e in row) for row in self.A)
        object.__setattr__(self, "A", A)
        if self.N < 1:
            raise PreconditionError("pole order N must be positive")
        m = len(A)
        if m < 1 or any(len(row) != m for row in A):
            raise PreconditionError("A must be a nonempty square matrix")
        for row in A:
            for e in row:
                if not e.is_laurent():
                    raise PreconditionError("entries of A must be Laurent polynomials")
                if e and e.valuation() < 0:
                    raise PreconditionError("entries of A must be holomorphic at 0")

    @property
    def m(self) -> int:
        return len(self.A)

    def coefficient_matrix(self, k: int) -> list[list]:
        """Matrix of z^k coefficients of A."""
        return [[e.coeff(k) for e in row] for row in self.A]

    def max_degree(self) -> int:
        d = 0
        for row in self.A:
            for e in row:
                if e:
                    d = max(d, int(e.degree()))
        return d


def companion_system(op: ScalarOperator) -> SystemOperator:
    """First-order system for ``w = (u, u', ..., u^(n-1))``.

    ``u`` solves ``op`` iff ``w`` solves ``z^N w' + A w = 0`` with
    ``A = -z^N B`` and ``B`` the companion matrix of the monic operator.
    """
    n = op.order
    lead = op.coeffs[-1]
    last_row = []
    for i in range(n):
        q = op.coeffs[i].divide_exact(lead)
        if q is None:
            raise NonLaurentQuotient(
                f"a_{i}/a_{n} = ({op.coeffs[i]})/({lead}) is not a Laurent polynomial")
        last_row.append(-q)
    B = [[PuiseuxPoly.zero()] * n for _ in range(n)]
    for r in range(n - 1):
        B[r][r + 1] = PuiseuxPoly.constant(1)
    B[n - 1] = last_row
    N = 1
    for row in B:
        for e in row:
            if e and e.valuation() < 0:
                N = max(N, int(-e.valuation()))
    zN = PuiseuxPoly.monomial(1, N)
    A = tuple(tuple(-(zN * e) for e in row) for row in B)
    return SystemOperator(N, A)


def first_order(N: int, a: PuiseuxPoly | Sequence) -> ScalarOperator:
    """``z^N d + a(z)``; ``a`` may be given as a coefficient list in powers of z."""
    if not isinstance(a, PuiseuxPoly):
        a = PuiseuxPoly(dict(enumerate(a)))
    return ScalarOperator((a, PuiseuxPoly.monomial(1, N)))
