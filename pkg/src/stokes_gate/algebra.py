"""Exact algebra over Q(i): polynomial roots and small dense matrices."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import sympy

from .gaussian import GaussianRational, ZERO, ONE

_c = sympy.Symbol("c")


def _to_sympy(g: GaussianRational):
    return sympy.Rational(g.re.numerator, g.re.denominator) + sympy.I * sympy.Rational(
        g.im.numerator, g.im.denominator)


def _from_sympy(expr) -> GaussianRational:
    re, im = sympy.expand(expr).as_real_imag()
    return GaussianRational(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))


def gaussian_roots(coeffs: Sequence[GaussianRational]):
    """Roots in Q(i) of ``sum coeffs[k] c^k``.

    Returns ``(roots, complete)`` where ``roots`` is a list of
    ``(root, multiplicity)`` and ``complete`` says whether the roots found
    account for the full degree (i.e. the polynomial splits over Q(i)).
    """
    while coeffs and not coeffs[-1]:
        coeffs = coeffs[:-1]
    degree = len(coeffs) - 1
    if degree < 1:
        return [], degree == 0
    expr = sum(_to_sympy(a) * _c ** k for k, a in enumerate(coeffs))
    poly = sympy.Poly(expr, _c, domain=sympy.QQ_I)
    _, factors = poly.factor_list()
    roots = []
    found = 0
    for f, mult in factors:
        if f.degree() != 1:
            continue
        a1, a0 = f.all_coeffs()
        root = _from_sympy(-a0 / a1)
        roots.append((root, mult))
        found += mult
    roots.sort(key=lambda rm: (rm[0].re, rm[0].im))
    return roots, found == degree


# -- matrices as lists of lists of GaussianRational -------------------------

def identity(m: int):
    return [[ONE if i == j else ZERO for j in range(m)] for i in range(m)]


def zeros(m: int):
    return [[ZERO] * m for _ in range(m)]


def matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = ZERO
            for t in range(k):
                if a[i][t] and b[t][j]:
                    s = s + a[i][t] * b[t][j]
            row.append(s)
        out.append(row)
    return out


def matadd(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matscale(a, s):
    return [[x * s for x in row] for row in a]


def inverse(a):
    """Gauss-Jordan inverse; raises ZeroDivisionError when singular."""
    m = len(a)
    aug = [list(row) + identity(m)[i] for i, row in enumerate(a)]
    for col in range(m):
        pivot = next((r for r in range(col, m) if aug[r][col]), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = ONE / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(m):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[m:] for row in aug]


def nullspace_vector(a):
    """One nonzero kernel vector of a square matrix with a 1-dimensional kernel."""
    m = len(a)
    rows = [list(r) for r in a]
    pivots = []
    r = 0
    for col in range(m):
        pivot = next((i for i in range(r, m) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = ONE / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(m) if c not in pivots]
    if not free:
        raise ValueError("matrix is nonsingular")
    fc = free[0]
    vec = [ZERO] * m
    vec[fc] = ONE
    for i, pc in enumerate(pivots):
        vec[pc] = -rows[i][fc]
    return vec


def charpoly(a):
    """Coefficients (low to high) of det(c I - a) via Faddeev-LeVerrier."""
    m = len(a)
    coeffs = [ZERO] * (m + 1)
    coeffs[m] = ONE
    M = zeros(m)
    for k in range(1, m + 1):
        M = matadd(matmul(a, M), matscale(identity(m), coeffs[m - k + 1]))
        tr = ZERO
        AM = matmul(a, M)
        for i in range(m):
            tr = tr + AM[i][i]
        coeffs[m - k] = -tr / k
    return coeffs
