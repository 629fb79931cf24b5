import random
from fractions import Fraction

import pytest

from stokes_gate.errors import UnsupportedOperator
from stokes_gate.formal import (ExponentialPart, FormalData, classify_singularity,
                                exponential_parts, newton_polygon)
from stokes_gate.gaussian import GaussianRational
from stokes_gate.operators import SystemOperator, first_order
from stokes_gate.parsing import parse_coefficient, parse_operator
from stokes_gate.puiseux import PuiseuxPoly

G = GaussianRational
P = PuiseuxPoly


def parts_of(text):
    return sorted(str(lam) for lam in exponential_parts(parse_operator(text)).lambdas())


@pytest.mark.parametrize("text, expected", [
    ("z^2*d+1", [(1, 1)]),
    ("z*d+5", [(0, 1)]),
    ("z^4*d^2+2*z^3*d-1", [(1, 2)]),
    ("z^3*d^2-1", [(Fraction(1, 2), 2)]),
])
def test_newton_polygon(text, expected):
    assert newton_polygon(parse_operator(text)) == expected


def test_exp_inverse_z_part():
    fd = exponential_parts(parse_operator("z^2*d+1"))
    assert fd.l == 1 and fd.lambdas() == [P({-1: -1})]


def test_cubic_pole():
    fd = exponential_parts(parse_operator("z^3*d+1"))
    assert fd.l == 1 and fd.lambdas() == [P({-2: Fraction(-1, 2)})]


def test_composed_operator_parts():
    fd = exponential_parts(parse_operator("z^4*d^2+2*z^3*d-1"))
    assert fd.lambdas() == [P({-1: -1}), P({-1: 1})]


def test_ramified_parts():
    # u'' = z^-3 u: exp(+-2 z^(-1/2))
    fd = exponential_parts(parse_operator("z^3*d^2-1"))
    assert fd.l == 2
    assert sorted(str(x) for x in fd.lambdas()) == ["-2*z^(-1/2)", "2*z^(-1/2)"]


def test_lower_order_terms_follow_the_root():
    # z^3 u' = -(1 + z) u  =>  u = exp(1/(2 z^2) + 1/z)
    assert parts_of("z^3*d+1+z") == [str(P({-2: Fraction(-1, 2), -1: -1}))]


def test_classification():
    assert str(classify_singularity(exponential_parts(parse_operator("z*d+7")))) == "Regular"
    assert str(classify_singularity(exponential_parts(parse_operator("z^2*d+1")))) == "Irregular([1])"
    # z(z d + 1): Newton points (1,1), (0,1) give slope 0
    assert classify_singularity(exponential_parts(parse_operator("z^2*d+z"))).regular


def test_repeated_root_is_unsupported():
    op = first_order(2, [1]).compose(first_order(2, [1]))
    with pytest.raises(UnsupportedOperator):
        exponential_parts(op)


def test_non_split_root_is_unsupported():
    # characteristic polynomial c^2 - 2 on the slope-1 edge has no root in Q(i)
    with pytest.raises(UnsupportedOperator):
        exponential_parts(parse_operator("z^4*d^2 - 2"))


def _factor_part(N, a):
    """Exponential part of z^N d + a(z), a = sum a_k z^k: Lambda = sum_{k<N-1} a_k z^(k-N+1)/(k-N+1)."""
    lam = P.zero()
    for k, c in enumerate(a):
        if k < N - 1 and c:
            lam = lam + P.monomial(G.coerce(c) / (k - N + 1), k - N + 1)
    return lam


def test_factorization_consistency_random_products():
    rng = random.Random(7)
    checked = 0
    for _ in range(60):
        count = rng.choice([2, 3])
        leads = set()
        factors = []
        while len(factors) < count:
            N = rng.randint(1, 3)
            a0 = G(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([0, 0, 1, -1]))
            if (N, a0) in leads or (N == 1 and any(n == 1 for n, _ in leads)):
                continue
            leads.add((N, a0))
            a = [a0, Fraction(rng.randint(-2, 2), rng.randint(1, 3))]
            factors.append((N, a))
        op = first_order(*factors[0])
        for f in factors[1:]:
            op = op.compose(first_order(*f))
        expected = sorted(str(_factor_part(N, a)) for N, a in factors)
        got = sorted(str(x) for x in exponential_parts(op).lambdas())
        assert got == expected, (factors, got)
        checked += 1
    assert checked == 60


def test_max_part_order_equals_max_newton_slope():
    for text in ["z^2*d+1", "z^4*d^2+2*z^3*d-1", "z^3*d^2-1", "z^3*d+1+z", "z*d+2"]:
        op = parse_operator(text)
        fd = exponential_parts(op)
        slopes = newton_polygon(op)
        assert sum(length for _, length in slopes) == op.order
        assert [s for s, _ in slopes] == sorted(s for s, _ in slopes)
        top = max((p.growth_order for p in fd.parts if not p.is_zero), default=Fraction(0))
        assert top == max(s for s, _ in slopes)


def test_system_parts_diagonal():
    sys = SystemOperator(2, ((parse_coefficient("1"), P.zero()), (P.zero(), parse_coefficient("-1"))))
    assert sorted(str(x) for x in exponential_parts(sys).lambdas()) == ["-z^-1", "z^-1"]


def test_system_parts_with_splitting():
    # off-diagonal coupling at order z is removed by the gauge step; the diagonal
    # of A_1 survives as the z^-1 coefficient when N = 3
    A = ((parse_coefficient("1 + z"), parse_coefficient("z")),
         (parse_coefficient("2*z"), parse_coefficient("-1 + 3*z")))
    fd = exponential_parts(SystemOperator(3, A))
    # eigenvalue -1 first, then 1; Lambda_j = a0/(-2) z^-2 + a1/(-1) z^-1
    assert fd.lambdas() == [P({-2: Fraction(1, 2), -1: -3}), P({-2: Fraction(-1, 2), -1: -1})]


def test_fuchsian_system_is_regular():
    A = ((parse_coefficient("1"), parse_coefficient("1")), (P.zero(), parse_coefficient("1")))
    fd = exponential_parts(SystemOperator(1, A))
    assert all(p.is_zero for p in fd.parts)


def test_phi_and_alpha():
    part = ExponentialPart(1, (G(-1),))
    assert part.phi(1).pi_mult == 0
    assert ExponentialPart(1, (G(1),)).phi(1).pi_mult == 1
    assert ExponentialPart(1, (G(0, 1),)).phi(1).pi_mult == Fraction(3, 2)


def test_formal_data_json_roundtrip():
    fd = exponential_parts(parse_operator("z^3*d+1+z"))
    assert FormalData.from_dict(fd.to_dict()) == fd
