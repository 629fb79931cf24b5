import math
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import qmc

from stokes_gate.errors import PreconditionError, RegionOutsideSector
from stokes_gate.formal import ExponentialPart, FormalData, exponential_parts
from stokes_gate.gaussian import GaussianRational
from stokes_gate.parsing import parse_operator
from stokes_gate.sectors import certify_sector, re_minus_lambda, select_sector
from stokes_gate.temperance import (MinModulus, NotTempered, OutsideClosedDisk, Refuted, Region,
                                    Tempered, Verified, cofinal_check, filtrant_presentation,
                                    inf_modulus, is_tempered_exp, region_contains, tempered_count)

from support import random_suite

G = GaussianRational
Q = Fraction
EXP_INV_Z = ExponentialPart(1, (G(-1),))   # exp(1/z)
EXP_MINUS_INV_Z = ExponentialPart(1, (G(1),))  # exp(-1/z)


@pytest.fixture(scope="module")
def basic():
    fd = exponential_parts(parse_operator("z^2*d+1"))
    return fd, certify_sector(fd, 0, Q(1, 4), Q(1, 2)), Region.make_sector(0, Q(1, 4), Q(1, 2))


# -- region DSL ------------------------------------------------------------------

def test_region_validation():
    with pytest.raises(PreconditionError):
        Region.make_sector(0, 2, 1)
    with pytest.raises(PreconditionError):
        Region.make_sector(0, Q(1, 4), 1).truncated(1)


def test_region_membership():
    S = Region.make_sector(0, Q(1, 4), Q(1, 2))
    assert S.contains(G(Q(1, 5), Q(1, 10)))
    assert not S.contains(G(Q(1, 5), Q(1, 5)))     # on the ray arg = pi/4
    assert not S.contains(G(Q(1, 5), 0))           # on the ray arg = 0
    assert not S.truncated(Q(1, 4)).contains(G(Q(1, 5), Q(1, 10)))
    assert not S.ball_complement(Q(1, 5)).contains(G(Q(1, 5), Q(1, 10)))  # inside the disk
    assert S.ball_complement(Q(1, 20)).contains(G(Q(1, 5), Q(1, 10)))


def test_region_json_roundtrip():
    V = Region.make_sector(Q(1, 8), Q(3, 8), 1).truncated(Q(1, 10)).ball_complement(Q(1, 5))
    assert Region.from_dict(V.to_dict()) == V
    assert V.to_dict()["constraints"][1] == {"outside_disk": {"center_re": "1/5", "center_im": "0",
                                                              "radius": "1/5"}}


# -- inf_modulus -----------------------------------------------------------------

def test_inf_modulus_closed_forms(basic):
    S = basic[2]
    assert inf_modulus(S) == (0, True)
    assert inf_modulus(S.truncated(Q(1, 10))) == (Q(1, 10), False)
    assert inf_modulus(S.ball_complement(Q(1, 5))) == (Q(1, 5), False)


def test_inf_modulus_disk_bound_is_sound():
    # wide sector: |z| > 2 eps cos(theta) only gives a partial bound
    V = Region.make_sector(0, Q(1, 3), 1).ball_complement(Q(1, 5))
    b, touches = inf_modulus(V)
    assert not touches
    # closed form: inf over the sector of 2 eps cos(theta) = 2 * 0.2 * cos(pi/3) = 0.2
    assert b <= Q(1, 5) and float(b) == pytest.approx(0.2, rel=1e-9)
    W = Region.make_sector(0, Q(3, 4), 1).ball_complement(Q(1, 5))
    assert inf_modulus(W) == (0, True)


# -- exp(1/z) on S --------------------------------------------------------------

def test_basic_verdicts(basic):
    fd, cert, S = basic
    assert is_tempered_exp(fd.parts[0], S, cert) == NotTempered(Q(1, 8))
    for delta in (Q(1, 10), Q(1, 100), Q(1, 1000)):
        v = is_tempered_exp(fd.parts[0], S.truncated(delta), cert)
        assert isinstance(v, Tempered)
        # sup of Re(1/z) = cos(theta)/rho over S_delta is 1/delta
        assert 1 / delta <= v.A <= (1 / delta) * (1 + Q(1, 10 ** 9))


def test_basic_counts(basic):
    fd, cert, S = basic
    assert tempered_count(fd, cert, S) == (0, ())
    for delta in (Q(1, 10), Q(1, 100), Q(1, 1000)):
        assert tempered_count(fd, cert, S.truncated(delta)) == (1, (1,))


def test_decaying_part_is_tempered_with_zero_bound(basic):
    _, cert, S = basic
    assert is_tempered_exp(EXP_MINUS_INV_Z, S, cert) == Tempered(0)


def test_zero_part_tempered(basic):
    _, cert, S = basic
    assert is_tempered_exp(ExponentialPart.zero(), S, cert) == Tempered(0)


def test_two_parts_count():
    fd = exponential_parts(parse_operator("z^4*d^2+2*z^3*d-1"))
    cert = certify_sector(fd, 0, Q(1, 8), 1)
    assert tempered_count(fd, cert, Region.make_sector(0, Q(1, 8), 1)) == (1, (2,))


def test_region_outside_sector(basic):
    fd, cert, _ = basic
    with pytest.raises(RegionOutsideSector):
        tempered_count(fd, cert, Region.make_sector(0, Q(1, 2), Q(1, 2)))
    with pytest.raises(RegionOutsideSector):
        tempered_count(fd, cert, Region.make_sector(0, Q(1, 4), 1))


# -- filtrant presentation -------------------------------------------------------

def test_presentation_basic(basic):
    fd, cert, _ = basic
    p = filtrant_presentation(fd, cert)
    assert (p.m, p.n, p.describe()) == (1, 1, "C_{S_delta}")


def test_presentation_composed():
    fd = exponential_parts(parse_operator("z^4*d^2+2*z^3*d-1"))
    p = filtrant_presentation(fd, select_sector(fd))
    assert (p.m, p.n, p.describe()) == (2, 1, "C_{S_delta} + C_S")


def test_presentation_duplicated_growing_part():
    fd = FormalData(1, (EXP_INV_Z, EXP_INV_Z))
    p = filtrant_presentation(fd, select_sector(fd))
    assert (p.m, p.n, p.describe()) == (2, 2, "C^2_{S_delta}")


def test_presentation_regular_rejected(basic):
    with pytest.raises(PreconditionError):
        filtrant_presentation(FormalData(1, (ExponentialPart.zero(),)), basic[1])


# -- containment and cofinality --------------------------------------------------

def test_basic_inclusions(basic):
    S = basic[2]
    for d in (Q(1, 5), Q(1, 10), Q(1, 20)):
        v = region_contains(S.ball_complement(d / 4), S.truncated(d))
        assert isinstance(v, Verified) and v.closed_form and v.samples >= 1000
        v = region_contains(S.truncated(d), S.ball_complement(d))
        assert isinstance(v, Verified) and v.closed_form and v.samples >= 1000


def test_strict_inclusion_refuted(basic):
    S = basic[2]
    d = Q(1, 10)
    v = region_contains(S.truncated(2 * d), S.truncated(d))
    assert isinstance(v, Refuted)
    assert d ** 2 < v.witness.abs2() <= (2 * d) ** 2
    assert S.truncated(d).contains(v.witness)


def test_cofinal_truncations_vs_ball_complements(basic):
    S = basic[2]
    grid = [Q(1, 5), Q(1, 10), Q(1, 20)]
    rep = cofinal_check(S.truncated, S.ball_complement, grid,
                        forward=lambda d: d / 4, backward=lambda e: e)
    assert rep["ok"] and len(rep["forward"]) == 3 and len(rep["backward"]) == 3
    assert all(r["closed_form"] for r in rep["forward"] + rep["backward"])


def test_cofinal_search_without_maps(basic):
    S = basic[2]
    rep = cofinal_check(S.truncated, S.ball_complement, [Q(1, 5), Q(1, 10)], samples=300)
    assert rep["ok"]


def test_cofinal_identity_and_square(basic):
    S = basic[2]
    grid = [Q(2, 5), Q(1, 5), Q(1, 10)]
    rep = cofinal_check(S.truncated, S.truncated, grid, samples=300)
    assert rep["ok"] and all(r["from"] == r["to"] for r in rep["forward"])
    rep = cofinal_check(S.truncated, lambda d: S.truncated(d * d), grid, samples=300)
    assert rep["ok"]


# -- properties over random certificates -----------------------------------------

def _random_regions(cert, rng):
    """A nested chain W0 ⊇ W1 ⊇ W2 ⊇ W3 inside the certified sector."""
    t0, t1 = cert.theta0, cert.theta1
    a = t0 + (t1 - t0) * Q(rng.randint(0, 3), 10)
    b = t1 - (t1 - t0) * Q(rng.randint(0, 3), 10)
    R = cert.R * Q(rng.randint(5, 10), 10)
    W0 = Region.make_sector(t0, t1, cert.R)
    W1 = Region.make_sector(a, b, R)
    eps = R * Q(rng.randint(1, 4), 10)
    psi = (a + b) / 2
    # a disk through 0 centred on the bisector (rational approximation of the direction)
    c = G(Q(math.cos(float(psi) * math.pi)).limit_denominator(1000),
          Q(math.sin(float(psi) * math.pi)).limit_denominator(1000))
    scale = eps / Q(math.sqrt(float(c.abs2()))).limit_denominator(10 ** 6)
    W2 = W1.outside_disk(G(c.re * scale, c.im * scale), eps) if rng.random() < 0.5 else W1
    W3 = W2.truncated(eps / 2)
    return [W0, W1, W2, W3]


@pytest.fixture(scope="module")
def random_cases():
    rng = random.Random(3)
    out = []
    for fd in random_suite(40, seed=17):
        cert = select_sector(fd)
        out.append((fd, cert, _random_regions(cert, rng)))
    return out


def test_monotonicity_and_dichotomy(random_cases):
    for fd, cert, chain in random_cases:
        prev = None
        for V in chain:
            n, J = tempered_count(fd, cert, V)
            _, touches = inf_modulus(V)
            assert n == (fd.m - len(cert.I) if touches else fd.m)
            assert n == filtrant_presentation(fd, cert).section_dimension(V)
            if prev is not None:
                assert set(prev) <= set(J)
            prev = J


def _float_samples(V, count, seed):
    s = V.sector
    b, _ = inf_modulus(V)
    lo = max(float(b), 1e-12)
    pts = qmc.Halton(d=2, seed=seed).random(count)
    rho = lo * (float(s.R) / lo) ** pts[:, 0]
    theta = (float(s.theta0) + (float(s.theta1) - float(s.theta0)) * pts[:, 1]) * math.pi
    keep = np.ones(count, dtype=bool)
    z = rho * np.exp(1j * theta)
    for c in V.constraints:
        if isinstance(c, MinModulus):
            keep &= rho > float(c.delta)
        elif isinstance(c, OutsideClosedDisk):
            keep &= np.abs(z - complex(float(c.center.re), float(c.center.im))) > float(c.radius)
    return rho[keep], theta[keep]


def test_verdict_sup_consistency(random_cases):
    checked = 0
    for fd, cert, chain in random_cases[:20]:
        for V in chain[1:]:
            rho, theta = _float_samples(V, 10_000, seed=checked)
            for j, part in enumerate(fd.parts, start=1):
                v = is_tempered_exp(part, V, cert, j)
                if isinstance(v, Tempered):
                    if part.is_zero:
                        continue
                    vals = re_minus_lambda(part, rho, theta)
                    A = float(v.A)
                    assert np.all(vals <= A + 1e-9 * max(1.0, abs(A)))
                    checked += 1
                else:
                    assert isinstance(v, NotTempered)
                    th = float(v.theta_star) * math.pi
                    radii = 10.0 ** -np.arange(1, 60, dtype=float)
                    vals = re_minus_lambda(part, radii, np.full_like(radii, th))
                    assert vals.max() > 1e2 and vals.max() > 1e4
                    assert np.all(np.diff(vals[-10:]) > 0)
    assert checked > 50
