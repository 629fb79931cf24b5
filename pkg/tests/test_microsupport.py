import random
from fractions import Fraction

import pytest

from stokes_gate.errors import NoIrregularityWitness, PreconditionError
from stokes_gate.formal import exponential_parts
from stokes_gate.gaussian import GaussianRational
from stokes_gate.microsupport import (ConicSubset, OutwardNormalCircle, ZeroSectionOver,
                                      char_variety, check_witness, irregularity_witness, ss_Fdelta)
from stokes_gate.parsing import parse_operator
from stokes_gate.sectors import certify_sector, select_sector
from stokes_gate.temperance import Sector

G = GaussianRational
Q = Fraction
ZERO = G(0)


@pytest.fixture(scope="module")
def cert():
    fd = exponential_parts(parse_operator("z^2*d+1"))
    return certify_sector(fd, 0, Q(1, 4), Q(1, 2))


# a Pythagorean point at angle atan(5/12) ~ 0.125 pi, inside (0, pi/4)
DIR = G(Q(12, 13), Q(5, 13))


def test_ss_members(cert):
    d = Q(1, 4)
    ss = ss_Fdelta(d, cert)
    z = DIR * d
    assert ss.contains(z, -z)
    assert ss.contains(z, z * Q(-7, 3))
    assert ss.contains(DIR * Q(1, 3), ZERO)
    # |z| < delta is still in T*_S S
    assert ss.contains(DIR * Q(1, 10), ZERO)


def test_ss_non_members(cert):
    ss = ss_Fdelta(Q(1, 4), cert)
    z = DIR * Q(1, 3)
    assert not ss.contains(z, -z)          # |z| > delta with nonzero covector
    w = DIR * Q(1, 4)
    assert not ss.contains(w, w)           # inward normal (lambda > 0)
    assert not ss.contains(w, w * G(0, 1))  # tangent direction
    assert not ss.contains(G(Q(1, 4)), G(Q(-1, 4)))  # on the boundary ray arg = 0
    assert not ss.contains(ZERO, G(1))


def test_ss_precondition(cert):
    with pytest.raises(PreconditionError):
        ss_Fdelta(Q(1, 2), cert)
    with pytest.raises(PreconditionError):
        ss_Fdelta(0, cert)


def test_char_variety():
    ch = char_variety()
    assert ch.contains(G(3, 4), ZERO)
    assert ch.contains(ZERO, G(5, -1))
    assert not ch.contains(G(3, 4), G(-3, -4))
    assert (G(1), ZERO) in ch


def test_basic_witness():
    fd = exponential_parts(parse_operator("z^2*d+1"))
    w = irregularity_witness(fd, Q(1, 2))
    assert w.delta == Q(1, 4)
    assert w.z.abs2() == w.delta ** 2
    assert w.ok and w.checks == {"in_SS_Fdelta": True, "in_Char": False, "in_U": True}
    # xi = lambda z with lambda < 0
    ratio = w.xi / w.z
    assert ratio.im == 0 and ratio.re < 0


@pytest.mark.parametrize("text", ["z^2*d+1", "z^4*d^2+2*z^3*d-1", "z^3*d^2-1"])
def test_witness_log_grid(text):
    cert = select_sector(exponential_parts(parse_operator(text)))
    for k in range(7):
        r = Q(1, 10 ** k)
        w = irregularity_witness(cert, r)
        assert w.delta == min(r, cert.R) / 2
        # re-check independently with the public predicates
        assert ss_Fdelta(w.delta, cert).contains(w.z, w.xi)
        assert not char_variety().contains(w.z, w.xi)
        assert w.z.abs2() < r * r and w.xi.abs2() < r * r
        assert check_witness(cert, w.delta, w.z, w.xi, r) == w.checks


def test_small_r(cert):
    w = irregularity_witness(cert, Q(1, 1000))
    assert w.delta == Q(1, 2000) and w.ok


@pytest.mark.parametrize("text", ["z*d+3", "z^2*d^2+z*d-1", "z^2*d+z"])
def test_regular_operators_have_no_witness(text):
    with pytest.raises(NoIrregularityWitness):
        irregularity_witness(exponential_parts(parse_operator(text)), Q(1, 2))


def test_witness_json(cert):
    d = irregularity_witness(cert, Q(1, 2)).to_dict()
    assert set(d) == {"delta", "z", "xi", "checks"}
    assert Q(d["z"][0]) ** 2 + Q(d["z"][1]) ** 2 == Q(d["delta"]) ** 2


def _random_gr(rng):
    return G(Q(rng.randint(-30, 30), rng.randint(1, 20)), Q(rng.randint(-30, 30), rng.randint(1, 20)))


def test_conic_invariance(cert):
    rng = random.Random(1)
    sets = [ss_Fdelta(Q(1, 4), cert), char_variety()]
    pts = []
    for _ in range(200):
        z = _random_gr(rng) * Q(1, 100)
        pts.append((z, _random_gr(rng)))
        pts.append((z, ZERO))
    # members of the conormal circle
    for k in range(1, 30):
        z = DIR * Q(1, 4)
        pts.append((z, z * Q(-k, 7)))
    members = 0
    for s in sets:
        for z, zeta in pts:
            base = s.contains(z, zeta)
            members += base
            for t in (Q(1, 3), Q(2), Q(17, 5)):
                assert s.contains(z, zeta * t) == base
    assert members > 30


def test_shrinking_family(cert):
    rng = random.Random(2)
    sec = Sector(cert.theta0, cert.theta1, cert.R)
    for _ in range(300):
        z = _random_gr(rng) * Q(1, 60)
        for d, dp in [(Q(1, 10), Q(1, 5)), (Q(1, 100), Q(1, 10))]:
            if ZeroSectionOver(sec, dp).contains(z, ZERO):
                assert ZeroSectionOver(sec, d).contains(z, ZERO)


def test_outward_normal_component(cert):
    sec = Sector(cert.theta0, cert.theta1, cert.R)
    c = OutwardNormalCircle(Q(1, 4), sec)
    z = DIR * Q(1, 4)
    assert ConicSubset((c,)).contains(z, -z)
    assert not c.contains(DIR * Q(1, 5), -DIR)
