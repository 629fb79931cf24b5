import math

import mpmath
import numpy as np
import pytest

from stokes_gate.formal import ExponentialPart, FormalData, exponential_parts
from stokes_gate.gaussian import GaussianRational
from stokes_gate.operators import SystemOperator, companion_system
from stokes_gate.oracle import (crosscheck, default_rays, fit_growth, integrate_ray, system_of,
                                transfer_matrix)
from stokes_gate.parsing import parse_coefficient, parse_operator
from stokes_gate.sectors import select_sector


def sys_of(text):
    return companion_system(parse_operator(text))


def _rel_err(trace, closed):
    rho = np.array(trace.rho)
    got = trace.log_array()[:, 0]
    want = closed(rho) - closed(rho[0])
    mask = np.abs(want) > 1e-3
    return float(np.max(np.abs(got[mask] - want[mask]) / np.abs(want[mask])))


# -- closed forms ----------------------------------------------------------------

def test_exp_inverse_z_closed_form():
    th = math.pi / 8
    tr = integrate_ray(sys_of("z^2*d+1"), th, rho_hi=0.5, rho_lo=0.01)
    # u = exp(1/z): log|u| = cos(theta) / rho
    assert _rel_err(tr, lambda r: math.cos(th) / r) <= 1e-6
    assert tr.rho == sorted(tr.rho, reverse=True)


def test_fuchsian_closed_form():
    tr = integrate_ray(sys_of("z*d+2"), 0.0, rho_hi=0.5, rho_lo=0.01)
    # u = z^-2: log|u| = 2 log(1/rho)
    assert _rel_err(tr, lambda r: -2 * np.log(r)) <= 1e-6


def test_cubic_pole_closed_form():
    tr = integrate_ray(sys_of("z^3*d+1"), 0.0, rho_hi=0.5, rho_lo=0.05)
    # u = exp(1/(2 z^2))
    assert _rel_err(tr, lambda r: 1 / (2 * r ** 2)) <= 1e-6


def test_shifted_first_order_closed_form():
    th = 0.3
    tr = integrate_ray(sys_of("z^2*d+1+z"), th, rho_hi=0.5, rho_lo=0.01)
    # u = z^-1 exp(1/z)
    assert _rel_err(tr, lambda r: math.cos(th) / r - np.log(r)) <= 1e-6


# -- fits ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def traces():
    return {
        "exp": integrate_ray(sys_of("z^2*d+1"), math.pi / 8),
        "pole": integrate_ray(sys_of("z*d+2"), 0.0),
    }


def test_fit_exp_inverse_z(traces):
    (fit,) = fit_growth(traces["exp"])
    assert not fit.degenerate
    assert fit.exponent == pytest.approx(1, rel=0.05)
    assert fit.c == pytest.approx(math.cos(math.pi / 8), rel=0.05)


def test_fit_pole_is_degenerate(traces):
    (fit,) = fit_growth(traces["pole"])
    assert fit.degenerate and fit.exponent == 0


def test_fit_needs_three_decades():
    tr = integrate_ray(sys_of("z^2*d+1"), 0.3, rho_hi=1, rho_lo=0.1)
    with pytest.raises(ValueError):
        fit_growth(tr)


def test_fit_inverse_square():
    tr = integrate_ray(sys_of("z^3*d+1"), 0.0, rho_hi=10, rho_lo=0.01)
    (fit,) = fit_growth(tr)
    assert fit.exponent == pytest.approx(2, rel=0.05)
    assert fit.c == pytest.approx(0.5, rel=0.05)


# -- cross-check -----------------------------------------------------------------

def test_crosscheck_exp_inverse_z():
    fd = exponential_parts(parse_operator("z^2*d+1"))
    rep = crosscheck(fd, select_sector(fd), [math.pi / 16, math.pi / 8])
    assert rep["summary"]["pass"]
    for ray in rep["rays"]:
        assert ray["fits"][0]["c"] > 0
        assert ray["fits"][0]["exponent"] == pytest.approx(1, rel=0.1)


def test_crosscheck_two_parts():
    fd = exponential_parts(parse_operator("z^4*d^2+2*z^3*d-1"))
    cert = select_sector(fd)
    rep = crosscheck(fd, cert, default_rays(cert))
    assert rep["summary"]["pass"]
    assert all(r["fits"][0]["c"] > 0 for r in rep["rays"])


def test_crosscheck_regular():
    fd = exponential_parts(parse_operator("z*d+3"))
    rep = crosscheck(fd, None, [0.2, 1.0])
    assert rep["summary"]["pass"]
    assert all(f["degenerate"] for r in rep["rays"] for f in r["fits"])


def test_crosscheck_detects_wrong_parts():
    # formal data claiming exp(-1/z) for the operator whose solution is exp(1/z)
    op = parse_operator("z^2*d+1")
    wrong = FormalData(1, (ExponentialPart(1, (GaussianRational(1),)),), source=op)
    rep = crosscheck(wrong, None, [math.pi / 8])
    assert not rep["summary"]["pass"]


def test_crosscheck_reports_errors_without_raising():
    fd = exponential_parts(parse_operator("z^2*d+1"))
    # half a decade of rho is too short to fit
    rep = crosscheck(fd, None, [0.3], rho_hi=1, rho_lo=0.5)
    assert not rep["summary"]["pass"]
    assert rep["rays"][0]["pass"] is False and "ValueError" in rep["rays"][0]["error"]


# -- numerical properties --------------------------------------------------------

def test_halving_tol_changes_little():
    sys = sys_of("z^4*d^2+2*z^3*d-1")
    tol = 1e-20
    a = integrate_ray(sys, 0.3, rho_hi=1, rho_lo=0.01, tol=tol).log_array()
    b = integrate_ray(sys, 0.3, rho_hi=1, rho_lo=0.01, tol=tol / 2).log_array()
    assert a.shape == b.shape
    assert np.max(np.abs(a - b)) <= 10 * tol


@pytest.mark.parametrize("text, rho_hi, rho_lo", [
    ("z^2*d+1", 10.0, 0.01),
    # two solutions separating like exp(+-1/z): the round trip loses about
    # cond(Phi) * tol, so the range is kept where that stays far below 1e-8
    ("z^4*d^2+2*z^3*d-1", 1.0, 0.1),
])
def test_reversibility(text, rho_hi, rho_lo):
    sys = sys_of(text)
    e = complex(math.cos(0.3), math.sin(0.3))
    fwd = transfer_matrix(sys, rho_hi * e, rho_lo * e)
    back = transfer_matrix(sys, rho_lo * e, rho_hi * e)
    err = mpmath.mnorm(mpmath.matrix(back) * mpmath.matrix(fwd) - mpmath.eye(sys.m), 1)
    assert err < 1e-8


def _odefun_solution(text, z0, z1, w0):
    """Integrate (u, u') of a second order scalar operator with mpmath's own Taylor solver."""
    op = parse_operator(text)

    def coeff(i):
        c = op[i]
        return lambda z: sum(complex(v) * z ** int(e) for e, v in c.items())

    a0, a1, a2 = coeff(0), coeff(1), coeff(2)
    dz = z1 - z0

    def rhs(t, w):
        z = z0 + t * dz
        u, up = w
        return [dz * up, dz * (-(a1(z) * up + a0(z) * u) / a2(z))]

    with mpmath.workdps(30):
        f = mpmath.odefun(rhs, 0, [mpmath.mpc(x) for x in w0])
        return [complex(x) for x in f(1)]


def test_system_agrees_with_independent_solver():
    text = "z^4*d^2+2*z^3*d-1"
    e = complex(math.cos(0.3), math.sin(0.3))
    z0, z1 = 1.0 * e, 0.4 * e
    Phi = transfer_matrix(sys_of(text), z0, z1)
    for col in range(2):
        w0 = [1.0 if i == col else 0.0 for i in range(2)]
        ref = _odefun_solution(text, z0, z1, w0)
        got = [complex(Phi[i][col]) for i in range(2)]
        scale = max(abs(x) for x in ref)
        assert max(abs(g - r) for g, r in zip(got, ref)) <= 1e-8 * scale


def test_scalar_companion_and_direct_system_agree():
    # the same first order equation entered as a 1x1 system
    fd_scalar = exponential_parts(parse_operator("z^2*d+1"))
    sys = SystemOperator(2, ((parse_coefficient("1"),),))
    a = integrate_ray(system_of(fd_scalar), 0.4, rho_hi=1, rho_lo=0.01).log_array()
    b = integrate_ray(sys, 0.4, rho_hi=1, rho_lo=0.01).log_array()
    assert np.max(np.abs(a - b)) <= 1e-15


def test_parallel_matches_serial():
    fd = exponential_parts(parse_operator("z^2*d+1"))
    rays = [0.2, 0.5]
    s = crosscheck(fd, None, rays, rho_hi=10, rho_lo=0.01)
    p = crosscheck(fd, None, rays, rho_hi=10, rho_lo=0.01, workers=2)
    assert [r["fits"] for r in s["rays"]] == [r["fits"] for r in p["rays"]]
