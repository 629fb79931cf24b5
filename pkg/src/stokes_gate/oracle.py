"""Numerical growth oracle.

Integrates ``z^N w' = -A(z) w`` along rays toward the origin with a
high-order Taylor method in mpmath, renormalizing the fundamental matrix
by Gram-Schmidt after every step and keeping the logs of the discarded
scale factors. The resulting log-magnitudes are fitted against
``c rho^(-e)`` and compared with the symbolic exponential parts.

Nothing here is certified; the oracle is an independent sanity check.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb

import mpmath
import numpy as np

from .errors import PrecisionExhausted, StepSizeUnderflow, StokesGateError
from .formal import FormalData
from .operators import ScalarOperator, SystemOperator, companion_system

DEFAULT_TOL = 1e-20
MAX_ORDER = 80
#: steps per decade of rho, so the deepest decade carries enough samples
PER_DECADE = 32
#: a step may move the solution by about exp(RATE_BUDGET) relative to its size
RATE_BUDGET = 3.0


@dataclass
class RayTrace:
    theta: float
    rho: list = field(default_factory=list)
    logs: list = field(default_factory=list)   # per sample: accumulated log scale per column
    steps: int = 0
    digits: int = 50
    tol: float = DEFAULT_TOL

    def log_array(self) -> np.ndarray:
        return np.array(self.logs, dtype=float)


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    c: float
    residual: float
    degenerate: bool = False

    def to_dict(self):
        return {"exponent": self.exponent, "c": self.c, "residual": self.residual,
                "degenerate": self.degenerate}


# -- Taylor stepping ----------------------------------------------------------

def _mpc(g):
    return mpmath.mpc(mpmath.mpf(g.re.numerator) / g.re.denominator,
                      mpmath.mpf(g.im.numerator) / g.im.denominator)


def _coeff_mats(sys: SystemOperator):
    """A(z) = sum_k A_k z^k as a list of mpmath matrices (index k)."""
    return [[[_mpc(x) for x in row] for row in sys.coefficient_matrix(k)]
            for k in range(sys.max_degree() + 1)]


def _zero(m):
    return [[mpmath.mpc(0)] * m for _ in range(m)]


def _mul(a, b):
    m, k = len(a), len(b[0])
    return [[mpmath.fsum(a[i][t] * b[t][j] for t in range(len(b))) for j in range(k)] for i in range(m)]


def _norm(a):
    return max(abs(x) for row in a for x in row)


def _reexpand(As, z0):
    """Coefficients of A(z0 + t) in powers of t."""
    deg = len(As) - 1
    m = len(As[0])
    out = []
    for j in range(deg + 1):
        M = _zero(m)
        for k in range(j, deg + 1):
            f = comb(k, j) * z0 ** (k - j)
            for r in range(m):
                for c in range(m):
                    if As[k][r][c]:
                        M[r][c] += f * As[k][r][c]
        out.append(M)
    return out


def _rate(As, N, z0) -> float:
    """Spectral radius of A(z0)/z0^N (float estimate)."""
    m = len(As[0])
    Az = np.zeros((m, m), dtype=complex)
    zc = complex(z0)
    for k, Ak in enumerate(As):
        Az += np.array([[complex(x) for x in row] for row in Ak]) * zc ** k
    B = Az / zc ** N
    try:
        ev = np.linalg.eigvals(B)
        r = float(np.max(np.abs(ev)))
        if math.isfinite(r):
            return r
    except np.linalg.LinAlgError:
        pass
    return float(np.max(np.abs(B)))


def _taylor(As_t, N, z0, h, Y0, tol):
    """Sum of the Taylor series of Y at ``t = h``; None if it did not converge."""
    m = len(Y0)
    P = [comb(N, j) * z0 ** (N - j) for j in range(N + 1)]
    Ys = [Y0]
    total = [row[:] for row in Y0]
    hp = mpmath.mpf(1)
    small = 0
    biggest = _norm(Y0)
    for r in range(MAX_ORDER):
        acc = _zero(m)
        for j in range(min(r, len(As_t) - 1) + 1):
            prod = _mul(As_t[j], Ys[r - j])
            for a in range(m):
                for b in range(m):
                    acc[a][b] -= prod[a][b]
        for j in range(1, min(r, N) + 1):
            f = P[j] * (r - j + 1)
            Yp = Ys[r - j + 1]
            for a in range(m):
                for b in range(m):
                    acc[a][b] -= f * Yp[a][b]
        d = P[0] * (r + 1)
        nxt = [[x / d for x in row] for row in acc]
        Ys.append(nxt)
        hp *= h
        term_norm = _norm(nxt) * abs(hp)
        for a in range(m):
            for b in range(m):
                total[a][b] += nxt[a][b] * hp
        biggest = max(biggest, term_norm)
        scale = _norm(total)
        if term_norm <= tol * scale:
            small += 1
            if small >= 2 and r >= 4:
                return total, biggest / scale if scale else mpmath.inf
        else:
            small = 0
    return None, None


def _gram_schmidt(Y):
    """Orthonormalize the columns in place; return log of each column's scale."""
    m = len(Y)
    cols = [[Y[i][j] for i in range(m)] for j in range(m)]
    logs = []
    for j in range(m):
        v = cols[j]
        for q in cols[:j]:
            proj = mpmath.fsum(mpmath.conj(q[i]) * v[i] for i in range(m))
            v = [v[i] - proj * q[i] for i in range(m)]
        nrm = mpmath.sqrt(mpmath.fsum(abs(x) ** 2 for x in v))
        if nrm == 0:
            raise PrecisionExhausted("fundamental matrix became singular at working precision")
        cols[j] = [x / nrm for x in v]
        logs.append(mpmath.log(nrm))
    Q = [[cols[j][i] for j in range(m)] for i in range(m)]
    return Q, logs


def _propagate(sys: SystemOperator, z_start, z_end, Y, tol, renormalize, on_step=None):
    """Step Y along the segment [z_start, z_end] (which must avoid 0)."""
    As = _coeff_mats(sys)
    N = sys.N
    total = abs(z_end - z_start)
    unit = (z_end - z_start) / total
    done = mpmath.mpf(0)
    z0 = z_start
    logs = [mpmath.mpf(0)] * sys.m
    steps = 0
    digits_budget = mpmath.mpf(10) ** (mpmath.mp.dps - 8)
    eps = total * mpmath.mpf(10) ** (-mpmath.mp.dps // 2)
    while total - done > eps:
        rz = abs(z0)
        h_abs = min(rz / 2, rz * (1 - 10 ** (-1.0 / PER_DECADE)),
                    RATE_BUDGET / max(_rate(As, N, z0), 1e-300))
        h_abs = min(mpmath.mpf(h_abs), total - done)
        if total - done - h_abs < max(2 * eps, rz * 1e-10):
            h_abs = total - done
        As_t = _reexpand(As, z0)
        while True:
            if h_abs < rz * 1e-14:
                raise StepSizeUnderflow(f"step size underflow at |z|={float(rz):.3g}",
                                        rho_reached=float(rz))
            S, growth = _taylor(As_t, N, z0, unit * h_abs, Y, tol)
            if S is not None and growth < digits_budget:
                break
            h_abs /= 2
        Y = S
        done += h_abs
        z0 = z_start + unit * done if done < total else z_end
        steps += 1
        if renormalize:
            Y, inc = _gram_schmidt(Y)
            logs = [a + b for a, b in zip(logs, inc)]
            if not all(mpmath.isfinite(x) for x in logs):
                raise PrecisionExhausted("log scale factors stopped being finite")
        if on_step is not None:
            on_step(z0, logs)
    return Y, logs, steps


def integrate_ray(sys: SystemOperator, theta: float, rho_hi=10.0, rho_lo=0.01,
                  tol: float = DEFAULT_TOL, digits: int = 50) -> RayTrace:
    """Propagate an orthonormal fundamental matrix from ``rho_hi`` to ``rho_lo``.

    The recorded logs are the accumulated Gram-Schmidt scale factors: for
    ``m = 1`` exactly ``log|u(rho)| - log|u(rho_hi)|``; in general the k-th
    entry tracks the k-th growth rate of the solution space.
    """
    if not 0 < rho_lo < rho_hi:
        raise ValueError("need 0 < rho_lo < rho_hi")
    trace = RayTrace(theta=float(theta), digits=digits, tol=tol)
    with mpmath.workdps(digits):
        e = mpmath.expjpi(mpmath.mpf(theta) / mpmath.pi)
        z_hi, z_lo = mpmath.mpf(rho_hi) * e, mpmath.mpf(rho_lo) * e
        Y = [[mpmath.mpc(1 if i == j else 0) for j in range(sys.m)] for i in range(sys.m)]
        trace.rho.append(float(rho_hi))
        trace.logs.append([0.0] * sys.m)

        def record(z, logs):
            trace.rho.append(float(abs(z)))
            trace.logs.append([float(x) for x in logs])

        _, _, trace.steps = _propagate(sys, z_hi, z_lo, Y, mpmath.mpf(tol), True, record)
    return trace


def transfer_matrix(sys: SystemOperator, z_from, z_to, tol: float = DEFAULT_TOL, digits: int = 50):
    """Fundamental matrix Phi with Phi(z_from) = I, evaluated at z_to (no renormalization).

    The segment must not pass through 0.
    """
    with mpmath.workdps(digits):
        zf, zt = mpmath.mpc(z_from), mpmath.mpc(z_to)
        Y = [[mpmath.mpc(1 if i == j else 0) for j in range(sys.m)] for i in range(sys.m)]
        Y, _, _ = _propagate(sys, zf, zt, Y, mpmath.mpf(tol), False)
    return Y


# -- fitting ------------------------------------------------------------------

#: below this size of the second log-derivative the column is treated as moderate growth
DEGENERATE_LEVEL = 0.05


def fit_growth(trace: RayTrace, l: int = 1, decades: float = 1.0) -> list[GrowthFit]:
    """Fit each column's log-magnitude against ``c rho^(-e)`` on the deepest decade.

    With ``x = log(1/rho)`` and ``L(x) = c e^{e x} + M x + const + o(1)``, the
    second derivative ``L'' = c e^2 e^{e x}`` removes the moderate-growth
    part; ``e`` is the slope of ``log|L''|`` and ``c`` follows by least squares.
    """
    rho = np.array(trace.rho)
    x = np.log(1.0 / rho)
    if x[-1] - x[0] < 3 * math.log(10) - 1e-9:
        raise ValueError("fit needs at least three decades of rho")
    L = trace.log_array()
    window = x >= x[-1] - decades * math.log(10)
    fits = []
    for col in range(L.shape[1]):
        D1 = np.gradient(L[:, col], x, edge_order=2)
        D2 = np.gradient(D1, x, edge_order=2)
        xs, d2 = x[window][1:-1], D2[window][1:-1]
        if np.median(np.abs(d2)) < DEGENERATE_LEVEL:
            slope, intercept = np.polyfit(xs, D1[window][1:-1], 1)
            resid = float(np.std(D1[window][1:-1] - (slope * xs + intercept)))
            fits.append(GrowthFit(0.0, 0.0, resid, True))
            continue
        y = np.log(np.abs(d2))
        e_hat, _ = np.polyfit(xs, y, 1)
        snapped = round(e_hat * l) / l
        e_use = snapped if snapped > 0 and abs(e_hat - snapped) < 0.15 * snapped else e_hat
        basis = np.exp(e_use * xs)
        k = float(np.dot(d2, basis) / np.dot(basis, basis))
        resid = float(np.sqrt(np.mean((d2 - k * basis) ** 2)) / max(np.max(np.abs(d2)), 1e-300))
        fits.append(GrowthFit(float(e_hat), k / e_use ** 2, resid, False))
    return fits


# -- cross-check --------------------------------------------------------------

def _expected(fd: FormalData, theta: float):
    """Per part: (exponent n/l, leading coefficient of Re(-Lambda) at angle theta)."""
    out = []
    for part in fd.parts:
        if part.is_zero:
            out.append((0.0, 0.0))
            continue
        a = complex(part.leading)
        n, l = part.n_lead, part.ram
        s = abs(a) * math.cos(float(part.phi(n)) - n * theta / l)
        out.append((n / l, s))
    return out


def _dominance_key(e, s):
    if s > 0:
        return (2, e, s)
    if s == 0:
        return (1, 0.0, 0.0)
    return (0, -e, s)


def system_of(fd: FormalData) -> SystemOperator:
    src = fd.source
    if isinstance(src, SystemOperator):
        return src
    if isinstance(src, ScalarOperator):
        return companion_system(src)
    raise StokesGateError("formal data carries no source operator")


def _ray_task(args):
    sys, theta, rho_hi, rho_lo, tol, digits, l = args
    trace = integrate_ray(sys, theta, rho_hi, rho_lo, tol, digits)
    return trace, fit_growth(trace, l)


def crosscheck(fd: FormalData, cert, rays, rho_hi=10.0, rho_lo=0.01, tol: float = DEFAULT_TOL,
               digits: int = 50, workers: int = 1, rel_tol: float = 0.10) -> dict:
    """Compare fitted growth along each ray with the exponential parts.

    A ray passes when the dominant fitted exponent matches the dominant
    part's ``n/l`` within ``rel_tol`` (or is degenerate when nothing grows
    or decays), the sign of the dominant ``c`` matches, and for ``m = 1``
    the coefficient matches within ``rel_tol`` too. Never raises on a
    failed comparison; integration errors are reported per ray.
    """
    sys = system_of(fd)
    rays = [float(t) for t in rays]
    tasks = [(sys, t, rho_hi, rho_lo, tol, digits, fd.l) for t in rays]
    results = []
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(_ray_task, t) for t in tasks]
            for f in futures:
                try:
                    results.append(f.result())
                except (StokesGateError, ValueError, ArithmeticError) as exc:
                    results.append(exc)
    else:
        for t in tasks:
            try:
                results.append(_ray_task(t))
            except (StokesGateError, ValueError, ArithmeticError) as exc:
                results.append(exc)

    report_rays = []
    for theta, res in zip(rays, results):
        entry = {"theta": theta}
        if isinstance(res, Exception):
            entry.update({"fits": [], "pass": False, "error": f"{type(res).__name__}: {res}"})
            report_rays.append(entry)
            continue
        trace, fits = res
        exp = _expected(fd, theta)
        e_dom, s_dom = max(exp, key=lambda es: _dominance_key(*es))
        top = fits[0]
        checks = {}
        if e_dom == 0.0:
            checks["exponent"] = top.degenerate
        else:
            checks["exponent"] = (not top.degenerate) and abs(top.exponent - e_dom) <= rel_tol * e_dom
        checks["sign"] = (top.degenerate and s_dom == 0) or (
            not top.degenerate and s_dom != 0 and math.copysign(1, top.c) == math.copysign(1, s_dom))
        if fd.m == 1 and e_dom != 0.0:
            checks["coefficient"] = abs(top.c - s_dom) <= rel_tol * abs(s_dom)
        entry.update({
            "fits": [f.to_dict() for f in fits],
            "expected": {"exponent": e_dom, "c": s_dom},
            "steps": trace.steps,
            "checks": checks,
            "pass": all(checks.values()),
        })
        report_rays.append(entry)
    passed = all(r["pass"] for r in report_rays)
    return {
        "rays": report_rays,
        "summary": {"pass": passed, "rays": len(report_rays),
                    "failed": sum(not r["pass"] for r in report_rays),
                    "digits": digits, "tol": tol, "rho_hi": rho_hi, "rho_lo": rho_lo},
    }


def default_rays(cert, count: int = 2) -> list[float]:
    """Interior rays (radians) evenly spread over the certified range."""
    t0, t1 = float(cert.theta0), float(cert.theta1)
    return [math.pi * (t0 + (t1 - t0) * (k + 0.5) / count) for k in range(count)]
