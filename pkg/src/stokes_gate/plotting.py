"""SVG figures of certified data (matplotlib, Agg backend)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle, Wedge  # noqa: E402

from .formal import FormalData  # noqa: E402
from .microsupport import Witness  # noqa: E402
from .sectors import SectorCertificate  # noqa: E402

plt.rcParams["svg.hashsalt"] = "stokes-gate"
_META = {"Date": None, "Creator": "stokes_gate"}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def _plane(ax, R):
    ax.set_aspect("equal")
    ax.axhline(0, color="0.85", lw=0.6, zorder=0)
    ax.axvline(0, color="0.85", lw=0.6, zorder=0)
    lim = 1.15 * R
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")


def plot_sectors(fd: FormalData, cert: SectorCertificate, path, delta=None):
    R = float(cert.R)
    delta = R / 4 if delta is None else float(delta)
    t0, t1 = float(cert.theta0) * 180, float(cert.theta1) * 180
    fig, ax = plt.subplots(figsize=(5, 5))
    _plane(ax, R)
    ax.add_patch(Wedge((0, 0), R, t0, t1, color="tab:blue", alpha=0.25, label="certified sector S"))
    ax.add_patch(Wedge((0, 0), R, t0, t1, width=R - delta, color="tab:blue", alpha=0.25,
                       label=f"S_delta, delta={delta:g}"))
    ax.add_patch(Circle((0, 0), delta, fill=False, ls="--", color="0.4", lw=0.8))
    for j, part in enumerate(fd.parts, start=1):
        if part.is_zero:
            continue
        n, l = part.n_lead, part.ram
        # Re(-Lambda_j) grows fastest where cos(phi - n theta / l) = 1
        th = l * float(part.phi(n)) / n
        cond = cert.condition(j).cond
        color = "tab:red" if cond == "i" else "tab:green"
        ax.annotate("", xy=(R * math.cos(th), R * math.sin(th)), xytext=(0, 0),
                    arrowprops=dict(arrowstyle="->", color=color, lw=1.2))
        ax.text(1.05 * R * math.cos(th), 1.05 * R * math.sin(th), f"j={j} ({cond})", color=color,
                fontsize=8)
    ax.set_title(f"sector [{cert.theta0}pi, {cert.theta1}pi], R={cert.R}", fontsize=9)
    ax.legend(loc="lower left", fontsize=7)
    _save(fig, path)


def plot_growth(traces, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for tr in traces:
        inv = [1.0 / r for r in tr.rho]
        logs = tr.log_array()
        for col in range(logs.shape[1]):
            ax.plot(inv, logs[:, col], lw=1, label=f"theta={tr.theta:.4f}, column {col + 1}")
    ax.set_xscale("log")
    ax.set_xlabel("1/rho")
    ax.set_ylabel("accumulated log|u|")
    ax.legend(fontsize=7)
    _save(fig, path)


def plot_microsupport(cert: SectorCertificate, witness: Witness, path):
    R = float(cert.R)
    d = float(witness.delta)
    t0, t1 = float(cert.theta0) * 180, float(cert.theta1) * 180
    fig, ax = plt.subplots(figsize=(5, 5))
    _plane(ax, R)
    ax.add_patch(Wedge((0, 0), R, t0, t1, width=R - d, color="tab:blue", alpha=0.25,
                       label="zero section over |z| >= delta"))
    ax.add_patch(Wedge((0, 0), d, t0, t1, width=d * 0.02, color="tab:orange",
                       label="conormal circle |z| = delta"))
    ax.plot([0], [0], "ks", ms=4, label="fibre over 0")
    zx, zy = float(witness.z.re), float(witness.z.im)
    ax.plot([zx], [zy], "r*", ms=10, label="witness z*")
    xx, xy = float(witness.xi.re), float(witness.xi.im)
    scale = 0.5 * d / max(math.hypot(xx, xy), 1e-300)
    ax.annotate("", xy=(zx + scale * xx, zy + scale * xy), xytext=(zx, zy),
                arrowprops=dict(arrowstyle="->", color="tab:red"))
    ax.set_title(f"SS(F_delta), delta={witness.delta}", fontsize=9)
    ax.legend(loc="lower left", fontsize=7)
    _save(fig, path)
