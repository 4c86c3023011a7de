"""Figures rendered next to the CSV/JSON artifacts."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, out, name):
    path = os.path.join(out, name)
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def profile_figure(profile, basis, out):
    fig, (a, b) = plt.subplots(1, 2, figsize=(10, 3.6))
    x = profile.x
    keep = np.abs(x) <= 10
    a.plot(x[keep], profile.U[keep], label="U")
    a.plot(x[keep], profile.dU[keep], label="U'")
    a.plot(x[keep], profile.Z[keep], label="Z")
    a.set_xlabel("x")
    a.legend()
    for k in range(1, 9):
        b.plot(x[keep], basis[k][keep], lw=1, label="varpi%d" % k)
    b.set_xlabel("x")
    b.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return _save(fig, out, "profile.png")


def spectrum_figure(spectrum, out, j_show=20):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    vals = np.sort(spectrum.eigenvalues)[::-1][:j_show]
    ax.plot(np.arange(vals.size), vals, "o", ms=4)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("index")
    ax.set_ylabel("Jacobi eigenvalue")
    fig.tight_layout()
    return _save(fig, out, "spectrum.png")


def gap_figure(eps, margins, out):
    fig, ax = plt.subplots(figsize=(6, 3.4))
    ax.plot(eps, margins, lw=1)
    ax.axhline(0.0, color="r", lw=0.7)
    ax.set_xlabel("epsilon")
    ax.set_ylabel("gap margin")
    fig.tight_layout()
    return _save(fig, out, "gap_scan.png")


def modulation_figure(strip, modulation, log, out):
    fig, (a, b) = plt.subplots(1, 2, figsize=(10, 3.4))
    a.plot(strip.tau, modulation.f, label="f")
    a.plot(strip.tau, modulation.e, label="e")
    a.set_xlabel("tau")
    a.legend()
    steps = [entry["step"] for entry in log]
    b.semilogy(np.arange(1, len(steps) + 1), steps, "o-")
    b.set_xlabel("sweep")
    b.set_ylabel("step size")
    fig.tight_layout()
    return _save(fig, out, "modulation.png")


def field_figure(strip, field, out, name="field.png"):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    sl = strip.window
    im = ax.pcolormesh(strip.tau, strip.x[sl], field[sl], shading="nearest")
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("tau")
    ax.set_ylabel("x")
    fig.tight_layout()
    return _save(fig, out, name)


def oracle_figure(radial, ansatz_r, ansatz_u, out):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    r0 = radial.r_peak
    keep = np.abs(radial.r - r0) <= 12 * radial.epsilon
    ax.plot(radial.r[keep], radial.u[keep], label="radial solve")
    k2 = np.abs(ansatz_r - r0) <= 12 * radial.epsilon
    ax.plot(ansatz_r[k2], ansatz_u[k2], "--", label="ansatz")
    ax.set_xlabel("r")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out, "oracle.png")
