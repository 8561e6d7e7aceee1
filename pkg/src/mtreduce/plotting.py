"""Figure rendering for the analysis reports (PNG files next to the CSVs)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import FitResult, tau_sync


def plot_tau_vs_n(points, fits: list[FitResult], path: Path,
                  tau_sync_value: float | None = None, title: str = "") -> None:
    """Log-log tau_N vs N with the fitted laws overlaid."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    n = np.array([p[0] for p in points if p[1] is not None])
    tau = np.array([p[1] for p in points if p[1] is not None])
    ax.loglog(n, tau, "o", color="k", label="measured")
    if len(n):
        grid = np.geomspace(n.min(), n.max(), 200)
        for fit in fits:
            if fit.model == "power":
                curve = fit.amplitude * grid ** fit.exponent
                label = f"power: b = {fit.exponent:.3f}"
            else:
                curve = fit.amplitude * np.exp(fit.exponent * grid)
                label = f"exponential: c' = {fit.exponent:.4f}"
            ax.loglog(grid, curve, "--", label=label)
    if tau_sync_value is not None:
        ax.axhline(tau_sync_value, color="gray", lw=1, label="tau_sync")
    ax.set_xlabel("cluster threshold N")
    ax.set_ylabel(r"$\tau_N$  [$t_0$]")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_tau_vs_k(points, p0: float, path: Path, knee: float | None = None,
                  title: str = "") -> None:
    """tau_N vs k against the synchronized-motion prediction, marking the knee."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ks = np.array([p[0] for p in points])
    finite = [(k, t) for k, t in points if t is not None and math.isfinite(t)]
    if finite:
        ax.loglog([k for k, _ in finite], [t for _, t in finite], "o", color="k",
                  label="measured")
    censored = [k for k, t in points if t is None or not math.isfinite(t)]
    if censored:
        ymax = max((t for _, t in finite), default=1.0)
        ax.plot(censored, [ymax * 2] * len(censored), "^", color="r",
                label="censored (no events)")
    grid = np.geomspace(ks.min(), ks.max(), 200)
    ax.loglog(grid, [tau_sync(k, p0) for k in grid], "--", color="gray",
              label=r"$\tau_{sync}$")
    if knee is not None:
        ax.axvline(knee, color="b", lw=1, ls=":", label=f"knee k_a = {knee:.3g}")
    ax.set_xlabel("k  [$V_0$]")
    ax.set_ylabel(r"$\tau_N$  [$t_0$]")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_hopping_curve(curve, path: Path, anchors=((2.0, 0.1), (0.61, 0.01))) -> None:
    """k(ell) on a log axis with the reference anchor points."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.semilogy([c[0] for c in curve], [c[1] for c in curve], "-", color="k")
    for ell, k in anchors:
        ax.plot([ell], [k], "o", color="r")
        ax.annotate(f"k = {k} V0 @ {ell} nm", (ell, k), textcoords="offset points",
                    xytext=(6, 4), fontsize=8)
    ax.set_xlabel("decay length ell  [nm]")
    ax.set_ylabel("k  [$V_0$]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_trajectory(trajectory, path: Path, sites=None, title: str = "") -> None:
    """Sampled |C_ia|^2 time series for a handful of sites."""
    fig, ax = plt.subplots(figsize=(7, 4))
    steps = np.array([s for s, _ in trajectory])
    occ = np.stack([o for _, o in trajectory])
    if sites is None:
        sites = range(0, occ.shape[1], max(1, occ.shape[1] // 8))
    for site in sites:
        ax.plot(steps, occ[:, site], lw=0.8)
    ax.set_xlabel("step")
    ax.set_ylabel(r"$|C_{i\alpha}|^2$")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
