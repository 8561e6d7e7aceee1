"""Closed-form predictions and fits for the self-reduction time.

Covers the percolation prediction for the in-zone probability and cluster
statistics, the synchronized-motion saturation time, power-law and
exponential fits of tau_N, the hydrogen-like estimate of the hopping
amplitude k, and the minimum cluster size for a target tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

# 2D percolation constants for the triangular site problem: critical
# probability and the cluster-number exponents (exact rationals).
P_CRITICAL = 0.5
DELTA = Fraction(187, 91)
SIGMA = Fraction(36, 91)


def reset_zone_probability(p0: float) -> float:
    """Fraction of a free oscillation spent inside the reset zone:
    p = 1 - (2/pi) arccos(1 - 2 P0)."""
    if not 0.0 < p0 < 0.5:
        raise ValueError(f"P0 must lie in (0, 0.5), got {p0}")
    return 1.0 - (2.0 / math.pi) * math.acos(1.0 - 2.0 * p0)


def tau_sync(k: float, p0: float) -> float:
    """Saturation time of synchronized collective motion, in t0 units:
    tau_sync = (1/2k) arccos(1 - 2 P0)."""
    if k <= 0:
        raise ValueError(f"tau_sync requires k > 0, got {k}")
    if not 0.0 < p0 < 0.5:
        raise ValueError(f"P0 must lie in (0, 0.5), got {p0}")
    return math.acos(1.0 - 2.0 * p0) / (2.0 * k)


def scaling_window(n, p) -> np.ndarray:
    """(p_c - p) N^sigma: below ~1 the cluster distribution is power-law,
    above ~1 exponential."""
    return (P_CRITICAL - np.asarray(p, dtype=float)) * np.asarray(n, dtype=float) ** float(SIGMA)


def cluster_cutoff_rate(p: float) -> float:
    """Exponential cutoff rate c of the cluster distribution, up to a
    proportionality constant: (p_c - p)^(1/sigma)."""
    return (P_CRITICAL - p) ** (1.0 / float(SIGMA))


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of tau_N, in log space.

    power:       tau = amplitude * N ** exponent
    exponential: tau = amplitude * exp(exponent * N)
    """

    model: str
    amplitude: float
    exponent: float
    amplitude_err: float
    exponent_err: float
    n_points: int
    fit_range: tuple
    residual: float  # rms residual of log tau


def _loglinear_fit(x: np.ndarray, logtau: np.ndarray, model: str, fit_range: tuple) -> FitResult:
    design = np.column_stack([x, np.ones_like(x)])
    coef, _, _, _ = np.linalg.lstsq(design, logtau, rcond=None)
    resid = logtau - design @ coef
    dof = len(x) - 2
    var = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = var * np.linalg.inv(design.T @ design)
    slope, intercept = coef
    return FitResult(
        model=model,
        amplitude=math.exp(intercept),
        exponent=float(slope),
        amplitude_err=math.exp(intercept) * math.sqrt(max(cov[1, 1], 0.0)),
        exponent_err=math.sqrt(max(cov[0, 0], 0.0)),
        n_points=len(x),
        fit_range=fit_range,
        residual=float(np.sqrt(np.mean(resid**2))),
    )


def _select(points, fit_range):
    pts = [(float(n), float(tau)) for n, tau in points
           if tau is not None and np.isfinite(tau)]
    if fit_range is not None:
        lo, hi = fit_range
        pts = [(n, tau) for n, tau in pts if lo <= n <= hi]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 usable points, have {len(pts)}")
    n = np.array([p[0] for p in pts])
    tau = np.array([p[1] for p in pts])
    if np.any(n <= 0) or np.any(tau <= 0):
        raise ValueError("fit requires positive N and tau")
    return n, tau


def fit_power_law(points, fit_range: tuple | None = None) -> FitResult:
    """Fit tau = a N^b by least squares on log tau vs log N."""
    n, tau = _select(points, fit_range)
    if np.ptp(n) == 0:
        raise ValueError("degenerate fit range: all N equal")
    rng = fit_range if fit_range is not None else (float(n.min()), float(n.max()))
    return _loglinear_fit(np.log(n), np.log(tau), "power", rng)


def fit_exponential(points, fit_range: tuple | None = None) -> FitResult:
    """Fit tau = a' exp(c' N) by least squares on log tau vs N."""
    n, tau = _select(points, fit_range)
    if np.ptp(n) == 0:
        raise ValueError("degenerate fit range: all N equal")
    rng = fit_range if fit_range is not None else (float(n.min()), float(n.max()))
    return _loglinear_fit(n, np.log(tau), "exponential", rng)


def hopping_estimate(ell: float, d: float = 4.0) -> float:
    """Hopping amplitude k (V0 units) for 1s hydrogen-like electron states
    of decay length ell (nm) separated by d (nm).

    Uses the standard two-center closed forms with rho = d/ell:
        overlap    S = e^-rho (1 + rho + rho^2/3)
        resonance  A = (1nm/ell) e^-rho (1 + rho)
        Coulomb    C = (1nm/d) (1 - e^-2rho (1 + rho))
        k = (A - S C) / (1 - S^2)
    """
    if ell <= 0 or d <= 0:
        raise ValueError("ell and d must be positive")
    s = overlap_integral(ell, d)
    a = resonance_integral(ell, d)
    c = coulomb_integral(ell, d)
    return (a - s * c) / (1.0 - s * s)


def overlap_integral(ell: float, d: float) -> float:
    rho = d / ell
    return math.exp(-rho) * (1.0 + rho + rho * rho / 3.0)


def resonance_integral(ell: float, d: float) -> float:
    rho = d / ell
    return math.exp(-rho) * (1.0 + rho) / ell


def coulomb_integral(ell: float, d: float) -> float:
    rho = d / ell
    return (1.0 - math.exp(-2.0 * rho) * (1.0 + rho)) / d


def hopping_curve(ell_values, d: float = 4.0) -> list[tuple[float, float]]:
    """k(ell) table for a range of decay lengths."""
    return [(float(ell), hopping_estimate(float(ell), d)) for ell in ell_values]


def min_cluster_size(tau_target_s: float, eps: float,
                     a0_s: float = 0.85e-14, cprime: float = 0.027) -> int:
    """Smallest integer N with a0 * eps * exp(c' N) >= tau_target.

    a0_s is the exponential-law amplitude at eps = 1, in seconds.  Returns 0
    when the target is already met at N = 0.
    """
    if tau_target_s <= 0 or eps <= 0 or a0_s <= 0 or cprime <= 0:
        raise ValueError("all inputs must be positive")
    prefactor = a0_s * eps
    if tau_target_s <= prefactor:
        return 0
    return math.ceil(math.log(tau_target_s / prefactor) / cprime)


def detect_knee(series, p0: float, deviation_threshold: float = 0.2) -> float | None:
    """Estimate k_a from a (k, tau_N) series at fixed P0.

    Returns the largest k whose tau_N deviates from tau_sync(k, P0) by more
    than the threshold (censored entries, tau = None or non-finite, count as
    deviating).  None means the series follows the synchronized prediction
    throughout ("single-body throughout").
    """
    knee = None
    for k, tau in series:
        if tau is None or not np.isfinite(tau):
            deviation = math.inf
        else:
            ts = tau_sync(k, p0)
            deviation = abs(tau - ts) / ts
        if deviation > deviation_threshold and (knee is None or k > knee):
            knee = float(k)
    return knee
