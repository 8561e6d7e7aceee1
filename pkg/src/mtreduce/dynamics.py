"""Variational time evolution of the tubulin amplitudes.

Units: hbar = 1 and V0 = 1 internally; time is measured in t0 = hbar/V0.
Seconds appear only through t0_seconds() at output time.  The equations of
motion for the per-site complex pairs (C_ia, C_ib) are

    i dC_ig/dt = -k C_ig~ + J_ig C_ig,
    J_ig = sum over neighbors j of (V^{g,a} |C_ja|^2 + V^{g,b} |C_jb|^2),

integrated by fixed-step RK4 with no renormalization (norm drift is
monitored, never corrected).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lattice import CouplingTable

T0_SECONDS_PER_EPS = 4.571e-16

#: per-site norm drift above which a single RK4 step is considered suspect
NORM_DRIFT_LIMIT = 1e-6


def t0_seconds(eps: float) -> float:
    """The time unit t0 = hbar/V0 in seconds for dielectric constant eps."""
    return T0_SECONDS_PER_EPS * eps


class IntegrationDriftWarning(UserWarning):
    """Per-site norm drift exceeded NORM_DRIFT_LIMIT during a step."""


@dataclass(frozen=True)
class EomParams:
    """Hopping amplitude k (V0 units) and time step dt (t0 units)."""

    k: float
    dt: float = 0.01

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"hopping amplitude must be >= 0, got {self.k}")
        if self.dt <= 0:
            raise ValueError(f"time step must be positive, got {self.dt}")


@dataclass
class StateVector:
    """Per-site amplitudes c of shape (V, 2) plus the clock t in t0 units."""

    c: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=np.complex128)
        if c.ndim != 2 or c.shape[1] != 2:
            raise ValueError(f"amplitudes must have shape (V, 2), got {c.shape}")
        self.c = c

    @property
    def n_sites(self) -> int:
        return self.c.shape[0]

    def occupations(self) -> np.ndarray:
        """|C_ia|^2 per site."""
        return np.abs(self.c[:, 0]) ** 2

    def norms(self) -> np.ndarray:
        return np.abs(self.c[:, 0]) ** 2 + np.abs(self.c[:, 1]) ** 2

    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms() - 1.0)))

    def copy(self) -> "StateVector":
        return StateVector(c=self.c.copy(), t=self.t)


class _Workspace:
    """Scratch buffers for the numba kernels, reused across steps."""

    def __init__(self, n_sites: int):
        self.n = np.empty((n_sites, 2))
        self.bufs = tuple(np.empty((n_sites, 2), dtype=np.complex128) for _ in range(5))


def derivative(state: StateVector, params: EomParams, table: CouplingTable,
               adjacency: np.ndarray) -> np.ndarray:
    """dC_ig/dt for the current state; boundary sites sum only over
    existing neighbors."""
    out = np.empty_like(state.c)
    n = np.empty((state.n_sites, 2))
    _kernels.rhs(state.c, params.k, table.v, adjacency, n, out)
    return out


def rk4_step(state: StateVector, params: EomParams, table: CouplingTable,
             adjacency: np.ndarray, workspace: _Workspace | None = None) -> StateVector:
    """Advance the state by one RK4 step of dt; returns a new StateVector.

    Warns with IntegrationDriftWarning if any site's norm departs from 1 by
    more than NORM_DRIFT_LIMIT after the step.
    """
    ws = workspace or _Workspace(state.n_sites)
    new = state.copy()
    _kernels.rk4_step(new.c, params.k, table.v, adjacency, params.dt, ws.n, *ws.bufs)
    new.t = state.t + params.dt
    drift = new.max_norm_drift()
    if drift > NORM_DRIFT_LIMIT:
        warnings.warn(
            f"per-site norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT:.0e}",
            IntegrationDriftWarning,
        )
    return new


def variational_energy(state: StateVector, params: EomParams, table: CouplingTable,
                       adjacency: np.ndarray) -> float:
    """Conserved variational energy E_v in V0 units.

    E_v = -k sum_i 2 Re(Ca* Cb) + sum over neighbor pairs of
    V^{gg'} |C_ig|^2 |C_jg'|^2.
    """
    n = np.empty((state.n_sites, 2))
    return float(_kernels.variational_energy(state.c, params.k, table.v, adjacency, n))


def mean_field_solution(c0: np.ndarray, j_tilde, k: float, t: float) -> np.ndarray:
    """Closed-form decoupled (mean-field) trajectory at time t.

    With a g-independent field J-tilde each site evolves as

        C_ia(t) = C_i+ e^{-i Om+ t} + C_i- e^{-i Om- t},
        C_ib(t) = C_i+ e^{-i Om+ t} - C_i- e^{-i Om- t},
        C_i+/- = (C_ia(0) +- C_ib(0)) / 2,   Om+- = J-tilde -+ k.

    `j_tilde` may be a scalar, a per-site array (V,), or a per-site,
    per-state array (V, 2).  The general form used here is the exact
    propagator of the constant two-level Hamiltonian [[Ja, -k], [-k, Jb]];
    when Ja == Jb it reduces exactly to the two-frequency expression above.
    (Open-boundary rows of a symmetrized table keep Ja != Jb, which is why
    the per-state form is supported.)
    """
    c0 = np.asarray(c0, dtype=np.complex128)
    jt = np.asarray(j_tilde, dtype=np.float64)
    if jt.ndim < 2:
        jt = jt.reshape(-1, 1)  # scalar or per-site -> broadcast over g
    jt = np.broadcast_to(jt, c0.shape)
    jbar = jt.mean(axis=1)
    delta = 0.5 * (jt[:, 0] - jt[:, 1])
    omega = np.hypot(delta, k)
    cos = np.cos(omega * t)
    # sin(wt)/w, continuous at w = 0
    sinc = np.where(omega > 0, np.sin(omega * t) / np.where(omega > 0, omega, 1.0), t)
    phase = np.exp(-1j * jbar * t)
    out = np.empty_like(c0)
    out[:, 0] = phase * ((cos - 1j * delta * sinc) * c0[:, 0] + 1j * k * sinc * c0[:, 1])
    out[:, 1] = phase * (1j * k * sinc * c0[:, 0] + (cos + 1j * delta * sinc) * c0[:, 1])
    return out
