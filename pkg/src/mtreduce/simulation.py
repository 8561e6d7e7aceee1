"""Full simulation runs: initialization, the watch loop, event accounting,
and parameter sweeps.

A run integrates the equations of motion step by step; after every step the
reset-zone mask is clustered and every cluster of at least N sites
self-reduces before the next step begins.  The self-reduction time is
tau_N = t_total * dt / M_N with M_N the number of reduction events
(counted per cluster when several qualify in the same step).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .dynamics import StateVector, t0_seconds
from .lattice import CouplingTable, GeometryParams, LatticeSpec, build_adjacency, compute_coupling_table
from .reduction import REDUCTION_RULES, ResetZone, _labeling_from_roots, qualifying_clusters

INITIAL_CONDITIONS = ("US", "SS", "RIS", "RCS")
GENERATOR_NAME = "numpy-pcg64"

# published sweep ranges; SimConfig enforces them unless explicitly overridden
PARAMETER_RANGES = {
    "k": (0.002, 2.0),
    "length": (50, 2000),
    "threshold": (5, 26000),
    "p0": (0.01, 0.49),
    "t_total": (100_000, 2_000_000),
}


@dataclass(frozen=True)
class SimConfig:
    """Complete specification of one run.

    k is in V0 units, dt in t0 units, t_total in steps.  eps (dielectric
    constant) only converts output times to seconds and never affects the
    dynamics.  trajectory_stride > 0 records |C_ia|^2 snapshots every that
    many steps.
    """

    k: float
    length: int
    p0: float
    threshold: int
    init: str = "RIS"
    rule: str = "LR"
    t_total: int = 100_000
    dt: float = 0.01
    seed: int = 0
    eps: float = 10.0
    trajectory_stride: int = 0
    allow_out_of_range: bool = False

    def __post_init__(self):
        if self.init not in INITIAL_CONDITIONS:
            raise ValueError(f"unknown initial condition {self.init!r}")
        if self.rule not in REDUCTION_RULES:
            raise ValueError(f"unknown reduction rule {self.rule!r}")
        if not 0.0 < self.p0 < 0.5:
            raise ValueError(f"P0 must lie in (0, 0.5), got {self.p0}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.threshold < 1 or self.length < 1 or self.t_total < 1:
            raise ValueError("threshold, length, and t_total must be >= 1")
        if not self.allow_out_of_range:
            problems = []
            for name, (lo, hi) in PARAMETER_RANGES.items():
                value = getattr(self, name)
                if not lo <= value <= hi:
                    problems.append(f"{name} = {value} outside [{lo}, {hi}]")
            if problems:
                raise ValueError(
                    "parameters outside the published sweep ranges "
                    "(set allow_out_of_range to force): " + "; ".join(problems)
                )

    @property
    def n_sites(self) -> int:
        return LatticeSpec(length=self.length).n_sites


@dataclass(frozen=True)
class EventRecord:
    """Lightweight per-event summary kept in the run log."""

    step: int
    time: float  # t0 units
    rule: str
    size: int
    alpha_fraction: float


@dataclass(frozen=True)
class RunResult:
    """Outcome of one run.  tau_t0 is None when the run is censored
    (M_N = 0, no reductions observed)."""

    config: SimConfig
    m_n: int
    tau_t0: float | None
    events: tuple
    final_energy: float
    max_norm_drift: float
    energy_drift: float | None  # relative E_v drift; only defined when M_N = 0
    trajectory: tuple = ()

    @property
    def censored(self) -> bool:
        return self.m_n == 0

    @property
    def tau_seconds(self) -> float | None:
        if self.tau_t0 is None:
            return None
        return self.tau_t0 * t0_seconds(self.config.eps)


@dataclass(frozen=True)
class TauEstimate:
    """Mean tau_N over independent seeds with its standard error."""

    mean_t0: float | None
    stderr_t0: float | None
    n_runs: int
    n_censored: int

    @property
    def all_censored(self) -> bool:
        return self.n_runs == self.n_censored


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def stripe_pattern(seam: int, flip: bool = False) -> np.ndarray:
    """Per-column state (0 = alpha, 1 = beta) of a stripe configuration.

    Columns alternate except for one adjacent equal-sign pair; `seam`
    rotates the defect around the cylinder (13 positions x 2 flips = 26
    configurations in total).
    """
    cols = np.arange(13)
    pattern = ((cols - seam) % 13) % 2
    if flip:
        pattern = 1 - pattern
    return pattern.astype(np.int8)


def ising_state(per_site: np.ndarray) -> StateVector:
    """Pure product state from per-site choices (0 = alpha, 1 = beta)."""
    per_site = np.asarray(per_site)
    c = np.zeros((len(per_site), 2), dtype=np.complex128)
    c[np.arange(len(per_site)), per_site] = 1.0
    return StateVector(c=c)


def init_state(cond: str, spec: LatticeSpec, rng: np.random.Generator) -> StateVector:
    """Initial amplitudes for the four starting conditions.

    US: all sites alpha.  SS: stripe with odd (1-based) columns alpha, so
    columns 1 and 13 agree.  RIS: independent fair coin per site.  RCS:
    |C_ia|^2 uniform on [0, 1] with independent uniform phases.
    """
    nsite = spec.n_sites
    if cond == "US":
        return ising_state(np.zeros(nsite, dtype=np.int8))
    if cond == "SS":
        per_col = stripe_pattern(seam=0)
        return ising_state(np.tile(per_col, spec.length))
    if cond == "RIS":
        return ising_state(rng.integers(0, 2, size=nsite).astype(np.int8))
    if cond == "RCS":
        u = rng.random(nsite)
        phases = rng.random((nsite, 2)) * 2.0 * np.pi
        c = np.empty((nsite, 2), dtype=np.complex128)
        c[:, 0] = np.sqrt(u) * np.exp(1j * phases[:, 0])
        c[:, 1] = np.sqrt(1.0 - u) * np.exp(1j * phases[:, 1])
        return StateVector(c=c)
    raise ValueError(f"unknown initial condition {cond!r}")


def default_coupling_table() -> CouplingTable:
    return compute_coupling_table(GeometryParams())


def run(config: SimConfig, table: CouplingTable | None = None,
        adjacency: np.ndarray | None = None) -> RunResult:
    """Execute one full run: init, step loop, reductions, tau accounting.

    Deterministic for fixed (config, table): the single PCG64 stream seeded
    by config.seed drives initialization and all reduction draws, and
    clusters reduce in smallest-member order.
    """
    spec = LatticeSpec(length=config.length)
    if adjacency is None:
        adjacency = build_adjacency(spec)
    if table is None:
        table = default_coupling_table()

    rng = make_rng(config.seed)
    state = init_state(config.init, spec, rng)
    zone = ResetZone(config.p0)
    reduce_fn = REDUCTION_RULES[config.rule]

    nsite = spec.n_sites
    roots = np.empty(nsite, dtype=np.int64)
    parent = np.empty(nsite, dtype=np.int64)
    n_buf = np.empty((nsite, 2))
    bufs = tuple(np.empty((nsite, 2), dtype=np.complex128) for _ in range(5))

    e_start = _kernels.variational_energy(state.c, config.k, table.v, adjacency, n_buf)

    events: list[EventRecord] = []
    trajectory: list[tuple[int, np.ndarray]] = []
    stride = config.trajectory_stride
    if stride > 0:
        trajectory.append((0, state.occupations()))

    steps_done = 0
    max_drift = 0.0
    while steps_done < config.t_total:
        chunk = config.t_total - steps_done
        if stride > 0:
            next_sample = stride - steps_done % stride
            chunk = min(chunk, next_sample)
        steps, found, drift = _kernels.advance(
            state.c, config.k, table.v, adjacency, config.dt, zone.p0,
            config.threshold, chunk, roots, parent, n_buf, *bufs,
        )
        steps_done += steps
        state.t = steps_done * config.dt
        max_drift = max(max_drift, drift)
        if found:
            labeling = _labeling_from_roots(roots)
            for cluster in qualifying_clusters(labeling, config.threshold):
                event = reduce_fn(state, cluster, rng)
                events.append(EventRecord(
                    step=steps_done, time=state.t, rule=event.rule,
                    size=event.size, alpha_fraction=event.alpha_fraction,
                ))
        if stride > 0 and steps_done % stride == 0:
            trajectory.append((steps_done, state.occupations()))

    e_end = _kernels.variational_energy(state.c, config.k, table.v, adjacency, n_buf)
    m_n = len(events)
    if m_n > 0:
        tau = config.t_total * config.dt / m_n
        energy_drift = None  # E_v jumps at reductions; drift only meaningful without them
    else:
        tau = None
        scale = max(abs(e_start), 1e-300)
        energy_drift = abs(e_end - e_start) / scale

    return RunResult(
        config=config, m_n=m_n, tau_t0=tau, events=tuple(events),
        final_energy=float(e_end), max_norm_drift=float(max_drift),
        energy_drift=energy_drift, trajectory=tuple(trajectory),
    )


def tau_estimate(results: list[RunResult]) -> TauEstimate:
    """Mean and standard error of tau_N over independent runs.

    Censored runs (M_N = 0) are excluded from the mean and reported via
    n_censored; an all-censored input yields mean None.
    """
    if not results:
        raise ValueError("tau_estimate needs at least one run")
    taus = np.array([r.tau_t0 for r in results if not r.censored])
    n_censored = sum(r.censored for r in results)
    if len(taus) == 0:
        return TauEstimate(mean_t0=None, stderr_t0=None,
                           n_runs=len(results), n_censored=n_censored)
    mean = float(np.mean(taus))
    stderr = float(np.std(taus, ddof=1) / math.sqrt(len(taus))) if len(taus) > 1 else float("nan")
    return TauEstimate(mean_t0=mean, stderr_t0=stderr,
                       n_runs=len(results), n_censored=n_censored)


def point_seed(master_seed: int, index: int) -> int:
    """Per-grid-point seed: first word of SeedSequence(master, spawn_key=(index,))."""
    return int(np.random.SeedSequence(master_seed, spawn_key=(index,)).generate_state(1)[0])


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a sweep: the config plus its result or error."""

    index: int
    config: SimConfig
    result: RunResult | None
    error: str | None = None


def sweep(base: SimConfig, grid: dict[str, list], table: CouplingTable | None = None,
          derive_seeds: bool = True) -> list[SweepPoint]:
    """Run the cartesian product of `grid` overrides on top of `base`.

    Points are emitted in deterministic grid order (last key varies
    fastest).  Unless the grid pins seeds explicitly, each point's seed is
    derived from base.seed by the documented splitting rule (point_seed).
    Per-point failures are recorded and the sweep continues.
    """
    keys = list(grid.keys())
    points: list[SweepPoint] = []
    for index, values in enumerate(itertools.product(*(grid[k] for k in keys))):
        overrides = dict(zip(keys, values))
        if derive_seeds and "seed" not in overrides:
            overrides["seed"] = point_seed(base.seed, index)
        try:
            config = replace(base, **overrides)
            result = run(config, table=table)
            points.append(SweepPoint(index=index, config=config, result=result))
        except Exception as exc:  # noqa: BLE001 - per-point isolation
            config = replace(base, **overrides, allow_out_of_range=True)
            points.append(SweepPoint(index=index, config=config, result=None, error=str(exc)))
    return points
