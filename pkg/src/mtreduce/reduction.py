"""Reset-zone detection, cluster labeling, and the LR/GR self-reduction rules.

A tubulin is "in the reset zone" when P0 <= |C_ia|^2 <= 1 - P0 (both bounds
inclusive).  Connected in-zone sites form clusters under the six-neighbor
adjacency; clusters of at least N members self-reduce.  LR reduces each
member independently with probability |C_ia|^2; GR draws one outcome for the
whole cluster from the cluster-averaged occupation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dynamics import StateVector


@dataclass(frozen=True)
class ResetZone:
    """Occupation band [P0, 1 - P0] marking sufficiently coherent tubulins."""

    p0: float

    def __post_init__(self):
        if not 0.0 < self.p0 < 0.5:
            raise ValueError(f"P0 must lie in (0, 0.5), got {self.p0}")

    @property
    def p1(self) -> float:
        return 1.0 - self.p0


@dataclass(frozen=True)
class ClusterLabeling:
    """Partition of the in-zone sites into connected clusters.

    roots[i] is the root site index of i's cluster, or -1 for out-of-zone
    sites.  clusters lists the member-site arrays, ordered by smallest
    member index; sizes matches clusters.
    """

    roots: np.ndarray
    clusters: tuple
    sizes: np.ndarray

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


@dataclass(frozen=True)
class ReductionEvent:
    """One self-reduction: time, rule, members, and per-site outcomes."""

    time: float
    rule: str  # "LR" or "GR"
    sites: np.ndarray
    outcomes: np.ndarray  # 0 = alpha, 1 = beta, per member

    @property
    def size(self) -> int:
        return len(self.sites)

    @property
    def alpha_fraction(self) -> float:
        return float(np.mean(self.outcomes == 0))


def in_reset_zone(state: StateVector, zone: ResetZone) -> np.ndarray:
    """Boolean mask: P0 <= |C_ia|^2 <= 1 - P0, inclusive at both bounds."""
    occ = state.occupations()
    return (occ >= zone.p0) & (occ <= zone.p1)


def label_clusters(mask: np.ndarray, adjacency: np.ndarray) -> ClusterLabeling:
    """Connected components of the in-zone subgraph (Hoshen-Kopelman).

    Single scan with union-find and path compression; cluster order follows
    the smallest member site index.
    """
    mask = np.ascontiguousarray(mask, dtype=bool)
    if mask.shape[0] != adjacency.shape[0]:
        raise ValueError("mask length does not match the lattice")
    nsite = mask.shape[0]
    roots = np.empty(nsite, dtype=np.int64)
    parent = np.empty(nsite, dtype=np.int64)
    _kernels.label_clusters(mask, adjacency, roots, parent)
    return _labeling_from_roots(roots)


def _labeling_from_roots(roots: np.ndarray) -> ClusterLabeling:
    members = np.flatnonzero(roots >= 0)
    if len(members) == 0:
        return ClusterLabeling(roots=roots, clusters=(), sizes=np.empty(0, dtype=np.int64))
    # members is sorted, so unique roots come out keyed by first appearance
    order = np.argsort(roots[members], kind="stable")
    sorted_roots = roots[members][order]
    boundaries = np.flatnonzero(np.diff(sorted_roots)) + 1
    groups = np.split(members[order], boundaries)
    # the root of a cluster is its smallest member, so sorting clusters by
    # root equals sorting by smallest member index
    clusters = tuple(np.sort(g) for g in groups)
    sizes = np.array([len(g) for g in clusters], dtype=np.int64)
    return ClusterLabeling(roots=roots, clusters=clusters, sizes=sizes)


def qualifying_clusters(labeling: ClusterLabeling, threshold: int) -> list[np.ndarray]:
    """Clusters of size >= threshold, ordered by smallest member site index."""
    if threshold < 1:
        raise ValueError(f"cluster threshold must be >= 1, got {threshold}")
    return [grp for grp, s in zip(labeling.clusters, labeling.sizes) if s >= threshold]


def apply_local_reduction(state: StateVector, cluster: np.ndarray,
                          rng: np.random.Generator) -> ReductionEvent:
    """LR: each member independently collapses to alpha with probability
    |C_ia|^2, else to beta.  Mutates the state; phases reset to zero."""
    if len(cluster) == 0:
        raise ValueError("cannot reduce an empty cluster")
    p_alpha = np.abs(state.c[cluster, 0]) ** 2
    outcomes = (rng.random(len(cluster)) >= p_alpha).astype(np.int8)
    _collapse(state, cluster, outcomes)
    return ReductionEvent(time=state.t, rule="LR", sites=np.asarray(cluster), outcomes=outcomes)


def apply_global_reduction(state: StateVector, cluster: np.ndarray,
                           rng: np.random.Generator) -> ReductionEvent:
    """GR: one Bernoulli draw from the cluster-averaged |C_ia|^2; every
    member collapses to the same pure state."""
    if len(cluster) == 0:
        raise ValueError("cannot reduce an empty cluster")
    p_alpha = float(np.mean(np.abs(state.c[cluster, 0]) ** 2))
    common = np.int8(0) if rng.random() < p_alpha else np.int8(1)
    outcomes = np.full(len(cluster), common, dtype=np.int8)
    _collapse(state, cluster, outcomes)
    return ReductionEvent(time=state.t, rule="GR", sites=np.asarray(cluster), outcomes=outcomes)


REDUCTION_RULES = {"LR": apply_local_reduction, "GR": apply_global_reduction}


def _collapse(state: StateVector, cluster: np.ndarray, outcomes: np.ndarray) -> None:
    state.c[cluster, 0] = np.where(outcomes == 0, 1.0 + 0.0j, 0.0 + 0.0j)
    state.c[cluster, 1] = np.where(outcomes == 0, 0.0 + 0.0j, 1.0 + 0.0j)
