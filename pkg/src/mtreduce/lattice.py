"""Microtubule lattice geometry, adjacency, and electron-electron couplings.

The lattice is a cylinder of 13 columns (circumferentially periodic) and L
rows (longitudinally open).  Each site is a two-state tubulin with an "alpha"
electron position at +d/2 and a "beta" position at -d/2 along the column
axis.  Every interior site has six neighbors; the per-direction 2x2 Coulomb
matrices between electron positions drive the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

N_COLUMNS = 13

# Direction order used everywhere: index into adjacency columns and into
# CouplingTable.v.  (dr, dc) are row/column index offsets; dc wraps mod 13.
DIRECTIONS = ("N", "S", "NE", "SW", "SE", "NW")
DIRECTION_OFFSETS = ((1, 0), (-1, 0), (1, 1), (-1, -1), (0, 1), (0, -1))
OPPOSITE = (1, 0, 3, 2, 5, 4)

ALPHA, BETA = 0, 1


@dataclass(frozen=True)
class LatticeSpec:
    """13 x L cylinder: `length` rows, open ends, periodic columns."""

    length: int
    columns: int = N_COLUMNS

    def __post_init__(self):
        if self.columns != N_COLUMNS:
            raise ValueError(f"lattice must have {N_COLUMNS} columns, got {self.columns}")
        if self.length < 1:
            raise ValueError(f"lattice length must be >= 1, got {self.length}")

    @property
    def n_sites(self) -> int:
        return self.columns * self.length

    def site_index(self, row: int, col: int) -> int:
        return row * self.columns + col


def build_adjacency(spec: LatticeSpec) -> np.ndarray:
    """Neighbor table of shape (V, 6): site index per direction, -1 if absent.

    Circumferentially periodic (column 13 wraps to column 1), longitudinally
    open (rows 0 and L-1 lack their southern/northern diagonals and N/S).
    """
    L, ncol = spec.length, spec.columns
    nbr = np.full((spec.n_sites, 6), -1, dtype=np.int64)
    for r in range(L):
        for c in range(ncol):
            i = r * ncol + c
            for d, (dr, dc) in enumerate(DIRECTION_OFFSETS):
                r2 = r + dr
                if r2 < 0 or r2 >= L:
                    continue
                nbr[i, d] = r2 * ncol + (c + dc) % ncol
    return nbr


@dataclass(frozen=True)
class GeometryParams:
    """Planar (unrolled) lattice geometry in nm.

    `pitch_up` / `pitch_down` are the longitudinal offsets of the two
    east-column neighbors; their difference must equal `a_long` so that the
    east neighbors are consecutive rows.  Defaults are calibrated to
    reproduce the published spin-coupling table (see spin_couplings).
    """

    a_long: float = 8.0
    a_trans: float = 5.0
    pitch_up: float = 4.9
    pitch_down: float = -3.1
    d: float = 4.0

    def __post_init__(self):
        if self.d <= 0 or self.a_long <= 0 or self.a_trans <= 0:
            raise ValueError("geometry lengths must be positive")
        if self.a_long <= self.d:
            raise ValueError("a_long must exceed the intra-tubulin separation d")
        if abs((self.pitch_up - self.pitch_down) - self.a_long) > 1e-12:
            raise ValueError("pitch_up - pitch_down must equal a_long")

    def direction_offsets_nm(self) -> np.ndarray:
        """(6, 2) array of (dx, dy) tubulin-center offsets per direction."""
        up, dn, ax, ay = self.pitch_up, self.pitch_down, self.a_trans, self.a_long
        return np.array(
            [
                [0.0, ay],     # N
                [0.0, -ay],    # S
                [ax, up],      # NE
                [-ax, -up],    # SW
                [ax, dn],      # SE
                [-ax, -dn],    # NW
            ]
        )


@dataclass(frozen=True)
class CouplingTable:
    """Per-direction 2x2 potentials V^{gg'} in units of V0 (= e^2/eps/1nm).

    v[d, g, g'] couples the g site of the home tubulin to the g' site of the
    neighbor in direction d (g: 0=alpha, 1=beta).  r_nm carries the distances
    when the table was built from a geometry (None for hand-made tables).
    """

    v: np.ndarray
    r_nm: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.float64)
        if v.shape != (6, 2, 2):
            raise ValueError(f"coupling table must have shape (6, 2, 2), got {v.shape}")
        if not np.all(v > 0):
            raise ValueError("all couplings must be positive (repulsive Coulomb)")
        object.__setattr__(self, "v", v)

    def delta_v(self) -> np.ndarray:
        """DeltaV^g per direction: v[d, g, alpha] - v[d, g, beta], shape (6, 2)."""
        return self.v[:, :, ALPHA] - self.v[:, :, BETA]

    def is_opposite_symmetric(self, tol: float = 1e-12) -> bool:
        """Check V^{gg'}_dir == V^{g'g}_opposite for all directions."""
        swapped = self.v[list(OPPOSITE)].transpose(0, 2, 1)
        return bool(np.allclose(self.v, swapped, rtol=0, atol=tol))

    def mean_delta_v_ratio(self) -> float:
        """Mean over directions and g of |DeltaV^g| / (V^{g,alpha} + V^{g,beta})."""
        return float(np.mean(np.abs(self.delta_v()) / self.v.sum(axis=2)))


def compute_coupling_table(geom: GeometryParams) -> CouplingTable:
    """Coulomb table V^{gg'} = (1 nm) / R^{gg'} from the planar geometry.

    R^{gg'} is the distance from the g electron site of the home tubulin
    (at +-d/2 along the column) to the g' site of the neighbor tubulin.
    Opposite-direction symmetry holds by construction.
    """
    offsets = geom.direction_offsets_nm()
    s = np.array([geom.d / 2.0, -geom.d / 2.0])  # alpha, beta positions
    r = np.empty((6, 2, 2))
    for d in range(6):
        dx, dy = offsets[d]
        for g in range(2):
            for gp in range(2):
                r[d, g, gp] = np.hypot(dx, dy + s[gp] - s[g])
    if np.any(r <= 0):
        raise ValueError("geometry produces coincident electron sites (R = 0)")
    return CouplingTable(v=1.0 / r, r_nm=r)


@dataclass(frozen=True)
class SpinCouplings:
    """Frustrated-spin-model parameters derived from the coupling table.

    j is per direction in hbar^-2 V0; the transverse field b_x = 2k/hbar and
    b_z vanishes identically for any opposite-symmetric table (b_y = 0).
    """

    j: np.ndarray
    b_x: float
    b_z: float


def spin_couplings(table: CouplingTable, k: float) -> SpinCouplings:
    """Map the coupling table to Ising couplings J per direction (hbar = 1).

    J_d = -(V^aa - V^ab - V^ba + V^bb); b_z sums the six-neighbor field and
    is zero whenever the table satisfies the opposite-direction symmetry.
    """
    v = table.v
    j = -(v[:, 0, 0] - v[:, 0, 1] - v[:, 1, 0] + v[:, 1, 1])
    b_z = -0.5 * float(np.sum(v[:, 0, 0] + v[:, 0, 1] - v[:, 1, 0] - v[:, 1, 1]))
    return SpinCouplings(j=j, b_x=2.0 * k, b_z=b_z)


def symmetrize(table: CouplingTable) -> CouplingTable:
    """Replace V^{g,alpha} and V^{g,beta} by their mean, per direction and g.

    The result has DeltaV^g = 0 everywhere, which decouples the equations of
    motion (the mean-field limit).  Idempotent.
    """
    mean = table.v.mean(axis=2, keepdims=True)
    return replace(table, v=np.broadcast_to(mean, (6, 2, 2)).copy(), r_nm=None)


def site_jtilde(table: CouplingTable, adjacency: np.ndarray) -> np.ndarray:
    """Per-site decoupled field (V, 2): sum over present neighbors of
    (V^{g,alpha} + V^{g,beta}) / 2.

    For interior sites of an opposite-symmetric table this is independent of
    g (the scalar J-tilde of the mean-field solution); open-boundary rows
    retain a g dependence.
    """
    half_sum = 0.5 * table.v.sum(axis=2)  # (6, 2)
    present = adjacency >= 0  # (V, 6)
    return present.astype(np.float64) @ half_sum


def coupling_rows(table: CouplingTable) -> list[tuple[str, str, str, float, float]]:
    """Flatten the table to (direction, g, g', R_nm, V_over_V0) rows for export."""
    names = ("alpha", "beta")
    rows = []
    for d, dname in enumerate(DIRECTIONS):
        for g in range(2):
            for gp in range(2):
                r = float(table.r_nm[d, g, gp]) if table.r_nm is not None else float("nan")
                rows.append((dname, names[g], names[gp], r, float(table.v[d, g, gp])))
    return rows
