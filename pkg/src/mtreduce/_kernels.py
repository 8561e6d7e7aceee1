"""Numba-compiled hot loops: equation-of-motion RHS, RK4 stepping,
Hoshen-Kopelman cluster labeling, and the watch-and-advance run loop.

Everything here operates on flat arrays: complex amplitudes c of shape
(V, 2), the (6, 2, 2) coupling matrix v, and the (V, 6) neighbor table nbr
(-1 marks a missing neighbor).  Neighbor sums use the fixed direction order
of lattice.DIRECTIONS, so results are deterministic.
"""

import numpy as np
from numba import njit

NO_CLUSTER = -1  # root value for sites outside the reset zone


@njit(cache=True, fastmath=True)
def occupations(c, n):
    for i in range(c.shape[0]):
        n[i, 0] = c[i, 0].real * c[i, 0].real + c[i, 0].imag * c[i, 0].imag
        n[i, 1] = c[i, 1].real * c[i, 1].real + c[i, 1].imag * c[i, 1].imag


@njit(cache=True, fastmath=True)
def rhs(c, k, v, nbr, n, out):
    """dC/dt = i*(k*C_swap - J*C), J_ig = sum_j V^{g,a} n_ja + V^{g,b} n_jb."""
    occupations(c, n)
    for i in range(c.shape[0]):
        ja = 0.0
        jb = 0.0
        for d in range(6):
            j = nbr[i, d]
            if j >= 0:
                ja += v[d, 0, 0] * n[j, 0] + v[d, 0, 1] * n[j, 1]
                jb += v[d, 1, 0] * n[j, 0] + v[d, 1, 1] * n[j, 1]
        out[i, 0] = 1j * (k * c[i, 1] - ja * c[i, 0])
        out[i, 1] = 1j * (k * c[i, 0] - jb * c[i, 1])


@njit(cache=True, fastmath=True)
def rk4_step(c, k, v, nbr, dt, n, k1, k2, k3, k4, ct):
    """One classical RK4 step, in place.  No renormalization is applied."""
    nsite = c.shape[0]
    rhs(c, k, v, nbr, n, k1)
    for i in range(nsite):
        ct[i, 0] = c[i, 0] + 0.5 * dt * k1[i, 0]
        ct[i, 1] = c[i, 1] + 0.5 * dt * k1[i, 1]
    rhs(ct, k, v, nbr, n, k2)
    for i in range(nsite):
        ct[i, 0] = c[i, 0] + 0.5 * dt * k2[i, 0]
        ct[i, 1] = c[i, 1] + 0.5 * dt * k2[i, 1]
    rhs(ct, k, v, nbr, n, k3)
    for i in range(nsite):
        ct[i, 0] = c[i, 0] + dt * k3[i, 0]
        ct[i, 1] = c[i, 1] + dt * k3[i, 1]
    rhs(ct, k, v, nbr, n, k4)
    h = dt / 6.0
    for i in range(nsite):
        c[i, 0] += h * (k1[i, 0] + 2.0 * (k2[i, 0] + k3[i, 0]) + k4[i, 0])
        c[i, 1] += h * (k1[i, 1] + 2.0 * (k2[i, 1] + k3[i, 1]) + k4[i, 1])


@njit(cache=True)
def variational_energy(c, k, v, nbr, n):
    """E_v = -2k sum_i Re(Ca* Cb) + pair sum of V^{gg'} n_ig n_jg'."""
    occupations(c, n)
    e_kin = 0.0
    e_pot = 0.0
    for i in range(c.shape[0]):
        z = np.conj(c[i, 0]) * c[i, 1]
        e_kin += z.real
        for d in range(6):
            j = nbr[i, d]
            if j >= 0:
                for g in range(2):
                    for gp in range(2):
                        e_pot += v[d, g, gp] * n[i, g] * n[j, gp]
    # each neighbor pair is visited from both ends
    return -2.0 * k * e_kin + 0.5 * e_pot


@njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:  # path compression
        parent[i], i = root, parent[i]
    return root


@njit(cache=True)
def label_clusters(mask, nbr, roots, parent):
    """Hoshen-Kopelman labeling of the in-zone subgraph.

    Single scan in site order with union-find and path compression.  Fills
    roots[i] with the root site index of i's cluster (NO_CLUSTER when i is
    out of zone) and returns the size of the largest cluster.
    """
    nsite = mask.shape[0]
    for i in range(nsite):
        parent[i] = i
    for i in range(nsite):
        if not mask[i]:
            continue
        for d in range(6):
            j = nbr[i, d]
            if j >= 0 and j < i and mask[j]:
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri != rj:
                    if ri < rj:
                        parent[rj] = ri
                    else:
                        parent[ri] = rj
    size = np.zeros(nsite, dtype=np.int64)
    largest = 0
    for i in range(nsite):
        if mask[i]:
            r = _find(parent, i)
            roots[i] = r
            size[r] += 1
            if size[r] > largest:
                largest = size[r]
        else:
            roots[i] = NO_CLUSTER
    return largest


@njit(cache=True, fastmath=True)
def advance(c, k, v, nbr, dt, p0, threshold, max_steps, roots, parent,
            n, k1, k2, k3, k4, ct):
    """Step the state until a qualifying cluster appears or max_steps elapse.

    After each RK4 step the reset-zone mask (p0 <= |Ca|^2 <= 1-p0, bounds
    inclusive) is clustered; if the largest cluster reaches `threshold`,
    iteration stops with `roots` describing the labeling at that step.

    Returns (steps_taken, event_found, max_norm_drift).
    """
    nsite = c.shape[0]
    mask = np.empty(nsite, dtype=np.bool_)
    p1 = 1.0 - p0
    max_drift = 0.0
    for step in range(max_steps):
        rk4_step(c, k, v, nbr, dt, n, k1, k2, k3, k4, ct)
        occupations(c, n)
        count = 0
        for i in range(nsite):
            drift = abs(n[i, 0] + n[i, 1] - 1.0)
            if drift > max_drift:
                max_drift = drift
            na = n[i, 0]
            inzone = p0 <= na <= p1
            mask[i] = inzone
            if inzone:
                count += 1
        if count >= threshold:
            largest = label_clusters(mask, nbr, roots, parent)
            if largest >= threshold:
                return step + 1, True, max_drift
    return max_steps, False, max_drift
