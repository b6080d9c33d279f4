"""Hot numeric kernels, each with a numba @njit implementation and a pure
numpy twin.

Every public function here dispatches on the active backend (see _accel).
The numba kernels parallelize over independent output entries only, and the
numpy twins accumulate over offsets in a fixed order, so both paths are
bit-reproducible for any thread count.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit, prange, backend

# ----------------------------------------------------------------------
# Symmetrized-difference operator apply:
#   out[i] = sum_j a[j-1] * (2 u[i] - u_ext[i-j] - u_ext[i+j]),  j = 1..J
# with u_ext the tail-padded sample array of length n + 2J.
# ----------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _apply_offsets_nb(u_ext, n, a):
    J = a.shape[0]
    out = np.empty(n)
    for i in prange(n):
        ui2 = 2.0 * u_ext[J + i]
        acc = 0.0
        for j in range(1, J + 1):
            acc += a[j - 1] * (ui2 - u_ext[J + i - j] - u_ext[J + i + j])
        out[i] = acc
    return out


def _apply_offsets_np(u_ext, n, a):
    J = a.shape[0]
    asum = a.sum()
    # correlation kernel [a_J .. a_1, 0, a_1 .. a_J]
    w = np.concatenate((a[::-1], [0.0], a))
    corr = np.convolve(u_ext, w[::-1], mode="valid")
    return 2.0 * asum * u_ext[J : J + n] - corr


def apply_offsets(u_ext: np.ndarray, n: int, a: np.ndarray) -> np.ndarray:
    if backend() == "numba":
        return _apply_offsets_nb(u_ext, n, a)
    return _apply_offsets_np(u_ext, n, a)


# ----------------------------------------------------------------------
# Weighted pair sums over a shared 1-D grid.
#   product form:  sum_{i,j} wa[i] wb[j] ker[|i-j|] (fu[i]-fu[j]) (fv[i]-fv[j])
#   flux form:     sum_{i,j} wa[i] wb[j] ker[|i-j|] (u[i]-u[j]) v[i]
# ker[0] must be 0 (the diagonal is handled analytically by callers).
# ----------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _pair_sum_product_nb(fu, fv, wa, wb, ker):
    n = fu.shape[0]
    partial = np.zeros(n)
    for i in prange(n):
        if wa[i] == 0.0:
            continue
        acc = 0.0
        for j in range(n):
            if wb[j] == 0.0 or j == i:
                continue
            acc += wb[j] * ker[abs(i - j)] * (fu[i] - fu[j]) * (fv[i] - fv[j])
        partial[i] = wa[i] * acc
    return np.sum(partial)


def _pair_sum_product_np(fu, fv, wa, wb, ker):
    n = fu.shape[0]
    total = 0.0
    for d in range(1, n):
        k = ker[d]
        if k == 0.0:
            continue
        du = fu[d:] - fu[:-d]
        dv = fv[d:] - fv[:-d]
        cross = du * dv
        # ordered pairs (i, i+d) and (i+d, i) both appear in the double sum
        total += k * np.sum((wa[:-d] * wb[d:] + wa[d:] * wb[:-d]) * cross)
    return total


def pair_sum_product(fu, fv, wa, wb, ker) -> float:
    if backend() == "numba":
        return float(_pair_sum_product_nb(fu, fv, wa, wb, ker))
    return float(_pair_sum_product_np(fu, fv, wa, wb, ker))


@njit(cache=True, parallel=True)
def _pair_sum_flux_nb(u, v, wa, wb, ker):
    n = u.shape[0]
    partial = np.zeros(n)
    for i in prange(n):
        if wa[i] == 0.0:
            continue
        acc = 0.0
        for j in range(n):
            if wb[j] == 0.0 or j == i:
                continue
            acc += wb[j] * ker[abs(i - j)] * (u[i] - u[j])
        partial[i] = wa[i] * v[i] * acc
    return np.sum(partial)


def _pair_sum_flux_np(u, v, wa, wb, ker):
    n = u.shape[0]
    total = 0.0
    for d in range(1, n):
        k = ker[d]
        if k == 0.0:
            continue
        du = u[d:] - u[:-d]
        total += k * np.sum(wa[:-d] * wb[d:] * v[:-d] * (-du) + wa[d:] * wb[:-d] * v[d:] * du)
    return total


def pair_sum_flux(u, v, wa, wb, ker) -> float:
    if backend() == "numba":
        return float(_pair_sum_flux_nb(u, v, wa, wb, ker))
    return float(_pair_sum_flux_np(u, v, wa, wb, ker))


# ----------------------------------------------------------------------
# Quadratic kinetic form matching the operator weights (solver energy):
#   on-grid pair part   sum_{d=1..J} a[d-1] * sum_i (u[i] - u[i+d])^2
# The off-grid and far-field parts are cheap O(n) sums done by the caller.
# ----------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _pair_energy_nb(u, a):
    n = u.shape[0]
    J = a.shape[0]
    dmax = min(J, n - 1)
    partial = np.zeros(dmax + 1)
    for d in prange(1, dmax + 1):
        w = a[d - 1]
        if w == 0.0:
            continue
        acc = 0.0
        for i in range(n - d):
            diff = u[i] - u[i + d]
            acc += diff * diff
        partial[d] = w * acc
    return np.sum(partial)


def _pair_energy_np(u, a):
    n = u.shape[0]
    J = a.shape[0]
    dmax = min(J, n - 1)
    partial = np.zeros(dmax + 1)
    for d in range(1, dmax + 1):
        w = a[d - 1]
        if w == 0.0:
            continue
        diff = u[:-d] - u[d:]
        partial[d] = w * np.dot(diff, diff)
    return float(np.sum(partial))


def pair_energy(u, a) -> float:
    if backend() == "numba":
        return float(_pair_energy_nb(u, a))
    return _pair_energy_np(u, a)
