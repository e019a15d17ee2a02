"""Numba-compiled implementations of the hot kernels.

Mirrors the pure-numpy backend function for function; the facade in
``backends`` coerces arguments to the dtypes these signatures expect
(float64 matrices, int64 indices).
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def pairwise_sq_euclidean(points):
    n, p = points.shape
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(p):
                diff = points[i, k] - points[j, k]
                acc += diff * diff
            out[i, j] = acc
    return out


@njit(cache=True)
def cluster_sums(values, assign, num_neurons):
    n = values.shape[0]
    width = values.shape[1]
    out = np.zeros((num_neurons, width), dtype=np.float64)
    for i in range(n):
        row = out[assign[i]]
        src = values[i]
        for x in range(width):
            row[x] += src[x]
    return out


@njit(cache=True)
def set_sums(values, prototypes):
    m, q = prototypes.shape
    width = values.shape[1]
    out = np.zeros((m, width), dtype=np.float64)
    for c in range(m):
        for k in range(q):
            src = values[prototypes[c, k]]
            row = out[c]
            for x in range(width):
                row[x] += src[x]
    return out


@njit(cache=True)
def greedy_select(costs, q):
    m, n = costs.shape
    prototypes = np.empty((m, q), dtype=np.int64)
    claimed = np.zeros(n, dtype=np.bool_)
    for c in range(m):
        # mergesort is stable, so ties go to the smallest observation index
        order = np.argsort(costs[c], kind="mergesort")
        taken = 0
        for pos in range(n):
            j = order[pos]
            if not claimed[j]:
                prototypes[c, taken] = j
                claimed[j] = True
                taken += 1
                if taken == q:
                    break
        prototypes[c, :] = np.sort(prototypes[c, :])
    return prototypes
