"""Pure-numpy implementations of the hot kernels."""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def pairwise_sq_euclidean(points: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, accumulated coordinate by coordinate.

    Direct accumulation (rather than the Gram-matrix identity) keeps the
    result exactly symmetric with an exactly zero diagonal.
    """
    n, p = points.shape
    out = np.zeros((n, n), dtype=np.float64)
    for k in range(p):
        diff = points[:, k, None] - points[None, :, k]
        out += diff * diff
    return out


def cluster_sums(values: np.ndarray, assign: np.ndarray, num_neurons: int) -> np.ndarray:
    """Row sums of ``values`` grouped by cluster: out[c] = sum of values[i]
    over observations i assigned to neuron c."""
    out = np.zeros((num_neurons, values.shape[1]), dtype=np.float64)
    for c in range(num_neurons):
        members = np.flatnonzero(assign == c)
        if members.size:
            out[c] = values[members].sum(axis=0)
    return out


def set_sums(values: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    """Row sums of ``values`` over each prototype set: out[c] = sum of
    values[j] over j in prototypes[c]."""
    m, q = prototypes.shape
    picked = values[prototypes.reshape(-1)].reshape(m, q, values.shape[1])
    return picked.sum(axis=1)


def greedy_select(costs: np.ndarray, q: int) -> np.ndarray:
    """Sequential prototype claiming.

    Neurons claim in ascending id order; each takes its q cheapest still
    unclaimed observations, ties going to the smallest observation index
    (stable sort).  Rows of the result are sorted ascending.
    """
    m, n = costs.shape
    prototypes = np.empty((m, q), dtype=np.int64)
    claimed = np.zeros(n, dtype=np.bool_)
    for c in range(m):
        order = np.argsort(costs[c], kind="stable")
        free = order[~claimed[order]]
        picked = free[:q]
        claimed[picked] = True
        prototypes[c] = np.sort(picked)
    return prototypes
