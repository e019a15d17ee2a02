"""Backend selection for the hot kernels.

Two interchangeable implementations exist: a numba-compiled one and a
pure-numpy fallback.  The active backend is picked at import time from the
``DSOM_BACKEND`` environment variable ("numba" or "numpy"); without it,
numba is used when importable.  ``set_backend`` switches at runtime.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

from . import _numpy_backend

_BACKENDS = {"numpy": _numpy_backend}
try:
    from . import _numba_backend

    _BACKENDS["numba"] = _numba_backend
except ImportError:  # pragma: no cover - depends on the environment
    pass


def _initial_backend():
    requested = os.environ.get("DSOM_BACKEND", "").strip()
    if requested:
        if requested in _BACKENDS:
            return _BACKENDS[requested]
        warnings.warn(
            f"DSOM_BACKEND={requested!r} is not available, falling back to numpy",
            RuntimeWarning,
        )
        return _numpy_backend
    return _BACKENDS.get("numba", _numpy_backend)


_impl = _initial_backend()


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def backend_name() -> str:
    """Name of the active backend."""
    return _impl.NAME


def set_backend(name: str) -> None:
    """Switch the active backend ("numba" or "numpy")."""
    global _impl
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}, available: {available_backends()}")
    _impl = _BACKENDS[name]


def get_backend(name: str):
    """Return a backend module by name without activating it."""
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}, available: {available_backends()}")
    return _BACKENDS[name]


def _as_matrix(values: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(values, dtype=np.float64)


def pairwise_sq_euclidean(points: np.ndarray) -> np.ndarray:
    """(N, p) coordinates -> (N, N) squared Euclidean distances."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"expected a 2-d coordinate array, got shape {points.shape}")
    return _impl.pairwise_sq_euclidean(points)


def cluster_sums(values: np.ndarray, assign: np.ndarray, num_neurons: int) -> np.ndarray:
    """out[c, x] = sum of values[i, x] over observations i with assign[i] == c."""
    assign = np.ascontiguousarray(assign, dtype=np.int64)
    return _impl.cluster_sums(_as_matrix(values), assign, num_neurons)


def set_sums(values: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    """out[c, x] = sum of values[j, x] over j in prototypes[c]."""
    prototypes = np.ascontiguousarray(prototypes, dtype=np.int64)
    return _impl.set_sums(_as_matrix(values), prototypes)


def greedy_select(costs: np.ndarray, q: int) -> np.ndarray:
    """Claim q observations per neuron, ascending neuron id, cheapest first,
    ties to the smallest observation index; rows come back sorted."""
    costs = _as_matrix(costs)
    m, n = costs.shape
    if m * q > n:
        raise ValueError(f"cannot pick {m}x{q} distinct prototypes from {n} observations")
    return _impl.greedy_select(costs, q)
