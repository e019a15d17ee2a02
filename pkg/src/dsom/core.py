"""Batch self-organizing map on dissimilarity data.

Observations are never embedded: each neuron c is represented by a small
set A_c of q observation indices, and every computation goes through the
pairwise dissimilarity matrix alone.  One batch iteration alternates

* assignment: each observation goes to the neuron r minimizing the
  neighborhood-weighted cost gamma(x, r) = sum_c K^T(delta(r, c)) *
  sum_{j in A_c} d(x, x_j), ties to the smallest neuron id;
* representation: neurons claim new prototype sets in ascending id order,
  each taking the q unclaimed observations cheapest under the cost
  e_c(x) = sum_i K^T(delta(f(x_i), c)) d(x_i, x), ties to the smallest
  observation index.  Claiming keeps the sets pairwise disjoint.

The representation costs are evaluated through per-neuron partial sums
D(r, x) = sum_{x_i in C_r} d(x_i, x) followed by e = K @ D, which is
O(N^2 + N M^2) per iteration instead of the naive O(N^2 M).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import backends
from .dissim import DissimMatrix, require_valid
from .neighborhood import (
    KernelSpec,
    TemperatureSchedule,
    default_schedule,
    kernel_matrix,
    temperature_at,
)
from .topology import MapGraph


@dataclass
class SomState:
    """Map state: assignment f (N,), prototype sets (M, q), and the
    temperature/step they were produced at."""

    assignment: np.ndarray
    prototypes: np.ndarray
    temperature: float
    step: int = 0


def validate_state(state: SomState, n: int, graph: MapGraph) -> None:
    """Raise ValueError unless the state is structurally sound: shapes and
    bounds match, and prototype sets are pairwise disjoint."""
    m = graph.num_neurons
    protos = state.prototypes
    if protos.ndim != 2 or protos.shape[0] != m:
        raise ValueError(f"prototypes must be (M, q) with M={m}, got {protos.shape}")
    if protos.size and (protos.min() < 0 or protos.max() >= n):
        raise ValueError("prototype index out of range")
    flat = protos.reshape(-1)
    if len(np.unique(flat)) != flat.size:
        raise ValueError("prototype sets must be pairwise disjoint")
    assign = state.assignment
    if assign.shape != (n,):
        raise ValueError(f"assignment must have shape ({n},), got {assign.shape}")
    if assign.size and (assign.min() < 0 or assign.max() >= m):
        raise ValueError("assignment refers to a neuron out of range")


def init_prototypes(rng: np.random.Generator, n: int, graph: MapGraph, q: int) -> np.ndarray:
    """Draw M disjoint prototype sets of size q uniformly without
    replacement; each row is sorted ascending."""
    m = graph.num_neurons
    if q < 1:
        raise ValueError(f"q must be at least 1, got {q}")
    if m * q > n:
        raise ValueError(f"cannot draw {m}x{q} distinct prototypes from {n} observations")
    picks = rng.choice(n, size=m * q, replace=False).reshape(m, q)
    return np.sort(picks.astype(np.int64), axis=1)


def _gamma_matrix(values: np.ndarray, prototypes: np.ndarray, kmat: np.ndarray) -> np.ndarray:
    """gamma[r, x] for all neurons and observations."""
    return kmat @ backends.set_sums(values, prototypes)


def _cost_matrix(values: np.ndarray, assign: np.ndarray, kmat: np.ndarray) -> np.ndarray:
    """Representation costs e[c, x] via the per-neuron partial sums."""
    return kmat @ backends.cluster_sums(values, assign, kmat.shape[0])


def gamma(
    x: int,
    r: int,
    state: SomState,
    m: DissimMatrix,
    graph: MapGraph,
    kernel: KernelSpec,
    temperature: float,
) -> float:
    """Cost of hosting observation x on neuron r under the current map."""
    kvec = kernel_matrix(kernel, temperature, graph.dist[r])
    sums = m.values[x, state.prototypes].sum(axis=1)
    return float(kvec @ sums)


def assign_all(
    state: SomState,
    m: DissimMatrix,
    graph: MapGraph,
    kernel: KernelSpec,
    temperature: float,
) -> np.ndarray:
    """Optimal assignment for the current prototypes: per observation the
    gamma-minimizing neuron, ties to the smallest neuron id."""
    kmat = kernel_matrix(kernel, temperature, graph.dist)
    g = _gamma_matrix(m.values, state.prototypes, kmat)
    return g.argmin(axis=0).astype(np.int64)


def represent_all(
    state: SomState,
    m: DissimMatrix,
    graph: MapGraph,
    kernel: KernelSpec,
    temperature: float,
) -> np.ndarray:
    """New prototype sets for the current assignment via sequential
    claiming (ascending neuron id, cheapest unclaimed observations first,
    ties to the smallest observation index)."""
    kmat = kernel_matrix(kernel, temperature, graph.dist)
    costs = _cost_matrix(m.values, state.assignment, kmat)
    return backends.greedy_select(costs, state.prototypes.shape[1])


def energy(
    state: SomState,
    m: DissimMatrix,
    graph: MapGraph,
    kernel: KernelSpec,
    temperature: float,
) -> float:
    """Map energy E = sum_i gamma(x_i, f(x_i)) at the given temperature."""
    kmat = kernel_matrix(kernel, temperature, graph.dist)
    g = _gamma_matrix(m.values, state.prototypes, kmat)
    return float(g[state.assignment, np.arange(m.n)].sum())


def energy_components(
    state: SomState,
    m: DissimMatrix,
    graph: MapGraph,
    kernel: KernelSpec,
    temperature: float,
) -> tuple[float, float]:
    """Split the energy into a representation part (within-cluster cost of
    the prototype sets, kernel-free) and the structure remainder."""
    sums = backends.set_sums(m.values, state.prototypes)
    e_r = float(sums[state.assignment, np.arange(m.n)].sum())
    total = energy(state, m, graph, kernel, temperature)
    return e_r, max(total - e_r, 0.0)


@dataclass
class TrainConfig:
    """Training parameters.

    ``schedule`` defaults to geometric cooling from half the map diameter
    down to 0.3 over ``num_steps``.  Each restart r reseeds the initial
    prototypes with ``seed + r``; the restart with the lowest final energy
    wins.  ``initial_prototypes`` overrides the random initialization."""

    kernel: KernelSpec = field(default_factory=KernelSpec)
    schedule: TemperatureSchedule | None = None
    num_steps: int = 100
    q: int = 1
    restarts: int = 5
    seed: int = 0
    initial_prototypes: np.ndarray | None = None


@dataclass
class TrainedMap:
    """Training result: final state plus bookkeeping.

    ``energy`` is the final energy of the winning restart,
    ``initial_energy`` its energy after the first assignment, and
    ``energy_trace`` its per-iteration energies (each at that iteration's
    temperature)."""

    state: SomState
    energy: float
    initial_energy: float
    energy_trace: np.ndarray
    restart_index: int
    graph: MapGraph
    config: TrainConfig
    schedule: TemperatureSchedule


def train(m: DissimMatrix, graph: MapGraph, config: TrainConfig | None = None) -> TrainedMap:
    """Train the map by batch alternation under the cooling schedule."""
    if config is None:
        config = TrainConfig()
    require_valid(m)
    n = m.n
    neurons = graph.num_neurons
    if config.q < 1:
        raise ValueError(f"q must be at least 1, got {config.q}")
    if neurons * config.q > n:
        raise ValueError(
            f"{neurons} neurons with q={config.q} need more observations than the {n} available"
        )
    if config.restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {config.restarts}")
    schedule = config.schedule or default_schedule(graph, config.num_steps)
    if schedule.num_steps != config.num_steps:
        raise ValueError(
            f"schedule covers {schedule.num_steps} steps but num_steps is {config.num_steps}"
        )
    if config.initial_prototypes is not None:
        given = np.asarray(config.initial_prototypes, dtype=np.int64)
        probe = SomState(np.zeros(n, dtype=np.int64), given, schedule.t_init)
        validate_state(probe, n, graph)
        start = np.sort(given, axis=1)
    else:
        start = None

    values = np.ascontiguousarray(m.values, dtype=np.float64)
    steps = config.num_steps
    best: TrainedMap | None = None
    for restart in range(config.restarts):
        if start is not None:
            protos = start.copy()
        else:
            rng = np.random.default_rng(config.seed + restart)
            protos = init_prototypes(rng, n, graph, config.q)
        assign = np.zeros(n, dtype=np.int64)
        trace = np.empty(steps, dtype=np.float64)
        initial = 0.0
        t = schedule.t_init
        for step in range(steps):
            t = temperature_at(schedule, step)
            kmat = kernel_matrix(config.kernel, t, graph.dist)
            g = _gamma_matrix(values, protos, kmat)
            assign = g.argmin(axis=0).astype(np.int64)
            if step == 0:
                initial = float(g[assign, np.arange(n)].sum())
            costs = _cost_matrix(values, assign, kmat)
            protos = backends.greedy_select(costs, config.q)
            trace[step] = np.take_along_axis(costs, protos, axis=1).sum()
        final = float(trace[-1])
        if best is None or final < best.energy:
            best = TrainedMap(
                state=SomState(assignment=assign, prototypes=protos, temperature=t, step=steps),
                energy=final,
                initial_energy=initial,
                energy_trace=trace,
                restart_index=restart,
                graph=graph,
                config=config,
                schedule=schedule,
            )
    assert best is not None
    return best


def classic_batch_som(
    points: np.ndarray, graph: MapGraph, config: TrainConfig | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Classic batch map on coordinates, for comparisons.

    Prototypes are free vectors updated as neighborhood-weighted means;
    the same kernels and cooling schedule apply.  Returns the prototype
    coordinates and the final assignment."""
    if config is None:
        config = TrainConfig()
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"expected an (N, p) coordinate array, got shape {points.shape}")
    n = points.shape[0]
    neurons = graph.num_neurons
    if neurons > n:
        raise ValueError(f"{neurons} neurons need at least as many observations, got {n}")
    schedule = config.schedule or default_schedule(graph, config.num_steps)
    rng = np.random.default_rng(config.seed)
    protos = points[rng.choice(n, size=neurons, replace=False)].copy()
    assign = np.zeros(n, dtype=np.int64)
    for step in range(config.num_steps):
        t = temperature_at(schedule, step)
        kmat = kernel_matrix(config.kernel, t, graph.dist)
        sq = ((protos[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        assign = (kmat @ sq).argmin(axis=0).astype(np.int64)
        weights = kmat[:, assign]
        denom = weights.sum(axis=1)
        mass = denom > 0
        updated = weights @ points
        protos[mass] = updated[mass] / denom[mass, None]
    return protos, assign
