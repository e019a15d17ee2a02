"""Prior structure of the map: a neuron graph with shortest-path distances.

The map is an undirected graph over neurons 0..M-1.  Everything downstream
only ever consumes the precomputed distance table, so the graph is built
once and treated as immutable afterwards.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class MapGraph:
    """Immutable neuron graph with an all-pairs shortest-path table.

    Attributes
    ----------
    num_neurons : number of neurons M.
    edges : undirected edges as (a, b) pairs with a < b.
    dist : (M, M) int64 array of shortest-path lengths (graph distance).
    shape : (rows, cols) for grid-built graphs, else None.
    connectivity : 4 or 8 for grid-built graphs, else None.
    """

    num_neurons: int
    edges: tuple[tuple[int, int], ...]
    dist: np.ndarray
    shape: tuple[int, int] | None = None
    connectivity: int | None = None

    def __post_init__(self) -> None:
        self.dist.setflags(write=False)

    @property
    def diameter(self) -> int:
        return int(self.dist.max())


def _all_pairs_bfs(num_neurons: int, edges) -> np.ndarray:
    adjacency: list[list[int]] = [[] for _ in range(num_neurons)]
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    dist = np.full((num_neurons, num_neurons), -1, dtype=np.int64)
    for source in range(num_neurons):
        dist[source, source] = 0
        queue = deque([source])
        while queue:
            node = queue.popleft()
            for neighbor in adjacency[node]:
                if dist[source, neighbor] < 0:
                    dist[source, neighbor] = dist[source, node] + 1
                    queue.append(neighbor)
    if (dist < 0).any():
        raise ValueError("neuron graph is not connected")
    return dist


def build_grid(rows: int, cols: int, eight_connected: bool = False) -> MapGraph:
    """Build a rectangular grid of rows x cols neurons, numbered row-major.

    Neurons are linked to their horizontal and vertical neighbours; with
    ``eight_connected`` the diagonals are linked as well.  Distances are
    shortest-path lengths in the resulting graph.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"grid dimensions must be positive, got {rows}x{cols}")
    offsets = [(0, 1), (1, 0)]
    if eight_connected:
        offsets += [(1, 1), (1, -1)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            a = r * cols + c
            for dr, dc in offsets:
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    b = rr * cols + cc
                    edges.append((min(a, b), max(a, b)))
    edges.sort()
    m = rows * cols
    dist = _all_pairs_bfs(m, edges)
    return MapGraph(
        num_neurons=m,
        edges=tuple(edges),
        dist=dist,
        shape=(rows, cols),
        connectivity=8 if eight_connected else 4,
    )


def graph_distance(graph: MapGraph, c: int, r: int) -> int:
    """Shortest-path distance between neurons c and r."""
    m = graph.num_neurons
    if not (0 <= c < m and 0 <= r < m):
        raise ValueError(f"neuron id out of range: ({c}, {r}) with {m} neurons")
    return int(graph.dist[c, r])
