"""Batch self-organizing maps for dissimilarity data.

The map never sees coordinates: neurons are represented by small sets of
observations and training runs entirely on a pairwise dissimilarity
matrix.  The package also ships the constructions that produce such
matrices (squared Euclidean, affinity coefficient, Jaccard) and a web-log
preprocessing pipeline that turns raw access logs into them.
"""

from .core import (
    SomState,
    TrainConfig,
    TrainedMap,
    assign_all,
    classic_batch_som,
    energy,
    energy_components,
    gamma,
    init_prototypes,
    represent_all,
    train,
)
from .dissim import (
    BinaryTable,
    DissimMatrix,
    ModalTable,
    ModalVariable,
    affinity_dissimilarity,
    jaccard_dissimilarity,
    read_matrix,
    squared_euclidean_matrix,
    validate_matrix,
    write_matrix,
)
from .neighborhood import (
    KernelSpec,
    TemperatureSchedule,
    default_schedule,
    kernel_matrix,
    kernel_value,
    temperature_at,
)
from .topology import MapGraph, build_grid, graph_distance

__version__ = "0.1.0"

__all__ = [
    "BinaryTable",
    "DissimMatrix",
    "KernelSpec",
    "MapGraph",
    "ModalTable",
    "ModalVariable",
    "SomState",
    "TemperatureSchedule",
    "TrainConfig",
    "TrainedMap",
    "affinity_dissimilarity",
    "assign_all",
    "build_grid",
    "classic_batch_som",
    "default_schedule",
    "energy",
    "energy_components",
    "gamma",
    "graph_distance",
    "init_prototypes",
    "jaccard_dissimilarity",
    "kernel_matrix",
    "kernel_value",
    "read_matrix",
    "represent_all",
    "squared_euclidean_matrix",
    "temperature_at",
    "train",
    "validate_matrix",
    "write_matrix",
    "__version__",
]
