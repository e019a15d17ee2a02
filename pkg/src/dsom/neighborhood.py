"""Neighborhood kernels and the annealing schedule for the temperature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import MapGraph

KERNEL_KINDS = ("gaussian", "threshold")


@dataclass(frozen=True)
class KernelSpec:
    """Neighborhood kernel: ``gaussian`` K(x) = exp(-x^2), or ``threshold``
    K(0) = 1 and 0 elsewhere."""

    kind: str = "gaussian"

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}, expected one of {KERNEL_KINDS}")


def kernel_value(spec: KernelSpec, temperature: float, x: float) -> float:
    """Evaluate the tempered kernel K^T(x) = K(x / T)."""
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    scaled = x / temperature
    if spec.kind == "gaussian":
        return float(np.exp(-(scaled * scaled)))
    return 1.0 if scaled == 0.0 else 0.0


def kernel_matrix(spec: KernelSpec, temperature: float, dist: np.ndarray) -> np.ndarray:
    """Tabulate K^T over a table of graph distances."""
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    scaled = np.asarray(dist, dtype=np.float64) / temperature
    if spec.kind == "gaussian":
        return np.exp(-(scaled * scaled))
    return (scaled == 0.0).astype(np.float64)


@dataclass(frozen=True)
class TemperatureSchedule:
    """Geometric cooling from ``t_init`` down to ``t_final`` over ``num_steps``."""

    t_init: float
    t_final: float
    num_steps: int

    def __post_init__(self) -> None:
        if not (self.t_init >= self.t_final > 0.0):
            raise ValueError(
                f"schedule requires t_init >= t_final > 0, got {self.t_init} and {self.t_final}"
            )
        if self.num_steps < 1:
            raise ValueError(f"num_steps must be at least 1, got {self.num_steps}")


def temperature_at(schedule: TemperatureSchedule, step: int) -> float:
    """Temperature at iteration ``step`` (0-based).

    T(l) = t_init * (t_final / t_init) ** (l / (num_steps - 1)); a one-step
    schedule stays at t_init.
    """
    if not (0 <= step < schedule.num_steps):
        raise ValueError(f"step {step} outside schedule of {schedule.num_steps} steps")
    if schedule.num_steps == 1:
        return schedule.t_init
    exponent = step / (schedule.num_steps - 1)
    return float(schedule.t_init * (schedule.t_final / schedule.t_init) ** exponent)


def default_schedule(graph: MapGraph, num_steps: int) -> TemperatureSchedule:
    """Default cooling for a given map: start at half the graph diameter
    (at least 1) and finish at 0.3."""
    t_init = max(graph.diameter / 2.0, 1.0)
    return TemperatureSchedule(t_init=t_init, t_final=0.3, num_steps=num_steps)
