"""Dissimilarity matrices: container, validation, constructions, file format.

Three constructions are provided: squared Euclidean distances from
coordinates, an affinity-coefficient dissimilarity from per-variable
category counts, and the Jaccard dissimilarity from a binary
rubric-by-observation table.  All of them return the same dense container,
and everything downstream consumes only that container.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import backends


@dataclass
class DissimMatrix:
    """Dense symmetric dissimilarity matrix with observation labels."""

    values: np.ndarray
    labels: list[str]

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass
class ValidationReport:
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        return "valid" if self.ok else "; ".join(self.issues)


def validate_matrix(m: DissimMatrix) -> ValidationReport:
    """Check the matrix invariants: square, finite, non-negative, exactly
    symmetric, zero diagonal, one label per observation."""
    issues: list[str] = []
    v = m.values
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        issues.append(f"matrix must be square, got shape {v.shape}")
        return ValidationReport(issues)
    n = v.shape[0]
    if len(m.labels) != n:
        issues.append(f"expected {n} labels, got {len(m.labels)}")
    if not np.isfinite(v).all():
        bad = np.argwhere(~np.isfinite(v))[0]
        issues.append(f"non-finite value at ({bad[0]}, {bad[1]})")
    else:
        if (v < 0).any():
            bad = np.argwhere(v < 0)[0]
            issues.append(f"negative value at ({bad[0]}, {bad[1]})")
        diag = np.diagonal(v)
        if (diag != 0).any():
            i = int(np.flatnonzero(diag != 0)[0])
            issues.append(f"nonzero diagonal at ({i}, {i})")
        if not np.array_equal(v, v.T):
            bad = np.argwhere(v != v.T)[0]
            issues.append(f"asymmetric at ({bad[0]}, {bad[1]})")
    return ValidationReport(issues)


def require_valid(m: DissimMatrix) -> DissimMatrix:
    """Raise ValueError when the matrix invariants do not hold."""
    report = validate_matrix(m)
    if not report.ok:
        raise ValueError(f"invalid dissimilarity matrix: {report}")
    return m


def _default_labels(n: int) -> list[str]:
    return [str(i) for i in range(n)]


def squared_euclidean_matrix(points: np.ndarray, labels: list[str] | None = None) -> DissimMatrix:
    """Squared Euclidean dissimilarity from an (N, p) coordinate array."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"expected an (N, p) coordinate array, got shape {points.shape}")
    values = backends.pairwise_sq_euclidean(points)
    if labels is None:
        labels = _default_labels(points.shape[0])
    return DissimMatrix(values=values, labels=list(labels))


@dataclass
class ModalVariable:
    """Category counts of one variable: counts[i, l] is how often
    observation i falls in category l."""

    name: str
    modalities: list[str]
    counts: np.ndarray


@dataclass
class ModalTable:
    """Per-variable category counts for N observations, with optional
    variable weights (equal weights when omitted)."""

    labels: list[str]
    variables: list[ModalVariable]
    weights: np.ndarray | None = None


def affinity_dissimilarity(table: ModalTable) -> DissimMatrix:
    """Affinity-coefficient dissimilarity from category counts.

    Per variable, rows of counts are turned into frequency profiles and the
    affinity between two observations is the sum over categories of the
    square roots of the paired frequencies (1 for identical profiles, 0 for
    disjoint ones).  Affinities are combined across variables with weights
    normalized to sum to one, and mapped to a dissimilarity d = 2 (1 - a),
    which lies in [0, 2].
    """
    if not table.variables:
        raise ValueError("modal table has no variables")
    n = len(table.labels)
    p = len(table.variables)
    if table.weights is None:
        weights = np.full(p, 1.0 / p)
    else:
        weights = np.asarray(table.weights, dtype=np.float64)
        if weights.shape != (p,):
            raise ValueError(f"expected {p} weights, got shape {weights.shape}")
        if (weights < 0).any() or weights.sum() <= 0:
            raise ValueError("weights must be non-negative with a positive sum")
        weights = weights / weights.sum()
    agreement = np.zeros((n, n), dtype=np.float64)
    for var, w in zip(table.variables, weights):
        counts = np.asarray(var.counts, dtype=np.float64)
        if counts.shape[0] != n:
            raise ValueError(
                f"variable {var.name!r} has {counts.shape[0]} rows, expected {n}"
            )
        if (counts < 0).any():
            raise ValueError(f"variable {var.name!r} has negative counts")
        totals = counts.sum(axis=1)
        if (totals == 0).any():
            i = int(np.flatnonzero(totals == 0)[0])
            raise ValueError(
                f"observation {table.labels[i]!r} has no occurrences for variable {var.name!r}"
            )
        roots = np.sqrt(counts / totals[:, None])
        agreement += w * (roots @ roots.T)
    values = 2.0 * (1.0 - agreement)
    # BLAS products are not exactly symmetric; restore the invariants and
    # clamp the float dust around the boundary values.
    values = (values + values.T) / 2.0
    np.clip(values, 0.0, 2.0, out=values)
    np.fill_diagonal(values, 0.0)
    return DissimMatrix(values=values, labels=list(table.labels))


@dataclass
class BinaryTable:
    """Presence/absence of each rubric (row) in each observation (column)."""

    row_labels: list[str]
    col_labels: list[str]
    bits: np.ndarray


def jaccard_dissimilarity(table: BinaryTable) -> DissimMatrix:
    """Jaccard dissimilarity between the rows of a binary table.

    d(i, k) = 1 - |i AND k| / |i OR k|.  A pair of all-zero rows has an
    empty union; such rows are treated as identical (d = 0) and a warning
    is emitted.
    """
    bits = np.asarray(table.bits)
    if bits.ndim != 2:
        raise ValueError(f"expected a 2-d binary table, got shape {bits.shape}")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("binary table entries must be 0 or 1")
    b = bits.astype(np.float64)
    both = b @ b.T  # exact: small integer counts
    totals = b.sum(axis=1)
    union = totals[:, None] + totals[None, :] - both
    empty = union == 0
    if empty.any():
        warnings.warn(
            "all-zero rubric rows present; empty unions treated as identical (d = 0)",
            RuntimeWarning,
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(empty, 0.0, 1.0 - both / np.where(empty, 1.0, union))
    np.fill_diagonal(values, 0.0)
    return DissimMatrix(values=values, labels=list(table.row_labels))


_MAGIC = "dissim v1"


def write_matrix(m: DissimMatrix, path) -> None:
    """Write the matrix file: a ``dissim v1 <N>`` header line, a line of
    comma-separated labels, then N comma-separated rows of values."""
    require_valid(m)
    for label in m.labels:
        if not label or any(ch in label for ch in ",\n\r"):
            raise ValueError(f"label unfit for the matrix format: {label!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{_MAGIC} {m.n}\n")
        fh.write(",".join(m.labels) + "\n")
        for row in m.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix(path) -> DissimMatrix:
    """Read and validate a matrix file written by ``write_matrix``."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    head = lines[0].rsplit(" ", 1)
    if len(head) != 2 or head[0] != _MAGIC:
        raise ValueError(f"{path}: bad header {lines[0]!r}, expected '{_MAGIC} <N>'")
    try:
        n = int(head[1])
    except ValueError:
        raise ValueError(f"{path}: bad matrix size {head[1]!r}") from None
    if n < 1:
        raise ValueError(f"{path}: matrix size must be positive, got {n}")
    if len(lines) < 2 + n:
        raise ValueError(f"{path}: expected {2 + n} lines, got {len(lines)}")
    labels = lines[1].split(",")
    if len(labels) != n:
        raise ValueError(f"{path}: expected {n} labels, got {len(labels)}")
    values = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        fields = lines[2 + i].split(",")
        if len(fields) != n:
            raise ValueError(f"{path}: row {i} has {len(fields)} values, expected {n}")
        try:
            values[i] = [float(f) for f in fields]
        except ValueError:
            raise ValueError(f"{path}: unparseable value in row {i}") from None
    m = DissimMatrix(values=values, labels=labels)
    report = validate_matrix(m)
    if not report.ok:
        raise ValueError(f"{path}: {report}")
    return m


def write_points(points: np.ndarray, labels: list[str], path) -> None:
    """Write labelled coordinates as CSV (header: label,x0,x1,...)."""
    points = np.asarray(points, dtype=np.float64)
    if points.shape[0] != len(labels):
        raise ValueError(f"{len(labels)} labels for {points.shape[0]} points")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("label," + ",".join(f"x{k}" for k in range(points.shape[1])) + "\n")
        for label, row in zip(labels, points):
            fh.write(label + "," + ",".join(repr(float(v)) for v in row) + "\n")


def read_points(path) -> tuple[np.ndarray, list[str]]:
    """Read a labelled coordinate CSV written by ``write_points``."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("label,"):
        raise ValueError(f"{path}: expected a 'label,x0,...' header")
    width = len(lines[0].split(",")) - 1
    labels: list[str] = []
    rows: list[list[float]] = []
    for idx, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != width + 1:
            raise ValueError(f"{path}: line {idx} has {len(fields)} fields, expected {width + 1}")
        labels.append(fields[0])
        try:
            rows.append([float(f) for f in fields[1:]])
        except ValueError:
            raise ValueError(f"{path}: unparseable coordinate on line {idx}") from None
    if not rows:
        raise ValueError(f"{path}: no points")
    return np.asarray(rows, dtype=np.float64), labels
