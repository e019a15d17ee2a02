"""Trained-map persistence and presentation exports.

A trained map is saved as a structured text file: a header of ``key =
value`` lines (grid shape, training parameters, energies), a
``[prototypes]`` section with one line per neuron, and an
``[assignments]`` section with one line per observation.  Saved maps can
be re-read and rendered as an ASCII grid, a flat CSV, or an SVG figure.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .core import TrainedMap, energy_components
from .dissim import DissimMatrix

_MAGIC = "dsom-map v1"


@dataclass
class MapDocument:
    """Deserialized trained map: grid shape, parameter echo, energies,
    per-neuron prototype labels and per-observation assignments."""

    rows: int
    cols: int
    connectivity: int
    params: dict[str, str]
    initial_energy: float
    energy: float
    energy_r: float
    energy_s: float
    prototypes: list[list[str]]
    assignments: list[tuple[str, int]]

    @property
    def num_neurons(self) -> int:
        return self.rows * self.cols

    def position(self, neuron: int) -> tuple[int, int]:
        """Grid (row, col) of a neuron id (row-major numbering)."""
        return divmod(neuron, self.cols)

    def counts(self) -> list[int]:
        tally = Counter(neuron for _, neuron in self.assignments)
        return [tally.get(c, 0) for c in range(self.num_neurons)]


def document_from_trained(trained: TrainedMap, m: DissimMatrix) -> MapDocument:
    """Build the serializable document for a map trained on matrix ``m``."""
    graph = trained.graph
    if graph.shape is None:
        raise ValueError("only grid-built maps can be serialized")
    rows, cols = graph.shape
    state = trained.state
    config = trained.config
    e_r, e_s = energy_components(state, m, graph, config.kernel, state.temperature)
    params = {
        "kernel": config.kernel.kind,
        "t_init": repr(float(trained.schedule.t_init)),
        "t_final": repr(float(trained.schedule.t_final)),
        "steps": str(config.num_steps),
        "q": str(config.q),
        "restarts": str(config.restarts),
        "seed": str(config.seed),
        "restart": str(trained.restart_index),
    }
    prototypes = [[m.labels[j] for j in row] for row in state.prototypes]
    assignments = [(m.labels[i], int(c)) for i, c in enumerate(state.assignment)]
    return MapDocument(
        rows=rows,
        cols=cols,
        connectivity=graph.connectivity or 4,
        params=params,
        initial_energy=float(trained.initial_energy),
        energy=float(trained.energy),
        energy_r=float(e_r),
        energy_s=float(e_s),
        prototypes=prototypes,
        assignments=assignments,
    )


def write_map(trained: TrainedMap, m: DissimMatrix, path) -> None:
    """Serialize a trained map (see module docstring for the layout)."""
    doc = document_from_trained(trained, m)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_MAGIC + "\n")
        fh.write(f"rows = {doc.rows}\n")
        fh.write(f"cols = {doc.cols}\n")
        fh.write(f"connectivity = {doc.connectivity}\n")
        for key, value in doc.params.items():
            fh.write(f"{key} = {value}\n")
        fh.write(f"initial_energy = {repr(doc.initial_energy)}\n")
        fh.write(f"energy = {repr(doc.energy)}\n")
        fh.write(f"energy_r = {repr(doc.energy_r)}\n")
        fh.write(f"energy_s = {repr(doc.energy_s)}\n")
        fh.write("[prototypes]\n")
        for neuron, labels in enumerate(doc.prototypes):
            fh.write("\t".join([str(neuron)] + labels) + "\n")
        fh.write("[assignments]\n")
        for label, neuron in doc.assignments:
            fh.write(f"{label}\t{neuron}\n")


def read_map(path) -> MapDocument:
    """Read and validate a file written by ``write_map``."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"{path}: expected a '{_MAGIC}' header")
    fields: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i] != "[prototypes]":
        key, sep, value = lines[i].partition(" = ")
        if not sep:
            raise ValueError(f"{path}: malformed header line {lines[i]!r}")
        fields[key] = value
        i += 1
    required = ("rows", "cols", "connectivity", "initial_energy", "energy", "energy_r", "energy_s")
    missing = [key for key in required if key not in fields]
    if missing:
        raise ValueError(f"{path}: missing header fields {missing}")
    if i == len(lines):
        raise ValueError(f"{path}: missing [prototypes] section")
    try:
        rows = int(fields.pop("rows"))
        cols = int(fields.pop("cols"))
        connectivity = int(fields.pop("connectivity"))
        initial_energy = float(fields.pop("initial_energy"))
        energy = float(fields.pop("energy"))
        energy_r = float(fields.pop("energy_r"))
        energy_s = float(fields.pop("energy_s"))
    except ValueError:
        raise ValueError(f"{path}: unparseable numeric header field") from None
    num_neurons = rows * cols
    if num_neurons < 1:
        raise ValueError(f"{path}: bad grid {rows}x{cols}")
    prototypes: list[list[str]] = []
    i += 1
    while i < len(lines) and lines[i] != "[assignments]":
        parts = lines[i].split("\t")
        if len(parts) < 2 or parts[0] != str(len(prototypes)):
            raise ValueError(f"{path}: malformed prototype line {lines[i]!r}")
        prototypes.append(parts[1:])
        i += 1
    if len(prototypes) != num_neurons:
        raise ValueError(f"{path}: expected {num_neurons} prototype lines, got {len(prototypes)}")
    if i == len(lines):
        raise ValueError(f"{path}: missing [assignments] section")
    assignments: list[tuple[str, int]] = []
    for line in lines[i + 1 :]:
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed assignment line {line!r}")
        try:
            neuron = int(parts[1])
        except ValueError:
            raise ValueError(f"{path}: bad neuron id in {line!r}") from None
        if not (0 <= neuron < num_neurons):
            raise ValueError(f"{path}: neuron id {neuron} out of range")
        assignments.append((parts[0], neuron))
    if not assignments:
        raise ValueError(f"{path}: no assignments")
    return MapDocument(
        rows=rows,
        cols=cols,
        connectivity=connectivity,
        params=fields,
        initial_energy=initial_energy,
        energy=energy,
        energy_r=energy_r,
        energy_s=energy_s,
        prototypes=prototypes,
        assignments=assignments,
    )


def _cell_lines(doc: MapDocument, width: int) -> list[tuple[str, str]]:
    counts = doc.counts()
    cells = []
    for neuron in range(doc.num_neurons):
        head = f"{neuron} (n={counts[neuron]})"
        body = ",".join(doc.prototypes[neuron])
        if len(body) > width:
            body = body[: width - 2] + ".."
        cells.append((head[:width], body))
    return cells


def export_text(doc: MapDocument, width: int = 16) -> str:
    """ASCII rendering of the grid: neuron id, assigned count, prototypes."""
    cells = _cell_lines(doc, width)
    rule = "+" + ("-" * (width + 2) + "+") * doc.cols
    out = [rule]
    for r in range(doc.rows):
        for part in (0, 1):
            row = []
            for c in range(doc.cols):
                text = cells[r * doc.cols + c][part]
                row.append(f" {text:<{width}} ")
            out.append("|" + "|".join(row) + "|")
        out.append(rule)
    return "\n".join(out) + "\n"


def export_csv(doc: MapDocument) -> str:
    """Flat CSV: one line per observation with its neuron and grid cell."""
    out = ["label,neuron,row,col"]
    for label, neuron in doc.assignments:
        r, c = doc.position(neuron)
        out.append(f"{label},{neuron},{r},{c}")
    return "\n".join(out) + "\n"


def export_svg(doc: MapDocument, cell_width: int = 120, cell_height: int = 56) -> str:
    """SVG figure of the grid with per-neuron counts and prototypes."""
    margin = 8
    total_w = doc.cols * cell_width + 2 * margin
    total_h = doc.rows * cell_height + 2 * margin
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}"'
        ' font-family="monospace" font-size="11">'
    ]
    counts = doc.counts()
    for neuron in range(doc.num_neurons):
        r, c = doc.position(neuron)
        x = margin + c * cell_width
        y = margin + r * cell_height
        out.append(
            f'<rect x="{x}" y="{y}" width="{cell_width - 4}" height="{cell_height - 4}"'
            ' fill="#eef2fa" stroke="#44507a"/>'
        )
        out.append(f'<text x="{x + 6}" y="{y + 16}">{neuron} (n={counts[neuron]})</text>')
        body = ",".join(doc.prototypes[neuron])
        if len(body) > 16:
            body = body[:14] + ".."
        out.append(f'<text x="{x + 6}" y="{y + 32}">{escape(body)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
