"""Command-line interface.

Subcommands cover the full pipeline: ``preprocess`` turns raw access logs
into navigation and usage tables, ``dissim`` builds a dissimilarity
matrix from a usage table or raw coordinates, ``train`` fits the map,
``export`` renders a saved map, and ``demo-cylinder`` runs the synthetic
end-to-end example.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation error,
4 internal error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__, backends, core, dissim, export, weblog
from .neighborhood import KernelSpec, TemperatureSchedule, default_schedule
from .topology import build_grid


class UsageError(Exception):
    """Bad flags or flag combinations (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_config(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}: line {line_no} is not 'key = value'")
            values[key.strip()] = value.strip()
    return values


def _cast_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


class _Options:
    """Resolves each option as: CLI flag, else config entry, else default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = _load_config(args.config) if getattr(args, "config", None) else {}

    def get(self, name: str, default, cast=str):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        if name in self.config:
            try:
                return cast(self.config[name])
            except ValueError as exc:
                raise UsageError(f"config value for {name!r}: {exc}") from None
        return default


def _parse_grid(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise UsageError(f"--grid expects ROWSxCOLS, got {text!r}")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"--grid expects integers, got {text!r}") from None
    if rows < 1 or cols < 1:
        raise UsageError(f"--grid dimensions must be positive, got {text!r}")
    return rows, cols


def _parse_float_list(text: str) -> np.ndarray:
    try:
        return np.array([float(f) for f in text.split(",")], dtype=np.float64)
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _parse_str_list(text: str) -> tuple[str, ...]:
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    if not items:
        raise UsageError(f"expected a comma-separated list, got {text!r}")
    return items


# ---------------------------------------------------------------- preprocess


def cmd_preprocess(args: argparse.Namespace) -> int:
    opts = _Options(args)
    logs = args.log or []
    servers = args.server or []
    if not logs:
        raise UsageError("at least one --log is required")
    if len(servers) != len(logs):
        raise UsageError(f"got {len(logs)} --log but {len(servers)} --server")
    gap = opts.get("gap_seconds", 1800.0, float)
    depth = opts.get("depth", 1, int)
    long_only = opts.get("long_only", False, _cast_bool)
    min_duration = opts.get("min_duration", 60.0, float)
    min_pages = opts.get("min_pages", 10, int)
    max_error_rate = opts.get("max_error_rate", 0.05, float)
    any_server = opts.get("any_server", False, _cast_bool)
    spec = weblog.FilterSpec(
        status_range=(opts.get("status_min", 200, int), opts.get("status_max", 399, int)),
        image_extensions=opts.get("image_ext", weblog.DEFAULT_IMAGE_EXTENSIONS, _parse_str_list),
        robot_substrings=opts.get("robot_agents", weblog.DEFAULT_ROBOT_SUBSTRINGS, _parse_str_list),
    )

    records: list[weblog.LogRecord] = []
    malformed = 0
    total = 0
    for path, server in zip(logs, servers):
        recs, errors = weblog.read_log(path, server=server)
        records.extend(recs)
        malformed += len(errors)
        total += len(recs) + len(errors)
        for err in errors[:5]:
            print(f"warning: {path}: {err}", file=sys.stderr)
    if total == 0:
        raise ValueError("no log lines found")
    if malformed / total > max_error_rate:
        raise ValueError(
            f"{malformed}/{total} malformed lines exceeds --max-error-rate {max_error_rate}"
        )
    kept, counts = weblog.filter_records(records, spec)
    if not kept:
        raise ValueError("no records left after filtering")
    navigations = weblog.build_navigations(kept, gap_seconds=gap)
    dropped_short = 0
    if long_only:
        before = len(navigations)
        navigations = weblog.filter_long(navigations, min_duration, min_pages)
        dropped_short = before - len(navigations)
    if not navigations:
        raise ValueError("no navigations left after filtering")

    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    weblog.write_navigations(navigations, os.path.join(out_dir, "navigations.tsv"))
    modal = weblog.modal_table(navigations, depth=depth, require_all_servers=not any_server)
    weblog.write_modal_table(modal, os.path.join(out_dir, "modal.tsv"))
    binary = weblog.binary_table(navigations, depth=depth)
    weblog.write_binary_table(binary, os.path.join(out_dir, "binary.tsv"))

    print(f"parsed = {total - malformed}")
    print(f"malformed = {malformed}")
    print(f"dropped status = {counts.status}")
    print(f"dropped image = {counts.image}")
    print(f"dropped robot = {counts.robot}")
    print(f"retained = {len(kept)}")
    print(f"dropped short navigations = {dropped_short}")
    print(f"navigations = {len(navigations)}")
    print(f"modal navigations = {len(modal.labels)}")
    print(f"rubrics = {len(binary.row_labels)}")
    return 0


# -------------------------------------------------------------------- dissim


def cmd_dissim(args: argparse.Namespace) -> int:
    opts = _Options(args)
    sources = [name for name in ("modal", "binary", "points") if getattr(args, name)]
    if len(sources) != 1:
        raise UsageError("exactly one of --modal, --binary, --points is required")
    weights_text = opts.get("weights", None)
    if weights_text is not None and sources != ["modal"]:
        raise UsageError("--weights only applies to --modal input")
    if args.modal:
        table = weblog.read_modal_table(args.modal)
        if weights_text is not None:
            table.weights = _parse_float_list(weights_text)
        matrix = dissim.affinity_dissimilarity(table)
    elif args.binary:
        matrix = dissim.jaccard_dissimilarity(weblog.read_binary_table(args.binary))
    else:
        points, labels = dissim.read_points(args.points)
        matrix = dissim.squared_euclidean_matrix(points, labels)
    dissim.write_matrix(matrix, args.out)
    print(f"observations = {matrix.n}")
    print(f"max dissimilarity = {repr(float(matrix.values.max()))}")
    return 0


# --------------------------------------------------------------------- train


def _train_config(opts: _Options, graph) -> core.TrainConfig:
    kernel_kind = opts.get("kernel", "gaussian")
    try:
        kernel = KernelSpec(kernel_kind)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    steps = opts.get("steps", 100, int)
    t_init = opts.get("t_init", None, float)
    t_final = opts.get("t_final", None, float)
    if (t_init is None) != (t_final is None):
        raise UsageError("--t-init and --t-final must be given together")
    if t_init is None:
        schedule = default_schedule(graph, steps)
    else:
        schedule = TemperatureSchedule(t_init=t_init, t_final=t_final, num_steps=steps)
    return core.TrainConfig(
        kernel=kernel,
        schedule=schedule,
        num_steps=steps,
        q=opts.get("q", 1, int),
        restarts=opts.get("restarts", 5, int),
        seed=opts.get("seed", 0, int),
    )


def _report_training(trained: core.TrainedMap) -> None:
    print(f"backend = {backends.backend_name()}")
    print(f"winning restart = {trained.restart_index}")
    print(f"initial energy = {repr(trained.initial_energy)}")
    print(f"final energy = {repr(trained.energy)}")


def cmd_train(args: argparse.Namespace) -> int:
    opts = _Options(args)
    rows, cols = _parse_grid(opts.get("grid", None) or _missing("--grid"))
    graph = build_grid(rows, cols, eight_connected=opts.get("eight_connected", False, _cast_bool))
    matrix = dissim.read_matrix(args.matrix)
    config = _train_config(opts, graph)
    trained = core.train(matrix, graph, config)
    export.write_map(trained, matrix, args.out)
    print(f"grid = {rows}x{cols}")
    _report_training(trained)
    return 0


def _missing(flag: str):
    raise UsageError(f"{flag} is required")


# -------------------------------------------------------------------- export


def cmd_export(args: argparse.Namespace) -> int:
    doc = export.read_map(args.map)
    if args.format == "text":
        rendered = export.export_text(doc)
    elif args.format == "csv":
        rendered = export.export_csv(doc)
    else:
        rendered = export.export_svg(doc)
    if args.out is None:
        sys.stdout.write(rendered)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(rendered)
    return 0


# ------------------------------------------------------------- demo-cylinder


def sample_cylinder(
    n: int, radius: float, height: float, rng: np.random.Generator
) -> np.ndarray:
    """Uniform sample on an open cylinder surface of given radius/height."""
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    z = rng.uniform(0.0, height, n)
    return np.column_stack([radius * np.cos(theta), radius * np.sin(theta), z])


def _topology_spearman(state: core.SomState, graph, values: np.ndarray) -> float:
    """Spearman correlation between grid distance and prototype
    dissimilarity over all neuron pairs."""
    from scipy.stats import spearmanr

    protos = state.prototypes
    m = graph.num_neurons
    xs: list[float] = []
    ys: list[float] = []
    for c in range(m):
        for r in range(c + 1, m):
            xs.append(float(graph.dist[c, r]))
            ys.append(float(values[np.ix_(protos[c], protos[r])].mean()))
    return float(spearmanr(xs, ys).statistic)


def cmd_demo_cylinder(args: argparse.Namespace) -> int:
    opts = _Options(args)
    n = opts.get("n", 1000, int)
    radius = opts.get("radius", 1.0, float)
    height = opts.get("height", 4.0, float)
    rows, cols = _parse_grid(opts.get("grid", "21x3"))
    graph = build_grid(rows, cols)
    config = _train_config(opts, graph)
    if graph.num_neurons * config.q > n:
        raise UsageError(f"grid {rows}x{cols} with q={config.q} needs more than {n} points")

    rng = np.random.default_rng(config.seed)
    points = sample_cylinder(n, radius, height, rng)
    labels = [f"p{i}" for i in range(n)]
    matrix = dissim.squared_euclidean_matrix(points, labels)

    trained = core.train(matrix, graph, config)
    state = trained.state
    nonempty = np.unique(state.assignment).size / graph.num_neurons
    spearman = _topology_spearman(state, graph, matrix.values)
    ratio = trained.energy / trained.initial_energy

    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    dissim.write_points(points, labels, os.path.join(out_dir, "points.csv"))
    dissim.write_matrix(matrix, os.path.join(out_dir, "matrix.dissim"))
    export.write_map(trained, matrix, os.path.join(out_dir, "map.dsom"))
    doc = export.document_from_trained(trained, matrix)
    with open(os.path.join(out_dir, "map.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(export.export_text(doc))
    with open(os.path.join(out_dir, "prototypes.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("neuron,row,col,label,x0,x1,x2\n")
        for neuron in range(graph.num_neurons):
            r, c = divmod(neuron, cols)
            for j in state.prototypes[neuron]:
                coords = ",".join(repr(float(v)) for v in points[j])
                fh.write(f"{neuron},{r},{c},{labels[j]},{coords}\n")

    summary = [
        "cylinder demo",
        f"n = {n}",
        f"grid = {rows}x{cols}",
        f"kernel = {config.kernel.kind}",
        f"t_init = {repr(float(trained.schedule.t_init))}",
        f"t_final = {repr(float(trained.schedule.t_final))}",
        f"steps = {config.num_steps}",
        f"q = {config.q}",
        f"restarts = {config.restarts}",
        f"seed = {config.seed}",
        f"backend = {backends.backend_name()}",
        f"winning restart = {trained.restart_index}",
        f"initial energy = {repr(trained.initial_energy)}",
        f"final energy = {repr(trained.energy)}",
        f"energy ratio = {repr(ratio)}",
        f"topology spearman = {repr(spearman)}",
        f"nonempty neurons = {repr(nonempty)}",
    ]
    text = "\n".join(summary) + "\n"
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------- main


def _build_parser() -> _Parser:
    parser = _Parser(prog="dsom", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="turn access logs into usage tables")
    p.add_argument("--log", action="append", help="log file (.gz ok); repeatable")
    p.add_argument("--server", action="append", help="host serving the matching --log")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--gap-seconds", type=float, dest="gap_seconds")
    p.add_argument("--depth", type=int)
    p.add_argument("--long-only", action="store_const", const=True, dest="long_only")
    p.add_argument("--min-duration", type=float, dest="min_duration")
    p.add_argument("--min-pages", type=int, dest="min_pages")
    p.add_argument("--status-min", type=int, dest="status_min")
    p.add_argument("--status-max", type=int, dest="status_max")
    p.add_argument("--image-ext", type=_parse_str_list, dest="image_ext")
    p.add_argument("--robot-agents", type=_parse_str_list, dest="robot_agents")
    p.add_argument("--max-error-rate", type=float, dest="max_error_rate")
    p.add_argument("--any-server", action="store_const", const=True, dest="any_server")
    p.add_argument("--config")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("dissim", help="build a dissimilarity matrix")
    p.add_argument("--modal", help="per-server count table")
    p.add_argument("--binary", help="rubric incidence table")
    p.add_argument("--points", help="labelled coordinate CSV")
    p.add_argument("--weights", help="comma-separated variable weights (modal only)")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_dissim)

    p = sub.add_parser("train", help="fit a map to a dissimilarity matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--grid", help="ROWSxCOLS")
    p.add_argument("--out", required=True)
    p.add_argument("--kernel", choices=("gaussian", "threshold"))
    p.add_argument("--t-init", type=float, dest="t_init")
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--steps", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--eight-connected", action="store_const", const=True, dest="eight_connected"
    )
    p.add_argument("--config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("export", help="render a saved map")
    p.add_argument("--map", required=True)
    p.add_argument("--format", required=True, choices=("text", "csv", "svg"))
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("demo-cylinder", help="synthetic end-to-end example")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--grid", help="ROWSxCOLS (default 21x3)")
    p.add_argument("--radius", type=float)
    p.add_argument("--height", type=float)
    p.add_argument("--kernel", choices=("gaussian", "threshold"))
    p.add_argument("--t-init", type=float, dest="t_init")
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--steps", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_demo_cylinder)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return int(args.func(args) or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
