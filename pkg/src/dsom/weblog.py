"""Web-log preprocessing: parsing, filtering, navigations, usage tables.

A raw access log in the extended common format is parsed to records,
uninformative records are filtered out (error statuses, inline images,
robots), and the rest are grouped per visitor into navigations separated
by long idle gaps.  Navigations are then summarized into the tables the
dissimilarity builders consume: per-server counts over truncated URLs, or
a binary rubric-by-navigation incidence table.
"""

from __future__ import annotations

import gzip
import re
from dataclasses import dataclass, field
from datetime import datetime
from urllib.parse import urlsplit

import numpy as np

from .dissim import BinaryTable, ModalTable, ModalVariable

_LINE_RE = re.compile(
    r"^(?P<ip>\S+)"
    r"\s+(?P<identuser>\S+(?:\s+\S+)?)"
    r"\s+\[(?P<ts>[^\]]+)\]"
    r'\s+"(?P<request>[^"]*)"'
    r"\s+(?P<status>\d{3})"
    r"\s+(?P<size>\d+|-)"
    r'(?:\s+"(?P<referrer>[^"]*)"(?:\s+"(?P<agent>[^"]*)"?)?)?'
    r"\s*$"
)

_TS_FORMAT = "%d/%b/%Y:%H:%M:%S %z"


class LogParseError(ValueError):
    """A log line that does not match the extended common format."""

    def __init__(self, reason: str, line_no: int = 0):
        super().__init__(f"line {line_no}: {reason}" if line_no else reason)
        self.reason = reason
        self.line_no = line_no


@dataclass
class LogRecord:
    """One parsed request line."""

    ip: str
    ident: str | None
    user: str | None
    timestamp: datetime
    method: str
    url: str
    protocol: str | None
    status: int
    size: int | None
    referrer: str | None
    agent: str | None
    server: str | None = None
    line_no: int = 0


def _dash_none(value: str | None) -> str | None:
    return None if value in (None, "-") else value


def parse_log_line(line: str, server: str | None = None, line_no: int = 0) -> LogRecord:
    """Parse one extended-common-format line.

    Tolerates the quirks seen in real logs: a fused ident/user field and a
    missing closing quote on the agent.  Raises LogParseError otherwise.
    """
    match = _LINE_RE.match(line.rstrip("\r\n"))
    if match is None:
        raise LogParseError("unrecognized line shape", line_no)
    parts = match.group("identuser").split()
    ident = _dash_none(parts[0])
    user = _dash_none(parts[1]) if len(parts) > 1 else None
    try:
        timestamp = datetime.strptime(match.group("ts"), _TS_FORMAT)
    except ValueError:
        raise LogParseError(f"bad timestamp {match.group('ts')!r}", line_no) from None
    request = match.group("request").split()
    if len(request) == 3:
        method, url, protocol = request
    elif len(request) == 2:
        method, url = request
        protocol = None
    else:
        raise LogParseError(f"malformed request {match.group('request')!r}", line_no)
    status = int(match.group("status"))
    if not (100 <= status <= 599):
        raise LogParseError(f"implausible status {status}", line_no)
    size = match.group("size")
    return LogRecord(
        ip=match.group("ip"),
        ident=ident,
        user=user,
        timestamp=timestamp,
        method=method,
        url=url,
        protocol=protocol,
        status=status,
        size=None if size == "-" else int(size),
        referrer=_dash_none(match.group("referrer")),
        agent=_dash_none(match.group("agent")),
        server=server,
        line_no=line_no,
    )


def read_log(path, server: str | None = None) -> tuple[list[LogRecord], list[LogParseError]]:
    """Parse a log file (gzipped when the name ends in .gz).

    Blank lines are skipped; unparseable lines are collected as errors so
    the caller can decide how much breakage to tolerate."""
    opener = gzip.open if str(path).endswith(".gz") else open
    records: list[LogRecord] = []
    errors: list[LogParseError] = []
    with opener(path, "rt", encoding="utf-8", errors="replace") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(parse_log_line(line, server=server, line_no=line_no))
            except LogParseError as exc:
                errors.append(exc)
    return records, errors


DEFAULT_IMAGE_EXTENSIONS = (".gif", ".jpg", ".jpeg", ".png", ".bmp", ".ico")
DEFAULT_ROBOT_SUBSTRINGS = ("bot", "crawler", "spider", "slurp")


@dataclass(frozen=True)
class FilterSpec:
    """Record-level filtering rules.

    Kept records have a status inside ``status_range`` (inclusive), a URL
    not ending in one of ``image_extensions``, and do not come from a
    robot.  A visitor counts as a robot when its agent contains one of
    ``robot_substrings`` (case-insensitive) or when it ever requested
    /robots.txt anywhere in the input."""

    status_range: tuple[int, int] = (200, 399)
    image_extensions: tuple[str, ...] = DEFAULT_IMAGE_EXTENSIONS
    robot_substrings: tuple[str, ...] = DEFAULT_ROBOT_SUBSTRINGS
    drop_robots_txt_visitors: bool = True


@dataclass
class FilterCounts:
    """How many records each rule dropped (first matching rule wins, in
    the order status, image, robot)."""

    status: int = 0
    image: int = 0
    robot: int = 0

    @property
    def total(self) -> int:
        return self.status + self.image + self.robot


def visitor_key(record: LogRecord) -> tuple[str, str | None]:
    """Visitors are told apart by (ip, agent)."""
    return (record.ip, record.agent)


def _url_path(url: str) -> str:
    return urlsplit(url).path


def filter_records(
    records: list[LogRecord], spec: FilterSpec | None = None
) -> tuple[list[LogRecord], FilterCounts]:
    """Drop uninformative records, returning the survivors and counts."""
    if spec is None:
        spec = FilterSpec()
    robot_visitors: set[tuple[str, str | None]] = set()
    if spec.drop_robots_txt_visitors:
        for rec in records:
            if _url_path(rec.url) == "/robots.txt":
                robot_visitors.add(visitor_key(rec))
    lo, hi = spec.status_range
    counts = FilterCounts()
    kept: list[LogRecord] = []
    for rec in records:
        if not (lo <= rec.status <= hi):
            counts.status += 1
            continue
        path = _url_path(rec.url).lower()
        if path.endswith(spec.image_extensions):
            counts.image += 1
            continue
        agent = (rec.agent or "").lower()
        if any(s in agent for s in spec.robot_substrings) or visitor_key(rec) in robot_visitors:
            counts.robot += 1
            continue
        kept.append(rec)
    return kept, counts


@dataclass
class Navigation:
    """A visitor's consecutive requests with no gap above the threshold."""

    nav_id: int
    ip: str
    agent: str | None
    requests: list[LogRecord]

    @property
    def start(self) -> datetime:
        return self.requests[0].timestamp

    @property
    def end(self) -> datetime:
        return self.requests[-1].timestamp

    @property
    def duration(self) -> float:
        """Elapsed seconds between the first and last request."""
        return (self.end - self.start).total_seconds()

    @property
    def page_count(self) -> int:
        """Number of retained requests."""
        return len(self.requests)


def build_navigations(
    records: list[LogRecord],
    gap_seconds: float = 1800.0,
    filters: FilterSpec | None = None,
    long_only: bool = False,
    min_duration: float = 60.0,
    min_pages: int = 10,
) -> list[Navigation]:
    """Group records into navigations.

    Records are bucketed per visitor (ip, agent), ordered by timestamp,
    and split wherever the idle time strictly exceeds ``gap_seconds``
    (default 30 minutes).  When ``filters`` is given, ``filter_records``
    runs first.  With ``long_only``, navigations are kept only when both
    duration > min_duration and page count > min_pages.  Navigations are
    numbered 0..K-1 by (start time, ip, agent)."""
    if filters is not None:
        records, _ = filter_records(records, filters)
    buckets: dict[tuple[str, str | None], list[LogRecord]] = {}
    for rec in records:
        buckets.setdefault(visitor_key(rec), []).append(rec)
    navigations: list[Navigation] = []
    for (ip, agent), recs in buckets.items():
        recs = sorted(recs, key=lambda r: r.timestamp)
        run: list[LogRecord] = [recs[0]]
        for rec in recs[1:]:
            if (rec.timestamp - run[-1].timestamp).total_seconds() > gap_seconds:
                navigations.append(Navigation(0, ip, agent, run))
                run = [rec]
            else:
                run.append(rec)
        navigations.append(Navigation(0, ip, agent, run))
    if long_only:
        navigations = [
            nav
            for nav in navigations
            if nav.duration > min_duration and nav.page_count > min_pages
        ]
    navigations.sort(key=lambda nav: (nav.start, nav.ip, nav.agent or ""))
    for i, nav in enumerate(navigations):
        nav.nav_id = i
    return navigations


def filter_long(
    navigations: list[Navigation], min_duration: float = 60.0, min_pages: int = 10
) -> list[Navigation]:
    """Keep navigations with duration > min_duration and page count >
    min_pages, renumbering ids."""
    kept = [
        nav
        for nav in navigations
        if nav.duration > min_duration and nav.page_count > min_pages
    ]
    for i, nav in enumerate(kept):
        nav.nav_id = i
    return kept


@dataclass(frozen=True)
class Rubric:
    """A truncated URL: owning server plus the first path segments."""

    server: str
    levels: tuple[str, ...]

    @property
    def label(self) -> str:
        return f"{self.server}/" + "/".join(self.levels)


def truncate_url(url: str, server: str = "", depth: int = 1) -> Rubric:
    """Truncate a URL to its first ``depth`` path segments.

    The query string and fragment are dropped.  Absolute URLs carry their
    own host, which wins over ``server``."""
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    parts = urlsplit(url)
    host = parts.netloc or server
    segments = tuple(s for s in parts.path.split("/") if s)[:depth]
    return Rubric(server=host, levels=segments)


def _modality_key(rubric: Rubric) -> str:
    return "/".join(rubric.levels) if rubric.levels else "/"


def modal_table(
    navigations: list[Navigation], depth: int = 1, require_all_servers: bool = True
) -> ModalTable:
    """Per-server visit counts over truncated URLs, one variable per server.

    With ``require_all_servers`` (the default), navigations that never hit
    one of the servers are left out, since frequency profiles need at
    least one visit per variable."""
    if not navigations:
        raise ValueError("no navigations to tabulate")
    per_nav: list[dict[str, dict[str, int]]] = []
    servers: set[str] = set()
    for nav in navigations:
        counts: dict[str, dict[str, int]] = {}
        for rec in nav.requests:
            rubric = truncate_url(rec.url, server=rec.server or "", depth=depth)
            servers.add(rubric.server)
            bucket = counts.setdefault(rubric.server, {})
            key = _modality_key(rubric)
            bucket[key] = bucket.get(key, 0) + 1
        per_nav.append(counts)
    server_list = sorted(servers)
    keep = list(range(len(navigations)))
    if require_all_servers:
        keep = [i for i in keep if all(per_nav[i].get(s) for s in server_list)]
        if not keep:
            raise ValueError("no navigation touches every server")
    variables = []
    for server in server_list:
        modalities = sorted({key for i in keep for key in per_nav[i].get(server, {})})
        index = {key: j for j, key in enumerate(modalities)}
        counts = np.zeros((len(keep), len(modalities)), dtype=np.float64)
        for row, i in enumerate(keep):
            for key, c in per_nav[i].get(server, {}).items():
                counts[row, index[key]] = c
        variables.append(ModalVariable(name=server, modalities=modalities, counts=counts))
    labels = [str(navigations[i].nav_id) for i in keep]
    return ModalTable(labels=labels, variables=variables)


def binary_table(navigations: list[Navigation], depth: int = 1) -> BinaryTable:
    """Rubric-by-navigation incidence of truncated URLs."""
    if not navigations:
        raise ValueError("no navigations to tabulate")
    rubrics: set[str] = set()
    visited: list[set[str]] = []
    for nav in navigations:
        seen = {
            truncate_url(rec.url, server=rec.server or "", depth=depth).label
            for rec in nav.requests
        }
        rubrics |= seen
        visited.append(seen)
    row_labels = sorted(rubrics)
    row_index = {label: i for i, label in enumerate(row_labels)}
    bits = np.zeros((len(row_labels), len(navigations)), dtype=np.uint8)
    for j, seen in enumerate(visited):
        for label in seen:
            bits[row_index[label], j] = 1
    return BinaryTable(
        row_labels=row_labels,
        col_labels=[str(nav.nav_id) for nav in navigations],
        bits=bits,
    )


def _full_url(rec: LogRecord) -> str:
    if "://" in rec.url or not rec.server:
        return rec.url
    return f"http://{rec.server}{rec.url}"


def write_navigations(navigations: list[Navigation], path) -> None:
    """Write the navigation table: one row per retained request with its
    global request number, navigation id, time, date and full URL."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("request\tnavigation\ttime\tdate\turl\n")
        counter = 0
        for nav in navigations:
            for rec in nav.requests:
                stamp = rec.timestamp
                fh.write(
                    f"{counter}\t{nav.nav_id}\t{stamp.strftime('%H:%M:%S')}"
                    f"\t{stamp.strftime('%d/%m/%Y')}\t{_full_url(rec)}\n"
                )
                counter += 1


def write_modal_table(table: ModalTable, path) -> None:
    """Write per-server count columns headed ``server|modality``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = ["navigation"]
        for var in table.variables:
            header += [f"{var.name}|{mod}" for mod in var.modalities]
        fh.write("\t".join(header) + "\n")
        for i, label in enumerate(table.labels):
            row = [label]
            for var in table.variables:
                row += [str(int(c)) for c in var.counts[i]]
            fh.write("\t".join(row) + "\n")


def read_modal_table(path) -> ModalTable:
    """Read a table written by ``write_modal_table``."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("navigation\t"):
        raise ValueError(f"{path}: expected a 'navigation' header")
    columns = lines[0].split("\t")[1:]
    order: list[str] = []
    groups: dict[str, list[str]] = {}
    for col in columns:
        server, sep, modality = col.partition("|")
        if not sep or not server:
            raise ValueError(f"{path}: malformed column header {col!r}")
        if server not in groups:
            order.append(server)
            groups[server] = []
        groups[server].append(modality)
    labels: list[str] = []
    rows: list[list[float]] = []
    for idx, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(columns) + 1:
            raise ValueError(f"{path}: line {idx} has {len(fields)} fields")
        labels.append(fields[0])
        try:
            rows.append([float(f) for f in fields[1:]])
        except ValueError:
            raise ValueError(f"{path}: unparseable count on line {idx}") from None
    if not rows:
        raise ValueError(f"{path}: no navigations")
    data = np.asarray(rows, dtype=np.float64)
    variables = []
    offset = 0
    for server in order:
        width = len(groups[server])
        variables.append(
            ModalVariable(
                name=server,
                modalities=groups[server],
                counts=data[:, offset : offset + width].copy(),
            )
        )
        offset += width
    return ModalTable(labels=labels, variables=variables)


def write_binary_table(table: BinaryTable, path) -> None:
    """Write the incidence table, one row per rubric."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rubric\t" + "\t".join(table.col_labels) + "\n")
        for label, row in zip(table.row_labels, table.bits):
            fh.write(label + "\t" + "\t".join(str(int(b)) for b in row) + "\n")


def read_binary_table(path) -> BinaryTable:
    """Read a table written by ``write_binary_table``."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("rubric\t"):
        raise ValueError(f"{path}: expected a 'rubric' header")
    col_labels = lines[0].split("\t")[1:]
    row_labels: list[str] = []
    rows: list[list[int]] = []
    for idx, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(col_labels) + 1:
            raise ValueError(f"{path}: line {idx} has {len(fields)} fields")
        row_labels.append(fields[0])
        if any(f not in ("0", "1") for f in fields[1:]):
            raise ValueError(f"{path}: non-binary entry on line {idx}")
        rows.append([int(f) for f in fields[1:]])
    if not rows:
        raise ValueError(f"{path}: no rubrics")
    return BinaryTable(
        row_labels=row_labels,
        col_labels=col_labels,
        bits=np.asarray(rows, dtype=np.uint8),
    )
