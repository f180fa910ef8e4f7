"""Text formats: group matrices, labeled CSV matrices and vectors, run manifests."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .core import GroupedData
from .errors import DimensionError, IngestError, ValidationError

DECIMALS = 6


def fmt(x: float) -> str:
    """Fixed 6-decimal rendering; ``-0.000000`` is normalized to ``0.000000``."""
    s = f"{x:.{DECIMALS}f}"
    return s[1:] if s.startswith("-") and float(s) == 0.0 else s


def _split(line: str, comma: bool) -> list[str]:
    if comma:
        return [c.strip() for c in next(csv.reader([line]))]
    return line.split()


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def parse_groups(text: str) -> GroupedData:
    """Parse a comma- or whitespace-delimited 0/1 matrix, optionally with a label header."""
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise IngestError("file contains no data")
    comma = "," in lines[0][1]
    rows = [(no, _split(ln, comma)) for no, ln in lines]
    labels = None
    if not all(_is_number(tok) for tok in rows[0][1]):
        labels = tuple(rows[0][1])
        rows = rows[1:]
        if not rows:
            raise IngestError("header without any group rows")
    width = len(labels) if labels is not None else len(rows[0][1])
    body = np.zeros((len(rows), width))
    for r, (no, toks) in enumerate(rows, start=1):
        if len(toks) != width:
            raise IngestError(f"line {no}: expected {width} fields, found {len(toks)}", row=r)
        for c, tok in enumerate(toks, start=1):
            v = float(tok) if _is_number(tok) else None
            if v not in (0.0, 1.0):
                raise IngestError(f"row {r}, column {c}: value {tok!r} is not 0 or 1", row=r, col=c)
            body[r - 1, c - 1] = v
        if not body[r - 1].any():
            raise IngestError(f"row {r} is an empty group", row=r)
    try:
        return GroupedData(body, labels)
    except ValidationError as exc:
        raise IngestError(str(exc)) from exc


def ingest(path) -> GroupedData:
    """Read a group-by-individual matrix file (rows are groups, columns are nodes)."""
    return parse_groups(Path(path).read_text())


def format_groups(data: GroupedData) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if data.node_labels is not None:
        w.writerow(data.node_labels)
    for row in data.groups.astype(int):
        w.writerow(row.tolist())
    return buf.getvalue()


def emit(data: GroupedData, path) -> None:
    """Write ``data`` so that :func:`ingest` returns an equal object."""
    Path(path).write_text(format_groups(data))


def write_matrix(path, M: NDArray, labels: Sequence[str]) -> None:
    """Square matrix with a label header row and a leading label column."""
    if M.shape != (len(labels), len(labels)):
        raise DimensionError(f"matrix {M.shape} does not match {len(labels)} labels")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", *labels])
    for lab, row in zip(labels, M):
        w.writerow([lab, *(fmt(v) for v in row)])
    Path(path).write_text(buf.getvalue())


def read_matrix(path) -> tuple[NDArray, tuple[str, ...]]:
    """Inverse of :func:`write_matrix`; also accepts a bare numeric CSV."""
    rows = [r for r in csv.reader(Path(path).read_text().splitlines()) if r]
    if not rows:
        raise IngestError(f"{path}: empty matrix file")
    labels: Optional[tuple[str, ...]] = None
    if not all(_is_number(t) for t in rows[0]):
        labels = tuple(t.strip() for t in rows[0][1:])
        rows = [r[1:] for r in rows[1:]]
    if len({len(r) for r in rows}) != 1:
        raise IngestError(f"{path}: ragged matrix rows")
    try:
        M = np.array([[float(t) for t in r] for r in rows])
    except ValueError as exc:
        raise IngestError(f"{path}: non-numeric matrix entry") from exc
    if labels is None:
        labels = tuple(f"v{i + 1}" for i in range(M.shape[1]))
    return M, labels


def write_rho(path, rho: NDArray, labels: Sequence[str], order: Sequence[int]) -> None:
    """Labeled rho vector with 1-based original indices, rows in ``order``."""
    write_table(path, ["node", "index", "rho"], [(labels[i], i + 1, float(rho[i])) for i in order])


def read_rho(path) -> tuple[NDArray, tuple[str, ...]]:
    """Read a rho file written by :func:`write_rho`, returned in original node order."""
    rows = list(csv.DictReader(Path(path).read_text().splitlines()))
    if not rows:
        raise IngestError(f"{path}: no rho entries")
    n = len(rows)
    rho = np.zeros(n)
    labels = [""] * n
    for r in rows:
        i = int(r["index"]) - 1
        if not 0 <= i < n:
            raise IngestError(f"{path}: node index {i + 1} out of range")
        rho[i] = float(r["rho"])
        labels[i] = r["node"]
    return rho, tuple(labels)


def write_table(path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    Path(path).write_text(buf.getvalue())


def write_manifest(path, entries: Mapping[str, object]) -> None:
    """``key=value`` lines in insertion order."""
    lines = []
    for k, v in entries.items():
        if "=" in k or "\n" in str(v):
            raise ValidationError(f"manifest entry {k!r} cannot be encoded")
        lines.append(f"{k}={v}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path) -> dict[str, str]:
    out = {}
    for no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise IngestError(f"{path}: line {no} is not key=value", row=no)
        out[key] = value
    return out
