"""On-disk formats: distance matrices, partitions, streams, CSV tables,
and the content-hash manifest.

All writes are atomic (temp file in the target directory, then rename).
Floats are serialized with repr, the shortest round-tripping form, so any
value with up to 12 significant digits survives a write/read cycle
bit-exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import MatrixFormatError
from .hierarchy import Stream
from .quotient import Partition
from .spaces import FiniteMetricSpace, MetricSpace, validate_metric

MANIFEST_NAME = "manifest"
STREAM_DISTANCE_RULE = "euclidean"


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Distance matrix files
# ---------------------------------------------------------------------------

def write_matrix(path: Path, space: MetricSpace) -> None:
    """UTF-8 text: first line n, then n lines of n space-separated reals.
    Lines starting with '#' are comments."""
    n = space.n
    idx = np.arange(n)
    lines = [f"# {space.label}" if space.label else "# distance matrix", str(n)]
    for i in range(n):
        row = space.distance_block(idx[i : i + 1], idx)[0]
        lines.append(" ".join(repr(float(v)) for v in row))
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_matrix(path: Path) -> FiniteMetricSpace:
    tokens: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens.append(line.split())
    if not tokens:
        raise MatrixFormatError(f"{path}: no data lines")
    if len(tokens[0]) != 1:
        raise MatrixFormatError(f"{path}: first data line must be the order n")
    try:
        n = int(tokens[0][0])
    except ValueError:
        raise MatrixFormatError(f"{path}: bad order {tokens[0][0]!r}") from None
    rows = tokens[1:]
    if len(rows) != n:
        raise MatrixFormatError(f"{path}: expected {n} rows, found {len(rows)}")
    mat = np.empty((n, n), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise MatrixFormatError(f"{path}: row {i} has {len(row)} entries, expected {n}")
        try:
            mat[i] = [float(v) for v in row]
        except ValueError as exc:
            raise MatrixFormatError(f"{path}: row {i}: {exc}") from None
    return validate_metric(mat)


# ---------------------------------------------------------------------------
# Partition files
# ---------------------------------------------------------------------------

def write_partition(path: Path, partition: Partition) -> None:
    """UTF-8 lines `class_id: point_id,point_id,...`; '#' comments."""
    lines = ["# partition"]
    for cid, members in partition.classes.items():
        ordered = sorted(members, key=partition.parent_space.index_of)
        lines.append(f"{cid}: {','.join(str(p) for p in ordered)}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_partition(path: Path, space: MetricSpace) -> Partition:
    classes: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise MatrixFormatError(f"{path}: expected 'class_id: members', got {line!r}")
            cid, members = line.split(":", 1)
            classes[cid.strip()] = {m.strip() for m in members.split(",") if m.strip()}
    return Partition(space, classes)


# ---------------------------------------------------------------------------
# Stream files
# ---------------------------------------------------------------------------

def write_stream(path: Path, stream: Stream) -> None:
    """CSV `index,coord_0,...` preceded by a header comment declaring the
    distance rule (euclidean only)."""
    k = stream.coords.shape[1]
    lines = [f"# distance: {STREAM_DISTANCE_RULE}"]
    lines.append(",".join(["index"] + [f"coord_{j}" for j in range(k)]))
    for i, row in enumerate(stream.coords):
        lines.append(",".join([str(i)] + [repr(float(v)) for v in row]))
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_stream(path: Path) -> Stream:
    rule = None
    rows = []
    header = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "distance:" in line:
                    rule = line.split("distance:", 1)[1].strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(line.split(","))
    if rule != STREAM_DISTANCE_RULE:
        raise MatrixFormatError(f"{path}: unsupported distance rule {rule!r}")
    if header is None or header[0] != "index":
        raise MatrixFormatError(f"{path}: missing 'index,coord_...' header")
    coords = np.array([[float(v) for v in row[1:]] for row in rows])
    return Stream(coords)


# ---------------------------------------------------------------------------
# CSV + manifest
# ---------------------------------------------------------------------------

def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    sink = io.StringIO()
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} does not match header {list(header)}")
        writer.writerow([str(v) for v in row])
    atomic_write_text(Path(path), sink.getvalue())


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: Path, filenames: Sequence[str]) -> Path:
    """Content-addressed listing `<sha256>  <name>` of every output file."""
    out_dir = Path(out_dir)
    lines = [f"{sha256_file(out_dir / name)}  {name}" for name in sorted(filenames)]
    target = out_dir / MANIFEST_NAME
    atomic_write_text(target, "\n".join(lines) + "\n")
    return target
