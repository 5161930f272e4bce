"""Byte-level readers and writers for edge lists, pattern series and partition tables.

Edge list formats
-----------------
``tsv``
    ``#``-prefixed header comments, then one ``u<TAB>v`` line per edge.
    The header carries ``n_vertices`` and the generation fingerprint.
``binary``
    ``b"PSKG"``, a version byte, little-endian ``u64`` vertex count and edge
    count, then ``u64`` ``(u, v)`` pairs.
"""

from __future__ import annotations

import struct

import numpy as np

from .analysis import PatternSeries
from .generator import EdgeList
from .partition import PartitionTable

__all__ = [
    "FormatError",
    "EDGE_FORMATS",
    "write_edge_list",
    "read_edge_list",
    "read_header",
    "detect_format",
    "write_series_csv",
    "read_series_csv",
    "write_partition_table",
    "read_partition_table",
]

MAGIC = b"PSKG"
VERSION = 1
EDGE_FORMATS = ("tsv", "binary")
_HEAD = struct.Struct("<4sBQQ")


class FormatError(ValueError):
    """Input bytes do not follow the declared format."""


def write_edge_list(g: EdgeList, fmt: str = "tsv", meta: dict | None = None) -> bytes:
    if fmt == "binary":
        body = np.empty((len(g), 2), dtype="<u8")
        body[:, 0] = g.src
        body[:, 1] = g.dst
        return _HEAD.pack(MAGIC, VERSION, g.n_vertices, len(g)) + body.tobytes()
    if fmt != "tsv":
        raise ValueError(f"format must be one of {EDGE_FORMATS}, got {fmt!r}")
    head = ["# pskg edge list", f"# n_vertices: {g.n_vertices}", f"# edges: {len(g)}"]
    for key, val in (meta or {}).items():
        head.append(f"# {key}: {val}")
    lines = [f"{u}\t{v}" for u, v in zip(g.src.tolist(), g.dst.tolist())]
    return ("\n".join(head + lines) + "\n").encode("ascii")


def detect_format(data: bytes) -> str:
    return "binary" if data[:4] == MAGIC else "tsv"


def read_header(data: bytes) -> dict[str, str]:
    """``key: value`` pairs from the leading comment lines of a tsv edge list."""
    out = {}
    for line in data.decode("ascii", errors="replace").splitlines():
        if not line.startswith("#"):
            if line.strip():
                break
            continue
        key, sep, val = line[1:].partition(":")
        if sep:
            out[key.strip()] = val.strip()
    return out


def _read_binary(data: bytes) -> EdgeList:
    if len(data) < _HEAD.size:
        raise FormatError(f"truncated header: {len(data)} bytes, need {_HEAD.size}")
    magic, version, n_vertices, m = _HEAD.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    want = _HEAD.size + 16 * m
    if len(data) < want:
        raise FormatError(f"truncated body: {len(data)} bytes, header promises {want}")
    if len(data) > want:
        raise FormatError(f"{len(data) - want} trailing bytes after {m} edges")
    body = np.frombuffer(data, dtype="<u8", count=2 * m, offset=_HEAD.size).reshape(m, 2)
    if m and int(body.max()) >= n_vertices:
        raise FormatError(f"vertex id {int(body.max())} >= n_vertices {n_vertices}")
    return EdgeList(n_vertices, body[:, 0].astype(np.uint64), body[:, 1].astype(np.uint64))


def _read_tsv(data: bytes) -> EdgeList:
    n_vertices = None
    src: list[int] = []
    dst: list[int] = []
    for lineno, line in enumerate(data.decode("ascii").splitlines(), start=1):
        if line.startswith("#"):
            key, sep, val = line[1:].partition(":")
            if sep and key.strip() == "n_vertices":
                try:
                    n_vertices = int(val)
                except ValueError:
                    raise FormatError(f"line {lineno}: bad n_vertices {val.strip()!r}") from None
            continue
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise FormatError(f"line {lineno}: expected 2 tab-separated fields, got {line!r}")
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise FormatError(f"line {lineno}: non-numeric vertex id in {line!r}") from None
        if u < 0 or v < 0:
            raise FormatError(f"line {lineno}: negative vertex id")
        if n_vertices is not None and max(u, v) >= n_vertices:
            raise FormatError(f"line {lineno}: vertex id {max(u, v)} >= n_vertices {n_vertices}")
        src.append(u)
        dst.append(v)
    if n_vertices is None:
        n_vertices = max(max(src, default=-1), max(dst, default=-1)) + 1
    return EdgeList(n_vertices, np.array(src, dtype=np.uint64), np.array(dst, dtype=np.uint64))


def read_edge_list(data: bytes, fmt: str | None = None) -> EdgeList:
    """Inverse of :func:`write_edge_list`. ``fmt=None`` sniffs the magic bytes."""
    fmt = fmt or detect_format(data)
    if fmt == "binary":
        return _read_binary(data)
    if fmt == "tsv":
        try:
            return _read_tsv(data)
        except UnicodeDecodeError as exc:
            raise FormatError(f"tsv edge list is not ASCII: {exc}") from None
    raise ValueError(f"format must be one of {EDGE_FORMATS}, got {fmt!r}")


def write_series_csv(s: PatternSeries) -> bytes:
    rows = ["x,y"] + [f"{x!r},{y!r}" for x, y in zip(s.x.tolist(), s.y.tolist())]
    return ("\n".join(rows) + "\n").encode("ascii")


def read_series_csv(data: bytes, kind: str) -> PatternSeries:
    lines = data.decode("ascii").splitlines()
    if not lines or lines[0].strip() != "x,y":
        raise FormatError("series CSV must start with header 'x,y'")
    xs, ys = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            x, y = line.split(",")
            xs.append(float(x))
            ys.append(float(y))
        except ValueError:
            raise FormatError(f"line {lineno}: expected 'x,y', got {line!r}") from None
    return PatternSeries(kind, np.array(xs), np.array(ys))


def write_partition_table(t: PartitionTable) -> bytes:
    rows = [
        f"{w}\t{lo}\t{hi}\t{mass!r}"
        for w, ((lo, hi), mass) in enumerate(zip(t.ranges, t.expected_mass))
    ]
    return "".join(r + "\n" for r in rows).encode("ascii")


def read_partition_table(data: bytes) -> PartitionTable:
    ranges, mass = [], []
    for lineno, line in enumerate(data.decode("ascii").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        try:
            w, lo, hi, m = int(fields[0]), int(fields[1]), int(fields[2]), float(fields[3])
        except (ValueError, IndexError):
            raise FormatError(f"line {lineno}: expected 'worker<TAB>lo<TAB>hi<TAB>mass'") from None
        if w != len(ranges):
            raise FormatError(f"line {lineno}: worker id {w} out of order")
        ranges.append((lo, hi))
        mass.append(m)
    return PartitionTable(len(ranges), tuple(ranges), tuple(mass))
