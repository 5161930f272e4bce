"""Initiator matrices, their marginals, and small explicit Kronecker powers.

Vertex ids use base-``n`` digits with the most significant digit belonging
to the first (outermost) recursion level, so ``np.kron`` ordering and the
``u = n*u + r`` accumulation agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "InitiatorError",
    "InitiatorMatrix",
    "Marginals",
    "GraphSpec",
    "MODELS",
    "cut_points",
    "parse_initiator",
    "parse_inline_initiator",
    "derive_marginals",
    "kron_power_dense",
    "kron_power_vector",
    "DENSE_ORACLE_CAP",
    "VECTOR_ORACLE_CAP",
]

RAW_SUM_TOL = 1e-3
DENSE_ORACLE_CAP = 4096
VECTOR_ORACLE_CAP = 2**24
MODELS = ("skg", "skg-equiv", "pskg")
_U64_MAX = 2**64 - 1


class InitiatorError(ValueError):
    """Raised for malformed or invalid initiator input."""


@dataclass(frozen=True, eq=False)
class InitiatorMatrix:
    """An ``n x n`` non-negative matrix whose entries sum to one.

    Raw input is accepted if its total is within ``1e-3`` of one and is
    divided by the total, since published four-digit matrices rarely sum to
    exactly one.
    """

    p: np.ndarray
    raw_sum: float = field(default=1.0, compare=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise InitiatorError(f"initiator must be square, got shape {p.shape}")
        if p.shape[0] < 2:
            raise InitiatorError("initiator side length must be at least 2")
        if not np.all(np.isfinite(p)):
            raise InitiatorError("initiator entries must be finite")
        if np.any(p < 0):
            raise InitiatorError("initiator entries must be non-negative")
        total = float(p.sum())
        if abs(total - 1.0) > RAW_SUM_TOL:
            raise InitiatorError(
                f"initiator entries sum to {total:.6g}, more than {RAW_SUM_TOL} away from 1"
            )
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "raw_sum", total)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def __eq__(self, other):
        if not isinstance(other, InitiatorMatrix):
            return NotImplemented
        return np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash(self.p.tobytes())

    def to_text(self) -> str:
        """Serialize in the initiator file format (see :func:`parse_initiator`)."""
        rows = [" ".join(repr(float(x)) for x in row) for row in self.p]
        return "\n".join([str(self.n), *rows]) + "\n"


@dataclass(frozen=True, eq=False)
class Marginals:
    """Source marginal ``u`` (row sums) and destination conditional ``v``."""

    u: np.ndarray
    v: np.ndarray

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @cached_property
    def u_cuts(self) -> np.ndarray:
        return cut_points(self.u)

    @cached_property
    def v_cuts(self) -> np.ndarray:
        c = np.stack([cut_points(row) for row in self.v])
        c.setflags(write=False)
        return c


def cut_points(probs) -> np.ndarray:
    """Inner CDF cut points for inverse-transform draws over ``len(probs)`` cells.

    ``np.searchsorted(cuts, x, side="right")`` maps ``x`` in ``[0, 1)`` to a
    cell index. Cuts past the last positive cell are ``inf`` so rounding in
    the cumulative sum can never select a zero-probability tail cell.
    """
    probs = np.asarray(probs, dtype=np.float64)
    cuts = np.cumsum(probs)[:-1]
    last = int(np.flatnonzero(probs > 0)[-1])
    cuts[last:] = np.inf
    cuts.setflags(write=False)
    return cuts


def parse_initiator(text: str) -> InitiatorMatrix:
    """Parse initiator file contents.

    The format is a line holding ``n`` followed by ``n`` lines of ``n``
    whitespace-separated reals. Lines starting with ``#`` and blank lines
    are skipped.
    """
    lines = [
        (i, ln.strip())
        for i, ln in enumerate(text.splitlines(), start=1)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise InitiatorError("initiator text is empty")
    lineno, first = lines[0]
    try:
        n = int(first)
    except ValueError:
        raise InitiatorError(f"line {lineno}: expected side length, got {first!r}") from None
    if n < 2:
        raise InitiatorError("initiator side length must be at least 2")
    rows = lines[1:]
    if len(rows) != n:
        raise InitiatorError(f"expected {n} matrix rows, found {len(rows)}")
    p = np.empty((n, n))
    for r, (lineno, ln) in enumerate(rows):
        fields = ln.split()
        if len(fields) != n:
            raise InitiatorError(f"line {lineno}: expected {n} values, found {len(fields)}")
        try:
            p[r] = [float(f) for f in fields]
        except ValueError:
            raise InitiatorError(f"line {lineno}: non-numeric entry in {ln!r}") from None
    return InitiatorMatrix(p)


def parse_inline_initiator(text: str) -> InitiatorMatrix:
    """Parse the compact ``"a,b;c,d"`` form (rows split by ``;``)."""
    try:
        rows = [[float(x) for x in row.split(",")] for row in text.strip().split(";")]
    except ValueError:
        raise InitiatorError(f"non-numeric entry in inline initiator {text!r}") from None
    if len({len(r) for r in rows}) != 1:
        raise InitiatorError("inline initiator rows have different lengths")
    return InitiatorMatrix(np.array(rows))


def derive_marginals(P: InitiatorMatrix) -> Marginals:
    u = P.p.sum(axis=1)
    if np.any(u <= 0):
        bad = np.flatnonzero(u <= 0).tolist()
        raise InitiatorError(f"initiator rows {bad} have zero mass; destination conditional undefined")
    # Renormalize u itself so it sums to 1 up to rounding, independent of P's drift.
    u = u / u.sum()
    v = P.p / P.p.sum(axis=1, keepdims=True)
    u.setflags(write=False)
    v.setflags(write=False)
    return Marginals(u=u, v=v)


def kron_power_dense(P: InitiatorMatrix, k: int) -> np.ndarray:
    """Explicit ``k``-th Kronecker power of ``P``. Test oracle only."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if P.n**k > DENSE_ORACLE_CAP:
        raise ValueError(f"n^k = {P.n**k} exceeds dense oracle cap {DENSE_ORACLE_CAP}")
    out = P.p
    for _ in range(k - 1):
        out = np.kron(out, P.p)
    return out


def kron_power_vector(u, k: int) -> np.ndarray:
    """Explicit ``k``-th Kronecker power of a probability vector. Test oracle only."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.shape[0] < 2:
        raise ValueError("marginal vector must have length at least 2")
    if k < 1:
        raise ValueError("k must be at least 1")
    if u.shape[0] ** k > VECTOR_ORACLE_CAP:
        raise ValueError(f"n^k = {u.shape[0]**k} exceeds vector oracle cap {VECTOR_ORACLE_CAP}")
    out = u
    for _ in range(k - 1):
        out = np.kron(out, u)
    return out


@dataclass(frozen=True)
class GraphSpec:
    """Everything needed to reproduce one generated graph."""

    initiator: InitiatorMatrix
    k: int
    expected_edges: float
    seed: int = 0
    model: str = "pskg"
    workers: int = 1

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        e = float(self.expected_edges)
        if not math.isfinite(e) or e < 0:
            raise ValueError(f"expected_edges must be finite and non-negative, got {self.expected_edges}")
        object.__setattr__(self, "expected_edges", e)
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError(f"workers must be a positive integer, got {self.workers}")
        if not 0 <= int(self.seed) <= _U64_MAX:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))
        if self.initiator.n**self.k > _U64_MAX:
            raise ValueError(
                f"n^k = {self.initiator.n}^{self.k} vertices does not fit in 64 bits"
            )

    @property
    def n_vertices(self) -> int:
        return self.initiator.n**self.k

    @cached_property
    def marginals(self) -> Marginals:
        return derive_marginals(self.initiator)

    def fingerprint(self) -> dict:
        return {
            "model": self.model,
            "n": self.initiator.n,
            "k": self.k,
            "E": self.expected_edges,
            "seed": self.seed,
        }
