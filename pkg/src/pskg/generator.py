"""Edge generation: original SKG, its Bayes-decomposed form, and per-vertex PSKG.

All three produce the same cell distribution ``P_k``. The edge-centric models
drop exactly ``round(E)`` edges; PSKG gives every vertex an independent
Poisson out-degree whose means sum to ``E``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .initiator import GraphSpec, Marginals, cut_points
from .streams import SKG_STREAM_ID, derive_stream

__all__ = [
    "EdgeList",
    "skg_generate",
    "skg_equiv_generate",
    "vertex_load",
    "sample_poisson",
    "pskg_vertex_edges",
    "digit_weights",
]

# Number of uniforms drawn per vectorized block in the edge-centric models.
_BLOCK = 1 << 20


@dataclass(eq=False)
class EdgeList:
    """A directed multigraph on vertices ``0..n_vertices-1``.

    Edges are kept as two parallel ``uint64`` arrays in generation order.
    Self-loops and repeated edges are allowed.
    """

    n_vertices: int
    src: np.ndarray
    dst: np.ndarray

    def __post_init__(self):
        self.n_vertices = int(self.n_vertices)
        self.src = np.ascontiguousarray(self.src, dtype=np.uint64)
        self.dst = np.ascontiguousarray(self.dst, dtype=np.uint64)
        if self.src.shape != self.dst.shape or self.src.ndim != 1:
            raise ValueError("src and dst must be 1-d arrays of equal length")
        if len(self.src) and max(int(self.src.max()), int(self.dst.max())) >= self.n_vertices:
            raise ValueError(f"edge endpoint outside [0, {self.n_vertices})")

    @classmethod
    def from_pairs(cls, n_vertices: int, pairs) -> EdgeList:
        arr = np.array(list(pairs), dtype=np.uint64).reshape(-1, 2)
        return cls(n_vertices, arr[:, 0], arr[:, 1])

    def __len__(self) -> int:
        return len(self.src)

    def __eq__(self, other):
        if not isinstance(other, EdgeList):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
        )

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def canonical(self) -> EdgeList:
        """Stable sort by source, keeping each source's generation order."""
        order = np.argsort(self.src, kind="stable")
        return EdgeList(self.n_vertices, self.src[order], self.dst[order])

    def dedupe(self) -> EdgeList:
        """Drop repeated ``(u, v)`` pairs, keeping first occurrences in order."""
        if not len(self):
            return self
        pairs = np.stack([self.src, self.dst], axis=1)
        _, first = np.unique(pairs, axis=0, return_index=True)
        first.sort()
        return EdgeList(self.n_vertices, self.src[first], self.dst[first])


def digit_weights(n: int, k: int) -> np.ndarray:
    """``n**j`` for ``j = 0..k-1`` as ``uint64`` (digit ``j`` counted from the least significant)."""
    return np.array([n**j for j in range(k)], dtype=np.uint64)


def _edge_count(spec: GraphSpec) -> int:
    return int(round(spec.expected_edges))


def skg_generate(spec: GraphSpec, rng: np.random.Generator | None = None) -> EdgeList:
    """Drop ``round(E)`` edges one recursion level at a time, choosing a cell of ``P`` per level."""
    if rng is None:
        rng = derive_stream(spec.seed, SKG_STREAM_ID)
    n, k = spec.initiator.n, spec.k
    m = _edge_count(spec)
    cuts = cut_points(spec.initiator.p.ravel())
    nn = np.uint64(n)
    src = np.empty(m, dtype=np.uint64)
    dst = np.empty(m, dtype=np.uint64)
    step = max(1, _BLOCK // k)
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        x = rng.random((hi - lo, k))
        cell = np.searchsorted(cuts, x, side="right").astype(np.uint64)
        r, s = cell // nn, cell % nn
        u = np.zeros(hi - lo, dtype=np.uint64)
        v = np.zeros(hi - lo, dtype=np.uint64)
        for j in range(k):
            u = u * nn + r[:, j]
            v = v * nn + s[:, j]
        src[lo:hi] = u
        dst[lo:hi] = v
    return EdgeList(spec.n_vertices, src, dst)


def _draw_destinations(marg: Marginals, src_digits: np.ndarray, x: np.ndarray,
                       weights: np.ndarray) -> np.ndarray:
    # src_digits[..., j] is the source's digit at weight n**j; the destination
    # digit drawn from that row of V lands at the same weight.
    cuts = marg.v_cuts[src_digits]
    s = (x[..., None] >= cuts).sum(axis=-1).astype(np.uint64)
    return (s * weights).sum(axis=-1, dtype=np.uint64)


def skg_equiv_generate(spec: GraphSpec, rng: np.random.Generator | None = None) -> EdgeList:
    """Bayes-decomposed SKG: source from ``U^[k]`` first, then destination given source."""
    if rng is None:
        rng = derive_stream(spec.seed, SKG_STREAM_ID)
    marg = spec.marginals
    n, k = marg.n, spec.k
    m = _edge_count(spec)
    nn = np.uint64(n)
    weights = digit_weights(n, k)
    src = np.empty(m, dtype=np.uint64)
    dst = np.empty(m, dtype=np.uint64)
    step = max(1, _BLOCK // (2 * k))
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        x = rng.random((hi - lo, 2 * k))
        r = np.searchsorted(marg.u_cuts, x[:, :k], side="right").astype(np.uint64)
        u = np.zeros(hi - lo, dtype=np.uint64)
        for j in range(k):
            u = u * nn + r[:, j]
        # r[:, j] was accumulated most-significant-first, so weight n**j holds r[:, k-1-j].
        src_digits = r[:, ::-1].astype(np.intp)
        src[lo:hi] = u
        dst[lo:hi] = _draw_destinations(marg, src_digits, x[:, k:], weights)
    return EdgeList(spec.n_vertices, src, dst)


def _digits_lsb(u: int, n: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        u, l = divmod(u, n)
        out.append(l)
    return out


def vertex_load(marg: Marginals, k: int, u: int) -> float:
    """Expected share of all edges leaving vertex ``u``: product of ``U`` over its digits."""
    p = 1.0
    z = int(u)
    n = marg.n
    u_marg = marg.u.tolist()
    for _ in range(k):
        z, l = divmod(z, n)
        p *= u_marg[l]
    return p


# PTRS constants are only valid for means at or above this value.
_PTRS_MIN_MEAN = 10.0


def _check_mean(mean: float) -> float:
    mean = float(mean)
    if not math.isfinite(mean) or mean < 0:
        raise ValueError(f"Poisson mean must be finite and non-negative, got {mean}")
    return mean


def _poisson_inversion(lam: float, rng: np.random.Generator) -> int:
    x = 0
    p = math.exp(-lam)
    f = p
    w = rng.random()
    while w > f and p > 0.0:
        x += 1
        p *= lam / x
        f += p
    return x


def _ptrs_constants(lam: float):
    slam = math.sqrt(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    return a, b, inv_alpha, vr


def _poisson_ptrs(lam: float, rng: np.random.Generator) -> int:
    # Hoermann (1993), transformed rejection with squeeze.
    a, b, inv_alpha, vr = _ptrs_constants(lam)
    log_lam = math.log(lam)
    while True:
        w = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(w)
        if us <= 0.0:
            continue
        x = math.floor((2.0 * a / us + b) * w + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return x
        if x < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b)
                <= -lam + x * log_lam - math.lgamma(x + 1)):
            return x


def _poisson_inversion_vec(lam: float, rng: np.random.Generator, size: int) -> np.ndarray:
    w = rng.random(size)
    out = np.zeros(size, dtype=np.int64)
    p = math.exp(-lam)
    f = p
    x = 0
    active = w > f
    while active.any() and p > 0.0:
        x += 1
        p *= lam / x
        out[active] = x
        f += p
        active &= w > f
    return out


def _poisson_ptrs_vec(lam: float, rng: np.random.Generator, size: int) -> np.ndarray:
    a, b, inv_alpha, vr = _ptrs_constants(lam)
    log_lam = math.log(lam)
    out = np.empty(size, dtype=np.int64)
    pending = np.arange(size)
    while pending.size:
        w = rng.random(pending.size) - 0.5
        v = rng.random(pending.size)
        us = 0.5 - np.abs(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.floor((2.0 * a / us + b) * w + lam + 0.43)
            fast = (us >= 0.07) & (v <= vr)
            reject = (us <= 0.0) | (x < 0) | ((us < 0.013) & (v > us))
            lhs = np.log(v) + math.log(inv_alpha) - np.log(a / (us * us) + b)
            rhs = -lam + x * log_lam - gammaln(np.maximum(x, 0) + 1)
        ok = fast | (~reject & (lhs <= rhs))
        out[pending[ok]] = x[ok].astype(np.int64)
        pending = pending[~ok]
    return out


def sample_poisson(mean: float, rng: np.random.Generator, size: int | None = None):
    """Draw from Poisson(``mean``) using only uniform doubles from ``rng``.

    Means below 10 use sequential-search inversion; larger means use PTRS.
    With ``size=None`` a Python ``int`` is returned, otherwise an ``int64``
    array. ``mean == 0`` returns zeros without touching the stream.
    """
    lam = _check_mean(mean)
    if size is None:
        if lam == 0.0:
            return 0
        if lam < _PTRS_MIN_MEAN:
            return _poisson_inversion(lam, rng)
        return _poisson_ptrs(lam, rng)
    if lam == 0.0:
        return np.zeros(size, dtype=np.int64)
    if lam < _PTRS_MIN_MEAN:
        return _poisson_inversion_vec(lam, rng, size)
    return _poisson_ptrs_vec(lam, rng, size)


def pskg_vertex_edges(marg: Marginals, k: int, E: float, u: int,
                      rng: np.random.Generator, weights: np.ndarray | None = None) -> np.ndarray:
    """Destinations of the out-edges of vertex ``u`` in one PSKG draw.

    The out-degree is Poisson(``E * vertex_load(u)``); each destination
    then takes ``k`` digit draws from the rows of ``V`` selected by ``u``'s
    digits. Returns a ``uint64`` array in draw order.
    """
    mean = E * vertex_load(marg, k, u)
    if mean == 0.0:
        return np.empty(0, dtype=np.uint64)
    x = sample_poisson(mean, rng)
    if x == 0:
        return np.empty(0, dtype=np.uint64)
    if weights is None:
        weights = digit_weights(marg.n, k)
    digits = np.array(_digits_lsb(int(u), marg.n, k), dtype=np.intp)
    return _draw_destinations(marg, digits, rng.random((x, k)), weights)
