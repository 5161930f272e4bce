"""Graph patterns used to compare generated graphs, and a distance report over them.

Four patterns are supported:

* ``degree``   -- exponentially binned degree histogram
* ``hop``      -- r(h), ordered pairs within h directed hops (self-pairs included)
* ``scree``    -- leading singular values of the multigraph adjacency matrix
* ``netvalue`` -- sorted |components| of the principal eigenvector of (A + A^T)/2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, svds

from .generator import EdgeList

__all__ = [
    "PATTERN_KINDS",
    "DEFAULT_THRESHOLDS",
    "PatternError",
    "PatternSeries",
    "PatternDistanceReport",
    "adjacency",
    "degree_distribution",
    "hop_plot",
    "scree_plot",
    "network_values",
    "graph_patterns",
    "pattern_distance",
    "compare_patterns",
    "calibrate_thresholds",
]

PATTERN_KINDS = ("degree", "hop", "scree", "netvalue")
DEFAULT_THRESHOLDS = {"degree": 0.15, "hop": 0.10, "scree": 0.10, "netvalue": 0.15}
EXACT_HOP_CAP = 10**6
_ARPACK_MAXITER = 10_000


class PatternError(RuntimeError):
    """A pattern could not be computed (size cap hit or solver did not converge)."""


@dataclass(eq=False)
class PatternSeries:
    kind: str
    x: np.ndarray
    y: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}; valid: {', '.join(PATTERN_KINDS)}")
        self.x = np.asarray(self.x, dtype=np.float64).ravel()
        self.y = np.asarray(self.y, dtype=np.float64).ravel()
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have the same length")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("x must be strictly increasing")

    def __len__(self) -> int:
        return len(self.x)

    def __eq__(self, other):
        if not isinstance(other, PatternSeries):
            return NotImplemented
        return (self.kind == other.kind and np.array_equal(self.x, other.x)
                and np.array_equal(self.y, other.y))


@dataclass
class PatternDistanceReport:
    distances: dict[str, float]
    thresholds: dict[str, float]
    passed: dict[str, bool] = field(init=False)

    def __post_init__(self):
        self.passed = {k: bool(d <= self.thresholds[k]) for k, d in self.distances.items()}

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def lines(self) -> list[str]:
        out = []
        for kind, d in self.distances.items():
            verdict = "PASS" if self.passed[kind] else "FAIL"
            out.append(f"{kind}\t{d:.6g}\t{self.thresholds[kind]:.6g}\t{verdict}")
        out.append("overall\t" + ("PASS" if self.ok else "FAIL"))
        return out


def adjacency(g: EdgeList, symmetric: bool = False) -> sp.csr_matrix:
    """Sparse adjacency with multi-edges summed into integer weights."""
    N = g.n_vertices
    a = sp.coo_matrix(
        (np.ones(len(g)), (g.src.astype(np.int64), g.dst.astype(np.int64))), shape=(N, N)
    ).tocsr()
    a.sum_duplicates()
    if symmetric:
        a = ((a + a.T) * 0.5).tocsr()
    return a


def _degrees(g: EdgeList, direction: str) -> np.ndarray:
    N = g.n_vertices
    src = g.src.astype(np.int64)
    dst = g.dst.astype(np.int64)
    if direction == "out":
        return np.bincount(src, minlength=N)
    if direction == "in":
        return np.bincount(dst, minlength=N)
    if direction == "total":
        return np.bincount(src, minlength=N) + np.bincount(dst, minlength=N)
    raise ValueError(f"direction must be 'in', 'out' or 'total', got {direction!r}")


def _bin_edges(max_degree: int, ratio: float) -> list[int]:
    edges = [0, 1]
    i = 1
    while edges[-1] <= max_degree:
        b = math.ceil(ratio**i)
        if b > edges[-1]:
            edges.append(b)
        i += 1
    return edges


def degree_distribution(g: EdgeList, direction: str = "out", bin_ratio: float = 2.0) -> PatternSeries:
    """Histogram of vertex degrees over bins ``[ceil(r^i), ceil(r^(i+1)))``.

    Degree zero gets its own bin at ``x = 0``; other bins sit at the geometric
    mean of their two boundaries. Only non-empty bins are reported, so the
    counts always add up to the vertex count.
    """
    if not bin_ratio > 1:
        raise ValueError("bin_ratio must exceed 1")
    deg = _degrees(g, direction)
    edges = _bin_edges(int(deg.max()) if len(deg) else 0, bin_ratio)
    counts, _ = np.histogram(deg, bins=edges)
    lo = np.array(edges[:-1], dtype=np.float64)
    hi = np.array(edges[1:], dtype=np.float64)
    x = np.sqrt(lo * hi)
    keep = counts > 0
    return PatternSeries("degree", x[keep], counts[keep].astype(np.float64))


@numba.njit(cache=True)
def _bfs_depth_counts(indptr, indices, roots, max_h, n):
    counts = np.zeros(max_h + 1, dtype=np.int64)
    # seen[v] == stamp marks v as visited from the current root.
    seen = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for stamp in range(len(roots)):
        root = roots[stamp]
        seen[root] = stamp
        queue[0] = root
        head, tail = 0, 1
        counts[0] += 1
        for depth in range(1, max_h + 1):
            level_end = tail
            while head < level_end:
                a = queue[head]
                head += 1
                for e in range(indptr[a], indptr[a + 1]):
                    b = indices[e]
                    if seen[b] != stamp:
                        seen[b] = stamp
                        queue[tail] = b
                        tail += 1
            counts[depth] += tail - level_end
            if tail == level_end:
                break
    return counts


def hop_plot(g: EdgeList, max_h: int = 8, sources: int | None = None, seed: int = 0) -> PatternSeries:
    """Reachable ordered pairs ``r(h)`` for ``h = 0..max_h`` by breadth-first search.

    With ``sources=None`` every vertex is a BFS root and the counts are exact.
    With an integer, that many distinct roots are drawn (seeded) and the
    counts are scaled by ``N / sources``.
    """
    N = g.n_vertices
    if max_h < 0:
        raise ValueError("max_h must be non-negative")
    if sources is None or sources >= N:
        if N > EXACT_HOP_CAP:
            raise PatternError(f"{N} vertices exceeds exact hop-plot cap {EXACT_HOP_CAP}; pass sources=")
        roots = np.arange(N)
    else:
        if sources < 1:
            raise ValueError("sources must be positive")
        roots = np.sort(np.random.default_rng(seed).choice(N, size=sources, replace=False))
    a = adjacency(g)
    counts = _bfs_depth_counts(a.indptr.astype(np.int64), a.indices.astype(np.int64),
                               roots.astype(np.int64), max_h, N)
    r = np.cumsum(counts).astype(np.float64) * (N / len(roots))
    return PatternSeries("hop", np.arange(max_h + 1, dtype=np.float64), r)


def _start_vector(n: int) -> np.ndarray:
    # Fixed start keeps ARPACK runs reproducible.
    return np.random.default_rng(0x5EED).uniform(0.5, 1.5, size=n)


def scree_plot(g: EdgeList, top_m: int = 20) -> PatternSeries:
    """The ``top_m`` largest singular values, descending, by Lanczos iteration (ARPACK)."""
    N = g.n_vertices
    if not 1 <= top_m <= min(N, 100):
        raise ValueError(f"top_m must be in [1, {min(N, 100)}], got {top_m}")
    ranks = np.arange(1, top_m + 1, dtype=np.float64)
    if len(g) == 0:
        return PatternSeries("scree", ranks, np.zeros(top_m), degenerate=True)
    a = adjacency(g)
    if top_m >= N - 1:
        # ARPACK needs top_m < N; tiny matrices go straight to LAPACK.
        s = np.linalg.svd(a.toarray(), compute_uv=False)[:top_m]
    else:
        try:
            s = svds(a, k=top_m, which="LM", return_singular_vectors=False,
                     v0=_start_vector(N), tol=0, maxiter=_ARPACK_MAXITER, solver="arpack")
        except ArpackNoConvergence as exc:
            raise PatternError(f"singular values did not converge: {exc}") from exc
    s = np.sort(np.abs(s))[::-1]
    return PatternSeries("scree", ranks, s)


def network_values(g: EdgeList, top_m: int = 100) -> PatternSeries:
    """Largest ``top_m`` absolute components of the unit principal eigenvector of ``(A + A^T)/2``.

    An edgeless graph has no principal direction; it yields zeros with
    ``degenerate=True``.
    """
    N = g.n_vertices
    if not 1 <= top_m <= N:
        raise ValueError(f"top_m must be in [1, {N}], got {top_m}")
    ranks = np.arange(1, top_m + 1, dtype=np.float64)
    if len(g) == 0:
        return PatternSeries("netvalue", ranks, np.zeros(top_m), degenerate=True)
    s = adjacency(g, symmetric=True)
    if N < 3:
        w, vecs = np.linalg.eigh(s.toarray())
        vec = vecs[:, -1]
    else:
        try:
            w, vecs = eigsh(s, k=1, which="LA", v0=_start_vector(N), tol=0,
                            maxiter=_ARPACK_MAXITER)
        except ArpackNoConvergence as exc:
            raise PatternError(f"principal eigenvector did not converge: {exc}") from exc
        vec = vecs[:, 0]
    vec = np.abs(vec) / np.linalg.norm(vec)
    return PatternSeries("netvalue", ranks, np.sort(vec)[::-1][:top_m])


def graph_patterns(g: EdgeList, kinds=PATTERN_KINDS, direction: str = "out",
                   bin_ratio: float = 2.0, max_h: int = 8, hop_sources: int | None = None,
                   scree_m: int = 20, netvalue_m: int = 100, seed: int = 0) -> dict[str, PatternSeries]:
    """Compute the requested patterns with shared settings."""
    out = {}
    for kind in kinds:
        if kind == "degree":
            out[kind] = degree_distribution(g, direction, bin_ratio)
        elif kind == "hop":
            out[kind] = hop_plot(g, max_h, hop_sources, seed)
        elif kind == "scree":
            out[kind] = scree_plot(g, min(scree_m, g.n_vertices, 100))
        elif kind == "netvalue":
            out[kind] = network_values(g, min(netvalue_m, g.n_vertices))
        else:
            raise ValueError(f"unknown pattern {kind!r}; valid: {', '.join(PATTERN_KINDS)}")
    return out


def _relative_l1(ya: np.ndarray, yb: np.ndarray) -> float:
    scale = 0.5 * (np.abs(ya).sum() + np.abs(yb).sum())
    diff = np.abs(ya - yb).sum()
    if diff == 0.0:
        return 0.0
    return float(diff / scale)


def pattern_distance(a: PatternSeries, b: PatternSeries) -> float:
    """Symmetric relative L1 distance between two series of the same kind.

    Degree histograms share a discrete bin grid and are aligned bin by bin
    (missing bins count as zero). Other kinds are interpolated onto the union
    of their x values inside the common x range, in log-x for ``netvalue``.
    """
    if a.kind != b.kind:
        raise ValueError(f"cannot compare {a.kind!r} with {b.kind!r}")
    if a.kind == "degree":
        grid = np.union1d(a.x, b.x)
        ya = np.zeros(len(grid))
        yb = np.zeros(len(grid))
        ya[np.searchsorted(grid, a.x)] = a.y
        yb[np.searchsorted(grid, b.x)] = b.y
        return _relative_l1(ya, yb)
    if len(a) == 0 or len(b) == 0:
        return 0.0 if len(a) == len(b) else math.inf
    lo, hi = max(a.x[0], b.x[0]), min(a.x[-1], b.x[-1])
    if lo > hi:
        return math.inf
    grid = np.union1d(a.x, b.x)
    grid = grid[(grid >= lo) & (grid <= hi)]
    if a.kind == "netvalue":
        ya = np.interp(np.log(grid), np.log(a.x), a.y)
        yb = np.interp(np.log(grid), np.log(b.x), b.y)
    else:
        ya = np.interp(grid, a.x, a.y)
        yb = np.interp(grid, b.x, b.y)
    return _relative_l1(ya, yb)


def compare_patterns(a: dict[str, PatternSeries], b: dict[str, PatternSeries],
                     thresholds: dict[str, float] | None = None) -> PatternDistanceReport:
    if set(a) != set(b):
        raise ValueError(f"pattern sets differ: {sorted(a)} vs {sorted(b)}")
    th = dict(DEFAULT_THRESHOLDS)
    if thresholds:
        th.update(thresholds)
    distances = {}
    for kind in [k for k in PATTERN_KINDS if k in a]:
        if a[kind].kind != kind or b[kind].kind != kind:
            raise ValueError(f"series filed under {kind!r} has kind {a[kind].kind!r}/{b[kind].kind!r}")
        distances[kind] = pattern_distance(a[kind], b[kind])
    return PatternDistanceReport(distances, {k: th[k] for k in distances})


def calibrate_thresholds(null_pairs, sigmas: float = 3.0) -> dict[str, float]:
    """Per-kind ``mean + sigmas * std`` of distances between same-model pattern pairs.

    ``null_pairs`` is an iterable of ``(patterns_a, patterns_b)`` computed
    from graphs generated with identical parameters and different seeds.
    """
    samples: dict[str, list[float]] = {}
    for pa, pb in null_pairs:
        for kind in pa:
            samples.setdefault(kind, []).append(pattern_distance(pa[kind], pb[kind]))
    out = {}
    for kind, d in samples.items():
        d = np.asarray(d)
        sd = d.std(ddof=1) if len(d) > 1 else 0.0
        out[kind] = float(d.mean() + sigmas * sd)
    return out
