"""In-process BSP-style runner for parallel PSKG generation.

Each worker gets one broadcast :class:`Broadcast` and its own vertex range,
generates every out-edge of those vertices from per-vertex streams, and
hands back plain arrays. There is no channel between workers, so the merged
output does not depend on how many there are.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .generator import EdgeList, _draw_destinations, digit_weights, sample_poisson
from .generator import skg_equiv_generate, skg_generate
from .initiator import GraphSpec, Marginals
from .partition import PartitionTable, compute_partition, uniform_partition
from .streams import VertexStreams

__all__ = ["Broadcast", "WorkerTask", "WorkerOutput", "run_generation", "merge_edge_outputs",
           "plan_tasks"]

log = logging.getLogger(__name__)

# Vertices per vectorized load computation inside a worker.
_LOAD_BLOCK = 1 << 16


@dataclass(frozen=True, eq=False)
class Broadcast:
    """Read-only state scattered to every worker before generation."""

    E: float
    u: np.ndarray
    v: np.ndarray
    k: int
    seed: int

    @classmethod
    def from_spec(cls, spec: GraphSpec) -> Broadcast:
        m = spec.marginals
        return cls(E=spec.expected_edges, u=m.u, v=m.v, k=spec.k, seed=spec.seed)

    @property
    def n(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class WorkerTask:
    worker_id: int
    lo: int
    hi: int
    config: Broadcast


@dataclass(frozen=True)
class WorkerOutput:
    worker_id: int
    src: np.ndarray
    dst: np.ndarray


def _block_loads(u_marg: np.ndarray, n: int, k: int, lo: int, hi: int) -> np.ndarray:
    # Same multiplication order as generator.vertex_load, so loads are bit-identical.
    z = np.arange(lo, hi, dtype=np.uint64)
    nn = np.uint64(n)
    p = np.ones(hi - lo)
    for _ in range(k):
        p *= u_marg[(z % nn).astype(np.intp)]
        z //= nn
    return p


def run_task(task: WorkerTask) -> WorkerOutput:
    """Generate all out-edges of ``[task.lo, task.hi)``. Touches nothing but ``task``."""
    cfg = task.config
    n, k, E = cfg.n, cfg.k, cfg.E
    marg = Marginals(u=cfg.u, v=cfg.v)
    streams = VertexStreams(cfg.seed)
    weights = digit_weights(n, k)
    src_parts: list[np.ndarray] = []
    dst_parts: list[np.ndarray] = []
    for blo in range(task.lo, task.hi, _LOAD_BLOCK):
        bhi = min(task.hi, blo + _LOAD_BLOCK)
        means = (E * _block_loads(cfg.u, n, k, blo, bhi)).tolist()
        for off, mean in enumerate(means):
            # Skip only exact zeros; tiny positive means are still sampled.
            if mean == 0.0:
                continue
            u = blo + off
            rng = streams(u)
            x = sample_poisson(mean, rng)
            if not x:
                continue
            z, digits = u, []
            for _ in range(k):
                z, l = divmod(z, n)
                digits.append(l)
            dst = _draw_destinations(marg, np.array(digits, dtype=np.intp),
                                     rng.random((x, k)), weights)
            src_parts.append(np.full(x, u, dtype=np.uint64))
            dst_parts.append(dst)
    if src_parts:
        return WorkerOutput(task.worker_id, np.concatenate(src_parts), np.concatenate(dst_parts))
    empty = np.empty(0, dtype=np.uint64)
    return WorkerOutput(task.worker_id, empty, empty)


def plan_tasks(spec: GraphSpec, balance: str = "load") -> tuple[PartitionTable, list[WorkerTask]]:
    """Partition the vertex set and attach the broadcast to one task per worker."""
    N = spec.n_vertices
    # More workers than vertices would leave some idle anyway.
    n_workers = min(spec.workers, N)
    if balance == "load":
        table = compute_partition(spec.marginals, spec.k, n_workers)
    elif balance == "uniform":
        table = uniform_partition(spec.marginals, spec.k, n_workers)
    else:
        raise ValueError(f"balance must be 'load' or 'uniform', got {balance!r}")
    cfg = Broadcast.from_spec(spec)
    tasks = [WorkerTask(w, lo, hi, cfg) for w, (lo, hi) in enumerate(table.ranges)]
    return table, tasks


def merge_edge_outputs(parts, n_vertices: int) -> EdgeList:
    """Join worker outputs into one edge list in canonical order.

    Parts are reordered by worker id. Their source ranges must not overlap.
    The result is sorted by source; each source keeps its draw order.
    """
    parts = sorted(parts, key=lambda p: p.worker_id)
    spans = [(int(p.src.min()), int(p.src.max()), p.worker_id) for p in parts if len(p.src)]
    for (lo_a, hi_a, wa), (lo_b, hi_b, wb) in zip(spans, spans[1:]):
        if lo_b <= hi_a:
            raise ValueError(
                f"workers {wa} and {wb} have overlapping source ranges "
                f"[{lo_a}, {hi_a}] and [{lo_b}, {hi_b}]"
            )
    if not parts:
        return EdgeList(n_vertices, np.empty(0), np.empty(0))
    src = np.concatenate([p.src for p in parts])
    dst = np.concatenate([p.dst for p in parts])
    g = EdgeList(n_vertices, src, dst)
    if len(src) and np.any(src[1:] < src[:-1]):
        g = g.canonical()
    return g


def run_generation(spec: GraphSpec, balance: str = "load", processes: int | None = None) -> EdgeList:
    """Generate the graph described by ``spec``.

    For ``pskg`` the vertex set is split over ``spec.workers`` tasks that run
    in up to ``processes`` OS processes (default: one per task, capped at
    the CPU count). The edge-centric models run sequentially on one stream.
    """
    if spec.model == "skg":
        return skg_generate(spec)
    if spec.model == "skg-equiv":
        return skg_equiv_generate(spec)

    table, tasks = plan_tasks(spec, balance)
    if processes is None:
        processes = min(len(tasks), os.cpu_count() or 1)
    log.debug("pskg: %d tasks, ranges %s, %d processes", len(tasks), table.ranges, processes)
    if processes <= 1 or len(tasks) == 1:
        outputs = [run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=processes) as pool:
            outputs = list(pool.map(run_task, tasks))
    return merge_edge_outputs(outputs, spec.n_vertices)
