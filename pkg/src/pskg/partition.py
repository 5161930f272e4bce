"""Probabilistic load balancing over contiguous vertex ranges.

Vertex loads form the ``k``-fold Kronecker power of ``U``. That vector is
never materialized: prefix sums and quantile lookups walk the ``n``-ary
digit tree from the most significant digit down, in ``O(k * n)`` per query.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .initiator import Marginals

__all__ = [
    "PartitionTable",
    "ImbalanceBound",
    "locate_boundary",
    "cumulative_load",
    "compute_partition",
    "uniform_partition",
    "imbalance_bound",
    "max_load_exceedance",
]


@dataclass(frozen=True)
class PartitionTable:
    """Per-worker half-open vertex ranges ``[lo, hi)`` and their expected load share."""

    n_workers: int
    ranges: tuple[tuple[int, int], ...]
    expected_mass: tuple[float, ...]

    def __post_init__(self):
        if len(self.ranges) != self.n_workers or len(self.expected_mass) != self.n_workers:
            raise ValueError("one range and one mass per worker required")
        prev = 0
        for lo, hi in self.ranges:
            if lo != prev or hi < lo:
                raise ValueError(f"ranges must tile contiguously, got {self.ranges}")
            prev = hi

    @property
    def n_vertices(self) -> int:
        return self.ranges[-1][1]

    def owner(self, u: int) -> int:
        for w, (lo, hi) in enumerate(self.ranges):
            if lo <= u < hi:
                return w
        raise IndexError(f"vertex {u} outside [0, {self.n_vertices})")


@dataclass(frozen=True)
class ImbalanceBound:
    """Upper end of the confidence interval for the maximum worker load."""

    per_worker_mean: float
    delta: float
    alpha: float

    @property
    def upper(self) -> float:
        return self.per_worker_mean + self.delta


def locate_boundary(marg: Marginals, k: int, r: float) -> int:
    """Vertex ``u`` whose cumulative-load interval ``[C(u), C(u+1))`` contains ``r``.

    ``r >= 1`` returns the last vertex.
    """
    n = marg.n
    if r >= 1.0:
        return n**k - 1
    u_marg = marg.u.tolist()
    b = 0.0
    p_range = 1.0
    u = 0
    for _ in range(k):
        chosen = n - 1
        for d in range(n - 1):
            child = u_marg[d] * p_range
            if r < b + child:
                chosen = d
                break
            b += child
        p_range *= u_marg[chosen]
        u = u * n + chosen
    return u


def cumulative_load(marg: Marginals, k: int, u: int) -> float:
    """Total load of vertices ``0..u-1``.

    Uses the same floating-point operations as :func:`locate_boundary`, so
    ``cumulative_load(locate_boundary(r)) <= r`` holds exactly.
    """
    n = marg.n
    N = n**k
    if not 0 <= u <= N:
        raise ValueError(f"vertex {u} outside [0, {N}]")
    if u == N:
        return 1.0
    u_marg = marg.u.tolist()
    digits = []
    z = int(u)
    for _ in range(k):
        z, l = divmod(z, n)
        digits.append(l)
    b = 0.0
    p_range = 1.0
    for d in reversed(digits):
        for e in range(d):
            b += u_marg[e] * p_range
        p_range *= u_marg[d]
    return b


def _table(marg: Marginals, k: int, bounds: list[int]) -> PartitionTable:
    cum = [cumulative_load(marg, k, b) for b in bounds]
    ranges = tuple((bounds[w], bounds[w + 1]) for w in range(len(bounds) - 1))
    mass = tuple(cum[w + 1] - cum[w] for w in range(len(bounds) - 1))
    return PartitionTable(len(ranges), ranges, mass)


def compute_partition(marg: Marginals, k: int, n_workers: int) -> PartitionTable:
    """Split ``[0, n**k)`` so that each worker expects about ``1/n_workers`` of the edges.

    Worker ``w`` owns ``[locate(w/N_w), locate((w+1)/N_w))``. The first and
    last bounds are pinned to ``0`` and ``n**k``. A vertex whose load spans
    several quantiles leaves the workers in between with empty ranges.
    """
    N = marg.n**k
    if n_workers < 1:
        raise ValueError(f"need at least one worker, got {n_workers}")
    if n_workers > N:
        raise ValueError(f"more workers ({n_workers}) than vertices ({N})")
    bounds = [0]
    bounds += [locate_boundary(marg, k, w / n_workers) for w in range(1, n_workers)]
    bounds.append(N)
    return _table(marg, k, bounds)


def uniform_partition(marg: Marginals, k: int, n_workers: int) -> PartitionTable:
    """Equal vertex counts per worker, ignoring load. Baseline for balance comparisons."""
    N = marg.n**k
    if not 1 <= n_workers <= N:
        raise ValueError(f"need 1 <= workers <= {N}, got {n_workers}")
    bounds = [w * N // n_workers for w in range(n_workers + 1)]
    return _table(marg, k, bounds)


def imbalance_bound(E: float, n_workers: int, alpha: float) -> ImbalanceBound:
    """Half-width ``delta`` above ``E / N_w`` that the max worker load should stay under.

    ``delta = sqrt(2E/N_w) * sqrt(ln N_w + |ln|ln(1 - alpha)||)``.
    """
    if not E > 0 or not math.isfinite(E):
        raise ValueError(f"E must be positive and finite, got {E}")
    if n_workers < 2:
        raise ValueError("the bound needs at least two workers")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    mean = E / n_workers
    delta = math.sqrt(2.0 * mean) * math.sqrt(
        math.log(n_workers) + abs(math.log(abs(math.log(1.0 - alpha))))
    )
    return ImbalanceBound(per_worker_mean=mean, delta=delta, alpha=alpha)


def max_load_exceedance(E: float, n_workers: int, alpha: float, trials: int,
                        rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo fraction of trials whose max worker load exceeds ``E/N_w + delta``.

    Worker loads are i.i.d. Poisson(``E/N_w``), the perfect-split assumption
    behind the bound. Returns ``(fraction, allowed)`` where ``allowed`` is
    ``1 - alpha`` plus three Monte-Carlo standard errors.
    """
    bound = imbalance_bound(E, n_workers, alpha)
    loads = rng.poisson(bound.per_worker_mean, size=(trials, n_workers))
    frac = float(np.mean(loads.max(axis=1) > bound.upper))
    q = 1.0 - alpha
    allowed = q + 3.0 * math.sqrt(q * (1.0 - q) / trials)
    return frac, allowed
