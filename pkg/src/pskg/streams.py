"""Deterministic, independent random streams keyed by ``(seed, stream id)``.

Each stream is a Philox4x64 counter-based generator whose 128-bit key is the
pair ``(seed, stream_id)``. The mapping is injective, needs no coordination
between workers, and yields the same sequence on every platform.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_stream", "derive_vertex_stream", "VertexStreams", "SKG_STREAM_ID"]

_MASK64 = (1 << 64) - 1

# Edge-centric models draw from one stream; keep it away from vertex ids.
SKG_STREAM_ID = _MASK64


def _key(seed: int, stream_id: int) -> np.ndarray:
    if not (0 <= seed <= _MASK64 and 0 <= stream_id <= _MASK64):
        raise ValueError("seed and stream id must be unsigned 64-bit values")
    return np.array([seed, stream_id], dtype=np.uint64)


def derive_stream(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=_key(int(seed), int(stream_id))))


def derive_vertex_stream(seed: int, u: int) -> np.random.Generator:
    """Stream owned by vertex ``u``; identical for any worker that owns ``u``."""
    return derive_stream(seed, u)


class VertexStreams:
    """Re-keys a single Philox instance per vertex.

    Equivalent to calling :func:`derive_vertex_stream` for every vertex but
    avoids constructing a fresh generator each time. The returned generator
    is only valid until the next call.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._bitgen = np.random.Philox(key=_key(self.seed, 0))
        self._gen = np.random.Generator(self._bitgen)
        self._state = self._bitgen.state
        self._zero4 = np.zeros(4, dtype=np.uint64)

    def __call__(self, u: int) -> np.random.Generator:
        st = self._state
        st["state"] = {"counter": self._zero4.copy(), "key": _key(self.seed, u)}
        st["buffer"] = self._zero4.copy()
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bitgen.state = st
        return self._gen
