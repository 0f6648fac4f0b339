"""Counter-based random number streams for reproducible parallel ensembles.

Every stochastic path in this package owns a Philox stream keyed by
``(seed, path_id)``.  Stream identity is positional rather than derived from
shared generator state, so the draws a path sees do not depend on how paths
are batched, ordered, or scheduled across workers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def path_generator(seed: int, path_id: int) -> np.random.Generator:
    """Return the generator for one path.

    The Philox key is the pair (seed, path_id) verbatim; no entropy mixing,
    so the mapping is stable across processes and numpy versions that keep
    the Philox bit stream.
    """
    key = np.array([seed & _MASK64, path_id & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class PathStreams:
    """Per-path generators for a contiguous block of path ids.

    Draws are made in step blocks: ``normals(k, m)`` advances every stream by
    exactly k*m values, so a path's sequence of increments is a pure function
    of (seed, path_id) and the draw sizes, never of block boundaries chosen
    by callers with different memory budgets.
    """

    def __init__(self, seed: int, path_ids: range) -> None:
        self.seed = int(seed)
        self.path_ids = path_ids
        self._gens = [path_generator(seed, pid) for pid in path_ids]

    def normals(self, n_steps: int, m: int) -> np.ndarray:
        """Standard normals of shape (n_paths, n_steps, m)."""
        out = np.empty((len(self._gens), n_steps, m))
        for i, g in enumerate(self._gens):
            out[i] = g.standard_normal((n_steps, m))
        return out
