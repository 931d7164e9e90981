"""Named, counter-addressed random substreams.

Every stochastic draw in a run is taken from a generator keyed by
``(seed, label, index)`` so results do not depend on evaluation order or on
how a sweep is split across worker processes.
"""

from __future__ import annotations

import zlib

import numpy as np


def label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


class RandomStreams:
    """Factory for independent ``numpy.random.Generator`` substreams.

    Parameters
    ----------
    seed : int
        Root seed of the run.
    """

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)

    def get(self, label: str, index: int | None = None) -> np.random.Generator:
        key = (label_key(label),) if index is None else (label_key(label), int(index))
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))

    def per_index(self, label: str, n: int) -> list[np.random.Generator]:
        return [self.get(label, i) for i in range(n)]
