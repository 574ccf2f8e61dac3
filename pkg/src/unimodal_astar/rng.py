"""Seeded, splittable random streams.

Every replica of an experiment owns a :class:`RandomStream` derived from a
single root seed and its replica index, so results do not depend on how
replicas are scheduled across workers.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["RandomStream", "replica_streams"]


class RandomStream:
    """A reproducible uniform/exponential source backed by numpy's PCG64.

    Parameters
    ----------
    seed : int
        Root seed.
    key : tuple of int, optional
        Spawn key identifying this stream below the root. Streams with
        different keys are statistically independent.
    """

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self.bit_generator = np.random.PCG64(seq)
        self._generator = None

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, key={self.key})"

    @property
    def _gen(self) -> np.random.Generator:
        if self._generator is None:
            self._generator = np.random.Generator(self.bit_generator)
        return self._generator

    def split(self, index: int) -> "RandomStream":
        """Child stream number ``index``; deterministic in (seed, key, index)."""
        return RandomStream(self.seed, self.key + (int(index),))

    def spawn(self, n: int, start: int = 0) -> list["RandomStream"]:
        return [self.split(i) for i in range(start, start + n)]

    def uniform(self, size=None):
        """Uniform draws on [0, 1) (53-bit doubles)."""
        return self._gen.random(size)

    def positive_uniform(self) -> float:
        """A scalar uniform draw on (0, 1); exact zeros are redrawn."""
        u = self._gen.random()
        while u == 0.0:
            u = self._gen.random()
        return u

    def exponential(self, size=None):
        """Unit-rate exponential draws by inversion, ``-log(u)`` with u in (0, 1).

        Inversion (rather than numpy's ziggurat) keeps the compiled kernel and
        the pure-Python path on the same sequence of uniforms.
        """
        if size is None:
            return -math.log(self.positive_uniform())
        u = self._gen.random(size)
        zero = u == 0.0
        while np.any(zero):
            u[zero] = self._gen.random(int(zero.sum()))
            zero = u == 0.0
        return -np.log(u)


def replica_streams(seed: int, n: int, start: int = 0) -> list[RandomStream]:
    """Streams for replicas ``start .. start + n - 1`` under root ``seed``."""
    return RandomStream(seed).spawn(n, start)
