"""Deterministic seed streams.

A stream is identified by a master seed plus a tuple of integer keys, so
the numbers drawn for replication ``b`` never depend on how many other
streams were created before it or on which thread runs it.
"""

from __future__ import annotations

import numpy as np

SeedLike = int | np.random.SeedSequence | None


def derive_seed(master: SeedLike, *keys: int) -> np.random.SeedSequence:
    """The stream ``keys`` below ``master``.

    ``master`` may itself be a derived :class:`~numpy.random.SeedSequence`,
    in which case the keys extend its path.
    """
    keys = tuple(int(k) for k in keys)
    if isinstance(master, np.random.SeedSequence):
        return np.random.SeedSequence(master.entropy, spawn_key=master.spawn_key + keys)
    if master is None:
        return np.random.SeedSequence(spawn_key=keys)
    return np.random.SeedSequence(int(master), spawn_key=keys)
