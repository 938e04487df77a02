"""Makespan-optimal offloading order for a fixed power vector (Johnson's rule).

The transmitter and the server form a two-machine permutation flow shop;
tasks whose transmission is shorter than their execution go first by
ascending transmission time, the rest follow by descending execution time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .delay import Instance


@dataclass(frozen=True)
class JohnsonPartition:
    set_f: np.ndarray
    set_g: np.ndarray


def partition_times(m1, m2) -> JohnsonPartition:
    """Split jobs by ``m1 < m2`` (first set) versus ``m1 >= m2``."""
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    in_f = m1 < m2
    return JohnsonPartition(np.flatnonzero(in_f), np.flatnonzero(~in_f))


def johnson_order(m1, m2) -> np.ndarray:
    """Johnson's rule on raw stage times.

    Stable sorts; equal keys keep ascending job index.
    """
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    part = partition_times(m1, m2)
    f = part.set_f[np.argsort(m1[part.set_f], kind="stable")]
    g = part.set_g[np.argsort(-m2[part.set_g], kind="stable")]
    return np.concatenate([f, g]).astype(np.int64)


def partition(inst: Instance, p) -> JohnsonPartition:
    return partition_times(inst.tx_times(p), inst.exec_s)


def johnson_schedule(inst: Instance, p) -> np.ndarray:
    """Optimal offloading order for powers ``p``, O(N log N)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("Johnson scheduling needs strictly positive powers")
    return johnson_order(inst.tx_times(p), inst.exec_s)
