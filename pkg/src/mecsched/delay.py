"""Flow-shop timeline of offloaded tasks: ready times, completion times,
transmit energy and the weighted delay/energy objective.

Schedules are 0-based permutations of task indices (``sigma[j]`` is the task
sent in position ``j``). Power vectors are indexed by task, not by position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ChannelConfig, rate


@dataclass(frozen=True)
class TaskSpec:
    input_bits: float
    workload_cycles_per_bit: float

    def __post_init__(self):
        if not (self.input_bits > 0 and math.isfinite(self.input_bits)):
            raise ValueError(f"input_bits must be > 0, got {self.input_bits!r}")
        if not (
            self.workload_cycles_per_bit > 0
            and math.isfinite(self.workload_cycles_per_bit)
        ):
            raise ValueError(
                f"workload_cycles_per_bit must be > 0, got {self.workload_cycles_per_bit!r}"
            )


@dataclass(frozen=True)
class ServerConfig:
    cpu_hz: float = 1e9

    def __post_init__(self):
        if not (self.cpu_hz > 0 and math.isfinite(self.cpu_hz)):
            raise ValueError(f"cpu_hz must be > 0, got {self.cpu_hz!r}")


class Instance:
    """N tasks plus the channel and server they share. Immutable."""

    def __init__(self, input_bits, cycles_per_bit, channel=None, server=None):
        d = np.array(input_bits, dtype=float).reshape(-1)
        c = np.array(cycles_per_bit, dtype=float).reshape(-1)
        if d.shape != c.shape:
            raise ValueError("input_bits and cycles_per_bit differ in length")
        if d.size == 0:
            raise ValueError("an instance needs at least one task")
        if not (np.all(d > 0) and np.all(np.isfinite(d))):
            raise ValueError("input_bits must be finite and > 0")
        if not (np.all(c > 0) and np.all(np.isfinite(c))):
            raise ValueError("cycles_per_bit must be finite and > 0")
        d.setflags(write=False)
        c.setflags(write=False)
        self.input_bits = d
        self.cycles_per_bit = c
        self.channel = channel if channel is not None else ChannelConfig()
        self.server = server if server is not None else ServerConfig()
        exec_s = d * c / self.server.cpu_hz
        exec_s.setflags(write=False)
        self.exec_s = exec_s

    @classmethod
    def from_tasks(cls, tasks, channel=None, server=None):
        return cls(
            [t.input_bits for t in tasks],
            [t.workload_cycles_per_bit for t in tasks],
            channel,
            server,
        )

    @property
    def n(self) -> int:
        return self.input_bits.size

    @property
    def tasks(self):
        return [TaskSpec(float(d), float(c)) for d, c in zip(self.input_bits, self.cycles_per_bit)]

    def with_server(self, server):
        return Instance(self.input_bits, self.cycles_per_bit, self.channel, server)

    def tx_times(self, p):
        """Per-task transmission times (task order); ``inf`` where ``p <= 0``."""
        p = np.asarray(p, dtype=float)
        if p.shape != (self.n,):
            raise ValueError(f"power vector has shape {p.shape}, expected ({self.n},)")
        with np.errstate(divide="ignore"):
            return self.input_bits / rate(np.maximum(p, 0.0), self.channel)

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(self.input_bits.tobytes())
        h.update(self.cycles_per_bit.tobytes())
        return h.hexdigest()[:16]

    def __repr__(self):
        return f"Instance(n={self.n}, f_ser={self.server.cpu_hz:g})"


@dataclass(frozen=True)
class Timeline:
    ready_s: np.ndarray
    completion_s: np.ndarray

    @property
    def makespan_s(self) -> float:
        return float(self.completion_s[-1])


@dataclass(frozen=True)
class ObjectiveValue:
    delay_s: float
    energy_j: float
    eta: float
    weighted: float


def check_permutation(sigma, n: int) -> np.ndarray:
    """Return ``sigma`` as an int array, raising unless it is a permutation of ``range(n)``."""
    arr = np.asarray(sigma)
    if arr.ndim != 1 or arr.size != n:
        raise ValueError(f"schedule has length {arr.size}, expected {n}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.round(arr)):
            raise ValueError("schedule entries must be integers")
    arr = arr.astype(np.int64)
    if not np.array_equal(np.sort(arr), np.arange(n)):
        raise ValueError(f"schedule {arr.tolist()} is not a permutation of 0..{n - 1}")
    return arr


def tx_time(task: TaskSpec, p: float, ch: ChannelConfig) -> float:
    """Seconds to send the task's input at power ``p``; ``inf`` for ``p <= 0``."""
    if p <= 0:
        return math.inf
    return task.input_bits / rate(p, ch)


def exec_time(task: TaskSpec, srv: ServerConfig) -> float:
    return task.input_bits * task.workload_cycles_per_bit / srv.cpu_hz


def _stage_times(sigma, p, inst: Instance):
    sigma = check_permutation(sigma, inst.n)
    tx = inst.tx_times(p)[sigma]
    return tx, inst.exec_s[sigma]


def timeline(sigma, p, inst: Instance) -> Timeline:
    """Ready and completion time of each position via the two-stage recursion."""
    tx, ex = _stage_times(sigma, p, inst)
    ready = np.cumsum(tx)
    comp = np.empty_like(ready)
    prev = -math.inf
    for j in range(ready.size):
        prev = max(ready[j], prev) + ex[j]
        comp[j] = prev
    return Timeline(ready, comp)


def makespan_from_stages(tx, ex) -> float:
    """Unrolled recursion: ``max_i (sum_{j<=i} tx_j + sum_{k>=i} ex_k)``."""
    prefix = np.cumsum(tx)
    suffix = np.cumsum(ex[::-1])[::-1]
    return float(np.max(prefix + suffix))


def makespan_closed_form(sigma, p, inst: Instance) -> float:
    tx, ex = _stage_times(sigma, p, inst)
    return makespan_from_stages(tx, ex)


def transmit_energy(p, inst: Instance) -> float:
    """Total transmit energy in J, summed in task-index order."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("energy is only defined for strictly positive powers")
    per_task = p * inst.tx_times(p)
    return math.fsum(per_task.tolist())


def objective(sigma, p, eta: float, inst: Instance) -> ObjectiveValue:
    """Makespan plus ``eta`` times transmit energy."""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    tl = timeline(sigma, p, inst)
    energy = transmit_energy(p, inst)
    delay = tl.makespan_s
    return ObjectiveValue(delay, energy, float(eta), delay + eta * energy)
