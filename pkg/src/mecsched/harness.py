"""Instance generation, baselines and the simulation sweeps.

Random streams: every draw comes from numpy's ``PCG64`` bit generator. The
instance for replicate ``r`` of a run with master seed ``s`` is drawn from
``SeedSequence(s, spawn_key=(r,))``; the random-order baseline of that
replicate uses ``spawn_key=(r, 1)``. Growing the replicate count therefore
never changes earlier replicates.
"""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .altmin import AltMinConfig, alternate
from .core import ChannelConfig, rate, rate_inverse_to_power
from .delay import Instance, ServerConfig, makespan_closed_form, objective, transmit_energy
from .flowshop import johnson_schedule

__all__ = [
    "ConfigError",
    "SystemConfig",
    "InstanceSpec",
    "ResultRow",
    "ExperimentResult",
    "generate_instance",
    "replicate_rng",
    "run_fig2",
    "run_fig3",
    "run_fig4",
    "write_result",
    "read_rows",
    "linear_fit_r2",
]

DEFAULT_ETA_SWEEP = tuple(float(x) for x in np.logspace(-2, 4, 25))
DEFAULT_FSER_SWEEP = (0.5e9, 1e9, 2e9)
DEFAULT_FIG2_N = (5, 10, 15, 20, 25, 30, 35)


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


@dataclass(frozen=True)
class SystemConfig:
    """Flat experiment configuration, mirroring the JSON config file."""

    n_tasks: int = 20
    d_avg_bits: float = 1000.0
    c_avg_cycles_per_bit: float = 797.5
    bandwidth_hz: float = 1e6
    g0_db: float = -40.0
    theta: float = 4.0
    l0_m: float = 1.0
    l_m: float = 100.0
    n0_dbm_per_hz: float = -174.0
    p_max_w: float = 0.1
    f_ser_hz: float = 1e9
    eta: float = 0.0
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict, allow_extra=()) -> "SystemConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                if key in allow_extra:
                    continue
                raise ConfigError(f"unknown config key {key!r}")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
            if known[key].type in ("int", int):
                if value != int(value):
                    raise ConfigError(f"config key {key!r} must be an integer")
                value = int(value)
            else:
                value = float(value)
            kwargs[key] = value
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def validate(self):
        if self.n_tasks < 1:
            raise ConfigError("n_tasks must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.eta < 0 or not math.isfinite(self.eta):
            raise ConfigError("eta must be finite and >= 0")
        for key in ("d_avg_bits", "c_avg_cycles_per_bit", "bandwidth_hz", "theta", "l0_m", "l_m", "p_max_w", "f_ser_hz"):
            value = getattr(self, key)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"{key} must be finite and > 0")
        for key in ("g0_db", "n0_dbm_per_hz"):
            if not math.isfinite(getattr(self, key)):
                raise ConfigError(f"{key} must be finite")

    def replace(self, **changes) -> "SystemConfig":
        data = asdict(self)
        data.update(changes)
        cfg = SystemConfig(**data)
        cfg.validate()
        return cfg

    def channel(self) -> ChannelConfig:
        return ChannelConfig.from_db(
            bandwidth_hz=self.bandwidth_hz,
            g0_db=self.g0_db,
            theta=self.theta,
            l0_m=self.l0_m,
            l_m=self.l_m,
            n0_dbm_per_hz=self.n0_dbm_per_hz,
            p_max_w=self.p_max_w,
        )

    def server(self) -> ServerConfig:
        return ServerConfig(self.f_ser_hz)

    def instance_spec(self, seed=None, n_tasks=None) -> "InstanceSpec":
        return InstanceSpec(
            n_tasks=self.n_tasks if n_tasks is None else n_tasks,
            d_avg_bits=self.d_avg_bits,
            c_avg_cycles_per_bit=self.c_avg_cycles_per_bit,
            seed=self.seed if seed is None else seed,
            channel=self.channel(),
            server=self.server(),
        )


@dataclass(frozen=True)
class InstanceSpec:
    n_tasks: int
    d_avg_bits: float = 1000.0
    c_avg_cycles_per_bit: float = 797.5
    seed: int | np.random.SeedSequence = 0
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    server: ServerConfig = field(default_factory=ServerConfig)

    def __post_init__(self):
        if self.n_tasks < 1:
            raise ValueError("n_tasks must be >= 1")
        if not (self.d_avg_bits > 0 and self.c_avg_cycles_per_bit > 0):
            raise ValueError("averages must be > 0")


def replicate_rng(master_seed: int, replicate: int, stream: int = 0) -> np.random.Generator:
    key = (replicate,) if stream == 0 else (replicate, stream)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=key)))


def _uniform_open_zero(rng: np.random.Generator, upper: float, n: int) -> np.ndarray:
    # rng.random() is in [0, 1); reflecting gives (0, upper]
    return upper * (1.0 - rng.random(n))


def generate_instance(spec: InstanceSpec, rng: np.random.Generator | None = None) -> Instance:
    """Draw ``d_i ~ U(0, 2 d_avg]`` then ``c_i ~ U(0, 2 c_avg]`` i.i.d."""
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
    d = _uniform_open_zero(rng, 2.0 * spec.d_avg_bits, spec.n_tasks)
    c = _uniform_open_zero(rng, 2.0 * spec.c_avg_cycles_per_bit, spec.n_tasks)
    return Instance(d, c, spec.channel, spec.server)


def replicate_instance(cfg: SystemConfig, master_seed: int, replicate: int, n_tasks=None) -> Instance:
    return generate_instance(cfg.instance_spec(n_tasks=n_tasks), replicate_rng(master_seed, replicate))


def random_order(master_seed: int, replicate: int, n: int) -> np.ndarray:
    return replicate_rng(master_seed, replicate, stream=1).permutation(n)


@dataclass(frozen=True)
class ResultRow:
    series: str
    x: float
    metric: str
    values: tuple

    @property
    def mean(self) -> float:
        return _mean(self.values)

    @property
    def replicates(self) -> int:
        return len(self.values)


def _mean(values) -> float:
    return math.fsum(values) / len(values)


@dataclass
class ExperimentResult:
    name: str
    rows: list
    metadata: dict
    digests: dict = field(default_factory=dict)

    def row(self, series: str, x: float, metric: str) -> ResultRow:
        for r in self.rows:
            if r.series == series and r.x == x and r.metric == metric:
                return r
        raise KeyError((series, x, metric))

    def series(self, metric: str, series: str):
        """``(x, mean)`` arrays for one curve, sorted by ``x``."""
        pts = sorted((r.x, r.mean) for r in self.rows if r.metric == metric and r.series == series)
        return np.array([p[0] for p in pts]), np.array([p[1] for p in pts])


def version_string() -> str:
    from . import __version__

    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _metadata(name, cfg: SystemConfig, seed, replicates, params):
    return {
        "experiment": name,
        "version": version_string(),
        "seed": int(seed),
        "replicates": int(replicates),
        "config": asdict(cfg),
        "parameters": params,
        "rng": "numpy PCG64; replicate r drawn from SeedSequence(seed, spawn_key=(r,)), "
        "random-order baseline from spawn_key=(r, 1)",
    }


def run_fig2(
    n_values=DEFAULT_FIG2_N,
    rate_scenarios=None,
    replicates: int = 200,
    seed: int = 0,
    cfg: SystemConfig | None = None,
) -> ExperimentResult:
    """Makespan of Johnson's order versus a random order at fixed rates (``eta = 0``).

    Each scenario fixes one uplink rate for every task, realised by the
    power that achieves it. Both arms see the same instances.
    """
    cfg = cfg or SystemConfig()
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    ch = cfg.channel()
    if rate_scenarios is None:
        base = cfg.f_ser_hz / cfg.c_avg_cycles_per_bit
        rate_scenarios = (base, 2.0 * base, 0.5 * base)
    rows, digests = [], {}
    for r_bps in rate_scenarios:
        power = rate_inverse_to_power(1.0 / r_bps, ch)
        series = f"R={r_bps:.6g}"
        for n in n_values:
            p = np.full(n, power)
            opt, rnd, gain, dig_opt, dig_rnd = [], [], [], [], []
            for rep in range(replicates):
                inst = replicate_instance(cfg, seed, rep, n_tasks=n)
                m_opt = makespan_closed_form(johnson_schedule(inst, p), p, inst)
                dig_opt.append(inst.digest())
                m_rnd = makespan_closed_form(random_order(seed, rep, n), p, inst)
                dig_rnd.append(inst.digest())
                opt.append(m_opt)
                rnd.append(m_rnd)
                gain.append((m_rnd - m_opt) / m_rnd)
            rows += [
                ResultRow(series, float(n), "makespan_optimal_s", tuple(opt)),
                ResultRow(series, float(n), "makespan_random_s", tuple(rnd)),
                ResultRow(series, float(n), "relative_gain", tuple(gain)),
            ]
            digests[(series, float(n))] = {"optimal": dig_opt, "random": dig_rnd}
    meta = _metadata(
        "fig2",
        cfg,
        seed,
        replicates,
        {"n_values": [int(n) for n in n_values], "rates_bps": [float(r) for r in rate_scenarios], "eta": 0.0},
    )
    return ExperimentResult("fig2", rows, meta, digests)


def run_fig3(
    eta_values=DEFAULT_ETA_SWEEP,
    replicates: int = 100,
    seed: int = 0,
    cfg: SystemConfig | None = None,
    altmin: AltMinConfig | None = None,
) -> ExperimentResult:
    """Weighted objective of the alternating scheme versus random order at full power."""
    cfg = cfg or SystemConfig()
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    p_full = np.full(cfg.n_tasks, cfg.p_max_w)
    insts = [replicate_instance(cfg, seed, rep) for rep in range(replicates)]
    orders = [random_order(seed, rep, cfg.n_tasks) for rep in range(replicates)]
    rows, digests = [], {}
    for eta in eta_values:
        prop, bench = [], []
        for inst, order in zip(insts, orders):
            prop.append(alternate(inst, eta, altmin).objective.weighted)
            bench.append(objective(order, p_full, eta, inst).weighted)
        rows += [
            ResultRow("fig3", float(eta), "objective_proposed_s", tuple(prop)),
            ResultRow("fig3", float(eta), "objective_benchmark_s", tuple(bench)),
        ]
        digests[("fig3", float(eta))] = [inst.digest() for inst in insts]
    meta = _metadata("fig3", cfg, seed, replicates, {"eta_values": [float(e) for e in eta_values]})
    return ExperimentResult("fig3", rows, meta, digests)


def run_fig4(
    eta_values=DEFAULT_ETA_SWEEP,
    f_ser_values=DEFAULT_FSER_SWEEP,
    replicates: int = 200,
    seed: int = 0,
    cfg: SystemConfig | None = None,
    altmin: AltMinConfig | None = None,
) -> ExperimentResult:
    """Delay/energy operating points of the alternating scheme per (f_ser, eta).

    Also records the full-power energy of each instance and the fractional
    saving against it.
    """
    cfg = cfg or SystemConfig()
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    base = [replicate_instance(cfg, seed, rep) for rep in range(replicates)]
    p_full = np.full(cfg.n_tasks, cfg.p_max_w)
    rows, digests = [], {}
    for f_ser in f_ser_values:
        insts = [b.with_server(ServerConfig(f_ser)) for b in base]
        e_full = [transmit_energy(p_full, inst) for inst in insts]
        series = f"f_ser={f_ser:.6g}"
        for eta in eta_values:
            delay, energy, saving = [], [], []
            for inst, ef in zip(insts, e_full):
                val = alternate(inst, eta, altmin).objective
                delay.append(val.delay_s)
                energy.append(val.energy_j)
                saving.append(1.0 - val.energy_j / ef)
            rows += [
                ResultRow(series, float(eta), "delay_s", tuple(delay)),
                ResultRow(series, float(eta), "energy_j", tuple(energy)),
                ResultRow(series, float(eta), "energy_pmax_j", tuple(e_full)),
                ResultRow(series, float(eta), "energy_saving", tuple(saving)),
            ]
            digests[(series, float(eta))] = [inst.digest() for inst in insts]
    meta = _metadata(
        "fig4",
        cfg,
        seed,
        replicates,
        {"eta_values": [float(e) for e in eta_values], "f_ser_values": [float(f) for f in f_ser_values]},
    )
    meta["notes"] = "eta and f_ser sweep values are defaults chosen for desk-scale runs"
    return ExperimentResult("fig4", rows, meta, digests)


CSV_COLUMNS = ("series", "x", "metric", "mean", "replicates", "values")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [r.series, repr(float(r.x)), r.metric, repr(r.mean), r.replicates, " ".join(repr(float(v)) for v in r.values)]
        )
    return buf.getvalue()


def write_result(result: ExperimentResult, out_dir, name: str | None = None):
    """Write ``<name>.csv`` and ``<name>.meta.json``; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = name or result.name
    csv_path = out / f"{name}.csv"
    meta_path = out / f"{name}.meta.json"
    csv_path.write_bytes(rows_to_csv(result.rows).encode("utf-8"))
    meta_path.write_text(json.dumps(result.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, meta_path


def read_rows(csv_path):
    """Parse a result CSV back into ``(ResultRow, emitted_mean)`` pairs."""
    out = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            values = tuple(float(v) for v in rec["values"].split())
            row = ResultRow(rec["series"], float(rec["x"]), rec["metric"], values)
            out.append((row, float(rec["mean"])))
    return out


def linear_fit_r2(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0


def full_power_energy(inst: Instance) -> float:
    return transmit_energy(np.full(inst.n, inst.channel.p_max_w), inst)


def full_power_rate(cfg: SystemConfig | None = None) -> float:
    cfg = cfg or SystemConfig()
    return rate(cfg.p_max_w, cfg.channel())
