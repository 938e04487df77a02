"""Command-line entry point.

Task ids in JSON input and output are 1-based; the library is 0-based.
Errors go to stderr as ``{"error": {"type": ..., "message": ...}}``.
Exit codes: 0 success, 1 unexpected failure, 2 bad input, 3 oversized or
infeasible request.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .altmin import AltMinConfig, alternate
from .core import DomainError, InfeasiblePowerError
from .delay import Instance, objective
from .flowshop import johnson_schedule
from .harness import (
    DEFAULT_ETA_SWEEP,
    DEFAULT_FIG2_N,
    DEFAULT_FSER_SWEEP,
    ConfigError,
    SystemConfig,
    generate_instance,
    run_fig2,
    run_fig3,
    run_fig4,
    write_result,
)
from .oracle import OracleSizeError, brute_force_schedule, grid_power_search, joint_brute_force
from .powercrt import build_p3, solve_p3

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SIZE = 0, 1, 2, 3
INSTANCE_KEYS = ("input_bits", "cycles_per_bit", "powers", "sigma")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit_error(kind, message, code):
    json.dump({"error": {"type": kind, "message": str(message)}}, sys.stderr)
    sys.stderr.write("\n")
    return code


def _load_json(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None


def _float_array(data, key, n=None):
    value = data.get(key)
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key!r} must be a non-empty list of numbers")
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
        raise ConfigError(f"{key!r} must contain only numbers")
    if n is not None and len(value) != n:
        raise ConfigError(f"{key!r} has {len(value)} entries, expected {n}")
    return np.asarray(value, dtype=float)


def _load_instance(args, n_override=None):
    """Instance from the config file: explicit arrays if present, else a seeded draw.

    Without a config file the default system parameters are used.
    """
    data = _load_json(args.config)
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    cfg = SystemConfig.from_dict(data, allow_extra=INSTANCE_KEYS)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if args.eta is not None:
        cfg = cfg.replace(eta=args.eta)
    if "input_bits" in data or "cycles_per_bit" in data:
        d = _float_array(data, "input_bits")
        c = _float_array(data, "cycles_per_bit", len(d))
        try:
            inst = Instance(d, c, cfg.channel(), cfg.server())
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        n = n_override if n_override is not None else cfg.n_tasks
        inst = generate_instance(cfg.instance_spec(cfg.seed, n))
    return cfg, data, inst


def _powers(data, inst):
    if "powers" not in data:
        return np.full(inst.n, inst.channel.p_max_w)
    p = _float_array(data, "powers", inst.n)
    if np.any(p <= 0) or np.any(p > inst.channel.p_max_w):
        raise ConfigError("powers must lie in (0, p_max_w]")
    return p


def _sigma(data, n):
    if "sigma" not in data:
        raise ConfigError("'sigma' (1-based task ids) is required")
    raw = data["sigma"]
    if not isinstance(raw, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in raw):
        raise ConfigError("'sigma' must be a list of integers")
    if sorted(raw) != list(range(1, n + 1)):
        raise ConfigError(f"'sigma' must be a permutation of 1..{n}")
    return np.asarray(raw) - 1


def _ids(sigma):
    return [int(i) + 1 for i in sigma]


def _objective_json(val):
    return {"delay_s": val.delay_s, "energy_j": val.energy_j, "eta": val.eta, "weighted": val.weighted}


def _print(obj):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_schedule(args):
    _, data, inst = _load_instance(args)
    p = _powers(data, inst)
    sigma = johnson_schedule(inst, p)
    val = objective(sigma, p, 0.0, inst)
    _print({"sigma": _ids(sigma), "makespan_s": val.delay_s})
    return EXIT_OK


def cmd_power(args):
    cfg, data, inst = _load_instance(args)
    sigma = _sigma(data, inst.n)
    sol = solve_p3(build_p3(sigma, inst, cfg.eta), method=args.method)
    val = objective(sigma, sol.powers_by_task, cfg.eta, inst)
    _print(
        {
            "sigma": _ids(sigma),
            "powers_w": sol.powers_by_task.tolist(),
            "objective": _objective_json(val),
            "iterations": sol.iterations,
            "converged": bool(sol.converged),
            "kkt_residual": sol.kkt_residual,
        }
    )
    return EXIT_OK


def cmd_solve(args):
    cfg, data, inst = _load_instance(args)
    alt = AltMinConfig(iter_max=args.iter_max)
    rep = alternate(inst, cfg.eta, alt)
    _print(
        {
            "sigma": _ids(rep.final_sigma),
            "powers_w": rep.final_p.tolist(),
            "objective": _objective_json(rep.objective),
            "objective_trace": [_objective_json(v) for v in rep.objective_trace],
            "iterations_used": rep.iterations_used,
            "converged": bool(rep.converged),
        }
    )
    return EXIT_OK


def cmd_oracle(args):
    cfg, data, inst = _load_instance(args, n_override=args.n)
    if args.mode == "schedule":
        res = brute_force_schedule(inst, _powers(data, inst))
    elif args.mode == "power":
        res = grid_power_search(_sigma(data, inst.n), inst, cfg.eta, args.grid, refinements=args.refinements)
    else:
        res = joint_brute_force(inst, cfg.eta, args.grid, refinements=args.refinements)
    _print(
        {
            "mode": args.mode,
            "best_value": res.best_value,
            "sigma": _ids(res.best_sigma),
            "powers_w": np.asarray(res.best_p).tolist(),
            "evaluations": res.evaluations,
        }
    )
    return EXIT_OK


def cmd_experiment(args):
    cfg = SystemConfig.from_dict(_load_json(args.config))
    seed = cfg.seed if args.seed is None else args.seed
    alt = AltMinConfig(iter_max=args.iter_max)
    kw = {"seed": seed, "cfg": cfg}
    if args.replicates is not None:
        kw["replicates"] = args.replicates
    etas = DEFAULT_ETA_SWEEP if args.eta is None else (args.eta,)
    if args.figure == "fig2":
        result = run_fig2(DEFAULT_FIG2_N, **kw)
    elif args.figure == "fig3":
        result = run_fig3(etas, altmin=alt, **kw)
    else:
        result = run_fig4(etas, DEFAULT_FSER_SWEEP, altmin=alt, **kw)
    csv_path, meta_path = write_result(result, args.out, args.name)
    _print({"csv": str(csv_path), "metadata": str(meta_path), "rows": len(result.rows)})
    return EXIT_OK


def cmd_validate(args):
    from .validation import run_all

    results = run_all(0 if args.seed is None else args.seed)
    _print({"checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in results]})
    if all(ok for _, ok, _ in results):
        return EXIT_OK
    return _emit_error("ValidationFailed", ", ".join(n for n, ok, _ in results if not ok), EXIT_FAIL)


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _nonneg_float(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser():
    parser = _Parser(prog="mecsched", description="Joint offloading order and transmit power optimisation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", "--instance", dest="config", metavar="PATH")
        p.add_argument("--seed", type=_u64)
        p.add_argument("--eta", type=_nonneg_float)

    p = sub.add_parser("schedule", help="Johnson order for given powers")
    common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("power", help="optimal powers for a given order")
    common(p)
    p.add_argument("--method", choices=("dual", "smoothed"), default="dual")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("solve", help="alternating minimisation")
    common(p)
    p.add_argument("--iter-max", type=_positive_int, default=50)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="brute-force reference on a small instance")
    common(p)
    p.add_argument("--n", type=_positive_int, help="number of tasks to draw when the file has none")
    p.add_argument("--mode", choices=("schedule", "power", "joint"), default="schedule")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--refinements", type=int, default=3)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment and write CSV plus metadata")
    p.add_argument("figure", choices=("fig2", "fig3", "fig4"))
    common(p)
    p.add_argument("--replicates", type=_positive_int)
    p.add_argument("--out", metavar="DIR", default="results")
    p.add_argument("--name")
    p.add_argument("--iter-max", type=_positive_int, default=50)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate", help="run the invariant checks")
    p.add_argument("--seed", type=_u64)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _emit_error("UsageError", exc, EXIT_INPUT)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except OracleSizeError as exc:
        return _emit_error("OracleSizeError", exc, EXIT_SIZE)
    except InfeasiblePowerError as exc:
        return _emit_error("InfeasiblePowerError", exc, EXIT_SIZE)
    except (ConfigError, DomainError) as exc:
        return _emit_error(type(exc).__name__, exc, EXIT_INPUT)
    except ValueError as exc:
        return _emit_error("ValueError", exc, EXIT_INPUT)
    except Exception as exc:  # noqa: BLE001
        return _emit_error(type(exc).__name__, exc, EXIT_FAIL)


if __name__ == "__main__":
    sys.exit(main())
