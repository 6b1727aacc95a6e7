"""Command-line entry point: ``python -m hyperindep <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys

from .core import HypergraphError
from .experiments import ConfigError, ExperimentConfig, RECIPES, REPORT_COMMANDS, run, sweep
from .seeding import SEED_ENV_VAR, default_master
from .theory import DomainError

COMMON = {"trials", "seed", "fmt", "output", "workers", "config", "command"}


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _add_model(p: argparse.ArgumentParser, model: str | None = "uniform", n: int = 1000, r: int = 3, d: float | None = 10.0) -> None:
    if model is not None:
        p.add_argument("--model", choices=["uniform", "partite"], default=model)
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--r", type=int, default=r)
    p.add_argument("--d", type=float, default=d, help="average degree (p is derived)")
    p.add_argument("--p", type=float, default=None, help="edge probability (overrides --d)")


def _add_balanced(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=_floats, default=None, help="balance vector, e.g. '0.5,0.3,0.2' (default uniform)")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--k", type=_ints, default=None, help="explicit per-part targets (default: achievability sizes)")
    p.add_argument("--istar", type=int, default=None)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="hyperindep", description="Independent sets in random hypergraphs: experiments.")
    subs = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=None, help=f"master seed (default ${SEED_ENV_VAR} or built-in)")
    common.add_argument("--format", dest="fmt", choices=["csv", "json"], default=None)
    common.add_argument("--output", "-o", default=None, help="result file (default stdout)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--config", default=None, help="JSON config file; explicit flags win")
    table: dict[str, argparse.ArgumentParser] = {}

    def add(name, help_):
        sp = subs.add_parser(name, parents=[common], help=help_)
        table[name] = sp
        return sp

    sp = add("generate", "sample a hypergraph in the plain-text format")
    _add_model(sp)

    sp = add("greedy", "random greedy density on sampled instances")
    _add_model(sp, n=2000, d=20.0)

    sp = add("gw-density", "root density of the adapted greedy on GW trees")
    sp.add_argument("--d", type=float, default=20.0)
    sp.add_argument("--r", type=int, default=3)
    sp.add_argument("--delta", type=int, default=None, help="degree cap (default ceil(d + d^{3/4}))")
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--sensitivity", action="store_true", help="also report depth + 2")

    sp = add("lowdeg-compile", "compile the certified greedy into its polynomial and round it")
    _add_model(sp, model=None, n=300, d=2.0)
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--q", type=int, default=12)
    sp.add_argument("--q-max", dest="q_max", type=int, default=16)
    sp.add_argument("--eta", type=float, default=0.1)
    sp.add_argument("--method", choices=["recursion", "mobius"], default="mobius")

    sp = add("balanced-run", "degree-1 balanced algorithm on H(r, n, p)")
    _add_model(sp, model=None, n=200, d=8.0)
    _add_balanced(sp)

    sp = add("contract-check", "Monte Carlo check of the optimization contract")
    _add_model(sp, model=None, n=200, d=8.0)
    _add_balanced(sp)
    sp.add_argument("--algorithm", choices=["degree1", "compiled"], default="degree1")
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--xi", type=float, default=10.0)
    sp.add_argument("--eta", type=float, default=0.1)
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--q", type=int, default=12)
    sp.add_argument("--q-max", dest="q_max", type=int, default=16)
    sp.add_argument("--k-total", dest="k_total", type=int, default=None)

    sp = add("oracle", "exact maximum (balanced) independent set of a small instance")
    sp.add_argument("--input", required=False, default=None)
    sp.add_argument("--gamma", type=_floats, default=None)
    sp.add_argument("--block", type=int, default=None)
    sp.add_argument("--cap", type=int, default=None)

    sp = add("ogp-path", "interpolation-path overlap sequences")
    _add_model(sp, n=100, d=8.0)
    _add_balanced(sp)
    sp.add_argument("--algorithm", choices=["greedy", "degree1"], default="greedy")
    sp.add_argument("--Gamma", type=int, default=None, help="sweeps (default K - 1)")
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--eta", type=float, default=0.0)
    sp.add_argument("--K", type=int, default=3)
    sp.add_argument("--stride", type=int, default=None)

    sp = add("thresholds", "threshold table for (r, d) grids")
    sp.add_argument("--r", type=_ints, default=[2, 3])
    sp.add_argument("--d", type=_floats, default=[10.0, 100.0])
    sp.add_argument("--gamma", type=_floats, default=None)

    sp = add("sweep", "Cartesian parameter sweep over another command")
    sp.add_argument("--command", dest="target", required=False, default=None)
    sp.add_argument("--grid", action="append", default=[], help="name=v1,v2,... (repeatable)")
    sp.add_argument("--param", action="append", default=[], help="name=value fixed for every cell (repeatable)")
    return parser, table


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    params = {k: v for k, v in vars(args).items() if k not in COMMON}
    return ExperimentConfig(
        command=args.command,
        params=params,
        trials=args.trials,
        seed=default_master() if args.seed is None else args.seed,
        fmt=args.fmt or ("json" if args.command in REPORT_COMMANDS else "csv"),
        output=args.output,
        workers=args.workers,
    )


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    # either a saved ExperimentConfig ({"params": {...}, "trials": ...}) or flat flags
    flat = {k: v for k, v in data.items() if k not in ("params", "command")}
    flat.update(data.get("params", {}))
    return flat


def _coerce(sub: argparse.ArgumentParser, values: dict) -> dict:
    """Give config-file values the types the matching flags would produce."""
    kinds = {a.dest: a.type for a in sub._actions}
    out = {}
    for key, value in values.items():
        kind = kinds.get(key)
        if value is None or kind is None:
            out[key] = value
        elif isinstance(value, str):
            out[key] = kind(value)
        elif kind in (_floats, _ints):
            out[key] = kind(",".join(map(str, value if isinstance(value, list) else [value])))
        else:
            out[key] = kind(value) if kind in (int, float) else value
    return out


def parse_config(argv: list[str]) -> tuple[ExperimentConfig | None, argparse.Namespace, dict]:
    parser, table = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = table[args.command]
        sub.set_defaults(**_coerce(sub, _load_config_file(args.config)))
        args = parser.parse_args(argv)
    return args, parser, table


def _sweep_configs(args: argparse.Namespace) -> tuple[list[ExperimentConfig], dict]:
    target = args.target
    if target not in RECIPES:
        raise ConfigError(f"sweep needs --command one of {sorted(RECIPES)}")
    grid: dict[str, list[str]] = {}
    for item in args.grid:
        name, _, values = item.partition("=")
        if not values:
            raise ConfigError(f"bad --grid entry {item!r}")
        grid[name] = values.split(",")
    if not grid:
        raise ConfigError("sweep grid is empty")
    fixed = []
    for item in args.param:
        name, _, value = item.partition("=")
        fixed += [f"--{name.replace('_', '-')}", value] if value != "" else [f"--{name}"]
    common = ["--trials", str(args.trials), "--workers", str(args.workers)]
    if args.seed is not None:
        common += ["--seed", str(args.seed)]
    if args.fmt:
        common += ["--format", args.fmt]
    if args.output:
        common += ["--output", args.output]
    cells = [[]]
    for name, values in grid.items():
        cells = [c + [(name, v)] for c in cells for v in values]
    parser, _ = build_parser()
    configs = []
    for cell in cells:
        argv = [target, *common, *fixed]
        for name, v in cell:
            argv += [f"--{name.replace('_', '-')}", v]
        configs.append(_config_from_args(parser.parse_args(argv)))
    return configs, grid


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args, _, _ = parse_config(argv)
        if args.command == "sweep":
            configs, grid = _sweep_configs(args)
            text = sweep(configs, grid)
            to_stdout = not configs[0].output
        else:
            config = _config_from_args(args)
            text = run(config)
            to_stdout = not config.output
    except (ConfigError, HypergraphError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if to_stdout:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
