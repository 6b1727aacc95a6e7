"""Experiment recipes behind the command line.

Every recipe is a pure function of ``(params, trials, seed)``; trial ``i`` of
cell ``j`` draws from ``Seed(master).child(command, j).trial(i)``, so output
bytes never depend on worker count or scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .core import GammaVector, Hypergraph, PartiteHypergraph, is_gamma_balanced, is_independent, neighborhood, read_hypergraph, write_hypergraph
from .local import _is_hypertree, binomial_estimate, certified_greedy, random_greedy, root_density_hits, VertexLabels
from .lowdeg import Degree1BalancedPolynomial, balanced_selection, check_optimization, compile_local_to_polynomial, degree1_balanced, round_values, squared_norm
from .models import PartiteSpace, UniformSpace, greedy_delta, partite_p, sample_partite_hypergraph, sample_uniform_hypergraph, uniform_p
from .ogp import PathExperiment, build_overlap_sequence
from .oracle import max_gamma_balanced, max_independent_set, max_P_independent
from .seeding import Seed, default_master
from .theory import balanced_params, target_sizes, uniform_thresholds


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    trials: int = 1
    seed: int = field(default_factory=default_master)
    fmt: str = "csv"
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"command", "params", "trials", "seed", "fmt", "output", "workers"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def echo(self) -> dict:
        """The result-determining part of the config (no output path or workers)."""
        return {"command": self.command, "params": self.params, "trials": self.trials, "seed": self.seed}


@dataclass
class Result:
    columns: list[str]
    rows: list[list]
    header: dict = field(default_factory=dict)
    payload: dict | None = None  # set for report-style (JSON-first) commands
    text: str | None = None  # set for commands emitting a file format of their own


# -- helpers ----------------------------------------------------------------------------------

def _model_p(params: dict) -> tuple[float, float]:
    model, n, r = params.get("model", "uniform"), params["n"], params["r"]
    space = PartiteSpace(r, n) if model == "partite" else UniformSpace(n, r)
    if params.get("p") is not None:
        p = float(params["p"])
        return p, p * space.degree_normalizer
    if params.get("d") is None:
        raise ConfigError("give either d or p")
    d = float(params["d"])
    p = partite_p(n, r, d) if model == "partite" else uniform_p(n, r, d)
    return p, d


def _sample(params: dict, p: float, seed: Seed):
    if params.get("model", "uniform") == "partite":
        return sample_partite_hypergraph(params["r"], params["n"], p, seed)
    return sample_uniform_hypergraph(params["n"], params["r"], p, seed)


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total)) if total else 1
    bounds = np.linspace(0, total, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def _parallel(fn: Callable, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def _gamma(params: dict, r: int) -> GammaVector:
    g = params.get("gamma")
    return GammaVector.uniform(r) if g is None else GammaVector.coerce(g)


# -- recipes ---------------------------------------------------------------------------------------

def _greedy_trial(params: dict, p: float, seed: Seed, i: int) -> list:
    s = seed.trial(i)
    H = _sample(params, p, s.child("instance"))
    flat = H.flat if isinstance(H, PartiteHypergraph) else H
    labels = VertexLabels.sample(flat.n, s.child("labels"))
    I = random_greedy(flat, labels)
    return [i, len(I), len(I) / flat.n, int(is_independent(flat, I))]


def run_greedy(params: dict, trials: int, seed: Seed, workers: int = 1) -> Result:
    p, d = _model_p(params)
    rows = _parallel(_greedy_trial, [(params, p, seed, i) for i in range(trials)], workers)
    dens = np.array([row[2] for row in rows])
    se = float(dens.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    out = [[row[0], params["r"], params["n"], d, p, row[1], row[2], "", row[3]] for row in rows]
    out.append(["mean", params["r"], params["n"], d, p, float(np.mean([row[1] for row in rows])), float(dens.mean()), se, int(all(row[3] for row in rows))])
    header = {"p": p, "d": d}
    if d > 1:
        th = uniform_thresholds(params["r"], d)
        header.update(lowdeg=th.lowdeg, stat=th.stat)
    return Result(["trial", "r", "n", "d", "p", "set_size", "density", "se", "independent"], out, header)


def _gw_chunk(d, r, delta, depth, seed, start, stop):
    return root_density_hits(d, r, delta, depth, seed, start, stop)


def run_gw_density(params: dict, trials: int, seed: Seed, workers: int = 1) -> Result:
    d, r, depth = float(params["d"]), params["r"], params["depth"]
    delta = params.get("delta") or greedy_delta(d)
    depths = [depth, depth + 2] if params.get("sensitivity") else [depth]
    rows = []
    for dep in depths:
        sub = seed.child("depth", dep) if dep != depth else seed
        hits = sum(_parallel(_gw_chunk, [(d, r, delta, dep, sub, a, b) for a, b in _chunks(trials, workers)], workers))
        est = binomial_estimate(hits, trials)
        ref = ((1 / (r - 1)) * math.log(delta) / delta) ** (1 / (r - 1)) if delta > 1 else ""
        th = uniform_thresholds(r, d) if d > 1 else None
        rows.append([d, r, delta, dep, trials, est.value, est.se, ref, th.lowdeg if th else "", th.stat if th else ""])
    return Result(["d", "r", "delta", "depth", "trials", "density", "se", "lowdeg_delta", "lowdeg", "stat"], rows, {"delta": delta})


def run_lowdeg_compile(params: dict, trials: int, seed: Seed, workers: int = 1) -> Result:
    p, d = _model_p({**params, "model": "uniform"})
    s, q, q_max, eta = params["s"], params["q"], params["q_max"], params["eta"]
    g = certified_greedy(s)
    rows = []
    for i in range(trials):
        t = seed.trial(i)
        H = sample_uniform_hypergraph(params["n"], params["r"], p, t.child("instance"))
        x = VertexLabels.sample(H.n, t.child("labels"))
        comp = compile_local_to_polynomial(g, H, x, q=q, q_max=q_max, method=params.get("method", "mobius"))
        vals = comp.values()
        mismatches = 0
        for v in range(H.n):
            ball = neighborhood(H, v, s)
            if len(ball) <= q and _is_hypertree(ball) and comp.support_sizes[v] == len(ball):
                mismatches += abs(vals[v] - g(ball, x.values[list(ball.orig)])) > 1e-9
        out = round_values(vals, H, eta)
        ok = int(is_independent(H, out.selected))
        rows.append([i, params["n"], params["r"], d, s, q, eta, comp.overflow_fraction, comp.over_q_fraction, mismatches, int(out.accepted), len(out.selected), len(out.selected) / H.n, out.errors, squared_norm(vals) / H.n, ok])
    cols = ["trial", "n", "r", "d", "s", "q", "eta", "overflow_fraction", "over_q_fraction", "identity_mismatches", "accepted", "selected_size", "density", "errors", "norm_per_vertex", "independent"]
    return Result(cols, rows, {"p": p, "d": d})


def _degree1_setup(params: dict):
    r, n = params["r"], params["n"]
    p, d = _model_p({**params, "model": "partite"})
    gamma = _gamma(params, r)
    if params.get("k"):
        k = tuple(params["k"])
    else:
        k = target_sizes(gamma, r, n, d, params["epsilon"], "achievability").counts
    istar = params.get("istar")
    istar = gamma.istar if istar is None else istar
    return r, n, p, d, gamma, k, istar


def run_balanced(params: dict, trials: int, seed: Seed, workers: int = 1) -> Result:
    r, n, p, d, gamma, k, istar = _degree1_setup(params)
    poly = Degree1BalancedPolynomial(r, n, k, istar)
    expected = n * poly.selection_probability(p)
    rows = []
    for i in range(trials):
        PH = sample_partite_hypergraph(r, n, p, seed.trial(i).child("instance"))
        vals = poly.evaluate_instance(PH)
        out = round_values(vals, PH, 0.0)
        sizes = [0] * r
        for part, _ in out.selected:
            sizes[part] += 1
        indep = is_independent(PH, out.selected)
        trimmed = balanced_selection(out.selected, k)
        balanced = "" if trimmed is None else int(is_gamma_balanced(PH, trimmed, gamma) and is_independent(PH, trimmed))
        rows.append([i, int(out.accepted), len(out.selected), *sizes, squared_norm(vals), int(indep), int(trimmed is not None), balanced])
    cols = ["trial", "accepted", "total_size", *[f"size_{j}" for j in range(r)], "squared_norm", "independent", "targets_met", "trimmed_balanced"]
    header = {"p": p, "d": d, "k": list(k), "istar": istar, "expected_istar_size": expected, "expected_squared_norm": poly.expected_squared_norm(p)}
    return Result(cols, rows, header)


def run_contract_check(params: dict, trials: int, seed: Seed, workers: int = 1) -> Result:
    algorithm = params.get("algorithm", "degree1")
    if algorithm == "degree1":
        r, n, p, d, gamma, k, istar = _degree1_setup(params)
        poly = Degree1BalancedPolynomial(r, n, k, istar)

        def builder(inst, s):
            return poly.evaluate_instance(inst)

        def sampler(s):
            return sample_partite_hypergraph(r, n, p, s)

        targets = k
        eta = 0.0
        extra = {"algorithm": "degree1", "r": r, "n": n, "d": d, "p": p, "gamma": list(gamma.entries), "istar": istar, "expected_squared_norm": poly.expected_squared_norm(p)}
    elif algorithm == "compiled":
        r, n = params["r"], params["n"]
        p, d = _model_p({**params, "model": "uniform"})
        g = certified_greedy(params["s"])

        def builder(inst, s):
            x = VertexLabels.sample(inst.n, s)
            return compile_local_to_polynomial(g, inst, x, q=params["q"], q_max=params["q_max"], method="mobius").values()

        def sampler(s):
            return sample_uniform_hypergraph(n, r, p, s)

        targets = int(params["k_total"]) if params.get("k_total") is not None else int(uniform_thresholds(r, d).lowdeg * n * (1 - params["epsilon"]))
        eta = params["eta"]
        extra = {"algorithm": "compiled", "r": r, "n": n, "d": d, "p": p, "s": params["s"], "q": params["q"]}
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    rep = check_optimization(builder, sampler, targets, params["delta"], params["xi"], eta, trials, seed, extra)
    payload = rep.to_dict()
    row = [trials, rep.mean_norm, rep.norm_se, rep.success_rate, rep.success_se, rep.xi_min, int(rep.norm_pass), int(rep.success_pass)]
    return Result(["trials", "mean_norm", "norm_se", "success_rate", "success_se", "xi_min", "norm_pass", "success_pass"], [row], {}, payload=payload)


def run_oracle(params: dict, trials: int, seed: Seed, workers: int = 1) -> Result:
    path = params.get("input")
    if not path:
        raise ConfigError("oracle needs --input")
    try:
        with open(path) as fh:
            H = read_hypergraph(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    cap = params.get("cap")
    if isinstance(H, PartiteHypergraph):
        gamma = _gamma(params, H.r)
        if params.get("block"):
            res = max_P_independent(H, gamma, params["block"], **({"cap": cap} if cap else {}))
        else:
            res = max_gamma_balanced(H, gamma, **({"cap": cap} if cap else {}))
    else:
        res = max_independent_set(H, **({"cap": cap} if cap else {}))
    payload = res.to_dict()
    wit = " ".join(":".join(map(str, w)) if isinstance(w, list) else str(w) for w in payload["witness"])
    return Result(["optimum", "witness", "nodes"], [[res.optimum, wit, res.nodes]], {}, payload=payload)


def run_ogp_path(params: dict, trials: int, seed: Seed, workers: int = 1) -> Result:
    exp = _path_experiment(params, seed)
    records = _parallel(build_overlap_sequence, [(exp, i) for i in range(trials)], workers)
    rows = []
    summary = []
    for i, rec in enumerate(records):
        rows.extend([i, *row] for row in rec.rows)
        summary.append({"trial": i, "times": rec.times, "new_mass": rec.new_mass, "failed": rec.failed, "forbidden_realized": rec.forbidden_realized})
    rec0 = records[0]
    header = {"p": exp.p, "T": exp.T, "windows": rec0.windows, "stride": rec0.stride, "norm_ref": rec0.norm_ref, "sequences": summary}
    return Result(["trial", "t", "step_hamming", "set_size", "new_mass", "k_index", "bad_step_flag"], rows, header)


def _path_experiment(params: dict, seed: Seed) -> PathExperiment:
    return PathExperiment(
        model=params["model"], n=params["n"], r=params["r"], d=params["d"], algorithm=params["algorithm"],
        gamma=params.get("gamma"), Gamma=params.get("Gamma"), c=params["c"], eta=params["eta"],
        epsilon=params["epsilon"], K=params["K"], seed=seed, stride=params.get("stride"), k=params.get("k"),
    )


def run_thresholds(params: dict, trials: int, seed: Seed, workers: int = 1) -> Result:
    rows = []
    gamma = params.get("gamma")
    cols = ["r", "d", "stat", "lowdeg", "gap_factor"]
    if gamma:
        cols += ["gamma", "c_gamma", "balanced_stat", "balanced_lowdeg", "balanced_gap", "istar"]
    for r in params["r"]:
        for d in params["d"]:
            th = uniform_thresholds(r, d)
            row = [r, d, th.stat, th.lowdeg, th.gap_factor]
            if gamma:
                if len(gamma) != r:
                    continue
                bp = balanced_params(gamma, r, d)
                row += [" ".join(map(str, gamma)), bp.c_gamma, bp.stat_density, bp.lowdeg_density, bp.gap_factor, bp.istar]
            rows.append(row)
    return Result(cols, rows, {})


def run_generate(params: dict, trials: int, seed: Seed, workers: int = 1) -> Result:
    p, d = _model_p(params)
    H = _sample(params, p, seed.trial(0).child("instance"))
    return Result([], [], {"p": p, "d": d}, text=write_hypergraph(H))


RECIPES: dict[str, Callable[..., Result]] = {
    "generate": run_generate,
    "greedy": run_greedy,
    "gw-density": run_gw_density,
    "lowdeg-compile": run_lowdeg_compile,
    "balanced-run": run_balanced,
    "contract-check": run_contract_check,
    "oracle": run_oracle,
    "ogp-path": run_ogp_path,
    "thresholds": run_thresholds,
}

REPORT_COMMANDS = {"contract-check", "oracle"}


def cell_seed(config: ExperimentConfig, cell: int = 0) -> Seed:
    return Seed(config.seed).child(config.command, cell)


def execute(config: ExperimentConfig, cell: int = 0) -> Result:
    if config.command not in RECIPES:
        raise ConfigError(f"unknown command {config.command!r}")
    if config.trials < 1:
        raise ConfigError("trials must be >= 1")
    return RECIPES[config.command](config.params, config.trials, cell_seed(config, cell), max(1, int(config.workers)))


# -- rendering -----------------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def render(config: ExperimentConfig, result: Result) -> str:
    meta = {"version": __version__, "config": config.echo(), **result.header}
    if result.text is not None:
        lines = [f"# {k}: {_dumps(v)}" for k, v in meta.items()]
        return "\n".join(lines) + "\n" + result.text
    if config.fmt == "json":
        body = result.payload if result.payload is not None else {"columns": result.columns, "rows": result.rows}
        return json.dumps(_jsonable({"meta": meta, **body}), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {_dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file and rename, so partial output never appears."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(config: ExperimentConfig) -> str:
    """Execute ``config``; write the result (and a ``.meta.json`` sidecar with
    the wall time) when ``config.output`` is set.  Returns the rendered text."""
    start = time.perf_counter()
    text = render(config, execute(config))
    wall = time.perf_counter() - start
    if config.output:
        write_atomic(config.output, text)
        write_atomic(config.output + ".meta.json", _dumps({"config": config.to_dict(), "version": __version__, "wall_time_seconds": wall}) + "\n")
    return text


def sweep(configs: list[ExperimentConfig], grid: dict) -> str:
    """Concatenate the cells of a parameter grid; cell j uses seed path (command, j)."""
    if not configs:
        raise ConfigError("sweep grid is empty")
    start = time.perf_counter()
    results = [execute(cfg, j) for j, cfg in enumerate(configs)]
    first = configs[0]
    if any(res.text is not None for res in results):
        raise ConfigError("sweep does not support 'generate'")
    columns = results[0].columns
    rows = [row for res in results for row in res.rows]
    merged = Result(columns, rows, {"grid": grid, "cells": [cfg.params for cfg in configs]})
    # echo the swept keys with all their values; report commands emit their table form
    params = dict(first.params)
    for key in grid:
        values = [cfg.params.get(key) for cfg in configs]
        params[key] = [v for i, v in enumerate(values) if v not in values[:i]]
    text = render(ExperimentConfig(first.command, params, first.trials, first.seed, first.fmt, first.output, first.workers), merged)
    wall = time.perf_counter() - start
    if first.output:
        write_atomic(first.output, text)
        write_atomic(first.output + ".meta.json", _dumps({"grid": grid, "config": first.to_dict(), "version": __version__, "wall_time_seconds": wall}) + "\n")
    return text
