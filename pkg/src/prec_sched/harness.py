"""Instance generators, pipeline runner, and benchmark aggregation."""

from __future__ import annotations

import hashlib
import math
import random
import time
from dataclasses import dataclass, replace
from typing import Optional

from .bounded import to_fraction
from .decompose import decompose_and_solve
from .exact import exact_opt
from .instance import (
    Instance,
    feasibility_violations,
    make_instance,
    normalize_release_times,
    require_valid,
    schedule_cost,
)
from .listsched import list_schedule_strict, lp_ls
from .util import canonical_json, parallel_map

FAMILIES = ("uniform", "p_le_r", "paper_example", "chains", "antichain")


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    seed: int
    p_max: int = 8
    r_max: int = 16
    w_max: int = 6
    prec_density: float = 0.3
    family: str = "uniform"
    m: int = 10  # size parameter of the two-job reference family

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.n < 1 or self.p_max < 1 or self.r_max < 0 or self.w_max < 0:
            raise ValueError("ranges must be positive (n, p_max >= 1; r_max, w_max >= 0)")
        if not 0.0 <= self.prec_density <= 1.0:
            raise ValueError("prec_density must lie in [0, 1]")


def generate(config: GeneratorConfig) -> Instance:
    """Deterministic instance from the config's seed; validated and
    release-normalized on the way out."""
    rng = random.Random(config.seed)
    n = config.n
    prec: list[tuple[int, int]] = []
    if config.family == "paper_example":
        jobs = [(1, 1, config.m), (config.m, 0, 0)]
    elif config.family == "p_le_r":
        jobs = []
        for _ in range(n):
            p = rng.randint(1, config.p_max)
            jobs.append((p, rng.randint(p, p + config.r_max), rng.randint(0, config.w_max)))
        prec = _random_dag(rng, n, config.prec_density)
    elif config.family == "chains":
        jobs = [
            (rng.randint(1, config.p_max), rng.randint(0, config.r_max), rng.randint(0, config.w_max))
            for _ in range(n)
        ]
        ids = list(range(n))
        rng.shuffle(ids)
        while ids:
            size = min(len(ids), rng.randint(2, 4))
            chain, ids = ids[:size], ids[size:]
            prec.extend(zip(chain, chain[1:]))
    elif config.family == "antichain":
        jobs = [
            (rng.randint(1, config.p_max), rng.randint(0, config.r_max), rng.randint(0, config.w_max))
            for _ in range(n)
        ]
    else:
        jobs = [
            (rng.randint(1, config.p_max), rng.randint(0, config.r_max), rng.randint(0, config.w_max))
            for _ in range(n)
        ]
        prec = _random_dag(rng, n, config.prec_density)
    instance = make_instance(jobs, prec)
    require_valid(instance)
    return normalize_release_times(instance)


def _random_dag(rng: random.Random, n: int, density: float) -> list[tuple[int, int]]:
    # edges along the index order, so acyclicity is free
    return [
        (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density
    ]


def digest(instance: Instance) -> str:
    """Stable content hash of the canonical JSON serialization."""
    return hashlib.sha256(canonical_json(instance.to_dict()).encode()).hexdigest()


@dataclass(frozen=True)
class PipelineOptions:
    exact_cap: Optional[int] = None  # run the exact oracle when n <= cap
    baselines: bool = False  # also run plain LP+LS and strict-order LS
    mode: str = "derandomized"
    seed: Optional[int] = None
    bounded_mode: str = "exhaustive"
    budget: Optional[int] = None


def run_pipeline(instance: Instance, epsilon, options: Optional[PipelineOptions] = None) -> dict:
    """Run the full solver on one instance and record metrics.

    Always reports the LP value and the pipeline cost; the exact optimum,
    ratios, and baseline costs appear per `options`. Every reported
    schedule is re-validated against the original instance.
    """
    opts = options or PipelineOptions()
    t0 = time.perf_counter()
    result = decompose_and_solve(
        instance,
        epsilon,
        mode=opts.mode,
        seed=opts.seed,
        bounded_mode=opts.bounded_mode,
        budget=opts.budget,
    )
    wall = time.perf_counter() - t0
    bad = feasibility_violations(result.schedule, instance)
    if bad:
        raise AssertionError(f"pipeline emitted an infeasible schedule: {bad[0]}")
    record = {
        "digest": digest(instance),
        "n": instance.n,
        "epsilon": str(to_fraction(epsilon)),
        "Z_lp": result.lp.value,
        "alg_cost": float(result.cost),
        "b": result.b,
        "guesses_tried": sum(iv.guesses_tried for iv in result.intervals),
        "wall_time": wall,
    }
    if result.lp.value > 0:
        record["ratio_alg_lp"] = float(result.cost) / result.lp.value
    if opts.exact_cap is not None and instance.n <= opts.exact_cap:
        opt, _ = exact_opt(instance, opts.exact_cap)
        record["opt_cost"] = float(opt)
        if opt > 0:
            record["ratio_alg_opt"] = float(result.cost) / float(opt)
    if opts.baselines:
        run = lp_ls(instance)
        record["lpls_cost"] = float(schedule_cost(run.schedule, instance))
        strict = list_schedule_strict(instance, run.order)
        record["strict_cost"] = float(schedule_cost(strict, instance))
        if "opt_cost" in record and record["opt_cost"] > 0:
            record["ratio_lpls_opt"] = record["lpls_cost"] / record["opt_cost"]
        if record["Z_lp"] > 0:
            record["ratio_lpls_lp"] = record["lpls_cost"] / record["Z_lp"]
    return record


# certified bounds checked by bench, per family:
#   p_le_r: plain LP+LS within 2x of the LP value
#   any family with the oracle run: pipeline within 2(1+eps)^2 of optimal
_BENCH_TOL = 1e-6


def bench(configs, epsilons, trials: int) -> dict:
    """Run the pipeline over a config x epsilon grid and aggregate ratios.

    Per row: max/mean of cost over optimum (when the oracle ran) and over
    the LP value. Rows also carry any certified-bound violations; the
    report's "violations" list is the union (the CLI exits nonzero on a
    nonempty one).
    """
    rows = []
    violations = []
    for config in configs:
        for epsilon in epsilons:
            instances = [
                generate(replace(config, seed=config.seed + t)) for t in range(trials)
            ]
            opts = PipelineOptions(exact_cap=9, baselines=True)
            records = parallel_map(
                lambda inst: run_pipeline(inst, epsilon, opts), instances
            )
            row = {
                "family": config.family,
                "n": config.n,
                "epsilon": str(to_fraction(epsilon)),
                "trials": trials,
            }
            for key in ("ratio_alg_opt", "ratio_alg_lp", "ratio_lpls_lp"):
                vals = [rec[key] for rec in records if key in rec]
                if vals:
                    row[f"max_{key}"] = max(vals)
                    row[f"mean_{key}"] = sum(vals) / len(vals)
            eps = float(to_fraction(epsilon))
            pipeline_bound = 2.0 * (1.0 + eps) ** 2
            for rec in records:
                if "opt_cost" in rec and rec["alg_cost"] > pipeline_bound * rec["opt_cost"] + _BENCH_TOL:
                    violations.append(
                        f"{config.family} seed-offset instance {rec['digest'][:12]}: "
                        f"pipeline cost {rec['alg_cost']} exceeds {pipeline_bound} x optimum {rec['opt_cost']}"
                    )
                if config.family == "p_le_r" and "lpls_cost" in rec:
                    if rec["lpls_cost"] > 2.0 * rec["Z_lp"] + _BENCH_TOL:
                        violations.append(
                            f"p_le_r instance {rec['digest'][:12]}: LP+LS cost "
                            f"{rec['lpls_cost']} exceeds twice the LP value {rec['Z_lp']}"
                        )
            rows.append(row)
    return {"rows": rows, "violations": violations}
