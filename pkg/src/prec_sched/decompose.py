"""Geometric decomposition into bounded subproblems.

The LP completion times place every job on the time axis; breakpoints
t_i = e^(a(i-3)+b) with a = 3/eps then split the jobs into groups
J_i = {j : t_i <= C_j < t_{i+1}}. Each group becomes an independent
subproblem whose jobs may not start before 3 t_i, which makes it bounded
with L = 3 t_i and beta = e^(3/eps): its release times are at least L by
construction, and any tight schedule for it finishes by 3 t_{i+1} =
beta L. That containment (asserted on every run) means the subproblem
schedules never overlap, so the final schedule is simply their union.

The offset b is drawn uniformly from [0, a], or derandomized: the
partition as a function of b only changes where some breakpoint crosses
some C_j, so trying one b per constancy interval covers every reachable
partition exactly.

Growth rate e^a must be at least 3 (epsilon at most 3/ln 3), otherwise a
group's schedule could outgrow its interval and the union argument
breaks. The grid constructor enforces this; grid_from_scale bypasses the
epsilon check for callers reasoning directly in terms of a.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

from .bounded import BoundedResult, solve_bounded, to_fraction
from .errors import InvariantViolationError
from .exact import exact_opt
from .instance import Instance, Job, Schedule, feasibility_violations, schedule_cost, tighten
from .lp import LpSolution, solve_lp
from .util import parallel_map

EPS_MAX = 3.0 / math.log(3.0)
TAU_B_REL = 1e-9


@dataclass(frozen=True)
class IntervalGrid:
    """Breakpoints t_i = e^(a(i-3)+b), i = 1..q, with Cmax <= t_q."""

    a: float
    b: float
    breakpoints: tuple[float, ...]

    @property
    def q(self) -> int:
        return len(self.breakpoints)

    def t(self, i: int) -> float:
        """t_i by formula, valid beyond the stored range (e.g. t_{q+1})."""
        return math.exp(self.a * (i - 3) + self.b)

    def index_of(self, c: float) -> int:
        """The i with t_i <= c < t_{i+1}."""
        i = int(math.floor((math.log(c) - self.b) / self.a)) + 3
        # float guard: move across a boundary if the formula says so
        while self.t(i + 1) <= c:
            i += 1
        while self.t(i) > c:
            i -= 1
        return i


def grid_from_scale(a: float, b: float, cmax: float) -> IntervalGrid:
    """Build a grid directly from the growth scale a (no epsilon check).

    q is minimal with cmax <= t_q. cmax must be positive.
    """
    if a <= 0:
        raise ValueError("scale a must be positive")
    if not 0 <= b <= a:
        raise ValueError(f"offset b must lie in [0, {a}], got {b}")
    if cmax <= 0:
        raise ValueError("cmax must be positive")
    breakpoints = []
    i = 1
    while True:
        t_i = math.exp(a * (i - 3) + b)
        breakpoints.append(t_i)
        if cmax <= t_i:
            return IntervalGrid(a, b, tuple(breakpoints))
        i += 1


def _scale_of(epsilon) -> float:
    """Growth scale a = 3/epsilon; rejects epsilon outside (0, 3/ln 3]."""
    eps = float(to_fraction(epsilon))
    if not 0 < eps <= EPS_MAX + 1e-12:
        raise ValueError(
            f"epsilon must lie in (0, 3/ln 3 ~= {EPS_MAX:.4f}], got {eps}: "
            "interval growth e^(3/epsilon) must be at least 3 for block "
            "containment to hold"
        )
    return 3.0 / eps


def build_grid(epsilon, b: float, cmax: float) -> IntervalGrid:
    """Grid for a given epsilon; rejects epsilon outside (0, 3/ln 3].

    The upper limit is what makes each subproblem fit its interval: the
    breakpoint ratio e^(3/epsilon) must be at least 3 so that a bounded
    block starting at 3 t_i can finish by 3 t_{i+1}.
    """
    return grid_from_scale(_scale_of(epsilon), b, cmax)


@dataclass(frozen=True)
class SubInstance:
    """One bounded subproblem: parent jobs `jobs`, floor L = 3 t_i."""

    jobs: tuple[int, ...]
    index: int
    floor: float
    beta: float
    instance: Instance


def partition_jobs(instance: Instance, lp: LpSolution, grid: IntervalGrid) -> list[SubInstance]:
    """Split jobs by which grid interval their LP completion falls in.

    Every job lands in exactly one group; empty groups are dropped. Each
    group's release times are lifted to its floor 3 t_i, and precedence
    is restricted to the group (restriction of a transitive relation is
    transitive). Precedence across groups always points forward because
    the LP orders C along precedence; violated means a bug upstream.
    """
    groups: dict[int, list[int]] = {}
    for j, c in enumerate(lp.completion):
        groups.setdefault(grid.index_of(c), []).append(j)
    for j, k in instance.prec:
        ij = grid.index_of(lp.completion[j])
        ik = grid.index_of(lp.completion[k])
        if ij > ik:
            raise InvariantViolationError(
                f"precedence ({j}, {k}) crosses intervals backwards ({ij} > {ik})"
            )
    subs = []
    beta = math.exp(grid.a)
    for i in sorted(groups):
        ids = tuple(sorted(groups[i]))
        back = {j: pos for pos, j in enumerate(ids)}
        floor = 3.0 * grid.t(i)
        jobs = tuple(
            Job(instance.jobs[j].p, max(instance.jobs[j].r, floor), instance.jobs[j].w)
            for j in ids
        )
        prec = frozenset(
            (back[j], back[k]) for j, k in instance.prec if j in back and k in back
        )
        subs.append(SubInstance(ids, i, floor, beta, Instance(jobs, prec)))
    return subs


def derandomize_b(lp: LpSolution, a: float) -> tuple[float, ...]:
    """Offsets b covering every partition reachable over b in [0, a].

    The partition changes exactly when a breakpoint crosses some C_j,
    i.e. at b = ln C_j (mod a). Each such event value, nudged into the
    interior of the constancy interval just above it, plus b = 0, hits
    every piece. The nudge is relative (1e-9 a) and wraps modulo a.
    """
    tau = TAU_B_REL * a
    cands = {0.0}
    for c in lp.completion:
        cands.add(((math.log(c) % a) + tau) % a)
    return tuple(sorted(cands))


@dataclass(frozen=True)
class IntervalOutcome:
    """Diagnostics for one solved subproblem."""

    index: int
    jobs: tuple[int, ...]
    floor: float
    ceiling: float
    cost: float
    guesses_tried: int


@dataclass(frozen=True)
class DecomposeResult:
    schedule: Schedule
    cost: float
    b: float
    grid: IntervalGrid
    candidates: tuple[float, ...]
    intervals: tuple[IntervalOutcome, ...]
    lp: LpSolution

    def to_dict(self, instance: Instance) -> dict:
        from .util import decimal_str

        doc = self.schedule.to_dict(instance)
        doc["b"] = self.b
        doc["t"] = [decimal_str(t) for t in self.grid.breakpoints]
        doc["intervals"] = [
            {
                "jobs": list(iv.jobs),
                "cost": decimal_str(iv.cost),
                "floor": decimal_str(iv.floor),
                "guesses_tried": iv.guesses_tried,
            }
            for iv in self.intervals
        ]
        return doc


def _solve_partition(
    instance: Instance,
    grid: IntervalGrid,
    subs: list[SubInstance],
    epsilon,
    bounded_mode: str,
    budget: Optional[int],
    trace_hook,
) -> tuple[Schedule, float, tuple[IntervalOutcome, ...]]:
    tol = instance.tol()

    def solve_one(sub: SubInstance) -> tuple[BoundedResult, Schedule]:
        res = solve_bounded(
            sub.instance,
            epsilon,
            L=sub.floor,
            beta=sub.beta,
            mode=bounded_mode,
            budget=budget,
            trace_hook=trace_hook,
        )
        tight = tighten(res.schedule, sub.instance)
        lo = min(tight.start)
        hi = max(s + job.p for s, job in zip(tight.start, sub.instance.jobs))
        ceiling = 3.0 * grid.t(sub.index + 1)
        if lo < sub.floor - tol or hi > ceiling + tol:
            raise InvariantViolationError(
                f"block {sub.index} escaped its interval: spans [{lo}, {hi}] "
                f"vs [{sub.floor}, {ceiling}]"
            )
        return res, tight

    solved = parallel_map(solve_one, subs)
    start = [0.0] * instance.n
    outcomes = []
    for sub, (res, tight) in zip(subs, solved):
        for pos, j in enumerate(sub.jobs):
            start[j] = tight.start[pos]
        outcomes.append(
            IntervalOutcome(
                sub.index,
                sub.jobs,
                sub.floor,
                3.0 * grid.t(sub.index + 1),
                float(sum(
                    sub.instance.jobs[pos].w * (tight.start[pos] + sub.instance.jobs[pos].p)
                    for pos in range(len(sub.jobs))
                )),
                res.guesses_tried,
            )
        )
    union = Schedule(tuple(start))
    violations = feasibility_violations(union, instance)
    if violations:
        raise InvariantViolationError(
            f"union of block schedules infeasible for the parent: {violations[0]}"
        )
    return union, schedule_cost(union, instance), tuple(outcomes)


def decompose_and_solve(
    instance: Instance,
    epsilon,
    mode: str = "derandomized",
    seed: Optional[int] = None,
    bounded_mode: str = "exhaustive",
    budget: Optional[int] = None,
    trace_hook=None,
) -> DecomposeResult:
    """Full pipeline: LP once, partition per offset, solve blocks, unite.

    Parameters
    ----------
    instance : Instance
        Validated and release-normalized.
    epsilon : rational
        In (0, 3/ln 3]; drives both the interval growth and the guess
        grid of the block solver.
    mode : {"derandomized", "random"}
        derandomized tries one offset per reachable partition and keeps
        the cheapest result; random draws a single offset from `seed`.
    bounded_mode, budget :
        Passed through to solve_bounded for each block.
    trace_hook : callable, optional
        Forwarded to solve_bounded (receives per-guess traces).

    Returns
    -------
    DecomposeResult
        Schedule plus offset, grid, per-block diagnostics, and the LP.
    """
    lp = solve_lp(instance)
    eps = to_fraction(epsilon)
    a = _scale_of(eps)
    if instance.n == 0:
        return DecomposeResult(Schedule(()), 0.0, 0.0, IntervalGrid(1.0, 0.0, ()), (0.0,), (), lp)
    cmax = max(lp.completion)
    if mode == "random":
        rng = random.Random(seed)
        candidates = (rng.uniform(0.0, a),)
    elif mode == "derandomized":
        candidates = derandomize_b(lp, a)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    def evaluate(b: float):
        grid = build_grid(eps, b, cmax)
        subs = partition_jobs(instance, lp, grid)
        union, cost, outcomes = _solve_partition(
            instance, grid, subs, eps, bounded_mode, budget, trace_hook
        )
        return grid, union, cost, outcomes

    results = parallel_map(evaluate, candidates)
    best_at = min(range(len(results)), key=lambda i: (results[i][2], i))
    grid, union, cost, outcomes = results[best_at]
    return DecomposeResult(
        union, cost, candidates[best_at], grid, tuple(candidates), outcomes, lp
    )


def subproblem_optimum_sum(
    instance: Instance, lp: LpSolution, grid: IntervalGrid, cap: int = 12
) -> float:
    """Sum over blocks of the exact optimum of each block instance.

    The quantity whose expectation over a uniform offset stays within
    (1 + eps) of the parent optimum; tests average it over many draws.
    """
    subs = partition_jobs(instance, lp, grid)
    return float(sum(exact_opt(sub.instance, cap)[0] for sub in subs))


def grid_floor_values(lp: LpSolution, grid: IntervalGrid) -> tuple[float, ...]:
    """Per job, the breakpoint t_i of the interval holding its C_j."""
    return tuple(grid.t(grid.index_of(c)) for c in lp.completion)
