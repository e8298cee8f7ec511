"""Problem instances and schedules for 1|r_j,prec|sum w_j C_j.

An instance is a set of jobs, each with an integer processing time p >= 1,
a release time r >= 0, and a weight w >= 0, plus a precedence DAG that is
kept transitively closed. A schedule assigns a start time to every job;
its cost is the weighted sum of completion times.

Release times are integers on input but may become fractional internally
(interval floors and guess-based adjustments lift them), so they are
stored as plain numbers. Processing times stay integral except in the
rounded instances produced by the fast bounded mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import CycleError, InfeasibleScheduleError, ValidationError
from .util import decimal_str

REL_TOL = 1e-9


@dataclass(frozen=True)
class Job:
    p: int
    r: float
    w: int


@dataclass(frozen=True)
class Instance:
    jobs: tuple[Job, ...]
    prec: frozenset[tuple[int, int]]

    @property
    def n(self) -> int:
        return len(self.jobs)

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        preds: list[list[int]] = [[] for _ in range(self.n)]
        for j, k in self.prec:
            preds[k].append(j)
        return tuple(tuple(sorted(ps)) for ps in preds)

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        succs: list[list[int]] = [[] for _ in range(self.n)]
        for j, k in self.prec:
            succs[j].append(k)
        return tuple(tuple(sorted(ss)) for ss in succs)

    @cached_property
    def time_scale(self) -> float:
        horizon = max((job.r for job in self.jobs), default=0.0)
        return float(horizon + sum(job.p for job in self.jobs))

    def tol(self) -> float:
        """Comparison tolerance for this instance's time magnitudes."""
        return REL_TOL * max(1.0, self.time_scale)

    def to_dict(self) -> dict:
        return {
            "jobs": [{"p": j.p, "r": j.r, "w": j.w} for j in self.jobs],
            "prec": sorted([j, k] for j, k in self.prec),
        }


def make_instance(
    jobs: Sequence[tuple], prec: Iterable[tuple[int, int]] = (), close: bool = True
) -> Instance:
    """Build an Instance from (p, r, w) triples and precedence pairs.

    Applies transitive closure by default; raises CycleError on a cyclic
    relation. Does not otherwise validate (see validate / require_valid).
    """
    job_tuple = tuple(Job(p, r, w) for p, r, w in jobs)
    pairs = frozenset((int(j), int(k)) for j, k in prec)
    if close:
        pairs = transitive_closure(pairs)
    return Instance(job_tuple, pairs)


def transitive_closure(pairs: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    """Transitive closure of a precedence relation given as ordered pairs.

    Idempotent. Raises CycleError naming a witness cycle if the relation
    is not acyclic (a pair (j, j) counts as a self-cycle).
    """
    pairs = set(pairs)
    nodes = sorted({v for pair in pairs for v in pair})
    succ = {v: set() for v in nodes}
    for j, k in pairs:
        succ[j].add(k)

    # Iterative DFS with an explicit stack; gray nodes are on the current
    # path, so hitting one yields a concrete cycle witness.
    color = {v: 0 for v in nodes}  # 0 white, 1 gray, 2 black
    reach = {v: set() for v in nodes}
    path: list[int] = []

    for root in nodes:
        if color[root] != 0:
            continue
        stack = [(root, iter(sorted(succ[root])))]
        color[root] = 1
        path.append(root)
        while stack:
            v, it = stack[-1]
            advanced = False
            for u in it:
                if color[u] == 1:
                    cycle = path[path.index(u):] + [u]
                    raise CycleError(cycle)
                if color[u] == 0:
                    color[u] = 1
                    path.append(u)
                    stack.append((u, iter(sorted(succ[u]))))
                    advanced = True
                    break
                reach[v] |= reach[u] | {u}
            if not advanced:
                stack.pop()
                path.pop()
                color[v] = 2
                if stack:
                    parent = stack[-1][0]
                    reach[parent] |= reach[v] | {v}

    closed = {(j, k) for j in nodes for k in reach[j]}
    return frozenset(closed)


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.findings


def validate(instance: Instance) -> ValidationReport:
    """Report every violated structural invariant; empty report iff well-formed.

    Checked: field ranges (p >= 1, r >= 0, w >= 0), precedence indices in
    range, irreflexivity, acyclicity (with witness), and transitive closure.
    """
    findings: list[str] = []
    n = instance.n
    for i, job in enumerate(instance.jobs):
        if job.p < 1:
            findings.append(
                f"job {i}: processing time {job.p} < 1; remove or merge "
                "zero-length jobs before solving"
            )
        if job.r < 0:
            findings.append(f"job {i}: negative release time {job.r}")
        if job.w < 0:
            findings.append(f"job {i}: negative weight {job.w}")

    in_range = True
    for j, k in sorted(instance.prec):
        if not (0 <= j < n and 0 <= k < n):
            findings.append(f"precedence pair ({j}, {k}) out of range")
            in_range = False
        elif j == k:
            findings.append(f"precedence pair ({j}, {j}) is reflexive")
            in_range = False

    if in_range:
        try:
            closed = transitive_closure(instance.prec)
        except CycleError as exc:
            findings.extend(exc.findings)
        else:
            for j, k in sorted(closed - instance.prec):
                findings.append(f"missing transitive edge ({j}, {k})")
    return ValidationReport(tuple(findings))


def require_valid(instance: Instance) -> Instance:
    report = validate(instance)
    if not report.ok:
        raise ValidationError(report.findings)
    return instance


def normalize_release_times(instance: Instance) -> Instance:
    """Lift release times so that r_j <= r_k whenever j precedes k.

    Any feasible schedule already satisfies S_k >= C_j >= r_j for j
    preceding k, so the set of feasible schedules (and the optimum) is
    unchanged. Idempotent; with a transitively closed relation a single
    pass over direct predecessors reaches the fixpoint.
    """
    new_jobs = []
    for k, job in enumerate(instance.jobs):
        r = job.r
        for j in instance.predecessors[k]:
            r = max(r, instance.jobs[j].r)
        new_jobs.append(Job(job.p, r, job.w))
    return Instance(tuple(new_jobs), instance.prec)


@dataclass(frozen=True)
class Schedule:
    start: tuple[float, ...]

    def completion(self, instance: Instance) -> tuple[float, ...]:
        return tuple(s + job.p for s, job in zip(self.start, instance.jobs))

    def to_dict(self, instance: Instance) -> dict:
        return {
            "start": [decimal_str(s) for s in self.start],
            "cost": decimal_str(schedule_cost(self, instance)),
        }


def feasibility_violations(
    schedule: Schedule, instance: Instance, tol: float | None = None
) -> list[str]:
    """List constraint violations of a schedule, in a deterministic order."""
    if tol is None:
        tol = instance.tol()
    out: list[str] = []
    start = schedule.start
    comp = schedule.completion(instance)
    for j, job in enumerate(instance.jobs):
        if start[j] < job.r - tol:
            out.append(f"job {j} starts at {start[j]} before release {job.r}")
    for j in range(instance.n):
        for k in range(j + 1, instance.n):
            if start[j] < comp[k] - tol and start[k] < comp[j] - tol:
                out.append(f"jobs {j} and {k} overlap")
    for j, k in sorted(instance.prec):
        if start[k] < comp[j] - tol:
            out.append(f"job {k} starts at {start[k]} before predecessor {j} completes at {comp[j]}")
    return out


def is_feasible(schedule: Schedule, instance: Instance, tol: float | None = None) -> bool:
    return not feasibility_violations(schedule, instance, tol)


def schedule_cost(
    schedule: Schedule, instance: Instance, check: bool = False, tol: float | None = None
) -> float:
    """Weighted sum of completion times; optionally verifies feasibility first."""
    if check:
        violations = feasibility_violations(schedule, instance, tol)
        if violations:
            raise InfeasibleScheduleError(violations[0])
    return sum(job.w * (s + job.p) for s, job in zip(schedule.start, instance.jobs))


def tighten(schedule: Schedule, instance: Instance, tol: float | None = None) -> Schedule:
    """Shift jobs left, one at a time, until no single job can start earlier.

    Keeps every other start fixed while a job moves, so the result is a
    fixpoint of single-job left shifts; starts never increase and cost
    never increases. Idempotent.
    """
    if tol is None:
        tol = instance.tol()
    start = list(schedule.start)
    p = [job.p for job in instance.jobs]
    changed = True
    while changed:
        changed = False
        for j in sorted(range(instance.n), key=lambda i: (start[i], i)):
            lb = float(instance.jobs[j].r)
            for h in instance.predecessors[j]:
                lb = max(lb, start[h] + p[h])
            cand = lb
            others = sorted((start[k], start[k] + p[k]) for k in range(instance.n) if k != j)
            for s_k, c_k in others:
                if cand + p[j] <= s_k + tol:
                    break
                if cand < c_k - tol:
                    cand = max(cand, c_k)
            if cand < start[j] - tol:
                start[j] = cand
                changed = True
    return Schedule(tuple(start))


def load_instance(source, normalize: bool = False) -> Instance:
    """Parse the instance JSON format, close the precedence relation, validate.

    source may be a path, a file object, or an already-parsed dict. Job ids
    are array positions; "prec" pairs need not be transitively closed.
    """
    if isinstance(source, dict):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)

    findings = []
    jobs = []
    for i, rec in enumerate(doc.get("jobs", [])):
        trip = []
        for field in ("p", "r", "w"):
            v = rec.get(field)
            if not isinstance(v, int) or isinstance(v, bool):
                findings.append(f"job {i}: field '{field}' must be an integer, got {v!r}")
                v = 0
            trip.append(v)
        jobs.append(tuple(trip))
    if findings:
        raise ValidationError(findings)

    instance = make_instance(jobs, [tuple(e) for e in doc.get("prec", [])])
    require_valid(instance)
    if normalize:
        instance = normalize_release_times(instance)
    return instance
