"""Shared builders for randomized test instances and schedules."""

from __future__ import annotations

import random

import pytest

from prec_sched import Schedule, make_instance, normalize_release_times


def random_instance(seed, n, p_max=8, r_max=16, w_max=6, density=0.3, normalize=True):
    """Random valid instance, release-normalized unless told otherwise."""
    rng = random.Random(seed)
    jobs = [
        (rng.randint(1, p_max), rng.randint(0, r_max), rng.randint(0, w_max))
        for _ in range(n)
    ]
    prec = [
        (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density
    ]
    instance = make_instance(jobs, prec)
    return normalize_release_times(instance) if normalize else instance


def random_bounded_instance(seed, n, L, p_max=4, r_spread=8, w_max=6, density=0.3):
    """Random instance with every release in [L, L + r_spread].

    With p_max * n + r_spread kept below (e**3 - 1) * L, every tight
    schedule finishes before e**3 * L, so the instance is bounded with
    beta = e**3.
    """
    rng = random.Random(seed)
    jobs = [
        (rng.randint(1, p_max), L + rng.randint(0, r_spread), rng.randint(0, w_max))
        for _ in range(n)
    ]
    prec = [
        (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density
    ]
    return normalize_release_times(make_instance(jobs, prec))


def random_feasible_schedule(seed, instance, slack=5):
    """Feasible schedule from a random topological order with random idle."""
    rng = random.Random(seed)
    n = instance.n
    placed = []
    remaining = set(range(n))
    while remaining:
        ready = [
            j
            for j in remaining
            if all(h not in remaining for h in instance.predecessors[j])
        ]
        placed.append(rng.choice(ready))
        remaining.discard(placed[-1])
    start = [0.0] * n
    t = 0.0
    for j in placed:
        t = max(t, float(instance.jobs[j].r)) + rng.randint(0, slack)
        start[j] = t
        t += instance.jobs[j].p
    return Schedule(tuple(start))


@pytest.fixture
def two_job_reference():
    """Two jobs: a light urgent one released late, a heavy one at zero.

    The classic case where list scheduling in LP order pays (M + 1) M
    against an optimum of 2 M; here M = 10.
    """
    return make_instance([(1, 1, 10), (10, 0, 0)])
