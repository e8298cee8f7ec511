"""Approximation toolkit for single-machine weighted completion time
scheduling with release times and precedence constraints."""

from .bounded import (
    BoundedResult,
    Guess,
    TypeGuess,
    adjust_release_times,
    adjust_release_times_typed,
    early_bound,
    enumerate_guesses,
    enumerate_type_guesses,
    grid_shift,
    round_processing,
    solve_bounded,
)
from .decompose import (
    DecomposeResult,
    IntervalGrid,
    SubInstance,
    build_grid,
    decompose_and_solve,
    derandomize_b,
    partition_jobs,
)
from .errors import (
    CycleError,
    InfeasibleScheduleError,
    InvariantViolationError,
    LpIterationLimitError,
    SchedulingError,
    ValidationError,
)
from .exact import exact_contribution, exact_opt
from .harness import GeneratorConfig, bench, generate, run_pipeline
from .instance import (
    Instance,
    Job,
    Schedule,
    ValidationReport,
    feasibility_violations,
    is_feasible,
    load_instance,
    make_instance,
    normalize_release_times,
    require_valid,
    schedule_cost,
    tighten,
    transitive_closure,
    validate,
)
from .listsched import (
    check_busy_interval_bounds,
    check_ls_property,
    list_schedule,
    list_schedule_strict,
    lp_ls,
    order_from_lp,
)
from .lp import (
    Cut,
    LpSolution,
    check_lp_lemmas,
    make_cut,
    separate_exhaustive,
    separate_fast,
    solve_lp,
)

__all__ = [
    "BoundedResult",
    "Cut",
    "CycleError",
    "DecomposeResult",
    "GeneratorConfig",
    "Guess",
    "InfeasibleScheduleError",
    "Instance",
    "IntervalGrid",
    "InvariantViolationError",
    "Job",
    "LpIterationLimitError",
    "LpSolution",
    "Schedule",
    "SchedulingError",
    "SubInstance",
    "TypeGuess",
    "ValidationError",
    "ValidationReport",
    "adjust_release_times",
    "adjust_release_times_typed",
    "bench",
    "build_grid",
    "check_busy_interval_bounds",
    "check_lp_lemmas",
    "check_ls_property",
    "decompose_and_solve",
    "derandomize_b",
    "early_bound",
    "enumerate_guesses",
    "enumerate_type_guesses",
    "exact_contribution",
    "exact_opt",
    "feasibility_violations",
    "generate",
    "grid_shift",
    "is_feasible",
    "list_schedule",
    "list_schedule_strict",
    "load_instance",
    "lp_ls",
    "make_cut",
    "make_instance",
    "normalize_release_times",
    "order_from_lp",
    "partition_jobs",
    "require_valid",
    "round_processing",
    "run_pipeline",
    "schedule_cost",
    "separate_exhaustive",
    "separate_fast",
    "solve_bounded",
    "solve_lp",
    "tighten",
    "transitive_closure",
    "validate",
]
