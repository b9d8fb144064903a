"""trotterforge: arbitrary-order product-formula schedules for lattice
Hamiltonians, validated by exact dense simulation of small spin systems."""

from .dense import DenseOperator, ResourceCapError, dense_site_cap
from .model import (
    DecayFunction,
    Decomposition,
    Interaction,
    InteractionTerm,
    LatticeGraph,
    PauliString,
    SpinModel,
    anchored_norm,
    assemble,
    chain,
    decompose_even_odd,
    decompose_greedy_coloring,
    derivation,
    interaction_norm,
    load_model,
    term,
    truncate,
    truncation_bound_check,
)
from .schedule import (
    PathTrace,
    ProductSchedule,
    ScheduleParams,
    base_symmetric,
    check_order_conditions,
    compose,
    merge_adjacent,
    path_trace,
    reverse,
    suzuki_coefficient,
    suzuki_recurse,
    suzuki_schedule,
    total_absolute_time,
    total_time_closed_form,
)
from .simulator import (
    EvolutionPlan,
    conditional_expectation,
    error_norm,
    expm_hermitian,
    heisenberg,
    leakage_profile,
    run_schedule,
)
from .experiments import (
    ConvergenceReport,
    DegenerateFitError,
    DepthReport,
    convergence_study,
    depth_search,
    lightcone_study,
    long_range_chain,
    single_step_order,
    tfim_chain,
    truncation_study,
)

__version__ = "0.1.0"
