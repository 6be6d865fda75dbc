"""Low-rank matrix recovery by nuclear-norm minimization.

Null-space recovery certificates, Weak/Strong threshold curves and a
phase-transition experiment harness for Gaussian measurement maps.
"""

from .errors import (
    DegenerateDecompositionError,
    DegenerateMapError,
    DimensionError,
    DomainError,
    InvalidReferenceError,
    NoCounterexampleError,
    NotInNullSpaceError,
    NumericalError,
    RecoveryError,
)
from .matcore import (
    Norms,
    SvdFactors,
    nuclear_norm,
    norms,
    numerical_rank,
    read_matrix,
    space_projectors,
    svd,
    unvectorize,
    vectorize,
    write_matrix,
)
from .ensemble import (
    LinearMap,
    null_space_basis,
    rng_stream,
    sample_gaussian,
    sample_linear_map,
    sample_low_rank,
)
from .recovery import (
    AffineProblem,
    OptimalityCheck,
    RecoveryResult,
    SolverConfig,
    check_recovery,
    nullspace_optimality_check,
    project_affine,
    solve_min_nuclear,
    svt,
)
from .conditions import (
    ConditionReport,
    Counterexample,
    DecompositionResult,
    additivity_holds,
    construct_counterexample,
    decompose,
    inf_gap_estimate,
    random_projector,
    sufficient_condition_sample,
)
from .bounds import (
    BoundCurve,
    StrongBound,
    bound_curve,
    expected_nuclear_norm,
    mp_constant,
    mp_constant_quadrature,
    sigma_nuclear,
    strong_bound,
    strong_bound_mu,
    strong_fg,
    szarek_log_net_size,
    weak_bound_mu,
)
from .experiments import (
    CellResult,
    GridSpec,
    NuclearStats,
    PhaseDiagram,
    export_csv,
    montecarlo_nuclear_stats,
    read_csv,
    render_heatmap,
    run_phase_grid,
)

__version__ = "0.1.0"
