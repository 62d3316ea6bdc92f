"""Distributed parameter estimation with conjugate-gradient adaptive networks.

Nodes in a sensor network estimate a common unknown vector from noisy
linear measurements. Each node runs a conjugate-gradient (full inner
loop) or modified conjugate-gradient (one update per sample) adaptive
filter, optionally with a sparsity-promoting shrinkage step, and shares
estimates with neighbors under combine-then-adapt or adapt-then-combine
diffusion. The simulator reproduces Monte-Carlo MSD learning curves and
the closed-form per-instant operation counts of the twelve method
variants.
"""

from .diffusion import (
    Protocol,
    Topology,
    atc_step,
    build_topology,
    combine,
    cta_step,
    from_edge_list,
    identity_weights,
    metropolis_weights,
    network_step,
    noncooperative_step,
    to_edge_list,
)
from .engines import (
    CgResult,
    Engine,
    EngineParams,
    NodeState,
    cg_inner_solve,
    cg_time_update,
    engine_step,
    init_state,
    lms_update,
    mcg_time_update,
    rls_update,
    stack_states,
    unstack_states,
)
from .numerics import (
    DimensionMismatchError,
    SingularMatrixError,
    cholesky_factor,
    corr_update,
    cross_update,
    direct_solve,
    hermitize,
    matvec,
    quad_cost,
    vdot,
)
from .penalties import (
    PenaltyKind,
    PenaltyParams,
    penalty_value,
    shrink,
    subgradient,
)
from .simulator import (
    MSD_FLOOR_DB,
    ComplexityCost,
    ComplexityInputs,
    ComplexityMethod,
    ExperimentConfig,
    MsdTrace,
    SignalModel,
    SparsityKind,
    SparsitySpec,
    TopologySpec,
    complexity_eval,
    draw_system_vector,
    generate_instant,
    generate_sample,
    make_sparse_vector,
    network_msd,
    run_experiment,
    simulate_run,
    snr_to_noise_var,
)

__version__ = "0.1.0"
