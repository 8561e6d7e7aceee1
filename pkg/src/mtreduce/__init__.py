"""mtreduce: self-reduction dynamics of a 13-column microtubule lattice."""

__version__ = "0.1.0"

from .lattice import (
    CouplingTable,
    GeometryParams,
    LatticeSpec,
    SpinCouplings,
    build_adjacency,
    compute_coupling_table,
    spin_couplings,
    symmetrize,
)
from .dynamics import (
    EomParams,
    StateVector,
    derivative,
    mean_field_solution,
    rk4_step,
    t0_seconds,
    variational_energy,
)
from .reduction import (
    ClusterLabeling,
    ReductionEvent,
    ResetZone,
    apply_global_reduction,
    apply_local_reduction,
    in_reset_zone,
    label_clusters,
    qualifying_clusters,
)
from .simulation import (
    RunResult,
    SimConfig,
    TauEstimate,
    init_state,
    run,
    sweep,
    tau_estimate,
)
from .analysis import (
    FitResult,
    detect_knee,
    fit_exponential,
    fit_power_law,
    hopping_estimate,
    min_cluster_size,
    reset_zone_probability,
    tau_sync,
)
