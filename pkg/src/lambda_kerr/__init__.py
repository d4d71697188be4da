"""Lambda-type three-level atom coupled to a single field mode with
intensity-dependent coupling in a Kerr medium.

Closed-form dynamics and observables, checked by a brute-force integrator."""

from .dynamics import (
    AmplitudeTriple,
    CubicSolution,
    InitialWeights,
    JointState,
    SectorCouplings,
    amplitudes_at,
    cubic_coefficients,
    shifted_cubic_coefficients,
    solve_sector_cubic,
    evolve_state,
    initial_weights_excited,
    sector_couplings,
    solve_cubic,
    solve_sectors,
)
from .errors import (
    DegenerateRootsError,
    NormDriftError,
    NumericalBranchError,
    NumericalConsistencyError,
    UndefinedStatisticsError,
)
from .model import (
    FieldState,
    ModelParams,
    NonlinearityFn,
    TruncationPolicy,
    choose_truncation,
    coherent_field,
    detunings,
    nonlinearity_eval,
)
from .observables import (
    EigenTriple,
    HusimiGrid,
    ObservableRecord,
    eigenvalues_cardano,
    entropy,
    field_entropy,
    husimi_grid,
    husimi_point,
    ladder_moment,
    mandel_q,
    photon_distribution,
    photon_moments,
    reduce_to_atom,
    squeezing,
)

__version__ = "0.1.0"
