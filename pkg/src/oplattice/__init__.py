"""Finite-dimensional operator toolkit for quantum kinematics: spectral
measures and functional calculus, the projector lattice, density states and
measurement, matrix *-algebras with superselection sectors, one-parameter
dynamics and symmetries, the truncated canonical pair, and the cyclic
representation of algebraic states.
"""

from .linalg import (
    DEFAULT_TOL,
    ConvergenceFailure,
    DimensionMismatch,
    EigenSystem,
    HermitianOperator,
    NotHermitian,
    NotSquare,
    NotUnitary,
    UnitaryOperator,
    eig_hermitian,
    frobenius,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    operator_norm,
)
from .spectral import (
    MissingSample,
    NonCommuting,
    ProjectorValuedMeasure,
    func_calculus,
    joint_pvm,
    marginal_pvm,
    pvm_commute,
    pvm_from_json,
    pvm_residuals,
    pvm_to_json,
    spectral_decompose,
)
from .lattice import (
    MaxIterExceeded,
    NotComparable,
    NotProjector,
    Projector,
    commutes,
    commuting_decomposition,
    identity_projector,
    is_below,
    jauch_meet,
    join,
    meet,
    neg,
    orthomodular_check,
    projector_from_json,
    projector_to_json,
    span_projector,
    zero_projector,
)
from .states import (
    DensityState,
    GleasonFit,
    InconsistentAssignments,
    PureStateVector,
    UnderdeterminedFrame,
    WitnessNotFound,
    ZeroProbability,
    born_probability,
    conditional_probability,
    expectation,
    gleason_fit,
    is_pure,
    kochen_specker_witness,
    luders_collapse,
    purity,
    sequential_probability,
    std_deviation,
    tomography_frame,
    transition_probability,
)
from .algebras import (
    MatrixStarAlgebra,
    NonCentralCharge,
    NonCommutingCharges,
    NotClosedUnderProducts,
    center,
    commutant,
    decohere_across_sectors,
    double_commutant,
    is_factor,
    superselection_sectors,
)
from .dynamics import (
    EquivalenceViolation,
    InconsistentGroup,
    MultiplierTable,
    NotACocycle,
    NotHermitianResult,
    OrderTooLarge,
    QuadratureTooCoarse,
    SymmetryOperator,
    cocycle_check,
    commuting_via_groups,
    dyson_evolve,
    dyson_series,
    evolve_unitary,
    generator_from_group,
    heisenberg_observable,
    multipliers_from_operators,
    noether_check,
    phase_fix_one_parameter,
    spectrum_reversal_gap,
    su2_fixture,
    wigner_apply,
    wigner_apply_observable,
)
from .oscillator import (
    BadDimension,
    TailTooLarge,
    TruncatedCanonicalPair,
    build_truncated_pair,
    heisenberg_uncertainty,
    svn_hypotheses_check,
)
from .gns import (
    AbstractStarAlgebra,
    AlgebraicState,
    DegenerateAlgebra,
    GNSTriple,
    InputIsPure,
    NotAState,
    algebra_from_matrices,
    folium_state,
    gns_construct,
    gns_intertwiner,
    is_pure_state,
    mixed_to_vector_paradox_demo,
    state_from_density,
    verify_gns,
)

__version__ = "0.1.0"
