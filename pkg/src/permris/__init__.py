"""permris: permuted-element reconfigurable intelligent surface toolkit."""

from .errors import (
    BudgetExceededError,
    DegenerateSplitError,
    HardwareModeError,
    InvalidArgumentError,
    InvalidSizeError,
    PermRisError,
)
from .geometry import (
    Direction,
    ZERO,
    element_grid,
    hadamard_identity_check,
    mod2_canonical,
    steering_vector,
)
from .metrics import (
    BallConstraint,
    DEFAULT_DELTA_BY_M,
    MetricReport,
    PatternSlice,
    TauPoint,
    beta_curve,
    gain_gradient,
    main_lobe_beta,
    pattern_slice,
    selectivity_tau,
    tau_cdf,
)
from .permutation import (
    PermDiagnostics,
    Permutation,
    diagnostics,
    identity_perm,
    perm_from_targets,
    random_perm,
    random_symmetric_perm,
    separable_perm,
)
from .ris import (
    HARDWARE_PER_ELEMENT,
    HARDWARE_SHARED_PAIR,
    PhaseConfig,
    RisModel,
    SplitWeights,
    beam_split_config,
    gain,
    optimal_config,
    symmetric_gain_closed_form,
    symmetric_pair_config,
)
from .selectivity import (
    FullGainSolution,
    SelectivityCertificate,
    brute_force_max_gain,
    certify_grid,
    certify_separable,
    solve_full_gain_direction,
    verify_certificate,
)

__version__ = "0.1.0"
