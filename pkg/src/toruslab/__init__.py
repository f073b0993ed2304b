"""toruslab: exact spanning-tree counts of discrete tori, zeta-regularized
determinants (heights) of real tori, and the asymptotic law relating them."""

__version__ = "0.1.0"

from .errors import (
    CapExceededError,
    ConfigError,
    DimensionTooLargeError,
    NonConvergenceError,
    NotUnitVolumeError,
    PoleError,
    SingularMatrixError,
    TorusError,
    TruncationError,
    UnknownLatticeError,
)
from .lattices import (
    DualCosetRep,
    IntegerLattice,
    RealLattice,
    SmithDecomposition,
    dual_cosets,
    enumerate_cosets,
    named_lattice,
    normalize_shape,
    parse_matrix,
    parse_real_matrix,
    shortest_vector,
    smith_normal_form,
)
from .spectral import (
    SpectrumSummary,
    TorusLaplacian,
    TreeCount,
    build_laplacian,
    count_spanning_trees,
    eigenvalues,
    log_det_star_float,
)
from .besselfns import scaled_bessel_batch, scaled_bessel_i
from .quadrature import QuadratureSpec, QuadResult, integrate_adaptive
from .theta import (
    HeatKernelEval,
    heat_kernel_torus,
    hk_scaling_limit_check,
    theta_continuous,
    theta_discrete_bessel,
    theta_discrete_spectral,
)
from .heights import (
    CrConstant,
    HeightResult,
    c_constant,
    epstein_zeta,
    height,
    script_h,
    script_i,
    spectral_log_identity_check,
    ss_bound_check,
)
from .experiments import (
    ExperimentRecord,
    SequenceSpec,
    check_tree_bound,
    compare_sequences,
    run_experiment_file,
    verify_theorem1,
)
