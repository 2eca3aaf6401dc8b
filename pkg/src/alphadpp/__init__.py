"""Tree representation of alpha-determinantal point processes on the line."""
from ._backend import BACKEND, available_backends
from .alphadet import AlphaParam, det_alpha, det_alpha_batch, det_alpha_dp, det_alpha_naive, permanent_ryser
from .correlation import (
    CorrelationQuery,
    ParsevalReport,
    lhs_parseval,
    parseval_tail_bound,
    rho_F_m,
    rho_m,
    rhs_parseval,
    verify_parseval,
)
from .errors import (
    AlphaDPPError,
    ArtifactIOError,
    ConfigurationError,
    ContractViolation,
    InadmissibleAlpha,
    ResourceLimitError,
    SpectralViolation,
)
from .kernels import FiniteRank, Gaussian, KernelSpec, RankOneIndicator, SineWindow, kernel_from_dict, validate_a1
from .projection import ProjectedKernel, cycle_integral, project_kernel, spectrum_check, tail_trace
from .quadrature import QuadratureSpec
from .sampler import (
    ContinuumConfiguration,
    DiscreteConfiguration,
    LiftedConfiguration,
    attach_marks,
    cell_counts,
    estimate_factorial_moments,
    sample_discrete,
    simulate_lift,
    unlabel,
    verify_lift,
)
from .tree import BasisIndex, TreeIndex, Window, basis_indices, eval_basis

__version__ = "0.1.0"
