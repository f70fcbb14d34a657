"""Closed-form solution sets of noiseless LRR and LatLRR, with certificates.

The package builds members of the rank and nuclear-norm solution families,
certifies candidate pairs against the known optimum ``rank(X)``, and
produces nuclear-norm optima of LatLRR that fail to be rank optima.
"""

__version__ = "0.1.0"

from .linalg import (  # noqa: E402
    BlockPartition,
    SkinnySvd,
    ToleranceProfile,
    ZeroMatrixError,
    block_partition,
    is_block_compatible,
    is_idempotent,
    is_psd,
    nuclear_norm,
    numerical_rank,
    pseudo_inverse,
    skinny_svd,
)
from .solutions import (  # noqa: E402
    InfeasibleError,
    LatlrrPair,
    NuclearSolutionParams,
    ParameterError,
    RankSolutionParams,
    feature_rank_solution,
    latlrr_nuclear_solution,
    latlrr_rank_solution,
    lrr_inclusion_check,
    lrr_nuclear_solution,
    lrr_rank_solution,
    sample_idempotent,
    sample_nuclear_W,
    sample_side_matrices,
)
from .verify import (  # noqa: E402
    CertificateReport,
    certify_nuclear_optimal,
    certify_rank_optimal,
    characterize_theorem2,
    check_feasibility,
    nuclear_objective,
    rank_objective,
    subgradient_certificate,
)
from .counterexample import (  # noqa: E402
    CounterexampleReport,
    build_canonical_counterexample,
    build_random_counterexample,
    non_uniqueness_exhibit,
)
from .solver import SolverDiagnostics, SolverOptions, solve_latlrr, solve_lrr, svt  # noqa: E402
