"""Multilevel determinantal ensembles on finite grids.

Weighted biorthogonal dual bases, block kernels, Fredholm determinants and
resolvents, correlation / exact-occupancy densities, count statistics, an
exhaustive enumeration oracle, and a Metropolis sampler. The headline check:
the Fredholm resolvent of the checked kernel composed with any weight set w
coincides with the checked kernel of the (1 - w)-dualized construction, to
machine precision on every discretized instance.
"""

from .biortho import (
    DualBases,
    PairingDecomposition,
    dual_bases,
    pairing_expressions,
    pairing_matrix,
    plu_decompose,
    tilde_propagator,
)
from .chain import (
    ChainSpec,
    ChainTables,
    WeightSet,
    from_indicators,
    from_tables,
    indicator_vector,
    tabulate,
)
from .errors import (
    CompositionInconsistency,
    ConditioningError,
    DegenerateBasis,
    DetchainError,
    DomainError,
    DuplicateNode,
    InvalidInterval,
    InvalidWeight,
    NotAProbability,
    OrderError,
    OverlapError,
    ResolventSingular,
    ShapeError,
    SignedDensityError,
    SingularPairing,
    StateError,
)
from .fredholm import (
    BigMatrix,
    CountDistribution,
    IdentityResiduals,
    correlation,
    flatten,
    fredholm_det,
    g_resolvent_residual,
    gap_generating_function,
    janossy,
    joint_density,
    resolvent,
    theorem2_residuals,
)
from .kernels import (
    BlockKernel,
    build_K,
    build_g,
    check_kernel,
    compose_w,
    factorization_residual,
    kernel_via_inverse,
)
from .measure import Grid, integrate, make_discrete_grid, make_gauss_legendre_grid
from .oracle import (
    Configuration,
    Enumeration,
    enumerate_configurations,
    oracle_correlation,
    oracle_counts,
    oracle_gap,
    oracle_janossy,
    probnm_total_mass,
)
from .sampler import SamplerConfig, configuration_weight, empirical_gap, sample

__version__ = "0.1.0"

__all__ = [
    "BigMatrix",
    "BlockKernel",
    "ChainSpec",
    "ChainTables",
    "CompositionInconsistency",
    "ConditioningError",
    "Configuration",
    "CountDistribution",
    "DegenerateBasis",
    "DetchainError",
    "DomainError",
    "DualBases",
    "DuplicateNode",
    "Enumeration",
    "Grid",
    "IdentityResiduals",
    "InvalidInterval",
    "InvalidWeight",
    "NotAProbability",
    "OrderError",
    "OverlapError",
    "PairingDecomposition",
    "ResolventSingular",
    "SamplerConfig",
    "ShapeError",
    "SignedDensityError",
    "SingularPairing",
    "StateError",
    "WeightSet",
    "build_K",
    "build_g",
    "check_kernel",
    "compose_w",
    "configuration_weight",
    "correlation",
    "dual_bases",
    "empirical_gap",
    "enumerate_configurations",
    "factorization_residual",
    "flatten",
    "fredholm_det",
    "from_indicators",
    "from_tables",
    "g_resolvent_residual",
    "gap_generating_function",
    "indicator_vector",
    "integrate",
    "janossy",
    "joint_density",
    "kernel_via_inverse",
    "make_discrete_grid",
    "make_gauss_legendre_grid",
    "oracle_correlation",
    "oracle_counts",
    "oracle_gap",
    "oracle_janossy",
    "pairing_expressions",
    "pairing_matrix",
    "plu_decompose",
    "probnm_total_mass",
    "resolvent",
    "sample",
    "tabulate",
    "theorem2_residuals",
    "tilde_propagator",
]
