"""Evolution algebras on separable Hilbert spaces, with a verified bridge to
discrete-time Markov chains on countably infinite state spaces."""

from ._mc import IMPLEMENTATION as MC_IMPLEMENTATION
from .algebra import (
    ContinuityBound,
    LeftMultiplication,
    StructureMap,
    continuity_bound,
    left_mult,
    product,
    square_basis,
)
from .elements import (
    BoundedScalar,
    Element,
    TruncationPolicy,
    axpy,
    format_element,
    inner_product,
    norm,
    parse_element,
    read_element,
    scale,
    truncate,
)
from .errors import (
    ElementFormatError,
    HevaError,
    InvalidParameter,
    InvalidWeights,
    KernelFormatError,
    MissingCertificate,
    NonFiniteCoefficient,
    NotMarkov,
    TailTooLarge,
    UnsupportedInput,
)
from .markov import (
    ConstantSequence,
    Distribution,
    GeometricSequence,
    KernelReport,
    NStepTable,
    SimulationResult,
    TransitionKernel,
    branching_column_bound,
    build_branching,
    build_house_of_cards,
    build_identity,
    build_renewal,
    builtin_kernel,
    evolve_distribution,
    format_distribution,
    load_kernel,
    nstep_oracle,
    parse_distribution,
    parse_kernel,
    read_distribution,
    simulate,
    to_structure_map,
    validate_kernel,
)
from .operator import (
    Certificate,
    DomainVerdict,
    certify_hilbert_schmidt,
    certify_rowsum,
    certify_schur,
    empirical_norm_lower_bound,
    evolution_apply,
    in_domain,
    power_apply,
)

__version__ = "0.1.0"

__all__ = [
    "BoundedScalar",
    "Certificate",
    "ConstantSequence",
    "ContinuityBound",
    "Distribution",
    "DomainVerdict",
    "Element",
    "ElementFormatError",
    "GeometricSequence",
    "HevaError",
    "InvalidParameter",
    "InvalidWeights",
    "KernelFormatError",
    "KernelReport",
    "LeftMultiplication",
    "MC_IMPLEMENTATION",
    "MissingCertificate",
    "NStepTable",
    "NonFiniteCoefficient",
    "NotMarkov",
    "SimulationResult",
    "StructureMap",
    "TailTooLarge",
    "TransitionKernel",
    "TruncationPolicy",
    "UnsupportedInput",
    "axpy",
    "branching_column_bound",
    "build_branching",
    "build_house_of_cards",
    "build_identity",
    "build_renewal",
    "builtin_kernel",
    "certify_hilbert_schmidt",
    "certify_rowsum",
    "certify_schur",
    "continuity_bound",
    "empirical_norm_lower_bound",
    "evolution_apply",
    "evolve_distribution",
    "format_distribution",
    "format_element",
    "in_domain",
    "inner_product",
    "left_mult",
    "load_kernel",
    "norm",
    "nstep_oracle",
    "parse_distribution",
    "parse_element",
    "parse_kernel",
    "power_apply",
    "product",
    "read_distribution",
    "read_element",
    "scale",
    "simulate",
    "square_basis",
    "to_structure_map",
    "truncate",
    "validate_kernel",
]
