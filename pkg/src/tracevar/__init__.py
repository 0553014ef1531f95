"""Entropy-like trace functionals on finite tracial algebras and certificates
for their variational formulae."""

from .algebra import (BlockOperator, ResolutionOfIdentity, TracialAlgebra, Violation, add,
                      adjoint, multiply, scale, trace, validate_resolution)
from .channels import (PinchingMap, UnitaryMixtureMap, apply_channel, conditional_expectation,
                       restrict_state)
from .entropy import (DensityOperator, EntropyReport, relative_entropy, renyi_entropy,
                      segal_entropy, trace_functional)
from .errors import (ContractError, DomainError, ParameterError, PropertyViolation,
                     StructuralError, TracevarError)
from .spectral import (ScalarFunction, SpectralDecomposition, apply_function, eigendecompose,
                       parse_function, spectral_interval_partition)
from .variational import (GibbsCandidate, VariationalCertificate, constructive_gibbs_witness,
                          entropy_over_subalgebras, gibbs_ascent, gibbs_gradient,
                          gibbs_objective, partition_search, partition_value,
                          renyi_certificate, segal_partition_certificate)

__version__ = "0.1.0"
