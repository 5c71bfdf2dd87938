"""Double derivations on quiver and tensor algebras, with exact certificates
that an algebra carrying suitable double derivations is a tensor algebra
T_B(M) (and, under the corollary's hypotheses, a path algebra kQ)."""

from .algebra import (Arrow, Element, Path, PathAlgebra, Quiver, StructureConstants,
                      TensorOverBase, coordinates, flatten, graded_basis, multiply,
                      path_algebra, quotient_project, tensor_algebra, tensor_multiply)
from .derivation import (DoubleDerivation, HypothesisReport, NotWitnessed, Setup, apply,
                         canonical_derivations, canonical_setup, check_hypotheses,
                         extend_apply, iterate, nilpotency_index, partial_double_derivations)
from .iso import (ConstantsSubspace, HypothesisError, IsoReport, NilpotencyError,
                  NotAQuiver, Rhobar, constants_basis, quivers_isomorphic,
                  recognize_quiver, rho, rhobar, rhobar_single, round_trip,
                  target_algebra, verify_isomorphism)
from .linalg import QMatrix, kernel_basis, rank, solve

__version__ = "0.1.0"
