"""Root-parameterized statistical reconstruction of psi-functions.

The state is estimated through its amplitude expansion c_j (a "root" of the
probability density), which turns maximum-likelihood reconstruction into a
fixed-point eigenproblem with a simple, isotropic error structure.
"""
__version__ = "0.1.0"

from .basisfn import HermiteBasis, RegisterBasis, dft_unitary, eval_basis, eval_conjugate_basis
from .errors import (ConvergenceError, DegenerateParameterizationError, DomainError,
                     IncompleteProtocolError, SingularLikelihoodError)
from .infomat import (MeasurementProtocol, completeness_check, covariance_full, fisher_analytic,
                      fisher_quadrature, info_matrices, principal_fluctuations)
from .mlsolve import (RegisterCounts, SampleSet, SolverOptions, solve_continuous, solve_poisson,
                      solve_register)
from .statevec import RealDoubled, StateVector, density_at, double, fidelity, gauge_fix, undouble
from .stattest import (binomial_approx_report, chi2_cdf, chi2_quantile, confidence_cone,
                       informational_fidelity, mean_information_loss, root_chi2)

__all__ = [name for name in dir() if not name.startswith("_")]
