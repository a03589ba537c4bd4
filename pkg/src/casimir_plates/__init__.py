"""Casimir vacuum energy of a massless scalar field between parallel plates.

Regulated mode sums, Poisson image sums, Euler-Maclaurin decomposition of the
energy per unit area, Hadamard finite parts and surface counterterms.
"""
__version__ = "0.1.0"

from .errors import (AccuracyError, CapabilityError, CasimirError, DecompositionError,
                     DomainError, SingularityError, SpecMismatchError)
from .regulator import (BUILTINS, EXPONENTIAL, GAUSSIAN, RATIONAL, CutoffLambda, Regulator,
                        get_regulator, validate)
from .modesum import (BoundaryCondition, DensitySample, PlateGeometry, density_direct,
                      energy_per_area_direct, tail_integral)
from .imagesum import (density_closed, density_limit, energy_per_area_periodic, image_term,
                       integrated_density_limit, single_plate_density)
from .eulermac import (EnergyDecomposition, GFunction, bernoulli_hardy, check_sigma_independence,
                       decompose_energy, g_deriv, g_eval, psi, sigma_k)
from .finitepart import (FinitePartResult, SingularitySpec, epsilon_limit,
                         pf_derivative_identity_check, pf_endpoint_integral,
                         pf_energy_per_area_dirichlet)
from .counterterm import SurfaceCounterterm, renormalized_energy_per_area, surface_density
