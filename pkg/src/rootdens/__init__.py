"""Root (psi-function) density estimation.

The density is written as p = psi^2 with psi = sum c_i phi_i over an
orthonormal basis; the unit vector c is fitted by maximum likelihood.
"""

__version__ = "0.1.0"

from .basis import AffineTransform, BasisSpec, standardize
from .core import StateVector
from .densmat import DensityMatrix, merge_states, mix, pure_state, spectral
from .errors import (
    DegenerateSampleError,
    IncompatibleStatesError,
    InvalidInputError,
    NumericalError,
    RootDensError,
    TieError,
)
from .inference import chi2_goodness, chi2_homogeneity, confidence_cone, covariance, fisher_information
from .selection import select_harmonics
from .solver import FitConfig, FitReport, density_eval, fit, psi_eval

__all__ = [
    "AffineTransform",
    "BasisSpec",
    "DegenerateSampleError",
    "DensityMatrix",
    "FitConfig",
    "FitReport",
    "IncompatibleStatesError",
    "InvalidInputError",
    "NumericalError",
    "RootDensError",
    "StateVector",
    "TieError",
    "chi2_goodness",
    "chi2_homogeneity",
    "confidence_cone",
    "covariance",
    "density_eval",
    "fisher_information",
    "fit",
    "merge_states",
    "mix",
    "psi_eval",
    "pure_state",
    "select_harmonics",
    "spectral",
    "standardize",
]
