"""Legendre dual-Petrov-Galerkin spectral methods in time.

Modules: ``polybasis`` (Legendre toolkit), ``gbp`` (generalised Bessel
polynomials and their zeros), ``ldpg`` (discretisation matrices and IVP
solvers), ``linalg`` (dense kernels), ``timesolver`` (space-time solves),
``models`` (wave and KdV applications), ``cli`` (experiment driver).
"""

from .errors import (AdmissibilityError, DomainError, IllConditionedWarning, NewtonDivergence,
                     NonConvergence, Resonance, SingularMatrix, SpectimeError)
from .gbp import CrescentRegion, GbpParams, gbp_eval, gbp_zeros, jacobi_matrix
from .ldpg import mass_matrix, solve_ivp
from .models import KdvProblem, WaveProblem, solve_kdv, solve_wave
from .timesolver import SlabGrid, assemble, march, solve_diag, solve_qz

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "CrescentRegion", "DomainError", "GbpParams", "IllConditionedWarning",
    "KdvProblem", "NewtonDivergence", "NonConvergence", "Resonance", "SingularMatrix",
    "SlabGrid", "SpectimeError", "WaveProblem", "assemble", "gbp_eval", "gbp_zeros",
    "jacobi_matrix", "march", "mass_matrix", "solve_diag", "solve_ivp", "solve_kdv",
    "solve_qz", "solve_wave",
]
