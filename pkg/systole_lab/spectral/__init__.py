"""
Finite element assembly and the Dirichlet/closed eigenvalue solvers.
"""

from .solver import SpectralResult, lambda0, lambda_k

__all__ = [
    'SpectralResult',
    'lambda0',
    'lambda_k',
]
