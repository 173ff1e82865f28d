"""Numerical lab for singular-value decay of integral operators on boxes."""
from .discop import DiscreteOperator, assemble, singular_values
from .kernels import AnalyticProduct, CosineSobolev, EigenSeries, Gaussian, Rank1
from .quadrature import Quadrature, tensor_quadrature
from .spectrum import ExactSpectrum, SingularSpectrum

__version__ = "0.1.0"

__all__ = [
    "AnalyticProduct",
    "CosineSobolev",
    "DiscreteOperator",
    "EigenSeries",
    "ExactSpectrum",
    "Gaussian",
    "Quadrature",
    "Rank1",
    "SingularSpectrum",
    "assemble",
    "singular_values",
    "tensor_quadrature",
]
