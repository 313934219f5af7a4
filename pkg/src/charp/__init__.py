"""Exact symplectic, Poisson and quantization computations in odd characteristic."""

__version__ = "0.1.0"
