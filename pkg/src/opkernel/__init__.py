"""Kernel algebra and verification of covariance commutation relations for
integral operators on L_p spaces of real intervals."""

__version__ = "0.1.0"
