"""SU(2) Chern-Simons spectra of 1/n-surgeries on two-bridge knots."""

__version__ = "0.1.0"
