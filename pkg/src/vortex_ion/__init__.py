"""Structured-light (Gaussian / LG01 vortex) driving of a single trapped ion.

Fields, quadrupole coupling, Lamb-Dicke parameters, thermal Rabi spectra,
wave-packet averaging and least-squares estimation.
"""

__version__ = "0.1.0"
