"""Physical constants (CODATA, via scipy) and unit helpers.

Every derived number in the package flows from this table.
"""
from scipy import constants as _c

HBAR = _c.hbar
C = _c.c
EPS0 = _c.epsilon_0
AMU = _c.physical_constants["atomic mass constant"][0]

TWO_PI = 2.0 * _c.pi

UM = 1e-6
NM = 1e-9
US = 1e-6
UW = 1e-6
MW = 1e-3
KHZ = 1e3
MHZ = 1e6

CA40_MASS = 40.0 * AMU
