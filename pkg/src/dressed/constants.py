"""Physical defaults.  Natural units with hbar = c = 1 and the electron mass m = 1."""

import math

ALPHA = 1.0 / 137.035999
CHARGE = math.sqrt(ALPHA)
MASS = 1.0
