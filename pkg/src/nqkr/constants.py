"""Physical defaults and derived modulation frequencies."""

import math

# Real root of x^3 = x + 1 (plastic number); the two modulation frequencies
# derived from it are mutually incommensurate and incommensurate with 2*pi.
PLASTIC = 1.3247179572447460

OMEGA1 = 2.0 * math.pi / PLASTIC
OMEGA2 = 2.0 * math.pi / PLASTIC**2

HBAR_DEFAULT = 2.89
ETA_DEFAULT = 0.75
EPSILON_DEFAULT = 1e-5
LATTICE_DEFAULT = 4096
SPECTRUM_DIM_DEFAULT = 1024

# Defining property of the plastic number, checked at import time so a typo
# in the constant can never silently skew both frequencies.
if abs(PLASTIC**3 - PLASTIC - 1.0) >= 1e-15:
    raise AssertionError("plastic-number constant fails x^3 = x + 1")
