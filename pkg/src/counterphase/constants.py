"""Physical constants and unit helpers, all SI."""

import math

TWO_PI = 2.0 * math.pi

HBAR = 1.054571817e-34  # reduced Planck constant, J s
PLANCK_H = 6.62607015e-34  # Planck constant, J s
EPSILON_0 = 8.8541878128e-12  # vacuum permittivity, F/m

# Polarizabilities are often quoted as volumes (angstrom^3, Gaussian units).
# The SI value (C m^2 / V) is 4 pi eps0 times the volume in m^3.
ANGSTROM3_TO_SI = 4.0 * math.pi * EPSILON_0 * 1e-30  # (C m^2/V) per angstrom^3

SODIUM_POLARIZABILITY = 24.1 * ANGSTROM3_TO_SI  # ~2.68e-39 C m^2 / V

EARTH_ROTATION_RATE = 7.29e-5  # rad/s, sidereal day

GRATING_PERIOD = 100e-9  # m, nanofabricated transmission gratings
GRATING_WAVEVECTOR = TWO_PI / GRATING_PERIOD  # rad/m
