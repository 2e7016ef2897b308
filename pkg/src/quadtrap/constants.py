"""Fixed physical constants (SI) and unit conversions used at I/O boundaries."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    mu0: float = 4e-7 * math.pi  # T m / A
    kB: float = 1.380649e-23  # J / K
    mass_rb87: float = 1.44316e-25  # kg
    natural_linewidth: float = 6.065e6  # Hz (D2 line, 87Rb)


CONSTANTS = PhysicalConstants()

MU0 = CONSTANTS.mu0
KB = CONSTANTS.kB
MASS_RB87 = CONSTANTS.mass_rb87

GAUSS = 1e-4  # T
GAUSS_PER_CM = 1e-2  # T/m
MM = 1e-3  # m


def tesla_per_metre_to_gauss_per_cm(g):
    return g / GAUSS_PER_CM


def gauss_per_cm_to_tesla_per_metre(g):
    return g * GAUSS_PER_CM
