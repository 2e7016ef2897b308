"""Planar (two concentric loops) versus anti-Helmholtz quadrupole comparison.

Lengths are in units of the reference loop radius R, currents in units of the
reference current I.  On-axis fields come out in units of mu0 I / R and their
z-derivatives in mu0 I / R**2 and mu0 I / R**3.  Only the symmetry axis is
needed: there the field of every loop points along z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import MU0
from .device import ConductorPath, resistance
from .errors import DegenerateConfigurationError, InfeasibleError, InvalidArgumentError
from .geometry import (
    CircularLoop,
    ConductorAssembly,
    build_anti_helmholtz,
    scale_assembly,
    with_drive_current,
)
from .trap import trap_report

# Search bounds in units of z0; for z0 = R/2 these are r2 <= 8 R and a 0.01 R
# outer step.
R2_MAX = 16.0
R1_SCAN = (0.02, R2_MAX, 0.02)  # start, stop, step of the coarse outer scan
R2_SCAN_POINTS = 2000
BISECT_TOL = 1e-10
GOLDEN_TOL = 1e-6
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def axial_field(r, z):
    """B_z of a unit-current loop of radius r at height z on its axis."""
    return r * r / (2.0 * (r * r + z * z) ** 1.5)


def axial_gradient(r, z):
    return -1.5 * r * r * z / (r * r + z * z) ** 2.5


def axial_curvature(r, z):
    return 1.5 * r * r * (4.0 * z * z - r * r) / (r * r + z * z) ** 3.5


@dataclass(frozen=True)
class PlanarConfig:
    r1: float
    r2: float
    i1: float
    i2: float
    z0: float

    def field(self, z: float) -> float:
        return self.i1 * axial_field(self.r1, z) + self.i2 * axial_field(self.r2, z)

    def gradient(self, z: float | None = None) -> float:
        z = self.z0 if z is None else z
        return self.i1 * axial_gradient(self.r1, z) + self.i2 * axial_gradient(self.r2, z)

    def curvature(self, z: float | None = None) -> float:
        z = self.z0 if z is None else z
        return self.i1 * axial_curvature(self.r1, z) + self.i2 * axial_curvature(self.r2, z)

    @property
    def power(self) -> float:
        """Dissipation in units of that of one reference loop (R I**2)."""
        return self.r1 * self.i1**2 + self.r2 * self.i2**2


@dataclass(frozen=True)
class PlanarOptimum:
    config: PlanarConfig
    gradient_2d: float  # T/m at the reference scale
    gradient_3d: float  # T/m
    gradient_ratio: float
    power_ratio: float
    reference: tuple[float, float] = (1.0, 1.0)  # (R in m, I in A)


def planar_current_solve(r1: float, r2: float, z0: float) -> tuple[float, float]:
    """Current ratio i2/i1 that zeroes B_z at z0, and the curvature left over.

    The residual is d^2 B_z / dz^2 at z0 for i1 = 1.
    """
    if not (r1 > 0 and r2 > 0 and z0 > 0):
        raise InvalidArgumentError("radii and z0 must be positive")
    if r1 == r2:
        raise DegenerateConfigurationError("equal radii give proportional fields; no independent zero")
    a2 = axial_field(r2, z0)
    if a2 == 0.0:
        raise DegenerateConfigurationError("outer loop produces no field at z0")
    ratio = -axial_field(r1, z0) / a2
    return ratio, axial_curvature(r1, z0) + ratio * axial_curvature(r2, z0)


def _curvature_residual(r1, r2, z0):
    return axial_curvature(r1, z0) - axial_field(r1, z0) / axial_field(r2, z0) * axial_curvature(r2, z0)


def _bisect(f, lo, hi, flo, tol=BISECT_TOL):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def feasible_r2(r1: float, z0: float, r2_max: float | None = None) -> list[float]:
    """All r2 in (r1, r2_max] on the zero-curvature curve for this r1."""
    if r2_max is None:
        r2_max = R2_MAX * z0
    lo = r1 * (1.0 + 1e-6)
    if lo >= r2_max:
        return []
    grid = np.linspace(lo, r2_max, R2_SCAN_POINTS)
    res = _curvature_residual(r1, grid, z0)
    roots = []
    for k in np.nonzero(np.sign(res[:-1]) * np.sign(res[1:]) < 0)[0]:
        roots.append(_bisect(lambda x: _curvature_residual(r1, x, z0), grid[k], grid[k + 1], res[k]))
    return roots


def reference_radius(z0: float) -> float:
    """Radius of the anti-Helmholtz pair (d = R) whose zero lies z0 from each loop."""
    return 2.0 * z0


def equal_power_config(r1: float, r2: float, z0: float) -> PlanarConfig:
    """Zero-field currents scaled to the anti-Helmholtz power, R1 I1^2 + R2 I2^2 = 2 R."""
    r1, r2, z0 = float(r1), float(r2), float(z0)
    k, _ = planar_current_solve(r1, r2, z0)
    i1 = math.sqrt(2.0 * reference_radius(z0) / (r1 + r2 * k * k))
    return PlanarConfig(r1, r2, i1, k * i1, z0)


def _best_on_r1(r1: float, z0: float, r2_max: float | None = None):
    best = None
    for r2 in feasible_r2(r1, z0, r2_max):
        cfg = equal_power_config(r1, r2, z0)
        if best is None or abs(cfg.gradient()) > abs(best.gradient()):
            best = cfg
    return best


def feasible_curve(
    z0: float, r1_values: Sequence[float] | None = None, r2_max: float | None = None
) -> list[PlanarConfig]:
    """Best equal-power configuration for each r1 that admits one."""
    if r1_values is None:
        r1_values = np.arange(*R1_SCAN) * z0
    out = []
    for r1 in r1_values:
        cfg = _best_on_r1(float(r1), z0, r2_max)
        if cfg is not None:
            out.append(cfg)
    return out


def reference_gradient(z0: float) -> float:
    """Centre gradient of the unit-current anti-Helmholtz pair of radius 2 z0."""
    return 2.0 * abs(axial_gradient(reference_radius(z0), z0))


def anti_helmholtz_gradient(R: float, I: float) -> float:
    """Axial gradient at the centre of an anti-Helmholtz pair with d = R."""
    if not R > 0:
        raise InvalidArgumentError("R must be positive")
    return 48.0 * MU0 * I / (25.0 * math.sqrt(5.0) * R * R)


def optimize_planar(
    z0: float = 0.5,
    power_budget_reference: tuple[float, float] = (1.0, 1.0),
    r1_bounds: tuple[float, float] | None = None,
    r2_max: float | None = None,
) -> PlanarOptimum:
    """Maximise the planar gradient at z0 under the zero-field, zero-curvature and
    equal-power constraints, and compare with the anti-Helmholtz pair.

    ``r1_bounds`` and ``r2_max`` override the default search box (units of R).
    """
    if not (math.isfinite(z0) and z0 > 0):
        raise InvalidArgumentError(f"z0 must be positive, got {z0!r}")
    R, I = power_budget_reference
    if not (R > 0 and I != 0):
        raise InvalidArgumentError("reference radius must be positive and current nonzero")

    if r2_max is None:
        r2_max = R2_MAX * z0
    step = R1_SCAN[2] * z0
    lo_b, hi_b = (R1_SCAN[0] * z0, r2_max) if r1_bounds is None else r1_bounds
    if not (0 < lo_b < hi_b):
        raise InvalidArgumentError(f"bad r1 bounds {r1_bounds!r}")

    def objective(r1):
        cfg = _best_on_r1(r1, z0, r2_max)
        return -math.inf if cfg is None else abs(cfg.gradient())

    r1_grid = np.arange(lo_b, hi_b, min(step, (hi_b - lo_b) / 4))
    values = np.array([objective(float(r)) for r in r1_grid])
    if not np.any(np.isfinite(values)):
        raise InfeasibleError(f"no zero-curvature planar configuration for z0={z0}")
    k = int(np.argmax(values))
    lo, hi = r1_grid[max(k - 1, 0)], r1_grid[min(k + 1, len(r1_grid) - 1)]

    # golden-section refinement on [lo, hi]
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = objective(c), objective(d)
    while hi - lo > GOLDEN_TOL:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = objective(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = objective(d)
    cfg = _best_on_r1(0.5 * (lo + hi), z0, r2_max)
    if cfg is None:  # pragma: no cover - bracket comes from a feasible grid point
        raise InfeasibleError("refinement left the feasible region")

    g2 = abs(cfg.gradient())
    g3 = reference_gradient(z0)
    ratio = g3 / g2
    matched = PlanarConfig(cfg.r1, cfg.r2, cfg.i1 * ratio, cfg.i2 * ratio, z0)
    unit = MU0 * abs(I) / (R * R)
    return PlanarOptimum(
        config=cfg,
        gradient_2d=float(g2 * unit),
        gradient_3d=float(g3 * unit),
        gradient_ratio=float(ratio),
        power_ratio=float(matched.power / (2.0 * reference_radius(z0))),
        reference=(R, I),
    )


def planar_assembly(cfg: PlanarConfig, R: float = 1.0, I: float = 1.0, label: str = "planar-pair") -> ConductorAssembly:
    """Concentric loops in the z = 0 plane, dimensioned by (R, I)."""
    return ConductorAssembly(
        (
            CircularLoop((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), cfg.r1 * R, cfg.i1 * I),
            CircularLoop((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), cfg.r2 * R, cfg.i2 * I),
        ),
        label,
    )


@dataclass(frozen=True)
class ScalingTable:
    scales: np.ndarray
    currents: np.ndarray  # A
    resistances: np.ndarray  # ohm
    powers: np.ndarray  # W
    current_exponent: float
    resistance_exponent: float
    power_exponent: float

    def rows(self):
        return list(zip(self.scales.tolist(), self.currents.tolist(), self.resistances.tolist(), self.powers.tolist()))


def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def scaling_study(
    scales: Sequence[float],
    target_gradient: float,
    conductor: ConductorPath,
    reference: ConductorAssembly | None = None,
) -> ScalingTable:
    """Current, resistance and power needed to hold ``target_gradient`` (T/m)
    as the whole device is scaled.

    ``reference`` is the unit-drive assembly at scale 1 (default: anti-Helmholtz
    pair with R = 1 cm) and ``conductor`` its current path at scale 1.  Lengths
    grow with the scale and cross-sections with its square.
    """
    s = np.asarray(scales, dtype=float)
    if s.size == 0 or np.any(~(s > 0)):
        raise InvalidArgumentError("scales must be positive")
    if not target_gradient > 0:
        raise InvalidArgumentError("target gradient must be positive")
    if reference is None:
        reference = build_anti_helmholtz(1e-2, 1.0)
    guess = reference.centroid()
    currents, resistances = [], []
    for k in s:
        scaled = with_drive_current(scale_assembly(reference, float(k)), 1.0)
        per_amp = trap_report(scaled, guess * k).strong_gradient
        currents.append(target_gradient / per_amp)
        resistances.append(
            resistance(ConductorPath(conductor.length * k, conductor.cross_section * k * k, conductor.resistivity))
        )
    currents = np.array(currents)
    resistances = np.array(resistances)
    powers = resistances * currents**2
    if s.size >= 2 and np.ptp(s) > 0:
        ce, re_, pe = (_loglog_slope(s, y) for y in (currents, resistances, powers))
    else:
        ce = re_ = pe = float("nan")
    return ScalingTable(s, currents, resistances, powers, ce, re_, pe)
