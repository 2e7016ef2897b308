"""Empirical and physical models of the printed trap: electrical power,
current-to-gradient calibration, detuning schedule, atom number and
time-of-flight thermometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .constants import KB, MASS_RB87, tesla_per_metre_to_gauss_per_cm
from .errors import (
    DegenerateConfigurationError,
    FitFailureError,
    InsufficientDataError,
    InvalidArgumentError,
    InvalidDataError,
)
from .geometry import ConductorAssembly, CylinderTrapParams, build_cylinder_trap, with_drive_current
from .trap import trap_report

# --------------------------------------------------------------------------
# electrical


@dataclass(frozen=True)
class ConductorPath:
    length: float  # m
    cross_section: float  # m^2
    resistivity: float = 5e-8  # ohm m, heat-treated AlSi10Mg

    def __post_init__(self):
        for name in ("length", "cross_section", "resistivity"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidArgumentError(f"{name} must be positive, got {v!r}")


def resistance(path: ConductorPath) -> float:
    return path.resistivity * path.length / path.cross_section


def power(Z: float, I: float) -> float:
    """Ohmic dissipation Z I^2 in watts."""
    if not Z > 0:
        raise InvalidArgumentError(f"resistance must be positive, got {Z!r}")
    return Z * I * I


# --------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class DeviceCalibration:
    """Measured constants of the printed prototype.

    ``gradient_per_ampere`` is along the strong axis in G/cm/A; 15 A -> 10 G/cm.
    A value of 0.8 reproduces the 4-50 A -> 3.2-40 G/cm range instead.
    """

    resistance: float = 640e-6  # ohm
    resistance_uncertainty: float = 4e-6
    gradient_per_ampere: float = 10.0 / 15.0
    detuning_lo: tuple[float, float] = (4.0, 16.0)  # (A, MHz)
    detuning_hi: tuple[float, float] = (25.0, 25.0)

    def __post_init__(self):
        if not self.resistance > 0:
            raise InvalidArgumentError("resistance must be positive")
        if not self.gradient_per_ampere > 0:
            raise InvalidArgumentError("gradient_per_ampere must be positive")
        if not self.detuning_lo[0] < self.detuning_hi[0]:
            raise InvalidArgumentError("detuning calibration currents must increase")


DEFAULT_CALIBRATION = DeviceCalibration()


def current_to_gradient(I: float, cal: DeviceCalibration = DEFAULT_CALIBRATION) -> float:
    """Strong-axis gradient in G/cm for a drive current in A."""
    if I < 0:
        raise InvalidArgumentError("current must be non-negative")
    return cal.gradient_per_ampere * I


class Detuning(NamedTuple):
    mhz: float
    clamped: bool


def detuning_for_current(I: float, cal: DeviceCalibration = DEFAULT_CALIBRATION) -> Detuning:
    """Optimal red detuning, linear between the two calibration points."""
    (i0, d0), (i1, d1) = cal.detuning_lo, cal.detuning_hi
    clamped = not (i0 <= I <= i1)
    x = min(max(I, i0), i1)
    if x == i0:
        return Detuning(d0, clamped)
    if x == i1:
        return Detuning(d1, clamped)
    return Detuning(d0 + (d1 - d0) * (x - i0) / (i1 - i0), clamped)


def calibrate_assembly(a: ConductorAssembly, gradient_per_ampere: float, guess=None) -> ConductorAssembly:
    """Set ``drive_scale`` so that 1 A of drive gives ``gradient_per_ampere`` G/cm
    along the strong axis.

    Filament models overestimate the gradient of the real, wide conductors;
    the drive scale absorbs that as an effective current fraction.
    """
    unit = replace(a, drive_scale=1.0)
    model = tesla_per_metre_to_gauss_per_cm(trap_report(with_drive_current(unit, 1.0), guess).strong_gradient)
    return replace(a, drive_scale=gradient_per_ampere / model)


def calibrated_cylinder_trap(
    params: CylinderTrapParams | None = None, cal: DeviceCalibration = DEFAULT_CALIBRATION
) -> ConductorAssembly:
    params = replace(params or CylinderTrapParams(), current=1.0)
    return calibrate_assembly(build_cylinder_trap(params, label="cylinder-trap"), cal.gradient_per_ampere, (0.0, 0.0, 0.0))


# --------------------------------------------------------------------------
# atom number


@dataclass(frozen=True)
class AtomNumberModel:
    n_ref: float = 1.0e8
    d_ref: float = 15e-3  # m
    exponent: float = 5.82
    exponent_uncertainty: float = 0.05
    plateau: tuple[float, float] = (7.0, 20.0)  # G/cm
    rolloff: float = 0.5  # factor reached one octave outside the plateau

    def __post_init__(self):
        if not (self.n_ref > 0 and self.d_ref > 0 and self.exponent > 0):
            raise InvalidArgumentError("n_ref, d_ref and exponent must be positive")
        if not self.plateau[0] < self.plateau[1]:
            raise InvalidArgumentError("plateau lower edge must be below the upper edge")
        if not 0 < self.rolloff <= 1:
            raise InvalidArgumentError("rolloff must lie in (0, 1]")


def plateau_factor(gradient: float, model: AtomNumberModel = AtomNumberModel()) -> float:
    """1 on the plateau, cosine ramp down to ``model.rolloff`` over one octave
    on either side, flat beyond."""
    lo, hi = model.plateau
    if lo <= gradient <= hi:
        return 1.0
    if gradient < lo:
        octaves = math.inf if gradient <= 0 else math.log2(lo / gradient)
    else:
        octaves = math.log2(gradient / hi)
    t = min(octaves, 1.0)
    return 1.0 - (1.0 - model.rolloff) * 0.5 * (1.0 - math.cos(math.pi * t))


def atom_number_estimate(D: float, gradient: float, model: AtomNumberModel = AtomNumberModel()) -> float:
    """Atom number for beam diameter D (m) and strong-axis gradient (G/cm)."""
    if not D > 0:
        raise InvalidArgumentError("beam diameter must be positive")
    if gradient < 0:
        raise InvalidArgumentError("gradient must be non-negative")
    return model.n_ref * (D / model.d_ref) ** model.exponent * plateau_factor(gradient, model)


# --------------------------------------------------------------------------
# thermometry


@dataclass(frozen=True)
class TofSample:
    t: float  # s
    sigma: float  # m

    def __post_init__(self):
        if not (self.t >= 0 and self.sigma > 0):
            raise InvalidDataError(f"invalid TOF sample t={self.t!r}, sigma={self.sigma!r}")


@dataclass(frozen=True)
class TofFit:
    temperature: float  # K
    sigma0: float  # m
    residual: float  # rms of sigma - model, m
    degenerate: bool = False  # fitted slope was negative and T clamped to 0


def expansion_sigma(T: float, sigma0: float, t, mass: float = MASS_RB87):
    """Ballistic cloud radius sqrt(sigma0^2 + kB T t^2 / m)."""
    t = np.asarray(t, dtype=float)
    out = np.sqrt(sigma0 * sigma0 + KB * T / mass * t * t)
    return float(out) if out.ndim == 0 else out


def tof_fit(samples: Sequence[TofSample], mass: float = MASS_RB87) -> TofFit:
    """Temperature and initial size from a weighted linear least-squares fit of
    sigma^2 against t^2."""
    if len(samples) < 3:
        raise InsufficientDataError(f"need at least 3 samples, got {len(samples)}")
    t = np.array([s.t for s in samples], dtype=float)
    sig = np.array([s.sigma for s in samples], dtype=float)
    if np.unique(t).size < 2:
        raise InsufficientDataError("need at least two distinct expansion times")
    # rows weighted by 1/sigma^2: imaging noise is roughly a fixed fraction of
    # the cloud size, so the scatter of sigma^2 grows like sigma^4
    w = 1.0 / (sig * sig)
    A = np.column_stack([t * t, np.ones_like(t)]) * w[:, None]
    (slope, intercept), *_ = np.linalg.lstsq(A, sig * sig * w, rcond=None)
    degenerate = False
    if slope < 0:
        degenerate = True
        slope = 0.0
        intercept = float(np.mean(sig * sig))
    if intercept <= 0:
        raise InvalidDataError(f"fitted sigma0^2 = {intercept:.3e} m^2 is not positive")
    T = mass * slope / KB
    sigma0 = math.sqrt(intercept)
    resid = sig - expansion_sigma(T, sigma0, t, mass)
    return TofFit(T, sigma0, float(np.sqrt(np.mean(resid * resid))), degenerate)


# --------------------------------------------------------------------------
# Gaussian profile fit


class GaussianFit(NamedTuple):
    amplitude: float
    center: float
    sigma: float
    offset: float


def _gauss_model(p, x):
    A, mu, s, c = p
    e = np.exp(-((x - mu) ** 2) / (2 * s * s))
    return A * e + c, e


def fit_gaussian_1d(profile, max_iter: int = 200) -> GaussianFit:
    """Damped Gauss-Newton (Levenberg-Marquardt) fit of A exp(-(x-mu)^2/2s^2) + c.

    ``profile`` is a sequence of (x, value) pairs or an (N, 2) array.
    """
    data = np.asarray(profile, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InvalidDataError("profile must be a sequence of (position, value) pairs")
    if len(data) < 5:
        raise InsufficientDataError(f"need at least 5 points, got {len(data)}")
    x, y = data[:, 0], data[:, 1]
    if not np.all(np.isfinite(data)):
        raise InvalidDataError("profile contains non-finite values")
    if np.any(y < 0):
        raise InvalidDataError("profile values must be non-negative")

    c0 = float(y.min())
    w = y - c0
    total = w.sum()
    if total <= 0:
        raise DegenerateConfigurationError("flat profile; no peak to fit")
    mu0 = float((x * w).sum() / total)
    s0 = float(np.sqrt((w * (x - mu0) ** 2).sum() / total))
    if s0 == 0:
        s0 = float(np.min(np.diff(np.unique(x))))
    p = np.array([float(w.max()), mu0, s0, c0])

    model, e = _gauss_model(p, x)
    r = model - y
    cost = float(r @ r)
    lam = 1e-3
    for _ in range(max_iter):
        A, mu, s, _c = p
        d = x - mu
        J = np.column_stack([e, A * e * d / s**2, A * e * d * d / s**3, np.ones_like(x)])
        JTJ = J.T @ J
        g = J.T @ r
        while True:
            step = np.linalg.solve(JTJ + lam * np.diag(np.diag(JTJ)), -g)
            trial = p + step
            t_model, t_e = _gauss_model(trial, x)
            t_r = t_model - y
            t_cost = float(t_r @ t_r)
            if t_cost <= cost:
                lam = max(lam / 10, 1e-12)
                break
            lam *= 10
            if lam > 1e16:
                # no descent direction left: at the minimum to working precision
                return GaussianFit(float(p[0]), float(p[1]), float(abs(p[2])), float(p[3]))
        small_step = np.all(np.abs(step) <= 1e-12 * (np.abs(p) + 1e-12))
        small_gain = cost - t_cost <= 1e-15 * cost
        p, e, r, cost = trial, t_e, t_r, t_cost
        if small_step or small_gain or cost == 0.0:
            return GaussianFit(float(p[0]), float(p[1]), float(abs(p[2])), float(p[3]))
    raise FitFailureError(f"Gaussian fit did not converge in {max_iter} iterations", residual=math.sqrt(cost / len(x)))
