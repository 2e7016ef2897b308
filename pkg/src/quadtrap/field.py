"""Analytic Biot-Savart fields of filament loops and segments, and their derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import MU0
from .elliptic import elliptic_kt
from .errors import SingularityError
from .geometry import CircularLoop, ConductorAssembly, StraightSegment

GUARD_DISTANCE = 1e-9  # m
MIN_STEP = 1e-6  # m
RELATIVE_STEP = 1e-4
SECOND_DERIVATIVE_RELATIVE_STEP = 2e-3


@dataclass(frozen=True)
class FieldSample:
    point: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class GradientTensor:
    """Jacobian m[i, j] = dB_i / dx_j in T/m, evaluated at ``point``."""

    m: np.ndarray
    point: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.m))

    @property
    def trace(self) -> float:
        return float(np.trace(self.m))

    @property
    def asymmetry(self) -> float:
        return float(np.linalg.norm(self.m - self.m.T))

    def symmetrized(self) -> np.ndarray:
        return 0.5 * (self.m + self.m.T)

    def __mul__(self, c: float) -> "GradientTensor":
        return GradientTensor(self.m * c, self.point)

    __rmul__ = __mul__


def orthonormal_triad(axis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(u, v, n) with u x v = n, built deterministically from ``axis``.

    The auxiliary vector is the basis vector along the smallest |component|
    of n (first one on ties).
    """
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    aux = np.zeros(3)
    aux[int(np.argmin(np.abs(n)))] = 1.0
    u = np.cross(n, aux)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v, n


def loop_field_on_axis(loop: CircularLoop, z: float) -> float:
    """Axial field of a loop at signed distance ``z`` from its plane, along its axis."""
    R = loop.radius
    return MU0 * loop.current * R * R / (2.0 * (R * R + z * z) ** 1.5)


def _loop_field_local(R: float, I: float, rho: float, z: float) -> tuple[float, float]:
    """(B_rho, B_z) of a loop of radius R centred on the origin in the z=0 plane."""
    alpha2 = (R - rho) ** 2 + z * z
    if alpha2 <= GUARD_DISTANCE**2:
        raise SingularityError(
            f"point lies within {GUARD_DISTANCE:g} m of the loop filament (distance {math.sqrt(alpha2):.3g} m)"
        )
    beta2 = (R + rho) ** 2 + z * z
    beta = math.sqrt(beta2)
    m = 4.0 * R * rho / beta2
    K, T = elliptic_kt(min(m, math.nextafter(1.0, 0.0)))
    E = K * (1.0 - m / 2.0 - m * m * T)
    C = MU0 * I / math.pi
    # (R^2 - r^2) E + alpha^2 K rewritten with K - E = K (m/2 + m^2 T) and
    # alpha^2 + R^2 - r^2 = 2 R (R - rho); the original form cancels badly
    # far from small loops.
    bz = C / (2.0 * alpha2 * beta) * (alpha2 * K * (m / 2.0 + m * m * T) + 2.0 * R * (R - rho) * E)
    # B_rho = C z / (2 alpha^2 beta rho) [(R^2 + r^2) E - alpha^2 K]; the bracket
    # equals beta^2 m^2 K (1/4 - T (1 - m/2)), which is finite as rho -> 0.
    w = 0.25 - T * (1.0 - m / 2.0)
    brho = 8.0 * C * z * R * R * rho * K * w / (alpha2 * beta2 * beta)
    return brho, bz


def loop_field(loop: CircularLoop, p) -> np.ndarray:
    """Exact field of a circular filament at an arbitrary point."""
    c = np.asarray(loop.center, dtype=float)
    n = np.asarray(loop.axis, dtype=float)
    d = np.asarray(p, dtype=float) - c
    z = float(d @ n)
    radial = d - z * n
    rho = float(np.linalg.norm(radial))
    brho, bz = _loop_field_local(loop.radius, loop.current, rho, z)
    b = bz * n
    if rho > 0.0:
        b = b + (brho / rho) * radial
    return b


def segment_field(seg: StraightSegment, p) -> np.ndarray:
    """Field of a finite straight filament, current flowing start -> end.

    Uses B = mu0 I / 4pi * (r1 x r2) (|r1| + |r2|) / (|r1||r2| (|r1||r2| + r1.r2))
    with r1 = p - start, r2 = p - end.  When r1.r2 < 0 the last factor is
    rewritten as |r1 x r2|^2 / (|r1||r2| - r1.r2) to avoid cancellation.
    """
    pp = np.asarray(p, dtype=float)
    r1 = pp - np.asarray(seg.start, dtype=float)
    r2 = pp - np.asarray(seg.end, dtype=float)
    n1 = math.sqrt(r1 @ r1)
    n2 = math.sqrt(r2 @ r2)
    cross = np.cross(r1, r2)
    c2 = float(cross @ cross)
    dot = float(r1 @ r2)
    span = r1 - r2  # end - start
    t = min(max(float(r1 @ span) / float(span @ span), 0.0), 1.0)
    dist = float(np.linalg.norm(r1 - t * span))
    if dist <= GUARD_DISTANCE:
        raise SingularityError(f"point lies within {GUARD_DISTANCE:g} m of a straight conductor")
    nn = n1 * n2
    if dot < 0.0:
        denom_inv = (nn - dot) / c2 if c2 > 0.0 else math.inf
    else:
        denom_inv = 1.0 / (nn + dot)
    if c2 == 0.0:
        return np.zeros(3)
    factor = MU0 * seg.current / (4.0 * math.pi) * (n1 + n2) / nn * denom_inv
    return factor * cross


def element_field(e, p) -> np.ndarray:
    if isinstance(e, CircularLoop):
        return loop_field(e, p)
    if isinstance(e, StraightSegment):
        return segment_field(e, p)
    raise TypeError(f"unsupported element type {type(e).__name__}")


def assembly_field(a: ConductorAssembly, p) -> np.ndarray:
    """Superposition of all element fields, summed in element order."""
    b = np.zeros(3)
    for i, e in enumerate(a.elements):
        try:
            b = b + element_field(e, p)
        except SingularityError as exc:
            raise SingularityError(f"element {i}: {exc}", element=e, index=i) from exc
    return b


def field_magnitudes(a: ConductorAssembly, p) -> float:
    """Sum of the individual element field magnitudes; the cancellation scale at p."""
    return float(sum(np.linalg.norm(element_field(e, p)) for e in a.elements))


def jacobian_step(a: ConductorAssembly) -> float:
    return max(MIN_STEP, RELATIVE_STEP * a.characteristic_size)


def field_jacobian(a: ConductorAssembly, p, step: float | None = None) -> GradientTensor:
    """dB_i/dx_j by central differences with one Richardson extrapolation level.

    The stencil runs on each element at unit current and the results are
    weighted by the element currents, so the tensor is linear in the currents
    to rounding rather than to the (much larger) differencing noise.
    """
    p = np.asarray(p, dtype=float)
    h = jacobian_step(a) if step is None else float(step)
    m = np.zeros((3, 3))
    for i, el in enumerate(a.elements):
        if el.current == 0.0:
            continue
        unit = replace(el, current=1.0)
        try:
            m = m + el.current * _element_jacobian(unit, p, h)
        except SingularityError as exc:
            raise SingularityError(f"element {i}: {exc}", element=el, index=i) from exc
    return GradientTensor(m, p.copy())


def _element_jacobian(e, p: np.ndarray, h: float) -> np.ndarray:
    m = np.empty((3, 3))
    for j in range(3):
        d = np.zeros(3)
        d[j] = 1.0
        d1 = (element_field(e, p + h * d) - element_field(e, p - h * d)) / (2 * h)
        d2 = (element_field(e, p + 0.5 * h * d) - element_field(e, p - 0.5 * h * d)) / h
        m[:, j] = (4.0 * d2 - d1) / 3.0
    return m


def axial_second_derivative(a: ConductorAssembly, p, axis, step: float | None = None) -> float:
    """d^2 (B . axis) / ds^2 along ``axis`` by the five-point stencil."""
    p = np.asarray(p, dtype=float)
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    h = SECOND_DERIVATIVE_RELATIVE_STEP * a.characteristic_size if step is None else float(step)
    h = max(h, MIN_STEP)

    def f(s):
        return float(assembly_field(a, p + s * n) @ n)

    return (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h)
