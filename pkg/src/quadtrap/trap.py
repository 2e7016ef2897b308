"""Field-zero location, quadrupole characterisation and field maps."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AsymmetryError,
    DegenerateConfigurationError,
    InvalidArgumentError,
    NoConvergenceError,
    SingularityError,
)
from .field import FieldSample, GradientTensor, assembly_field, field_jacobian, field_magnitudes
from .geometry import ConductorAssembly, with_drive_current

MAX_NEWTON_ITER = 50
MAX_HALVINGS = 10
ZERO_TOLERANCE = 1e-13  # |B| relative to the sum of element field magnitudes
MAX_CONDITION = 1e12
DEGENERATE_PAIR = 1e-6


def _field_or_none(a, p):
    try:
        return assembly_field(a, p)
    except SingularityError:
        return None


def find_zero(a: ConductorAssembly, guess, max_iter: int = MAX_NEWTON_ITER) -> np.ndarray:
    """Damped Newton iteration on B(p) = 0 using the finite-difference Jacobian."""
    p = np.asarray(guess, dtype=float).copy()
    b = assembly_field(a, p)
    for _ in range(max_iter):
        scale = field_magnitudes(a, p)
        if scale == 0.0:
            raise DegenerateConfigurationError("field vanishes identically (all currents zero?)")
        norm_b = float(np.linalg.norm(b))
        if norm_b <= ZERO_TOLERANCE * scale:
            return p
        J = field_jacobian(a, p).m
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > MAX_CONDITION:
            raise DegenerateConfigurationError(f"singular Jacobian at {p.tolist()}")
        step = np.linalg.solve(J, -b)
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = p + t * step
            b_trial = _field_or_none(a, trial)
            if b_trial is not None and np.linalg.norm(b_trial) < norm_b:
                break
            t *= 0.5
        else:
            raise NoConvergenceError(
                f"Newton step failed to reduce |B| at {p.tolist()}", residual=norm_b
            )
        p, b = trial, b_trial
    scale = field_magnitudes(a, p)
    norm_b = float(np.linalg.norm(b))
    if norm_b <= ZERO_TOLERANCE * scale:
        return p
    raise NoConvergenceError(
        f"no field zero found within {max_iter} iterations (|B| = {norm_b:.3e} T)", residual=norm_b
    )


def _orient(v: np.ndarray) -> np.ndarray:
    """Flip v so that its first clearly nonzero component is positive."""
    for c in v:
        if abs(c) > 1e-9:
            return v if c > 0 else -v
    return v


def _plane_basis(strong: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Deterministic basis of the plane orthogonal to ``strong``: take the
    # coordinate axis with the largest projection onto the plane (first wins
    # ties), then complete with the cross product.
    proj = np.eye(3) - np.outer(strong, strong)
    norms = np.linalg.norm(proj, axis=0)
    k = int(np.argmax(np.round(norms, 12)))
    u = _orient(proj[:, k] / norms[k])
    w = _orient(np.cross(strong, u))
    return u, w


@dataclass(frozen=True)
class TrapReport:
    zero: np.ndarray
    eigenvalues: np.ndarray  # T/m, strong axis first
    axes: np.ndarray  # rows are unit vectors matching ``eigenvalues``
    ratio: np.ndarray
    tensor: GradientTensor

    @property
    def strong_gradient(self) -> float:
        return float(abs(self.eigenvalues[0]))


def analyse_tensor(tensor: GradientTensor) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues, axes and normalised ratio of a gradient tensor."""
    m = tensor.m
    norm = tensor.norm
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateConfigurationError("gradient tensor vanishes at the zero")
    if np.max(np.abs(np.linalg.eigvals(m).imag)) > 1e-6 * norm:
        raise AsymmetryError("gradient tensor has complex eigenvalues beyond tolerance")
    w, v = np.linalg.eigh(tensor.symmetrized())
    strong = int(np.argmax(np.abs(w)))
    rest = sorted((i for i in range(3) if i != strong), key=lambda i: -w[i])
    order = [strong, *rest]
    vals = w[order]
    axes = np.array([_orient(v[:, i]) for i in order])
    if abs(vals[1] - vals[2]) <= DEGENERATE_PAIR * abs(vals[0]):
        u, wv = _plane_basis(axes[0])
        axes = np.array([axes[0], u, wv])
    weak_mean = 0.5 * (vals[1] + vals[2])
    if abs(weak_mean) <= 1e-12 * abs(vals[0]):
        raise DegenerateConfigurationError("weak-axis eigenvalues cancel; not a quadrupole")
    return vals, axes, vals / weak_mean


def trap_report(a: ConductorAssembly, guess=None) -> TrapReport:
    """Locate the zero nearest ``guess`` and decompose the gradient there."""
    if guess is None:
        guess = a.centroid()
    zero = find_zero(a, guess)
    tensor = field_jacobian(a, zero)
    vals, axes, ratio = analyse_tensor(tensor)
    return TrapReport(zero, vals, axes, ratio, tensor)


_AXIS_RE = re.compile(r"^\s*([xyz])\s*=\s*(.+?)\s*$")


@dataclass(frozen=True)
class GridSpec:
    """Inclusive linspace per axis; ``(value, value, 1)`` for a fixed coordinate."""

    x: tuple[float, float, int] = (0.0, 0.0, 1)
    y: tuple[float, float, int] = (0.0, 0.0, 1)
    z: tuple[float, float, int] = (0.0, 0.0, 1)

    def __post_init__(self):
        for name in "xyz":
            lo, hi, n = getattr(self, name)
            if int(n) != n or n < 1:
                raise InvalidArgumentError(f"{name}: point count must be a positive integer")
            if n == 1 and lo != hi:
                raise InvalidArgumentError(f"{name}: a single point needs equal endpoints")
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise InvalidArgumentError(f"{name}: bounds must be finite")
            object.__setattr__(self, name, (float(lo), float(hi), int(n)))

    @classmethod
    def parse(cls, text: str, scale: float = 1.0) -> "GridSpec":
        """Parse ``x=a:b:n,y=c,z=d:e:m``; values are multiplied by ``scale``."""
        axes = {}
        for part in text.split(","):
            if not part.strip():
                continue
            m = _AXIS_RE.match(part)
            if not m:
                raise InvalidArgumentError(f"bad grid term {part!r}")
            name, body = m.groups()
            if name in axes:
                raise InvalidArgumentError(f"axis {name} given twice")
            fields = body.split(":")
            try:
                if len(fields) == 1:
                    v = float(fields[0]) * scale
                    axes[name] = (v, v, 1)
                elif len(fields) == 3:
                    n = int(fields[2])
                    axes[name] = (float(fields[0]) * scale, float(fields[1]) * scale, n)
                else:
                    raise ValueError
            except ValueError:
                raise InvalidArgumentError(f"bad grid term {part!r}") from None
        if not axes:
            raise InvalidArgumentError("empty grid specification")
        return cls(**axes)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.x[2], self.y[2], self.z[2])

    @property
    def size(self) -> int:
        return self.x[2] * self.y[2] * self.z[2]

    def points(self) -> np.ndarray:
        """(N, 3) array of grid points, x varying fastest, then y, then z."""
        xs, ys, zs = (np.linspace(*getattr(self, n)) for n in "xyz")
        Z, Y, X = np.meshgrid(zs, ys, xs, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])


@dataclass(frozen=True)
class FieldMap:
    grid: GridSpec
    samples: list[FieldSample]

    @property
    def points(self) -> np.ndarray:
        return np.array([s.point for s in self.samples])

    @property
    def fields(self) -> np.ndarray:
        return np.array([s.b for s in self.samples])


def field_map(a: ConductorAssembly, grid: GridSpec) -> FieldMap:
    samples = []
    for i, p in enumerate(grid.points()):
        try:
            b = assembly_field(a, p)
        except SingularityError as exc:
            raise SingularityError(f"grid point {i} {p.tolist()}: {exc}", element=exc.element, index=i) from exc
        samples.append(FieldSample(p, b))
    return FieldMap(grid, samples)


@dataclass(frozen=True)
class GradientCurrentTable:
    currents: np.ndarray  # A
    gradients: np.ndarray  # T/m, strong-axis magnitude
    slope: float  # T/m per A, least squares through the origin
    residual: float  # max |g - slope I| / max |g|

    def rows(self):
        return list(zip(self.currents.tolist(), self.gradients.tolist()))


def gradient_vs_current(a: ConductorAssembly, currents: Sequence[float], guess=None) -> GradientCurrentTable:
    """Strong-axis gradient at the zero for each drive current.

    Element currents of ``a`` are the pattern for a 1 A drive (times
    ``a.drive_scale``).
    """
    I = np.asarray(currents, dtype=float)
    if I.size == 0 or np.any(~(I > 0)):
        raise InvalidArgumentError("drive currents must be positive")
    if guess is None:
        guess = a.centroid()
    g = np.array([trap_report(with_drive_current(a, i), guess).strong_gradient for i in I])
    slope = float(I @ g / (I @ I))
    residual = float(np.max(np.abs(g - slope * I)) / np.max(np.abs(g)))
    return GradientCurrentTable(I, g, slope, residual)
