"""Conductor primitives, assemblies and the parameterised cylinder trap.

Positions are metres, currents amperes.  Vectors are stored as plain float
tuples so that every element is hashable and compares exactly; numerical code
converts them to arrays on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .errors import InvalidArgumentError

Vec3 = tuple[float, float, float]

AXIS_TOLERANCE = 1e-12


def vec3(v) -> Vec3:
    x, y, z = (float(c) for c in v)
    return (x, y, z)


def _finite(v: Vec3) -> bool:
    return all(math.isfinite(c) for c in v)


@dataclass(frozen=True)
class CircularLoop:
    center: Vec3
    axis: Vec3
    radius: float
    current: float

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        object.__setattr__(self, "axis", vec3(self.axis))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "current", float(self.current))

    @property
    def extent(self) -> float:
        return 2.0 * self.radius


@dataclass(frozen=True)
class StraightSegment:
    start: Vec3
    end: Vec3
    current: float

    def __post_init__(self):
        object.__setattr__(self, "start", vec3(self.start))
        object.__setattr__(self, "end", vec3(self.end))
        object.__setattr__(self, "current", float(self.current))

    @property
    def extent(self) -> float:
        return math.dist(self.start, self.end)


Element = Union[CircularLoop, StraightSegment]


@dataclass(frozen=True)
class ConductorAssembly:
    """Immutable collection of filaments acting as one field source.

    ``drive_scale`` is the filament current per ampere of external drive
    current.  Element currents describe the assembly as it is; operations that
    sweep a drive current (``with_drive_current``) rescale them.
    """

    elements: tuple[Element, ...]
    label: str = ""
    drive_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "drive_scale", float(self.drive_scale))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def characteristic_size(self) -> float:
        """Largest single-element extent (loop diameter or segment length)."""
        return max((e.extent for e in self.elements), default=0.0)

    def centroid(self) -> np.ndarray:
        pts = []
        for e in self.elements:
            if isinstance(e, CircularLoop):
                pts.append(e.center)
            else:
                pts.append(tuple((a + b) / 2 for a, b in zip(e.start, e.end)))
        return np.mean(np.array(pts), axis=0)

    def __add__(self, other: "ConductorAssembly") -> "ConductorAssembly":
        label = "+".join(s for s in (self.label, other.label) if s)
        return ConductorAssembly(self.elements + other.elements, label, self.drive_scale)


def validate_assembly(a: ConductorAssembly) -> list[str]:
    """Return human-readable invariant violations; never raises."""
    problems: list[str] = []
    if not a.elements:
        problems.append("assembly: must contain at least one element")
    for i, e in enumerate(a.elements):
        if isinstance(e, CircularLoop):
            if not (_finite(e.center) and _finite(e.axis)) or not math.isfinite(e.radius):
                problems.append(f"element {i}: components must be finite")
            if not e.radius > 0:
                problems.append(f"element {i}: radius > 0")
            if abs(math.hypot(*e.axis) - 1.0) > AXIS_TOLERANCE:
                problems.append(f"element {i}: |axis| = 1")
            if not math.isfinite(e.current):
                problems.append(f"element {i}: current must be finite")
        elif isinstance(e, StraightSegment):
            if not (_finite(e.start) and _finite(e.end)):
                problems.append(f"element {i}: components must be finite")
            if e.start == e.end:
                problems.append(f"element {i}: degenerate segment")
            if not math.isfinite(e.current):
                problems.append(f"element {i}: current must be finite")
        else:
            problems.append(f"element {i}: unknown element type {type(e).__name__}")
    return problems


def _scale_element(e: Element, s: float) -> Element:
    if isinstance(e, CircularLoop):
        return replace(e, center=tuple(c * s for c in e.center), radius=e.radius * s)
    return replace(e, start=tuple(c * s for c in e.start), end=tuple(c * s for c in e.end))


def scale_assembly(a: ConductorAssembly, s: float) -> ConductorAssembly:
    """Multiply every position and length by ``s``; currents are unchanged."""
    if not (math.isfinite(s) and s > 0):
        raise InvalidArgumentError(f"scale factor must be positive, got {s!r}")
    return replace(a, elements=tuple(_scale_element(e, s) for e in a.elements))


def scale_currents(a: ConductorAssembly, c: float) -> ConductorAssembly:
    return replace(a, elements=tuple(replace(e, current=e.current * c) for e in a.elements))


def with_drive_current(a: ConductorAssembly, current: float) -> ConductorAssembly:
    """Assembly carrying ``current`` amperes of drive current.

    Element currents are read as the pattern for 1 A of drive, so each one is
    multiplied by ``current * a.drive_scale``.
    """
    return replace(scale_currents(a, current * a.drive_scale), drive_scale=1.0)


def rotate_assembly(a: ConductorAssembly, rotation, origin=(0.0, 0.0, 0.0)) -> ConductorAssembly:
    rot = np.asarray(rotation, dtype=float)
    if rot.shape != (3, 3) or not np.allclose(rot @ rot.T, np.eye(3), atol=1e-12):
        raise InvalidArgumentError("rotation must be an orthogonal 3x3 matrix")
    o = np.asarray(origin, dtype=float)

    def move(p):
        return vec3(rot @ (np.asarray(p) - o) + o)

    out = []
    for e in a.elements:
        if isinstance(e, CircularLoop):
            out.append(replace(e, center=move(e.center), axis=vec3(rot @ np.asarray(e.axis))))
        else:
            out.append(replace(e, start=move(e.start), end=move(e.end)))
    return replace(a, elements=tuple(out))


def translate_assembly(a: ConductorAssembly, offset) -> ConductorAssembly:
    d = vec3(offset)

    def move(p):
        return tuple(pi + di for pi, di in zip(p, d))

    out = []
    for e in a.elements:
        if isinstance(e, CircularLoop):
            out.append(replace(e, center=move(e.center)))
        else:
            out.append(replace(e, start=move(e.start), end=move(e.end)))
    return replace(a, elements=tuple(out))


def build_anti_helmholtz(R: float, I: float, label: str = "anti-helmholtz") -> ConductorAssembly:
    """Coaxial loops on the z axis at z = +R/2 (current +I) and z = -R/2 (-I)."""
    if not (math.isfinite(R) and R > 0):
        raise InvalidArgumentError(f"loop radius must be positive, got {R!r}")
    return ConductorAssembly(
        (
            CircularLoop((0.0, 0.0, R / 2), (0.0, 0.0, 1.0), R, I),
            CircularLoop((0.0, 0.0, -R / 2), (0.0, 0.0, 1.0), R, -I),
        ),
        label,
    )


@dataclass(frozen=True)
class CylinderTrapParams:
    """Dimensions of the four-wire plus two-loop cylinder trap.

    The four straight conductors run parallel to z through the corners of a
    square of side ``wire_separation`` and span the gap between the two loop
    planes at z = +-plane_separation/2.  The defaults leave a 5 mm cube clear
    of conductors; ``wire_separation`` was solved so that the wire quadrupole
    gradient is three times the transverse loop-pair gradient, which makes the
    zero an ideal -2:1:1 quadrupole.
    """

    wire_separation: float = 6.4351e-3
    loop_radius: float = 7.5e-3
    plane_separation: float = 5.0e-3
    current: float = 1.0

    def __post_init__(self):
        for name in ("wire_separation", "loop_radius", "plane_separation"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidArgumentError(f"{name} must be positive, got {v!r}")
        if not math.isfinite(self.current):
            raise InvalidArgumentError("current must be finite")

    @property
    def trapping_region_edge(self) -> float:
        """Edge of the largest centred cube that clears all conductors."""
        return min(self.wire_separation, self.plane_separation)


def build_cylinder_trap(p: CylinderTrapParams | None = None, label: str = "cylinder-trap") -> ConductorAssembly:
    p = p or CylinderTrapParams()
    if not isinstance(p, CylinderTrapParams):
        raise InvalidArgumentError("expected CylinderTrapParams")
    h = p.wire_separation / 2
    zt = p.plane_separation / 2
    I = p.current
    corners = [(h, h), (-h, h), (-h, -h), (h, -h)]
    elements: list[Element] = []
    for k, (x, y) in enumerate(corners):
        sign = 1.0 if k % 2 == 0 else -1.0
        elements.append(StraightSegment((x, y, -zt), (x, y, zt), sign * I))
    elements.append(CircularLoop((0.0, 0.0, zt), (0.0, 0.0, 1.0), p.loop_radius, I))
    elements.append(CircularLoop((0.0, 0.0, -zt), (0.0, 0.0, 1.0), p.loop_radius, -I))
    return ConductorAssembly(tuple(elements), label)


def assembly_from_elements(elements: Sequence[Element], label: str = "", drive_scale: float = 1.0):
    return ConductorAssembly(tuple(elements), label, drive_scale)
