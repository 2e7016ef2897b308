"""Magnetostatic quadrupole trap design: filament field solver, trap metrics,
planar-versus-3D coil comparison and cold-atom device models."""

from .constants import CONSTANTS, MU0, PhysicalConstants
from .device import (
    AtomNumberModel,
    ConductorPath,
    DeviceCalibration,
    TofFit,
    TofSample,
    atom_number_estimate,
    calibrate_assembly,
    calibrated_cylinder_trap,
    current_to_gradient,
    detuning_for_current,
    expansion_sigma,
    fit_gaussian_1d,
    power,
    resistance,
    tof_fit,
)
from .elliptic import elliptic_ke
from .errors import *  # noqa: F401,F403
from .field import (
    FieldSample,
    GradientTensor,
    assembly_field,
    axial_second_derivative,
    field_jacobian,
    loop_field,
    loop_field_on_axis,
    segment_field,
)
from .geometry import (
    CircularLoop,
    ConductorAssembly,
    CylinderTrapParams,
    StraightSegment,
    build_anti_helmholtz,
    build_cylinder_trap,
    rotate_assembly,
    scale_assembly,
    validate_assembly,
    with_drive_current,
)
from .planar import (
    PlanarConfig,
    PlanarOptimum,
    anti_helmholtz_gradient,
    optimize_planar,
    planar_current_solve,
    scaling_study,
)
from .trap import FieldMap, GridSpec, TrapReport, field_map, find_zero, gradient_vs_current, trap_report

__version__ = "0.1.0"
