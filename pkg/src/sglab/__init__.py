"""Numerical lab for bubbling solutions of the sinh-Gordon equation
``Lap u + h1 e^u - h2 e^{-u} = 0`` on a disk."""

from .grid import DiskGrid, CircleProbe, build_grid, area_integral, circle_average, circle_oscillation
from .fields import Field, CoefficientPair, preset, pde_residual, swap_symmetry, validate_coefficients
from .liouville import BubbleSpec, SyntheticFamily, bubble_field, synth_family, dilate
from .solver import MeanFieldProblem, SolveReport, solve_mean_field, continuation
from .analysis import (
    BubbleDisk,
    Group,
    MassProfile,
    decay_class,
    decay_ladder_scan,
    group_bubbles,
    mass_profile,
    oscillation_check,
    select_bubbles,
)
from .pohozaev import (
    PohozaevReport,
    QuantizationMatch,
    classify_quantization,
    green_function,
    green_regular_part,
    green_representation_check,
    pohozaev_consistency,
    pohozaev_report,
)

__version__ = "0.1.0"
