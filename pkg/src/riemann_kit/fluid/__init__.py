"""Inhomogeneous fluid dynamics: system, integral elements, closed-form families."""

from .families import (
    AH0,
    EA0,
    EE0a,
    EE0b,
    EH0,
    FAMILIES,
    FAMILY_IDS,
    ClosedFormFamily,
    fluid_family,
    solve_invariants,
)
from .system import (
    FluidParams,
    FluidState,
    classify,
    delta_speed,
    effective_gravity,
    fluid_element,
    fluid_system,
)
