"""Periodic-orbit toolkit for two relativistic Kepler systems."""

from relkep._core import (
    LeviCivitaSystem,
    RelativisticSystem,
    actions_from_hl,
    admissible,
    apsidal_angle_closed,
    apsidal_angle_quadrature,
    area_closed,
    area_quadrature,
    find_prescribed_energy_orbits,
    hamiltonian,
    isoenergetic_nondegeneracy,
    k0,
    k0_gradient,
    levi_civita_physical,
    radial_period_closed,
    radial_period_quadrature,
    solve_resonant_L,
    turning_points,
    winding_floor,
)

__all__ = [
    "LeviCivitaSystem",
    "RelativisticSystem",
    "actions_from_hl",
    "admissible",
    "apsidal_angle_closed",
    "apsidal_angle_quadrature",
    "area_closed",
    "area_quadrature",
    "find_prescribed_energy_orbits",
    "hamiltonian",
    "isoenergetic_nondegeneracy",
    "k0",
    "k0_gradient",
    "levi_civita_physical",
    "radial_period_closed",
    "radial_period_quadrature",
    "solve_resonant_L",
    "turning_points",
    "winding_floor",
]
