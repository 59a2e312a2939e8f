"""Isomonodromic deformations of rank-2 meromorphic connections with unramified poles.

Lax pairs in several gauges, isospectral and isomonodromic Hamiltonians, time charts
separating trivial from isomonodromic times, Painleve presets and a verification suite.
"""
from .connection import (ConnectionConfig, DarbouxState, DeformationVector, PoleStructure, ValidationError,
                         compute_P1, compute_P2_tilde, config_from_sheet1, genus, validate)
from .deformation import (DeformationCoefficients, build_A_companion, build_A_tilde, deformation_coefficients,
                          evolution_field)
from .flow import (NodeCollisionError, Trajectory, field_along, hamiltonian_value, hamiltonian_value_expanded,
                   integrate_flow)
from .lax import (IsospectralHamiltonians, build_L_c, build_L_check, build_L_companion, build_L_tilde,
                  classical_spectral_curve, solve_isospectral_H)
from .presets import fuchsian_preset, painleve_preset, painleve_rhs_oracle, preset_config_at
from .rational import RationalFunction
from .times import (TimeChart, canonical_chart, dual_derivative_coefficients, forward_time_map,
                    inverse_time_map, reduced_hamiltonians, shift_coordinates, specialize_canonical,
                    trivial_vectors, unshift_coordinates)
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "ConnectionConfig", "DarbouxState", "DeformationVector", "PoleStructure", "ValidationError",
    "compute_P1", "compute_P2_tilde", "config_from_sheet1", "genus", "validate",
    "DeformationCoefficients", "build_A_companion", "build_A_tilde", "deformation_coefficients",
    "evolution_field", "NodeCollisionError", "Trajectory", "field_along", "hamiltonian_value",
    "hamiltonian_value_expanded", "integrate_flow", "IsospectralHamiltonians", "build_L_c", "build_L_check",
    "build_L_companion", "build_L_tilde", "classical_spectral_curve", "solve_isospectral_H",
    "fuchsian_preset", "painleve_preset", "painleve_rhs_oracle", "preset_config_at", "RationalFunction",
    "TimeChart", "canonical_chart", "dual_derivative_coefficients", "forward_time_map", "inverse_time_map",
    "reduced_hamiltonians", "shift_coordinates", "specialize_canonical", "trivial_vectors",
    "unshift_coordinates", "run_suite",
]
