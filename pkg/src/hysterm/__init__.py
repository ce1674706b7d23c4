"""Finite-difference laboratory for the heat equation with a two-threshold relay.

The subpackages build free interphase boundaries by monotone-envelope
iteration, cross-check them against direct relay time-marching, and
measure the regularity of the resulting interfaces.
"""

from .heat import Grid1D, build_grid, implicit_step, solve_linear
from .hysteresis import PHASE_I, PHASE_II, RelayField, Thresholds, relay_update, simulate_relay
from .free_boundary import BranchSpec, classify_branches, fixed_point_iterate, fp_vs_relay_distance
from .presets import PRESETS, build_preset

__version__ = "0.1.0"

__all__ = [
    "Grid1D",
    "build_grid",
    "implicit_step",
    "solve_linear",
    "PHASE_I",
    "PHASE_II",
    "RelayField",
    "Thresholds",
    "relay_update",
    "simulate_relay",
    "BranchSpec",
    "classify_branches",
    "fixed_point_iterate",
    "fp_vs_relay_distance",
    "PRESETS",
    "build_preset",
]
