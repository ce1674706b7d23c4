"""Closed-form initial data for the standard scenarios.

Every profile satisfies ``phi'(0) = phi'(1) = 0``. The single-branch
profiles are built from the quartic

    p_k(y) = y - k y^2/2 - 4 y^3/3 + k y^4,   p_k'(y) = (1 - k y)(1 - 4 y^2),

which has unit slope and curvature ``-k`` at ``y = 0``, vanishing slope at
``y = +-1/2`` and is strictly increasing on ``(-1/2, 1/2)`` for ``|k| < 2``.
The sign of the curvature at the phase-change point decides whether the
interface moves (level set travels in the envelope direction) or sleeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np

from .errors import UnknownPreset
from .heat import Grid1D
from .hysteresis import PHASE_I, PHASE_II, RelayField, Thresholds, initial_phase_assignment


@dataclass
class Preset:
    name: str
    phi: np.ndarray
    H0: RelayField
    expected_branches: List[Tuple[float, int]]
    nontransversal_points: List[float] = field(default_factory=list)
    description: str = ""

    @property
    def transversal(self) -> bool:
        return not self.nontransversal_points


def quartic(y, k):
    return y - k * y**2 / 2 - 4 * y**3 / 3 + k * y**4


def _split_phases(x, b, left, right, phi, th):
    choice = np.where(x <= b, left, right).astype(np.int8)
    # only band nodes need a choice; forced nodes take their forced value
    choice[(phi <= th.alpha) | (phi >= th.beta)] = 0
    return initial_phase_assignment(phi, th, choice)


def _single_up(th, grid):
    x = grid.x
    phi = th.alpha + quartic(x - 0.5, 1.0)
    return phi, _split_phases(x, 0.5, PHASE_I, PHASE_II, phi, th), [(0.5, 1)], []


def _single_down_alpha(th, grid):
    x = grid.x
    phi = th.alpha - quartic(x - 0.5, -1.0)
    return phi, _split_phases(x, 0.5, PHASE_II, PHASE_I, phi, th), [(0.5, 2)], []


def _single_down_beta(th, grid):
    x = grid.x
    phi = th.beta + quartic(x - 0.5, -1.0)
    return phi, _split_phases(x, 0.5, PHASE_I, PHASE_II, phi, th), [(0.5, 3)], []


def _flat_sleeping(th, grid):
    # slope 1/2, convex at b: the alpha level set drifts left, the interface sleeps at b
    x = grid.x
    phi = th.alpha + 0.5 * quartic(x - 0.5, -1.0)
    return phi, _split_phases(x, 0.5, PHASE_I, PHASE_II, phi, th), [(0.5, 1)], []


def smooth_w2inf_profile(x, alpha):
    """C^1 profile with piecewise-constant second derivative (4, -1, -8/3).

    The slope is the broken line through (0, 0), (0.3, 1.2), (0.7, 0.8),
    (1, 0); ``phi(0.5) = alpha``.
    """
    knots = np.array([0.0, 0.3, 0.7, 1.0])
    slopes = np.array([0.0, 1.2, 0.8, 0.0])

    def integral(z):
        # integral of the broken-line slope from 0 to z
        z = np.asarray(z, dtype=float)
        total = np.zeros_like(z)
        for x0, x1, s0, s1 in zip(knots[:-1], knots[1:], slopes[:-1], slopes[1:]):
            zz = np.clip(z, x0, x1) - x0
            total += s0 * zz + 0.5 * (s1 - s0) / (x1 - x0) * zz**2
        return total

    return alpha + integral(x) - integral(0.5)


def _smooth_w2inf(th, grid):
    x = grid.x
    phi = smooth_w2inf_profile(x, th.alpha)
    return phi, _split_phases(x, 0.5, PHASE_I, PHASE_II, phi, th), [(0.5, 1)], []


TWO_BRANCH_POINTS = (0.2, 0.8)


def two_branch_coefficients(th: Thresholds) -> np.ndarray:
    """Cosine-series coefficients ``c_k`` of ``phi = sum c_k cos(k pi x)``, k < 12.

    Matches value, slope and curvature ``(alpha, 1, -1/2)`` at 0.2 and
    ``(beta, -1, 1/2)`` at 0.8 with vanishing third derivative at both, a
    crest ``phi(1/2) = 0.35`` with zero slope, and end values
    ``phi(0) = -0.3``, ``phi(1) = -0.1``. Variant 1 sits at 0.2 and
    variant 4 at 0.8. Curvature changes sign within a diffusion length of
    both points, so at desk-scale horizons the alpha interface advances by
    a fraction of a cell and then sleeps, and the beta interface sleeps.
    """
    b1, b2 = TWO_BRANCH_POINTS
    w = np.arange(12) * np.pi

    def row(x, d):
        return [np.cos(w * x), -w * np.sin(w * x), -(w**2) * np.cos(w * x), w**3 * np.sin(w * x)][d]

    cons = [
        (b1, 0, th.alpha), (b1, 1, 1.0), (b1, 2, -0.5), (b1, 3, 0.0),
        (b2, 0, th.beta), (b2, 1, -1.0), (b2, 2, 0.5), (b2, 3, 0.0),
        (0.5, 0, 0.35), (0.5, 1, 0.0), (0.0, 0, -0.3), (1.0, 0, -0.1),
    ]
    a = np.array([row(x, d) for x, d, _ in cons])
    return np.linalg.solve(a, np.array([val for _, _, val in cons]))


def _two_branch(th, grid):
    x = grid.x
    c = two_branch_coefficients(th)
    phi = np.cos(np.outer(x, np.arange(c.size) * np.pi)) @ c
    b1, b2 = TWO_BRANCH_POINTS
    choice = np.where((x > b1) & (x <= b2), PHASE_II, PHASE_I).astype(np.int8)
    choice[(phi <= th.alpha) | (phi >= th.beta)] = 0
    return phi, initial_phase_assignment(phi, th, choice), [(b1, 1), (b2, 4)], []


PARABOLA_CURVATURE = 0.25


def _cap(x):
    # 1 - cos(2 pi (x - 1/2)) over 2 pi^2: equals (x - 1/2)^2 to leading order
    return (1.0 - np.cos(2 * np.pi * (x - 0.5))) / (2 * np.pi**2)


def _nt_parabola_beta(th, grid):
    x = grid.x
    phi = th.beta - PARABOLA_CURVATURE * _cap(x)
    choice = np.where(phi < th.beta, PHASE_I, 0).astype(np.int8)
    return phi, initial_phase_assignment(phi, th, choice), [], [0.5]


def _nt_parabola_alpha(th, grid):
    x = grid.x
    phi = th.alpha + PARABOLA_CURVATURE * _cap(x)
    choice = np.where(phi > th.alpha, PHASE_II, 0).astype(np.int8)
    return phi, initial_phase_assignment(phi, th, choice), [], [0.5]


_BUILDERS: Dict[str, Tuple[Callable, str]] = {
    "single_up": (_single_up, "alpha + p_1(x - 1/2); phases I|II; variant 1 at 0.5, interface moves right"),
    "single_down_alpha": (
        _single_down_alpha,
        "alpha - p_{-1}(x - 1/2); phases II|I; variant 2 at 0.5, interface moves left",
    ),
    "single_down_beta": (
        _single_down_beta,
        "beta + p_{-1}(x - 1/2); phases I|II; variant 3 at 0.5, interface moves left",
    ),
    "two_branch": (
        _two_branch,
        "12-mode cosine series; phases I|II|I; variant 1 at 0.2 (alpha), variant 4 at 0.8 (beta)",
    ),
    "smooth_w2inf": (
        _smooth_w2inf,
        "C^1 profile, phi'' in {4, -1, -8/3}; phases I|II; variant 1 at 0.5",
    ),
    "nt_parabola_beta": (
        _nt_parabola_beta,
        "beta - 0.25 (1 - cos 2pi(x - 1/2)) / 2pi^2; touches beta at 0.5 from below; phase I",
    ),
    "nt_parabola_alpha": (
        _nt_parabola_alpha,
        "alpha + 0.25 (1 - cos 2pi(x - 1/2)) / 2pi^2; touches alpha at 0.5 from above; phase II",
    ),
    "flat_sleeping": (
        _flat_sleeping,
        "alpha + p_{-1}(x - 1/2) / 2; phases I|II; variant 1 at 0.5, sleeping interface s == b",
    ),
}

PRESETS = tuple(_BUILDERS)
TRANSVERSAL_PRESETS = ("single_up", "single_down_alpha", "single_down_beta", "two_branch", "smooth_w2inf", "flat_sleeping")


def describe_presets() -> Dict[str, str]:
    return {name: desc for name, (_, desc) in _BUILDERS.items()}


def build_preset(name: str, th: Thresholds, grid: Grid1D) -> Preset:
    """Sample a named preset on ``grid``; returns initial data, phases and expected branches."""
    try:
        builder, desc = _BUILDERS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
    phi, H0, expected, nt_points = builder(th, grid)
    return Preset(
        name=name,
        phi=phi,
        H0=H0,
        expected_branches=expected,
        nontransversal_points=nt_points,
        description=desc,
    )
