"""Interface construction by monotone-envelope iteration.

For every phase-change point ``b_i`` the solver keeps a monotone curve
``xi_i(t)`` inside the window ``|x - b_i| <= sigma``. One sweep of the map

    xi -> forcing(xi) -> heat solve -> level curve a(t) -> running max/min

produces the next iterate; a fixed point is an interface of the coupled
relay problem. Each variant fixes the threshold, slope sign, envelope
direction and the closed side of the forcing pattern:

    ======= ========= ===== ========= =========================
    variant threshold slope direction forcing in window
    ======= ========= ===== ========= =========================
    1       alpha     +     up        +1 for x <= xi, else -1
    2       alpha     -     down      +1 for x >= xi, else -1
    3       beta      +     down      -1 for x >= xi, else +1
    4       beta      -     up        -1 for x <= xi, else +1
    ======= ========= ===== ========= =========================
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from .errors import (
    BoundaryPhaseChange,
    BranchCountMismatch,
    CurveOutsideWindow,
    MultipleSignChanges,
    NonTransversal,
    NoSignChange,
    NotConverged,
    PhaseContradiction,
    WindowOverlap,
)
from .heat import Forcing, Grid1D, solve_linear
from .hysteresis import CoupledSolution, RelayField, Thresholds

# (threshold, slope sign) -> variant
_VARIANTS = {("alpha", 1): 1, ("alpha", -1): 2, ("beta", 1): 3, ("beta", -1): 4}
_DIRECTION = {1: "up", 2: "down", 3: "down", 4: "up"}
# value of f on the left of the curve, and whether the curve point itself is on the left
_LEFT_VALUE = {1: 1, 2: -1, 3: 1, 4: -1}
_CLOSED_LEFT = {1: True, 2: False, 3: False, 4: True}


@dataclass(frozen=True)
class BranchSpec:
    b: float
    threshold: str
    threshold_value: float
    slope: float
    variant: int
    sigma: float
    m: float

    @property
    def slope_sign(self) -> int:
        return 1 if self.slope > 0 else -1

    @property
    def envelope_direction(self) -> str:
        return _DIRECTION[self.variant]

    @property
    def left_value(self) -> int:
        return _LEFT_VALUE[self.variant]

    def window_mask(self, x: np.ndarray) -> np.ndarray:
        """Nodes of the open window ``|x - b| < sigma``."""
        return np.abs(x - self.b) < self.sigma

    def as_dict(self) -> dict:
        return {
            "b": self.b,
            "threshold": self.threshold,
            "threshold_value": self.threshold_value,
            "slope": self.slope,
            "variant": self.variant,
            "envelope_direction": self.envelope_direction,
            "sigma": self.sigma,
            "m": self.m,
        }


def _crossing(x0, x1, g0, g1):
    # root of the linear interpolant through (x0, g0), (x1, g1)
    return x0 + (x1 - x0) * (g0 / (g0 - g1))


def _window_samples(branch: BranchSpec, grid: Grid1D):
    """Abscissae of the window interpolant and interpolation data for its ends."""
    x = grid.x
    lo, hi = branch.b - branch.sigma, branch.b + branch.sigma
    inner = np.flatnonzero((x > lo) & (x < hi))
    xs = np.concatenate(([lo], x[inner], [hi]))
    ends = []
    for xe in (lo, hi):
        k = min(int(np.floor(xe / grid.h)), grid.nx - 2)
        w = (xe - x[k]) / grid.h
        ends.append((k, w))
    return xs, inner, ends


def _sample(v: np.ndarray, inner, ends) -> np.ndarray:
    v = np.atleast_2d(v)
    (k0, w0), (k1, w1) = ends
    left = (1 - w0) * v[:, k0] + w0 * v[:, k0 + 1]
    right = (1 - w1) * v[:, k1] + w1 * v[:, k1 + 1]
    return np.column_stack((left, v[:, inner], right))


def _roots(xs: np.ndarray, g: np.ndarray, levels_offset: int = 0) -> np.ndarray:
    pos = g >= 0
    change = pos[:, 1:] != pos[:, :-1]
    count = change.sum(axis=1)
    if np.any(count == 0):
        n = int(np.flatnonzero(count == 0)[0]) + levels_offset
        raise NoSignChange(f"level {n}: no threshold crossing inside the window; shrink T")
    if np.any(count > 1):
        n = int(np.flatnonzero(count > 1)[0]) + levels_offset
        raise MultipleSignChanges(f"level {n}: several threshold crossings inside the window; shrink T")
    k = np.argmax(change, axis=1)
    rows = np.arange(g.shape[0])
    return _crossing(xs[k], xs[k + 1], g[rows, k], g[rows, k + 1])


def extract_level_curve(v: np.ndarray, branch: BranchSpec, grid: Grid1D) -> np.ndarray:
    """Root of the piecewise-linear interpolant of ``v(., t_n) - threshold`` per level.

    The search is confined to ``[b - sigma, b + sigma]`` and the crossing must
    be unique there.
    """
    xs, inner, ends = _window_samples(branch, grid)
    g = _sample(v, inner, ends) - branch.threshold_value
    return _roots(xs, g)


def monotone_envelope(a: np.ndarray, direction: str) -> np.ndarray:
    """Running maximum (``up``) or running minimum (``down``) of ``a``."""
    a = np.asarray(a, dtype=float)
    if direction == "up":
        return np.maximum.accumulate(a)
    if direction == "down":
        return np.minimum.accumulate(a)
    raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")


def _margin(slopes: Sequence[float]) -> float:
    return min(1.0, min(abs(s) for s in slopes))


def _sigma_admissible(sigma, pts, phi, grad, H0, th, grid, m) -> bool:
    x = grid.x
    if sigma < 2 * grid.h:
        return False
    bs = [p[0] for p in pts]
    if bs[0] <= sigma or bs[-1] >= 1.0 - sigma:
        return False
    if any(b2 - b1 <= 2 * sigma for b1, b2 in zip(bs, bs[1:])):
        return False
    outside = np.ones(grid.nx, dtype=bool)
    for b, which, sign in pts:
        level = th.value(which)
        near = np.abs(x - b) <= sigma
        if np.any(sign * grad[near] < m / 2):
            return False
        right = np.interp(b + sigma, x, phi) - level
        left = np.interp(b - sigma, x, phi) - level
        if sign * right < m * sigma / 2 or sign * left > -m * sigma / 2:
            return False
        outside &= ~near
    phase_ii = H0.state == -1
    if np.any(outside & phase_ii & (phi <= th.alpha)):
        return False
    if np.any(outside & ~phase_ii & (phi >= th.beta)):
        return False
    return True


def _bracket(phi, j, th):
    # the crossing may sit one cell off the relay change when phi rounds to the threshold
    for k in (j, j - 1, j + 1):
        if k < 0 or k + 1 >= phi.size:
            continue
        for which in ("alpha", "beta"):
            g0, g1 = phi[k] - th.value(which), phi[k + 1] - th.value(which)
            if g0 * g1 <= 0 and not (g0 == 0 and g1 == 0):
                return which, k
    return None


def classify_branches(
    phi: np.ndarray,
    H0: RelayField,
    th: Thresholds,
    grid: Grid1D,
    tol_slope: float = 1e-3,
    sigma_max: float = 0.25,
) -> List[BranchSpec]:
    """Locate phase-change points, assign their variant and a common window width.

    The window half-width is the largest ``sigma_max / 2**k`` for which the
    slope stays above ``m/2`` on every window, window edges are separated
    from the threshold by ``m sigma / 2``, phases outside the windows stay
    clear of the switching threshold, and windows are disjoint and interior.
    """
    phi = np.asarray(phi, dtype=float)
    x = grid.x
    state = H0.state
    grad = np.gradient(phi, grid.h)
    changes = np.flatnonzero(state[1:] != state[:-1])
    if changes.size == 0:
        return []

    pts = []
    for j in changes:
        if j == 0 or j + 1 == grid.nx - 1:
            raise BoundaryPhaseChange(f"phase change between nodes {j} and {j + 1} touches the boundary")
        left_phase = int(state[j])
        found = _bracket(phi, j, th)
        if found is None:
            raise NonTransversal(
                f"phase change at x~{x[j]:.6g} does not cross a threshold; interface construction needs phi(b) in {{alpha, beta}}"
            )
        found, k = found
        g0, g1 = phi[k] - th.value(found), phi[k + 1] - th.value(found)
        b = float(_crossing(x[k], x[k + 1], g0, g1))
        slope = float(np.interp(b, x, grad))
        if abs(slope) < tol_slope:
            raise NonTransversal(f"|d phi/dx| = {abs(slope):.3g} < {tol_slope} at phase change x={b:.6g}")
        sign = 1 if slope > 0 else -1
        expected = {("alpha", 1): 1, ("alpha", -1): -1, ("beta", 1): 1, ("beta", -1): -1}[(found, sign)]
        # variants 1,3 have phase I on the left, 2,4 phase II
        if (left_phase == 1) != (expected == 1):
            raise PhaseContradiction(f"relay states around x={b:.6g} disagree with the slope of phi")
        pts.append((b, found, sign, slope))

    m = _margin([p[3] for p in pts])
    geo = [(b, which, sign) for b, which, sign, _ in pts]
    sigma = sigma_max
    while not _sigma_admissible(sigma, geo, phi, grad, H0, th, grid, m):
        sigma /= 2
        if sigma < 2 * grid.h:
            raise WindowOverlap(
                "no window half-width >= 2h satisfies the slope, separation and disjointness conditions"
            )

    branches = []
    for b, which, sign, slope in pts:
        spec = BranchSpec(
            b=b,
            threshold=which,
            threshold_value=th.value(which),
            slope=slope,
            variant=_VARIANTS[(which, sign)],
            sigma=sigma,
            m=m,
        )
        # re-derive b with the window interpolant so that a(0) == b bitwise
        b_exact = float(extract_level_curve(phi[None, :], spec, grid)[0])
        branches.append(replace(spec, b=b_exact))
    return branches


def assemble_forcing(
    branches: Sequence[BranchSpec],
    curves: Sequence[np.ndarray],
    H0: RelayField,
    grid: Grid1D,
) -> Forcing:
    """Forcing for prescribed curves: variant pattern in windows, initial phase elsewhere.

    A node exactly on the curve takes the value of the closed side.
    """
    if len(curves) != len(branches):
        raise BranchCountMismatch(f"{len(curves)} curves for {len(branches)} branches")
    x = grid.x
    f = np.repeat(H0.state[None, :].astype(np.int8), grid.nt, axis=0)
    for br, xi in zip(branches, curves):
        xi = np.asarray(xi, dtype=float)[: grid.nt]
        if np.any(np.abs(xi - br.b) > br.sigma * (1 + 1e-12)):
            raise CurveOutsideWindow(f"curve for branch at b={br.b:.6g} leaves its window")
        win = br.window_mask(x)
        xw = x[win][None, :]
        left = xw <= xi[:, None] if _CLOSED_LEFT[br.variant] else xw < xi[:, None]
        lv = br.left_value
        f[:, win] = np.where(left, lv, -lv)
    return Forcing(f)


@dataclass
class FixedPointResult:
    curves: List[np.ndarray]
    u: np.ndarray
    residual: float
    iterations: int
    converged: bool
    branches: List[BranchSpec]
    forcing: Optional[Forcing] = None
    clamped: bool = False
    residual_history: List[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "clamped": self.clamped,
            "residual_history": list(self.residual_history),
        }


def apply_map(phi, branches, curves, H0, grid):
    """One sweep: returns ``(new_curves, v, forcing)`` for the given curves."""
    forcing = assemble_forcing(branches, curves, H0, grid)
    v = solve_linear(phi, forcing, grid)
    new = [monotone_envelope(extract_level_curve(v, br, grid), br.envelope_direction) for br in branches]
    return new, v, forcing


def fixed_point_iterate(
    phi: np.ndarray,
    branches: Sequence[BranchSpec],
    H0: RelayField,
    grid: Grid1D,
    tol_fp: Optional[float] = None,
    max_iter: int = 20,
) -> FixedPointResult:
    """Picard iteration of the envelope map starting from ``xi == b``.

    The returned ``u`` is the heat solution from which the returned curves
    were extracted, so ``curves == envelope(level_curve(u))`` holds exactly.
    """
    branches = list(branches)
    if not branches:
        raise BranchCountMismatch("no phase-change points to iterate on")
    if tol_fp is None:
        tol_fp = grid.h / 4
    curves = [np.full(grid.nt + 1, br.b) for br in branches]
    clamped = False
    history = []
    residual = np.inf
    v = forcing = None
    k = 0
    for k in range(1, max_iter + 1):
        new, v, forcing = apply_map(phi, branches, curves, H0, grid)
        touched = False
        for i, br in enumerate(branches):
            excess = np.abs(new[i] - br.b) >= br.sigma * (1 - 1e-12)
            if np.any(excess):
                touched = True
                new[i] = np.clip(new[i], br.b - br.sigma, br.b + br.sigma)
        if touched:
            if clamped:
                raise CurveOutsideWindow("interface reached its window edge twice; the horizon T is too large")
            clamped = True
        residual = max(float(np.max(np.abs(a - c))) for a, c in zip(new, curves))
        history.append(residual)
        curves = new
        if residual <= tol_fp:
            break
    converged = residual <= tol_fp
    if not converged:
        warnings.warn(
            f"Picard iteration stopped after {k} sweeps with residual {residual:.3g} > {tol_fp:.3g}",
            NotConverged,
            stacklevel=2,
        )
    return FixedPointResult(
        curves=curves,
        u=v,
        residual=residual,
        iterations=k,
        converged=converged,
        branches=branches,
        forcing=forcing,
        clamped=clamped,
        residual_history=history,
    )


def relay_interfaces(sol: CoupledSolution, branches: Sequence[BranchSpec]) -> List[np.ndarray]:
    """Phase interface of a relay run inside each branch window, per level.

    The interface sits midway between the last node carrying the branch's
    left-side state and the first node of the other state. A window holding
    more than one interface raises :class:`BranchCountMismatch`.
    """
    x = sol.grid.x
    out = []
    for br in branches:
        win = br.window_mask(x)
        idx = np.flatnonzero(win)
        Hw = sol.H[:, win]
        flips = np.count_nonzero(Hw[:, 1:] != Hw[:, :-1], axis=1)
        if np.any(flips > 1):
            n = int(np.flatnonzero(flips > 1)[0])
            raise BranchCountMismatch(f"relay has {flips[n]} interfaces in window of b={br.b:.6g} at level {n}")
        k = np.count_nonzero(Hw == br.left_value, axis=1)
        out.append(x[idx[0]] + (k - 0.5) * sol.grid.h)
    return out


def fp_vs_relay_distance(fp: FixedPointResult, sol: CoupledSolution, tol_slope: float = 1e-3) -> float:
    """Largest gap between fixed-point curves and relay interfaces over all levels."""
    if fp.u.shape != sol.u.shape:
        raise BranchCountMismatch("fixed-point and relay runs use different grids")
    if any(abs(br.slope) < tol_slope for br in fp.branches):
        raise NonTransversal("distance is meaningless for non-transversal branches")
    rhos = relay_interfaces(sol, fp.branches)
    if len(rhos) != len(fp.curves):
        raise BranchCountMismatch(f"{len(rhos)} relay interfaces vs {len(fp.curves)} curves")
    return max(float(np.max(np.abs(s - r))) for s, r in zip(fp.curves, rhos))
