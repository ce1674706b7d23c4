"""Backward-Euler solver for the 1D heat equation with homogeneous Neumann ends.

Solves ``v_t - v_xx = f`` on ``(0, 1) x [0, T]`` with ``v_x = 0`` at both
ends. The Laplacian uses ghost-node reflection at the boundary, so every row
of the discrete operator sums to zero: constants are stationary and the
trapezoid-weighted mass changes by exactly ``dt * mass(f)`` per step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import HorizonExceedsOne, NonPositiveStep, SolverFailure


@dataclass(frozen=True)
class Grid1D:
    """Uniform space-time grid on ``[0, 1] x [0, T]``."""

    nx: int
    dt: float
    nt: int

    @property
    def h(self) -> float:
        return 1.0 / (self.nx - 1)

    @property
    def T(self) -> float:
        return self.nt * self.dt

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.nt + 1) * self.dt


def build_grid(nx: int, dt: float, T: float) -> Grid1D:
    """Validate ``(nx, dt, T)`` and return the corresponding grid.

    ``T / dt`` must be an integer up to rounding; the level count is that
    integer, so ``grid.T`` may differ from ``T`` in the last few ulps.
    """
    if nx < 3:
        raise NonPositiveStep(f"nx must be >= 3 (got {nx}); spacing 1/(nx-1) is degenerate")
    if not dt > 0:
        raise NonPositiveStep(f"dt must be positive (got {dt})")
    if T > 1.0:
        raise HorizonExceedsOne(f"horizon T={T} exceeds 1")
    if dt > T:
        raise NonPositiveStep(f"dt={dt} exceeds horizon T={T}")
    ratio = T / dt
    nt = int(round(ratio))
    if abs(ratio - nt) > 1e-9 * max(1.0, ratio):
        raise NonPositiveStep(f"T/dt = {ratio} is not an integer")
    return Grid1D(nx=int(nx), dt=float(dt), nt=nt)


def neumann_laplacian(grid: Grid1D) -> sp.csr_matrix:
    """Second-difference operator with ghost-node reflection at both ends."""
    n = grid.nx
    inv_h2 = 1.0 / grid.h**2
    main = np.full(n, -2.0 * inv_h2)
    upper = np.full(n - 1, inv_h2)
    lower = np.full(n - 1, inv_h2)
    upper[0] = 2.0 * inv_h2
    lower[-1] = 2.0 * inv_h2
    return sp.diags([lower, main, upper], [-1, 0, 1], format="csr")


def apply_laplacian(u: np.ndarray, grid: Grid1D) -> np.ndarray:
    """``L_h u`` without forming the matrix."""
    u = np.asarray(u, dtype=float)
    ghost = np.concatenate(([u[1]], u, [u[-2]]))
    return (ghost[:-2] - 2.0 * u + ghost[2:]) / grid.h**2


def mass(u: np.ndarray, grid: Grid1D) -> float:
    """Trapezoid integral of a nodal field; the quantity ``L_h`` conserves."""
    u = np.asarray(u, dtype=float)
    return grid.h * (u.sum() - 0.5 * (u[0] + u[-1]))


class _Stepper:
    # LU of (I - dt L_h) is reused across all levels of one run
    def __init__(self, grid: Grid1D):
        a = sp.identity(grid.nx, format="csc") - grid.dt * neumann_laplacian(grid).tocsc()
        try:
            self._lu = spla.splu(a.tocsc())
        except RuntimeError as exc:  # pragma: no cover - dt > 0 makes A an M-matrix
            raise SolverFailure(str(exc)) from exc
        self.dt = grid.dt

    def __call__(self, u_prev: np.ndarray, f: np.ndarray) -> np.ndarray:
        return self._lu.solve(u_prev + self.dt * f)


def implicit_step(u_prev: np.ndarray, f: np.ndarray, grid: Grid1D) -> np.ndarray:
    """One backward-Euler step: solve ``(I - dt L_h) u_new = u_prev + dt f``."""
    u_prev = np.asarray(u_prev, dtype=float)
    f = np.broadcast_to(np.asarray(f, dtype=float), u_prev.shape)
    if u_prev.shape != (grid.nx,):
        raise ValueError(f"field length {u_prev.shape} does not match nx={grid.nx}")
    u_new = _Stepper(grid)(u_prev, f)
    if not np.all(np.isfinite(u_new)):
        raise SolverFailure("non-finite values after implicit step")
    return u_new


@dataclass(frozen=True)
class Forcing:
    """Piecewise-constant right-hand side with values in {-1, +1}.

    ``values[n, j]`` is applied on the step from level ``n`` to ``n + 1``.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("forcing values must be a (nt, nx) array")
        if not np.all(np.abs(v) == 1):
            raise ValueError("forcing must take values in {-1, +1}")

    def __call__(self, j: int, n: int) -> int:
        return int(self.values[n, j])

    def level(self, n: int) -> np.ndarray:
        return np.asarray(self.values[n], dtype=float)


ForcingLike = Union[Forcing, np.ndarray, Callable[[int], np.ndarray]]


def _forcing_rows(forcing: ForcingLike, grid: Grid1D) -> Callable[[int], np.ndarray]:
    if isinstance(forcing, Forcing):
        if forcing.values.shape[0] < grid.nt or forcing.values.shape[1] != grid.nx:
            raise ValueError(f"forcing shape {forcing.values.shape} does not cover grid")
        return forcing.level
    if callable(forcing):
        return lambda n: np.asarray(forcing(n), dtype=float)
    arr = np.asarray(forcing, dtype=float)
    if arr.ndim == 0 or arr.ndim == 1:
        row = np.broadcast_to(arr, (grid.nx,)).astype(float)
        return lambda n: row
    if arr.shape[0] < grid.nt or arr.shape[1] != grid.nx:
        raise ValueError(f"forcing shape {arr.shape} does not cover grid")
    return lambda n: arr[n]


def solve_linear(phi: np.ndarray, forcing: ForcingLike, grid: Grid1D) -> np.ndarray:
    """March the linear problem from ``phi`` over all levels.

    Returns an ``(nt + 1, nx)`` array whose row ``n`` is the field at ``t_n``.
    The forcing at level ``n`` drives the step ``n -> n + 1``; it may be a
    :class:`Forcing`, a constant, a single row, a ``(nt, nx)`` array or a
    callable ``n -> row``, and must satisfy ``sup|f| <= 1``.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (grid.nx,):
        raise ValueError(f"initial data has length {phi.shape}, expected {grid.nx}")
    if not np.all(np.isfinite(phi)):
        raise ValueError("initial data must be finite")
    row = _forcing_rows(forcing, grid)
    step = _Stepper(grid)
    v = np.empty((grid.nt + 1, grid.nx))
    v[0] = phi
    for n in range(grid.nt):
        f = row(n)
        if np.max(np.abs(f)) > 1.0:
            raise ValueError(f"forcing exceeds 1 in magnitude at level {n}")
        v[n + 1] = step(v[n], f)
    if not np.all(np.isfinite(v)):
        raise SolverFailure("non-finite values in solution")
    return v


@dataclass(frozen=True)
class BoundReport:
    """Outcome of the ``|v - phi| <= N0 t`` check."""

    n0: float
    n0_bare: float
    worst_ratio: float
    passed: bool
    tol_bound: float

    def as_dict(self) -> dict:
        return {
            "n0": self.n0,
            "n0_sup_laplacian": self.n0_bare,
            "worst_ratio": self.worst_ratio,
            "threshold": 1.0 + self.tol_bound,
            "passed": self.passed,
        }


def check_lemma3_bound(
    v: np.ndarray, phi: np.ndarray, grid: Grid1D, tol_bound: float = 1e-8
) -> BoundReport:
    """Check ``|v(x, t) - phi(x)| <= N0 t`` with ``N0 = 1 + max|L_h phi|``.

    ``n0_bare`` records the bare ``max|L_h phi|`` constant for comparison;
    it is not used for the pass/fail verdict.
    """
    lap = float(np.max(np.abs(apply_laplacian(phi, grid))))
    n0 = 1.0 + lap
    t = grid.t[1:, None]
    ratio = np.abs(np.asarray(v)[1:] - phi[None, :]) / (n0 * t)
    worst = float(ratio.max()) if ratio.size else 0.0
    return BoundReport(
        n0=n0, n0_bare=lap, worst_ratio=worst, passed=worst <= 1.0 + tol_bound, tol_bound=tol_bound
    )
