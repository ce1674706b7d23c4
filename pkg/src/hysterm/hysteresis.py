"""Two-threshold relay with per-node memory and the coupled time march.

State ``+1`` is phase I (heating), ``-1`` is phase II (cooling). A node
switches to ``+1`` once ``u <= alpha`` and to ``-1`` once ``u >= beta``;
strictly inside ``(alpha, beta)`` it keeps its previous state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MissingBandChoice, PhaseContradiction
from .heat import Grid1D, _Stepper

PHASE_I = 1
PHASE_II = -1


@dataclass(frozen=True)
class Thresholds:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha < 0.0 < self.beta):
            raise ValueError(f"thresholds need alpha < 0 < beta (got {self.alpha}, {self.beta})")

    def value(self, which: str) -> float:
        return self.alpha if which == "alpha" else self.beta


@dataclass
class RelayField:
    """Current relay state of every node together with its switching history."""

    state: np.ndarray
    switch_count: np.ndarray = None
    last_switch_time: np.ndarray = None

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=np.int8)
        if not np.all(np.abs(self.state) == 1):
            raise ValueError("relay states must be +1 or -1")
        n = self.state.shape[0]
        if self.switch_count is None:
            self.switch_count = np.zeros(n, dtype=np.int64)
        if self.last_switch_time is None:
            self.last_switch_time = np.full(n, np.nan)

    def copy(self) -> "RelayField":
        return RelayField(self.state.copy(), self.switch_count.copy(), self.last_switch_time.copy())


def relay_update(h_prev, u_val, th: Thresholds):
    """Relay output after seeing ``u_val``; works on scalars and arrays alike.

    Ties switch: ``u == alpha`` gives +1 and ``u == beta`` gives -1.
    """
    out = np.where(u_val <= th.alpha, PHASE_I, np.where(u_val >= th.beta, PHASE_II, h_prev))
    if np.ndim(out) == 0:
        return int(out)
    return out.astype(np.int8)


def initial_phase_assignment(phi: np.ndarray, th: Thresholds, band_choice=None) -> RelayField:
    """Initial relay states: forced outside the band, ``band_choice`` inside.

    ``band_choice`` is a per-node array with entries in {+1, -1, 0}
    (0 = unspecified) or ``None``. A nonzero choice on a forced node must
    agree with the forced value.
    """
    phi = np.asarray(phi, dtype=float)
    if band_choice is None:
        band_choice = np.zeros(phi.shape, dtype=np.int8)
    band_choice = np.asarray(band_choice, dtype=np.int8)
    forced_i = phi <= th.alpha
    forced_ii = phi >= th.beta
    in_band = ~(forced_i | forced_ii)

    bad = (forced_i & (band_choice == PHASE_II)) | (forced_ii & (band_choice == PHASE_I))
    if np.any(bad):
        j = int(np.flatnonzero(bad)[0])
        raise PhaseContradiction(f"band_choice at node {j} contradicts forced phase (phi={phi[j]})")
    missing = in_band & (band_choice == 0)
    if np.any(missing):
        j = int(np.flatnonzero(missing)[0])
        raise MissingBandChoice(f"node {j} has alpha < phi < beta but no band choice")

    state = np.where(forced_i, PHASE_I, np.where(forced_ii, PHASE_II, band_choice))
    return RelayField(state.astype(np.int8))


@dataclass
class CoupledSolution:
    u: np.ndarray
    H: np.ndarray
    thresholds: Thresholds
    grid: Grid1D
    relay: RelayField = field(repr=False, default=None)


def simulate_relay(phi: np.ndarray, H0: RelayField, th: Thresholds, grid: Grid1D) -> CoupledSolution:
    """March ``u_t - u_xx = H(u)`` directly.

    Per step the relay state at level ``n`` is the forcing; the new field at
    level ``n + 1`` then updates the relay, so ``H[n + 1]`` reflects
    ``u[n + 1]``.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (grid.nx,) or H0.state.shape != (grid.nx,):
        raise ValueError("initial data and relay state must have length nx")
    step = _Stepper(grid)
    u = np.empty((grid.nt + 1, grid.nx))
    H = np.empty((grid.nt + 1, grid.nx), dtype=np.int8)
    u[0] = phi
    H[0] = H0.state
    relay = H0.copy()
    times = grid.t
    for n in range(grid.nt):
        u[n + 1] = step(u[n], H[n].astype(float))
        H[n + 1] = relay_update(H[n], u[n + 1], th)
        flipped = H[n + 1] != H[n]
        relay.switch_count[flipped] += 1
        relay.last_switch_time[flipped] = times[n + 1]
    relay.state = H[-1].copy()
    return CoupledSolution(u=u, H=H, thresholds=th, grid=grid, relay=relay)


@dataclass(frozen=True)
class SwitchTimes:
    """First switching time per node; ``T`` where the node never switches.

    ``starts_in_phase_ii`` marks nodes whose first switch is II -> I; the
    first-switch formula is applied to them as well.
    """

    r: np.ndarray
    T: float
    switched: np.ndarray
    starts_in_phase_ii: np.ndarray


def extract_switching_times(sol: CoupledSolution) -> SwitchTimes:
    H = sol.H
    changed = H != H[0][None, :]
    switched = changed.any(axis=0)
    first = np.argmax(changed, axis=0)
    T = sol.grid.T
    r = np.where(switched, first * sol.grid.dt, T)
    return SwitchTimes(r=r, T=T, switched=switched, starts_in_phase_ii=H[0] == PHASE_II)


def switch_counts(H: np.ndarray) -> np.ndarray:
    """Number of state changes per node over a stored relay history."""
    return np.count_nonzero(np.diff(H.astype(np.int8), axis=0), axis=0)
