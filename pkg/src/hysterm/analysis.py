"""Diagnostics on computed solutions: transversality, window conditions,
empirical regularity constants, one-sided time-quotient bounds and the
switching-pattern statistics of non-transversal data.

Empirical constants stand in for embedding constants that cannot be
computed: ``c1_hat`` is the parabolic Lipschitz constant of the discrete
field and ``n2_hat`` the sup of the time quotients away from the windows.
Reports always carry both sides of each inequality.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateCurve, HorizonTooShort, TransversalPreset
from .free_boundary import BranchSpec, FixedPointResult, _bracket, _crossing, _sample, _window_samples
from .heat import Grid1D, apply_laplacian, build_grid
from .hysteresis import RelayField, Thresholds, extract_switching_times, simulate_relay, switch_counts


@dataclass
class TransversalityReport:
    points: List[dict]
    m: float
    transversal: bool
    nontransversal_points: List[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def _touches(phi, state, th, grid, tol_slope):
    # one-sided touches: a cap at beta inside phase I, a cup at alpha inside phase II.
    # The apex may fall between nodes, so compare the vertex of the three-point
    # parabola (not the node value) with the threshold.
    x, h = grid.x, grid.h
    tol_touch = tol_slope * h
    out = []
    for j in range(1, grid.nx - 1):
        lo, mid, hi = phi[j - 1], phi[j], phi[j + 1]
        # strict on the left so a two-node plateau reports once
        is_max = mid > lo and mid >= hi
        is_min = mid < lo and mid <= hi
        if not (is_max or is_min):
            continue
        d1 = (hi - lo) / (2 * h)
        d2 = (hi - 2 * mid + lo) / h**2
        apex = mid - d1**2 / (2 * d2) if d2 != 0 else mid
        if is_max and abs(apex - th.beta) <= tol_touch and state[j - 1] == 1 and state[j + 1] == 1:
            out.append(float(x[j]))
        elif is_min and abs(apex - th.alpha) <= tol_touch and state[j - 1] == -1 and state[j + 1] == -1:
            out.append(float(x[j]))
    return out


def detect_transversality(
    phi: np.ndarray, H0: RelayField, th: Thresholds, grid: Grid1D, tol_slope: float = 1e-3
) -> TransversalityReport:
    """Classify every point where ``phi`` meets a threshold.

    Phase-change points need ``|phi'| >= tol_slope``. One-sided touches
    (a cap reaching ``beta`` from below inside phase I, or a cup reaching
    ``alpha`` from above inside phase II) are listed as topologically
    non-transversal.
    """
    phi = np.asarray(phi, dtype=float)
    x = grid.x
    state = H0.state
    grad = np.gradient(phi, grid.h)
    points = []
    for j in np.flatnonzero(state[1:] != state[:-1]):
        hit = _bracket(phi, j, th)
        if hit is None:
            points.append({"b": float(0.5 * (x[j] + x[j + 1])), "threshold": None, "slope": 0.0})
            continue
        which, k = hit
        level = th.value(which)
        b = float(_crossing(x[k], x[k + 1], phi[k] - level, phi[k + 1] - level))
        points.append({"b": b, "threshold": which, "slope": float(np.interp(b, x, grad))})
    touches = _touches(phi, state, th, grid, tol_slope)
    slopes = [abs(p["slope"]) for p in points]
    m = min([1.0] + slopes)
    transversal = all(p["threshold"] is not None and abs(p["slope"]) >= tol_slope for p in points) and not touches
    return TransversalityReport(points=points, m=m, transversal=transversal, nontransversal_points=touches)


def _phase_segments(branches: Sequence[BranchSpec]):
    # phase on each stretch between windows, read off the variants
    return [branches[0].left_value] + [-br.left_value for br in branches]


def window_condition_levels(
    v: np.ndarray, branches: Sequence[BranchSpec], m: float, grid: Grid1D, th: Thresholds
) -> np.ndarray:
    """Per level: do edge separation, phase persistence and slope bounds hold?"""
    v = np.atleast_2d(v)
    x = grid.x
    ok = np.ones(v.shape[0], dtype=bool)
    outside = np.ones(grid.nx, dtype=bool)
    phase = np.empty(grid.nx, dtype=np.int8)
    edges = [-np.inf] + [br.b for br in branches] + [np.inf]
    for i, ph in enumerate(_phase_segments(branches)):
        phase[(x > edges[i]) & (x <= edges[i + 1])] = ph
    for br in branches:
        sign = br.slope_sign
        xs, inner, ends = _window_samples(br, grid)
        vw = _sample(v, inner, ends)
        g = vw - br.threshold_value
        sep = m * br.sigma / 4
        ok &= sign * g[:, -1] > sep
        ok &= sign * g[:, 0] < -sep
        slopes = np.diff(vw, axis=1) / np.diff(xs)[None, :]
        ok &= np.all(sign * slopes > m / 4, axis=1)
        outside &= np.abs(x - br.b) >= br.sigma
    ii = outside & (phase == -1)
    i_ = outside & (phase == 1)
    ok &= np.all(v[:, ii] > th.alpha, axis=1)
    ok &= np.all(v[:, i_] < th.beta, axis=1)
    return ok


def verify_window_conditions(
    v: np.ndarray, branches: Sequence[BranchSpec], m: float, grid: Grid1D, th: Thresholds
) -> float:
    """Largest level time up to which every window condition holds at every level.

    Returns ``0.0`` when level 0 itself fails; the caller halves ``T`` and
    re-runs whenever the result is below ``grid.T``.
    """
    ok = window_condition_levels(v, branches, m, grid, th)
    if not ok[0]:
        return 0.0
    bad = np.flatnonzero(~ok)
    last = (bad[0] - 1) if bad.size else ok.size - 1
    return float(last * grid.dt)


@dataclass(frozen=True)
class HolderFit:
    exponent: float
    constant: float
    fit_residual: float
    gaps_used: int


def holder_constant(s: np.ndarray, dt: float) -> float:
    """``max_{n<k} |s_k - s_n| / sqrt(t_k - t_n)`` over all level pairs."""
    s = np.asarray(s, dtype=float)
    best = 0.0
    for g in range(1, s.size):
        d = np.max(np.abs(s[g:] - s[:-g]))
        best = max(best, d / np.sqrt(g * dt))
    return float(best)


def estimate_holder(s: np.ndarray, grid: Grid1D) -> HolderFit:
    """Fit the Hölder exponent of a curve by log-log regression over dyadic gaps.

    For each gap ``2**k`` levels the increment is the worst case over all
    start times; gaps whose worst increment is below ``h/2`` are sub-grid
    noise and are dropped.
    """
    s = np.asarray(s, dtype=float)
    if s.size < 17:
        raise ValueError(f"need at least 16 steps, got {s.size - 1}")
    const = holder_constant(s, grid.dt)
    gaps, incs = [], []
    g = 1
    while g < s.size:
        d = np.max(np.abs(s[g:] - s[:-g]))
        if d >= grid.h / 2:
            gaps.append(g * grid.dt)
            incs.append(d)
        g *= 2
    if len(gaps) < 2:
        raise DegenerateCurve("increments are sub-grid; exponent undefined", constant=const)
    lx, ly = np.log(gaps), np.log(incs)
    coef, res, *_ = np.polyfit(lx, ly, 1, full=True)
    rms = float(np.sqrt(res[0] / len(gaps))) if res.size else 0.0
    return HolderFit(exponent=float(coef[0]), constant=const, fit_residual=rms, gaps_used=len(gaps))


def difference_quotients(u: np.ndarray, h_steps: int, grid: Grid1D, eps: Optional[float] = None) -> np.ndarray:
    """Forward time quotients ``(u(t + k dt) - u(t)) / (k dt)`` on ``[0, T - eps]``.

    ``eps`` defaults to ``8 dt`` and must satisfy ``k dt <= eps < T``.
    """
    if eps is None:
        eps = 8 * grid.dt
    n_eps = int(round(eps / grid.dt))
    if h_steps < 1 or h_steps > n_eps:
        raise HorizonTooShort(f"h_steps={h_steps} needs 1 <= h_steps <= eps/dt = {n_eps}")
    if n_eps >= grid.nt:
        raise HorizonTooShort(f"trim eps={eps} leaves no levels below T={grid.T}")
    last = grid.nt - n_eps
    u = np.asarray(u)
    return (u[h_steps : last + h_steps + 1] - u[: last + 1]) / (h_steps * grid.dt)


def _window_union(branches, x):
    mask = np.zeros(x.size, dtype=bool)
    for br in branches:
        mask |= br.window_mask(x)
    return mask


def n2_estimate(uh: np.ndarray, branches: Sequence[BranchSpec], grid: Grid1D, n0: float, tol_bound: float = 1e-8) -> float:
    """``max(N0, max over the intermediate rectangles of |u_h|)``, rounded up by ``tol_bound``."""
    outside = ~_window_union(branches, grid.x)
    q = float(np.max(np.abs(uh[:, outside]))) if outside.any() else 0.0
    return max(n0, q) * (1.0 + tol_bound)


def check_one_sided_bounds(uh: np.ndarray, branches: Sequence[BranchSpec], N2: float, grid: Grid1D) -> List[dict]:
    """``min u_h >= -N2`` on alpha windows, ``max u_h <= N2`` on beta windows.

    A final entry covers the two-sided bound on the intermediate rectangles.
    """
    x = grid.x
    out = []
    for br in branches:
        win = br.window_mask(x)
        block = uh[:, win]
        if br.threshold == "alpha":
            value = float(block.min())
            passed = value >= -N2
            kind = "lower"
        else:
            value = float(block.max())
            passed = value <= N2
            kind = "upper"
        out.append({"b": br.b, "variant": br.variant, "kind": kind, "value": value, "bound": N2, "passed": bool(passed)})
    outside = ~_window_union(branches, x)
    value = float(np.max(np.abs(uh[:, outside]))) if outside.any() else 0.0
    out.append({"b": None, "variant": None, "kind": "intermediate", "value": value, "bound": N2, "passed": bool(value <= N2)})
    return out


def parabolic_lipschitz(v: np.ndarray, grid: Grid1D) -> float:
    """``max |v(z1) - v(z2)| / (|x1 - x2| + |t1 - t2|^(1/2))`` over all node/level pairs.

    Mixed pairs never exceed the larger of the pure-space and pure-time
    ratios, so those two maxima give the exact value.
    """
    v = np.asarray(v)
    cx = float(np.max(np.abs(np.diff(v, axis=1)))) / grid.h
    ct = 0.0
    for g in range(1, v.shape[0]):
        d = float(np.max(np.abs(v[g:] - v[:-g])))
        ct = max(ct, d / np.sqrt(g * grid.dt))
    return max(cx, ct)


def lipschitz_constant(s: np.ndarray, dt: float) -> float:
    """Largest level-to-level slope of a curve."""
    s = np.asarray(s, dtype=float)
    if s.size < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(s)))) / dt


@dataclass
class RegularityReport:
    b: float
    variant: int
    m: float
    holder_exponent: float
    holder_fit_residual: float
    holder_constant: float
    holder_bound: float
    lipschitz_constant: float
    lipschitz_bound: float
    c1_hat: float
    n2_hat: float
    slack: float
    holder_passed: bool
    lipschitz_passed: bool

    def as_dict(self) -> dict:
        return asdict(self)


def regularity_report(
    fp: FixedPointResult,
    phi: np.ndarray,
    grid: Grid1D,
    h_steps: int = 1,
    eps: Optional[float] = None,
    slack: float = 0.05,
    tol_bound: float = 1e-8,
) -> List[RegularityReport]:
    """Compare each interface's Hölder-1/2 and Lipschitz constants with ``4 c1/m`` and ``4 N2/m``.

    The Lipschitz side is evaluated on ``[0, T - eps]``, where the time
    quotients behind ``N2`` are defined.
    """
    u = fp.u
    c1 = parabolic_lipschitz(u, grid)
    n0 = 1.0 + float(np.max(np.abs(apply_laplacian(phi, grid))))
    uh = difference_quotients(u, h_steps, grid, eps)
    n2 = n2_estimate(uh, fp.branches, grid, n0, tol_bound)
    last = uh.shape[0]
    out = []
    for br, s in zip(fp.branches, fp.curves):
        try:
            fit = estimate_holder(s, grid)
            exponent, resid, hc = fit.exponent, fit.fit_residual, fit.constant
        except DegenerateCurve as exc:
            exponent, resid, hc = float("nan"), float("nan"), exc.constant
        hb = 4 * c1 / br.m
        lc = lipschitz_constant(s[: last], grid.dt)
        lb = 4 * n2 / br.m
        out.append(
            RegularityReport(
                b=br.b,
                variant=br.variant,
                m=br.m,
                holder_exponent=exponent,
                holder_fit_residual=resid,
                holder_constant=hc,
                holder_bound=hb,
                lipschitz_constant=lc,
                lipschitz_bound=lb,
                c1_hat=c1,
                n2_hat=n2,
                slack=slack,
                holder_passed=bool(hc <= (1 + slack) * hb),
                lipschitz_passed=bool(lc <= (1 + slack) * lb),
            )
        )
    return out


@dataclass
class PatternReport:
    """Switching statistics across refinements (qualitative diagnostic)."""

    refinements: List[Tuple[int, float]]
    x0: float
    window: float
    max_switch_counts: List[int]
    r_profiles: List[np.ndarray] = field(repr=False)
    extrema_counts: List[int]
    sup_distances: List[float]
    delta_pattern: float
    verdict: str
    qualitative: bool = True

    def as_dict(self) -> dict:
        d = asdict(self)
        d["r_profiles"] = [r.tolist() for r in self.r_profiles]
        d["refinements"] = [list(r) for r in self.refinements]
        return d


def count_local_extrema(r: np.ndarray) -> int:
    """Strict local extrema of a sequence after merging runs of equal values."""
    r = np.asarray(r, dtype=float)
    if r.size < 3:
        return 0
    keep = np.concatenate(([True], np.diff(r) != 0))
    q = r[keep]
    d = np.sign(np.diff(q))
    return int(np.count_nonzero(d[1:] != d[:-1]))


def nontransversal_pattern_stats(
    preset: str,
    refinements: Sequence[Tuple[int, float]],
    th: Thresholds,
    T: float,
    window: float = 0.1,
    tol_slope: float = 1e-3,
) -> PatternReport:
    """Relay runs of a non-transversal preset at several resolutions.

    Reports first-switch profiles inside ``|x - x0| <= window``, their
    local-extrema counts, and the sup-distance between successive
    refinements on common nodes. The verdict is ``pattern-forming`` when
    every distance exceeds ``10 dt`` of the finer run and every profile has
    at least two extrema.
    """
    from .presets import build_preset

    refinements = [(int(nx), float(dt)) for nx, dt in refinements]
    if len(refinements) < 2:
        raise ValueError("need at least two refinements")
    profiles, extrema, counts, xs, grids = [], [], [], [], []
    x0 = None
    for nx, dt in refinements:
        grid = build_grid(nx, dt, T)
        p = build_preset(preset, th, grid)
        rep = detect_transversality(p.phi, p.H0, th, grid, tol_slope)
        if rep.transversal:
            raise TransversalPreset(f"preset {preset!r} is transversal; pattern statistics need a one-sided touch")
        x0 = rep.nontransversal_points[0] if rep.nontransversal_points else 0.5
        sol = simulate_relay(p.phi, p.H0, th, grid)
        r = extract_switching_times(sol).r
        win = np.abs(grid.x - x0) <= window + 1e-12
        profiles.append(r)
        extrema.append(count_local_extrema(r[win]))
        counts.append(int(switch_counts(sol.H)[win].max()))
        xs.append(win)
        grids.append(grid)
    dists = []
    for (gc, rc, wc), (gf, rf) in zip(zip(grids, profiles, xs), zip(grids[1:], profiles[1:])):
        q = (gf.nx - 1) // (gc.nx - 1)
        if q * (gc.nx - 1) != gf.nx - 1:
            raise ValueError(f"grids nx={gc.nx} and nx={gf.nx} are not nested")
        fine_on_coarse = rf[::q]
        dists.append(float(np.max(np.abs(fine_on_coarse[wc] - rc[wc]))))
    delta = 10 * min(dt for _, dt in refinements)
    pattern = all(d > delta for d in dists) and all(e >= 2 for e in extrema)
    return PatternReport(
        refinements=refinements,
        x0=float(x0),
        window=window,
        max_switch_counts=counts,
        r_profiles=profiles,
        extrema_counts=extrema,
        sup_distances=dists,
        delta_pattern=delta,
        verdict="pattern-forming" if pattern else "transversal-like",
    )
