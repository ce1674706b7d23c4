"""Run one configured experiment and write its artifacts.

A run directory holds three files:

* ``solution.csv``: columns ``t,x,u,H``, one row per level/node pair, 17
  significant digits so that reloading reproduces the arrays bit for bit;
* ``boundary.csv``: ``t`` then ``s_i`` (fixed point) and/or ``rho_i``
  (relay interface) per branch;
* ``report.json``: every check with both sides of its inequality.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .analysis import (
    check_one_sided_bounds,
    detect_transversality,
    difference_quotients,
    n2_estimate,
    nontransversal_pattern_stats,
    regularity_report,
    verify_window_conditions,
)
from .config import ExperimentConfig
from .errors import CurveOutsideWindow, MultipleSignChanges, NonTransversal, NoSignChange, NotConverged, ValidationError
from .free_boundary import classify_branches, fixed_point_iterate, relay_interfaces
from .heat import Grid1D, build_grid, check_lemma3_bound
from .hysteresis import Thresholds, initial_phase_assignment, simulate_relay, switch_counts
from .presets import build_preset

MAX_HALVINGS = 8


@dataclass
class RunArtifacts:
    out_dir: Path
    report: dict
    failures: List[str] = field(default_factory=list)
    solution: Optional[np.ndarray] = field(default=None, repr=False)
    H: Optional[np.ndarray] = field(default=None, repr=False)
    boundary: Optional[np.ndarray] = field(default=None, repr=False)
    boundary_columns: List[str] = field(default_factory=list)

    @property
    def paths(self) -> dict:
        return {name: self.out_dir / name for name in ("solution.csv", "boundary.csv", "report.json")}

    def exit_code(self, allow_fail: bool = False) -> int:
        return 0 if allow_fail or not self.failures else 1


def load_initial_data(cfg: ExperimentConfig, th: Thresholds, grid: Grid1D):
    """``(phi, H0, description)`` from a preset or from a two-column ``phi,h0`` file."""
    if cfg.preset is not None:
        p = build_preset(cfg.preset, th, grid)
        return p.phi, p.H0, p.description
    data = np.genfromtxt(cfg.phi_file, delimiter=",", names=True)
    names = data.dtype.names or ()
    if "phi" not in names or "h0" not in names:
        raise ValidationError("phi_file", "needs a header with columns phi,h0")
    if data.shape != (grid.nx,):
        raise ValidationError("phi_file", f"has {data.size} rows, expected nx={grid.nx}")
    phi = np.asarray(data["phi"], dtype=float)
    H0 = initial_phase_assignment(phi, th, np.asarray(data["h0"]).astype(np.int8))
    return phi, H0, f"samples from {cfg.phi_file}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _fixed_point_with_halving(phi, branches, H0, grid, th, cfg):
    """Picard iteration, halving ``T`` until the window conditions hold on the whole horizon."""
    m = min(br.m for br in branches)
    log = []
    for _ in range(MAX_HALVINGS + 1):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NotConverged)
            try:
                fp = fixed_point_iterate(phi, branches, H0, grid, cfg.effective_tol_fp, cfg.max_iter)
            except (CurveOutsideWindow, NoSignChange, MultipleSignChanges) as exc:
                log.append({"T": grid.T, "T_valid": None, "reason": str(exc)})
                fp = None
        if fp is not None:
            t_valid = verify_window_conditions(fp.u, branches, m, grid, th)
            log.append({"T": grid.T, "T_valid": t_valid, "reason": None})
            if t_valid >= grid.T - 0.5 * grid.dt:
                return fp, grid, log, [str(w.message) for w in caught]
        if grid.nt < 2:
            break
        grid = Grid1D(nx=grid.nx, dt=grid.dt, nt=grid.nt // 2)
    raise CurveOutsideWindow(f"window conditions fail even at T={grid.T}; see halving log {log}")


def run_experiment(cfg: ExperimentConfig, out_dir=None, write: bool = True) -> RunArtifacts:
    """Execute the configured mode(s) and (optionally) write the three artifact files."""
    cfg.validate()
    th = Thresholds(cfg.alpha, cfg.beta)
    grid = build_grid(cfg.nx, cfg.dt, cfg.T)
    phi, H0, description = load_initial_data(cfg, th, grid)
    tr = detect_transversality(phi, H0, th, grid, cfg.tol_slope)
    target = cfg.resolved_out_dir(out_dir)
    report = {"config": cfg.as_dict(), "description": description, "transversality": tr.as_dict()}
    failures: List[str] = []
    run_relay = cfg.mode in ("relay", "both")
    run_fp = cfg.mode in ("fixedpoint", "both")

    if not tr.transversal:
        if cfg.mode == "fixedpoint":
            raise NonTransversal(
                f"{cfg.label}: fixed-point construction needs transversal data "
                f"(touch points {tr.nontransversal_points}); use mode relay"
            )
        report["fixedpoint"] = {"refused": True, "reason": "initial data is not transversal"} if run_fp else None
        sol = simulate_relay(phi, H0, th, grid)
        report["grid"] = {"nx": grid.nx, "dt": grid.dt, "nt": grid.nt, "T": grid.T, "h": grid.h}
        growth = check_lemma3_bound(sol.u, phi, grid, cfg.tol_bound)
        report["growth_bound_relay"] = growth.as_dict()
        if not growth.passed:
            failures.append("growth_bound_relay")
        report["relay"] = {"max_switches_per_node": int(switch_counts(sol.H).max())}
        if cfg.preset is not None and len(cfg.refinements) >= 2:
            pr = nontransversal_pattern_stats(cfg.preset, cfg.refinements, th, cfg.T, tol_slope=cfg.tol_slope)
            report["pattern"] = pr.as_dict()
        art = RunArtifacts(target, report, failures, sol.u, sol.H, grid.t[:, None], ["t"])
        report["failures"] = failures
        if write:
            write_artifacts(art, grid)
        return art

    branches = classify_branches(phi, H0, th, grid, cfg.tol_slope)
    report["branches"] = [br.as_dict() for br in branches]
    columns, tables = ["t"], []
    u_out = H_out = None
    fp = None
    if run_fp:
        fp, grid, halving, warned = _fixed_point_with_halving(phi, branches, H0, grid, th, cfg)
        report["fixedpoint"] = dict(fp.as_dict(), tol_fp=cfg.effective_tol_fp, warnings=warned, halving_log=halving)
        if not fp.converged:
            failures.append("fixedpoint_not_converged")
        growth = check_lemma3_bound(fp.u, phi, grid, cfg.tol_bound)
        report["growth_bound_fixedpoint"] = growth.as_dict()
        if not growth.passed:
            failures.append("growth_bound_fixedpoint")
        regs = regularity_report(fp, phi, grid, tol_bound=cfg.tol_bound)
        report["regularity"] = [r.as_dict() for r in regs]
        for i, r in enumerate(regs, 1):
            if not r.holder_passed:
                failures.append(f"holder_{i}")
            if not r.lipschitz_passed:
                failures.append(f"lipschitz_{i}")
        report["one_sided_bounds"] = {}
        for k in cfg.h_steps:
            uh = difference_quotients(fp.u, k, grid, eps=max(8, k) * grid.dt)
            n2 = n2_estimate(uh, branches, grid, growth.n0, cfg.tol_bound)
            res = check_one_sided_bounds(uh, branches, n2, grid)
            report["one_sided_bounds"][str(k)] = {"n2_hat": n2, "checks": res}
            if not all(c["passed"] for c in res):
                failures.append(f"one_sided_h{k}")
        columns += [f"s_{i}" for i in range(1, len(branches) + 1)]
        tables += list(fp.curves)
        u_out = fp.u
        H_out = np.vstack((fp.forcing.values[: grid.nt], fp.forcing.values[grid.nt - 1 : grid.nt])).astype(np.int8)
    report["grid"] = {"nx": grid.nx, "dt": grid.dt, "nt": grid.nt, "T": grid.T, "h": grid.h}
    if run_relay:
        sol = simulate_relay(phi, H0, th, grid)
        growth = check_lemma3_bound(sol.u, phi, grid, cfg.tol_bound)
        report["growth_bound_relay"] = growth.as_dict()
        if not growth.passed:
            failures.append("growth_bound_relay")
        rhos = relay_interfaces(sol, branches)
        columns += [f"rho_{i}" for i in range(1, len(branches) + 1)]
        tables += rhos
        report["relay"] = {"max_switches_per_node": int(switch_counts(sol.H).max())}
        u_out, H_out = sol.u, sol.H
        if fp is not None:
            dist = max(float(np.max(np.abs(s - r))) for s, r in zip(fp.curves, rhos))
            tol = max(4 * grid.h, 4 * math.sqrt(grid.dt))
            report["fp_vs_relay"] = {"distance": dist, "tol_xmatch": tol, "passed": dist <= tol}
            if dist > tol:
                failures.append("fp_vs_relay")
    report["failures"] = failures
    boundary = np.column_stack([grid.t] + tables)
    art = RunArtifacts(target, report, failures, u_out, H_out, boundary, columns)
    if write:
        write_artifacts(art, grid)
    return art


def write_artifacts(art: RunArtifacts, grid: Grid1D) -> None:
    art.out_dir.mkdir(parents=True, exist_ok=True)
    paths = art.paths
    t = np.repeat(grid.t, grid.nx)
    x = np.tile(grid.x, grid.nt + 1)
    sol = np.column_stack((t, x, art.solution.ravel(), art.H.ravel()))
    np.savetxt(paths["solution.csv"], sol, fmt=["%.17g", "%.17g", "%.17g", "%d"], delimiter=",", header="t,x,u,H", comments="")
    np.savetxt(paths["boundary.csv"], art.boundary, fmt="%.17g", delimiter=",", header=",".join(art.boundary_columns), comments="")
    with open(paths["report.json"], "w") as fh:
        json.dump(_jsonable(art.report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_solution(path):
    """Reload ``solution.csv`` as ``(t, x, u, H)`` arrays of shape ``(nt + 1, nx)``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    t = data[:, 0]
    nx = int(np.argmax(t > t[0])) or t.size
    shape = (-1, nx)
    return (data[:, 0].reshape(shape), data[:, 1].reshape(shape), data[:, 2].reshape(shape), data[:, 3].astype(np.int8).reshape(shape))
