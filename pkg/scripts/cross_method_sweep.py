"""Fixed-point curves versus direct relay interfaces over a grid sweep.

Usage: python scripts/cross_method_sweep.py [--presets single_up two_branch] [--T 0.01]

Prints one row per (preset, nx, dt): Picard sweeps, residual, the largest
curve/interface gap and the tolerance max(4h, 4 sqrt(dt)).
"""

import argparse
import math

from hysterm.free_boundary import classify_branches, fixed_point_iterate, fp_vs_relay_distance
from hysterm.heat import build_grid
from hysterm.hysteresis import Thresholds, simulate_relay
from hysterm.presets import TRANSVERSAL_PRESETS, build_preset

GRIDS = [(201, 4e-5), (401, 1e-5), (801, 2.5e-6)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--presets", nargs="+", default=list(TRANSVERSAL_PRESETS))
    ap.add_argument("--T", type=float, default=0.01)
    ap.add_argument("--alpha", type=float, default=-0.1)
    ap.add_argument("--beta", type=float, default=0.1)
    args = ap.parse_args()
    th = Thresholds(args.alpha, args.beta)
    print(f"{'preset':18s} {'nx':>5s} {'dt':>8s} {'sweeps':>6s} {'residual':>9s} {'distance':>9s} {'tol':>8s}")
    for name in args.presets:
        for nx, dt in GRIDS:
            grid = build_grid(nx, dt, args.T)
            p = build_preset(name, th, grid)
            branches = classify_branches(p.phi, p.H0, th, grid)
            fp = fixed_point_iterate(p.phi, branches, p.H0, grid)
            dist = fp_vs_relay_distance(fp, simulate_relay(p.phi, p.H0, th, grid))
            tol = max(4 * grid.h, 4 * math.sqrt(dt))
            print(f"{name:18s} {nx:5d} {dt:8.1e} {fp.iterations:6d} {fp.residual:9.2e} {dist:9.5f} {tol:8.5f}")


if __name__ == "__main__":
    main()
