"""Tunnelling splitting omega(hbar) for the double well and its semilog fit against 1/hbar."""

import argparse
from pathlib import Path

import numpy as np

from multiwell.diagnostics import scaling_fit
from multiwell.grid import Grid
from multiwell.io import config_digest, write_csv, write_json
from multiwell.potential import agmon_distance, make_double_well
from multiwell.spectral import eigensolve, splitting


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("--hbar", type=float, nargs="+", default=[0.12, 0.15, 0.2, 0.25, 0.3])
    ap.add_argument("--out", default="out/splitting")
    args = ap.parse_args()

    dw = make_double_well(args.a, args.b)
    grid = Grid(6.0 * max(1.0, args.a), 2048)
    rows = []
    for h in args.hbar:
        omega, Omega = splitting(eigensolve(dw, grid, h, 3), 2)
        rows.append((h, 1 / h, omega, Omega))
        print(f"hbar={h:.4f}  omega={omega:.6e}")
    rows = np.array(rows)
    fit = scaling_fit(rows[:, 1], rows[:, 2], semilog=True)
    gamma = agmon_distance(dw, 1)
    print(f"slope {fit['slope']:.4f}, -Gamma = {-gamma:.4f}")

    out = Path(args.out)
    digest = config_digest(vars(args))
    write_csv(out / "splitting.csv", ["hbar", "inv_hbar", "omega", "Omega"], rows, digest)
    write_json(out / "fit.json", {**fit, "gamma": gamma}, digest)


if __name__ == "__main__":
    main()
