"""Equilibria of the two-site reduced model across eta and trajectory labels from (1, 0)."""

import argparse
from pathlib import Path

import numpy as np

from multiwell.dnls import DnlsModel, bifurcation_scan, classify_trajectory
from multiwell.io import config_digest, write_csv, write_json


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta-min", type=float, default=0.0)
    ap.add_argument("--eta-max", type=float, default=6.0)
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--horizon", type=float, default=100.0)
    ap.add_argument("--out", default="out/bifurcation")
    args = ap.parse_args()

    etas = np.round(np.arange(args.eta_min, args.eta_max + 1e-9, args.step), 6)
    scan = bifurcation_scan(etas)
    print(f"localized equilibria first at eta = {scan['birth']}")

    labels = []
    for eta in etas[:: max(1, int(round(0.5 / args.step)))]:
        res = classify_trajectory(DnlsModel.from_scaled([0, 0], [1.0], eta), [1, 0], args.horizon)
        labels.append({"eta": float(eta), **res})
        print(f"eta={eta:5.2f}  {res['status']:16s} min p1={res.get('min_population', float('nan')):.4f}")

    out = Path(args.out)
    digest = config_digest(vars(args))
    write_csv(out / "equilibria.csv", ["eta", "count"], np.column_stack([scan["eta"], scan["count"]]), digest)
    write_json(out / "summary.json", {"birth": scan["birth"], "trajectories": labels}, digest)


if __name__ == "__main__":
    main()
