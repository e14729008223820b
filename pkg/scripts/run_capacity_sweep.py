"""Train quality- and value-oriented forecasters at several wind capacities and compare RMSE / AMS."""

import argparse
import json
import time

from mploss.dispatch import CANONICAL, DEFICIT_DEAR
from mploss.experiments import capacity_sweep
from mploss.train_eval import TrainConfig

SPECS = {"canonical": CANONICAL, "deficit_dear": DEFICIT_DEAR}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--spec", choices=sorted(SPECS), default="deficit_dear")
    p.add_argument("--capacities", type=float, nargs="+", default=[10.0, 20.0, 28.0])
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--n-train", type=int, default=2000)
    p.add_argument("--n-test", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="also write rows to this file")
    args = p.parse_args()

    cfg = TrainConfig.desk(epochs=args.epochs, seed=args.seed)
    t0 = time.perf_counter()
    rows = capacity_sweep(args.capacities, SPECS[args.spec], args.n_train, args.n_test, cfg)
    print(f"{'C':>6} {'rmse_q':>8} {'rmse_v':>8} {'ams_q':>9} {'ams_v':>9} {'gap':>8}")
    for r in rows:
        print(f"{r.capacity:6g} {r.rmse_quality:8.3f} {r.rmse_value:8.3f} {r.ams_quality:9.2f} {r.ams_value:9.2f} {r.ams_gap:8.2f}")
    print(f"total {time.perf_counter() - t0:.1f} s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([{**r.__dict__, "ams_gap": r.ams_gap} for r in rows], fh, indent=2)


if __name__ == "__main__":
    main()
