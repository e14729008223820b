"""Wall-clock of derived-loss training vs the re-solve-every-sample baseline."""

import argparse

from mploss.dispatch import DEFICIT_DEAR
from mploss.experiments import timing_comparison


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--epochs", type=int, default=1)
    args = p.parse_args()
    t = timing_comparison(DEFICIT_DEAR, n_samples=args.samples, epochs=args.epochs)
    for k in ("derive", "quality", "value", "diffopt"):
        print(f"{k:>8}: {t[k]:.4f} s")
    print(f"diffopt / value = {t['diffopt'] / t['value']:.1f}x")


if __name__ == "__main__":
    main()
