"""Plot the derived loss against the deviation y - yhat at fixed (l, y), one color per affine piece."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from mploss.dispatch import CANONICAL, DEFICIT_DEAR
from mploss.loss_synth import loss_slice_1d, synthesize_loss

SPECS = {"canonical": CANONICAL, "deficit_dear": DEFICIT_DEAR}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--spec", choices=sorted(SPECS), default="canonical")
    p.add_argument("--l", type=float, default=50.0)
    p.add_argument("--y", type=float, default=10.0)
    p.add_argument("--out", default="loss_slice.png")
    args = p.parse_args()

    pw = synthesize_loss(SPECS[args.spec])
    sl = loss_slice_1d(pw, args.l, args.y, n_points=401)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for lo, hi, slope in sl.segments:
        mask = (sl.yhat >= lo) & (sl.yhat <= hi)
        ax.plot(sl.deviation[mask], sl.value[mask], lw=2, label=f"slope in yhat {slope:g}")
    for b in sl.breakpoints:
        ax.axvline(b, color="grey", lw=0.5, ls=":")
    ax.set_xlabel("deviation y - yhat (kW)")
    ax.set_ylabel("operation cost ($)")
    ax.set_title(f"l = {args.l:g} kW, y = {args.y:g} kW")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}; breakpoints {[round(b, 6) for b in sl.breakpoints]}")


if __name__ == "__main__":
    main()
