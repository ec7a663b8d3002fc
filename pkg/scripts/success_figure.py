"""Write the survival-versus-information curves to CSV, and a PNG if matplotlib is around.

    python scripts/success_figure.py --out success.csv --png success.png
"""
import argparse
import csv

from pingpong.analysis import success_curve


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--c", type=float, default=0.5)
    ap.add_argument("--d", default="0.05,0.1,0.25,0.5")
    ap.add_argument("--I-max", type=float, default=20.0, dest="I_max")
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--out", default="success.csv")
    ap.add_argument("--png", default=None)
    args = ap.parse_args()

    ds = [float(x) for x in args.d.split(",")]
    points = success_curve(args.c, ds, args.I_max, args.steps)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["I", "c", "d", "I0", "s"])
        w.writerows([p.I, p.c, p.d, p.I0, p.s] for p in points)
    print(f"wrote {len(points)} points to {args.out}")

    if args.png:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.5))
        for d in ds:
            pts = [p for p in points if p.d == d]
            ax.plot([p.I for p in pts], [p.s for p in pts], label=f"d={d:g}")
        ax.set_xlabel("I (bits)")
        ax.set_ylabel("s")
        ax.set_title(f"c={args.c:g}")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.png, dpi=150)
        print(f"wrote {args.png}")


if __name__ == "__main__":
    main()
