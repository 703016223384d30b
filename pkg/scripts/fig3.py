"""Analytic vs simulated detection rate along a diagonal away from the target.

    python scripts/fig3.py --seed 0 --out fig3.csv --plot fig3.png
"""

import argparse
import sys

from rssiguard.simharness import Fig3Config, run_fig3


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--n-avg", type=int, default=1)
    ap.add_argument("--classifier", choices=["surrogate", "ocsvm"], default="surrogate")
    ap.add_argument("--out", default="-")
    ap.add_argument("--plot", help="save a PNG (needs matplotlib)")
    args = ap.parse_args(argv)

    res = run_fig3(Fig3Config(trials=args.trials, n_avg=args.n_avg, classifier=args.classifier), args.seed)
    if args.out == "-":
        res.write_csv(sys.stdout)
    else:
        res.to_csv(args.out)

    gap = abs(res.column("rate_mc_friis") - res.column("rate_analytic")).max()
    print(f"max |MC(Friis) - analytic| = {gap:.4f}", file=sys.stderr)

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        for ax, x, label in ((axes[0], "distance", "distance from target (m)"), (axes[1], "lambda_t", "lambda_t (dB^2)")):
            ax.plot(res.column(x), res.column("rate_analytic"), "k-", label="analytic")
            ax.errorbar(res.column(x), res.column("rate_mc_friis"), 2 * res.column("se_friis"), fmt="o", label="MC Friis")
            ax.errorbar(res.column(x), res.column("rate_mc_rayleigh"), 2 * res.column("se_rayleigh"), fmt="s", label="MC Rayleigh")
            ax.set_xlabel(label)
            ax.set_ylabel("detection rate")
        axes[1].set_xscale("log")
        axes[0].legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
