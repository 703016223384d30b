"""Fading spread before and after N-window averaging.

    python scripts/fig2.py --seed 0 --n 5
"""

import argparse

from rssiguard.simharness import run_fig2


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--draws", type=int, default=1_000_000)
    ap.add_argument("--fade-rate", type=float, default=0.561)
    ap.add_argument("--plot", help="save a PNG (needs matplotlib)")
    args = ap.parse_args(argv)

    res = run_fig2(args.fade_rate, args.n, args.draws, args.seed)
    print(f"single-beacon std       {res.single_std:.4f} dB")
    print(f"N={res.n_avg} dB-averaged std    {res.averaged_std:.4f} dB (CLT {res.clt_prediction:.4f})")
    print(f"N={res.n_avg} power-averaged std {res.averaged_std_linear:.4f} dB (exact {res.linear_prediction:.4f})")
    print(f"reported value          {res.reported_averaged_std:.4f} dB")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        import numpy as np

        edges = np.array(res.histogram["edges"])
        mid = 0.5 * (edges[1:] + edges[:-1])
        plt.plot(mid, res.histogram["single_density"], label="single")
        plt.plot(mid, res.histogram["averaged_density"], label=f"N={res.n_avg} average")
        plt.xlabel("fading (dB)")
        plt.ylabel("density")
        plt.legend()
        plt.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
