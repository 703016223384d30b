"""LOOCV F-measure on the synthetic shop floor, raw vs averaged windows, over several seeds.

    python scripts/store_loocv.py --seeds 10
"""

import argparse

import numpy as np

from rssiguard.evaluation import paired_t_test
from rssiguard.simharness import StoreScenario, mean_f_measure, run_store_loocv
from rssiguard.pipeline import PipelineConfig
from rssiguard.propagation import PropagationParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--sigma", type=float, default=5.57)
    ap.add_argument("--nu", type=float, default=0.1)
    ap.add_argument("--n-avg", type=int, default=5)
    ap.add_argument("--inside-only", action="store_true")
    args = ap.parse_args(argv)

    params = PropagationParams.friis(args.sigma)
    scenario = StoreScenario()
    averaged, raw = [], []
    print(f"{'seed':>4} {'F raw':>8} {'F avg':>8}   per-zone (avg)")
    for seed in range(args.seeds):
        avg = run_store_loocv(scenario, params, PipelineConfig(args.nu, n_avg=args.n_avg), seed,
                              combined=not args.inside_only)
        one = run_store_loocv(scenario, params, PipelineConfig(args.nu, n_avg=1), seed,
                              combined=not args.inside_only)
        averaged.append(mean_f_measure(avg))
        raw.append(mean_f_measure(one))
        zones = " ".join(f"{z}={r.f_measure:.3f}" for z, r in avg.items())
        print(f"{seed:>4} {raw[-1]:>8.3f} {averaged[-1]:>8.3f}   {zones}")
    t, p = paired_t_test(averaged, raw)
    print(f"mean F raw {np.mean(raw):.3f}, averaged {np.mean(averaged):.3f}; paired t = {t:.2f}, p = {p:.2e}")


if __name__ == "__main__":
    main()
