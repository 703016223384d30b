"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import RateQuery, detection_rate_domain, detection_rate_point
from .errors import NumericalError, ValidationError
from .evaluation import LabeledDatasets, loocv_detection_rate
from .features import apply_standardizer, average_windows, fit_standardizer
from .simharness import Fig3Config, StoreScenario, run_fig2, run_fig3, run_store_loocv, write_plot_data
from .layout import Layout
from .ocsvm import OcSvmConfig, OcSvmModel, train
from .pipeline import PipelineConfig
from .placement import DEFAULT_MAX_COMBINATIONS, optimize, validate_ranking
from .propagation import PropagationParams, RssiDataset, Variant, generate_dataset

EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3


def fmt(v: float) -> str:
    return f"{v:.6f}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _xy(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y but got {text!r}") from None
    return x, y


def _indices(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated indices, got {text!r}") from None


def _gamma(text: str):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("gamma must be a number or 'auto'") from None


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _select_aps(layout: Layout, indices):
    if not indices:
        return list(layout.aps)
    try:
        return [layout.aps[i] for i in indices]
    except IndexError:
        raise ValidationError(f"AP index out of range; layout has {len(layout.aps)} APs") from None


def _params(args, eta: float) -> PropagationParams:
    return PropagationParams(
        variant=Variant(args.model),
        transmit_power=args.pt,
        path_loss_exponent=args.eta if args.eta is not None else eta,
        sigma=args.sigma,
        epsilon=args.epsilon,
        fade_rate=args.fade_rate,
    )


def _window_blocks(ds: RssiDataset, n_avg: int):
    """Average each run of same-position rows separately; returns (positions, features)."""
    pos, feats = [], []
    start = 0
    for block in ds.runs():
        if len(block) >= n_avg:
            avg = average_windows(block, n_avg)
            feats.append(avg)
            pos.append(np.repeat(ds.positions[start:start + 1], len(avg), axis=0))
        start += len(block)
    if not feats:
        return np.empty((0, 2)), np.empty((0, ds.k))
    return np.vstack(pos), np.vstack(feats)


# -- commands -----------------------------------------------------------------


def cmd_simulate(args) -> int:
    layout = Layout.load(args.layout)
    aps = _select_aps(layout, args.ap_indices)
    if args.at:
        positions = args.at
    elif args.positions == "gate":
        positions = [layout.gate]
    elif args.positions == "all":
        positions = list(layout.areas) + [layout.gate]
    else:
        positions = list(layout.areas)
    ds = generate_dataset(positions, aps, _params(args, layout.eta), args.trials, args.seed)
    if args.out in (None, "-"):
        raise ValidationError("simulate needs --out PATH")
    ds.to_csv(args.out)
    return 0


def cmd_train(args) -> int:
    ds = RssiDataset.from_csv(args.train_csv)
    if len(ds) < 2 * args.n_avg:
        raise ValidationError(f"need at least 2*N = {2 * args.n_avg} rows, got {len(ds)}")
    _, averaged = _window_blocks(ds, args.n_avg)
    stats = fit_standardizer(averaged)
    cfg = OcSvmConfig(nu=args.nu, gamma=args.gamma, kkt_tolerance=args.tol)
    model = train(apply_standardizer(stats, averaged), cfg, standardizer=stats)
    model.save(args.model_out)
    print(
        f"trained on {len(averaged)} windows: {len(model.alphas)} support vectors, "
        f"gamma={fmt(model.gamma)}, rho={fmt(model.rho)}",
        file=sys.stderr,
    )
    return 0


def cmd_detect(args) -> int:
    model = OcSvmModel.load(args.model)
    if model.standardizer is None:
        raise ValidationError("model file has no embedded standardizer")
    ds = RssiDataset.from_csv(args.test_csv)
    with _output(args.out) as fh:
        w = _writer(fh)
        w.writerow(["window", "pos_x", "pos_y", "decision_value", "verdict"])
        if len(ds) == 0:
            return 0
        if ds.k != model.k:
            raise ValidationError(f"model expects {model.k} AP columns, test file has {ds.k}")
        positions, averaged = _window_blocks(ds, args.n_avg)
        values = model.decision_function(apply_standardizer(model.standardizer, averaged)) if len(averaged) else []
        for i, (p, v) in enumerate(zip(positions, values)):
            w.writerow([i, fmt(p[0]), fmt(p[1]), fmt(v), "target" if v >= 0 else "non_target"])
    return 0


def cmd_rate(args) -> int:
    layout = Layout.load(args.layout)
    aps = _select_aps(layout, args.ap_indices)
    if args.t_in is not None:
        t_in = args.t_in
    else:
        if not 0 <= args.area < len(layout.areas):
            raise ValidationError(f"area index {args.area} out of range")
        t_in = layout.areas[args.area]
    eta = args.eta if args.eta is not None else layout.eta
    if args.domain:
        if layout.outside is None:
            raise ValidationError("layout has no 'outside' polygon")
        if args.seed is None:
            raise ValidationError("--domain needs --seed")
        res = detection_rate_domain(layout.outside, t_in, aps, eta, args.sigma, args.nu, args.samples, args.seed)
        with _output(args.out) as fh:
            w = _writer(fh)
            w.writerow(["rate", "standard_error", "samples"])
            w.writerow([fmt(res.rate), fmt(res.standard_error), res.samples])
        return 0
    probes = args.at or [layout.gate]
    with _output(args.out) as fh:
        w = _writer(fh)
        w.writerow(["t_x", "t_y", "distance", "lambda_t", "delta", "rate"])
        for t in probes:
            r = detection_rate_point(RateQuery(t, t_in, tuple(aps), eta, args.sigma, args.nu))
            w.writerow([fmt(t[0]), fmt(t[1]), fmt(math.dist(t, t_in)), fmt(r.lambda_t), fmt(r.delta), fmt(r.rate)])
    return 0


def cmd_optimize(args) -> int:
    layout = Layout.load(args.layout)
    if args.k is not None or args.m is not None:
        layout = Layout(
            layout.aps, layout.areas, layout.gate,
            args.k if args.k is not None else layout.k,
            args.m if args.m is not None else layout.m,
            layout.eta, layout.outside,
        )
    problem = layout.problem()
    solutions = optimize(problem, args.max_combinations)
    with _output(args.out) as fh:
        w = _writer(fh)
        w.writerow(["rank", "ap_indices", "area_indices", "objective"])
        for s in solutions:
            w.writerow([s.rank, ";".join(map(str, s.ap_indices)), ";".join(map(str, s.area_indices)), fmt(s.objective)])
    if args.validate:
        if args.seed is None and args.validate != "analytic":
            raise ValidationError("--validate with simulation needs --seed")
        rep = validate_ranking(
            problem, args.sigma, args.nu, args.trials, args.seed or 0, args.validate,
            n_avg=args.n_avg, max_combinations=args.max_combinations,
        )
        report = {
            "method": rep.method,
            "r": round(rep.r, 6),
            "p": round(rep.p, 6),
            "rates": [round(float(x), 6) for x in rep.rates],
        }
        if args.report:
            with open(args.report, "w") as fh:
                json.dump(report, fh, indent=2)
                fh.write("\n")
        print(f"rank correlation r={fmt(rep.r)} p={fmt(rep.p)} ({rep.method})", file=sys.stderr)
    return 0


def _load_manifest(path) -> LabeledDatasets:
    base = Path(path).parent
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(d, dict) or "target" not in d:
        raise ValidationError("manifest needs a 'target' list and a 'negatives' mapping")

    def read(p):
        return RssiDataset.from_csv(base / p).rssi

    return LabeledDatasets(
        [read(p) for p in d["target"]],
        {zone: [read(p) for p in paths] for zone, paths in d.get("negatives", {}).items()},
    )


def cmd_eval(args) -> int:
    data = _load_manifest(args.manifest)
    cfg = PipelineConfig(nu=args.nu, gamma=args.gamma, n_avg=args.n_avg, classifier=args.classifier)
    report = loocv_detection_rate(data, cfg, positive=args.positive)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_json() + "\n")
    if args.folds_csv:
        with open(args.folds_csv, "w", newline="") as fh:
            w = _writer(fh)
            w.writerow(["fold", "tp", "fp", "fn", "tn", "precision", "recall", "f_measure", "detection_rate", "target_acceptance"])
            for f in report.folds:
                w.writerow([f.fold, f.tp, f.fp, f.fn, f.tn, fmt(f.precision), fmt(f.recall),
                            fmt(f.f_measure), fmt(f.detection_rate), fmt(f.target_acceptance)])
    print(report.table())
    return 0


def cmd_experiment_fig3(args) -> int:
    cfg = Fig3Config(
        nu=args.nu,
        trials=args.trials,
        train_trials=args.train_trials,
        sigma=args.sigma,
        n_avg=args.n_avg,
        classifier=args.classifier,
    )
    result = run_fig3(cfg, args.seed)
    with _output(args.out) as fh:
        result.write_csv(fh)
    if args.plot_data:
        write_plot_data(args.plot_data, result.plot_data())
    return 0


def cmd_experiment_fig2(args) -> int:
    res = run_fig2(args.fade_rate, args.n_avg, args.draws, args.seed)
    cols = ["n_avg", "draws", "single_std", "averaged_std_db", "averaged_std_linear",
            "clt_prediction", "linear_prediction", "reported_averaged_std"]
    with _output(args.out) as fh:
        w = _writer(fh)
        w.writerow(cols)
        w.writerow([res.n_avg, res.draws, fmt(res.single_std), fmt(res.averaged_std), fmt(res.averaged_std_linear),
                    fmt(res.clt_prediction), fmt(res.linear_prediction), fmt(res.reported_averaged_std)])
    if not res.matches_reported:
        print(
            f"note: dB-averaged std {res.averaged_std:.2f} differs from the reported "
            f"{res.reported_averaged_std}; linear-power averaging gives {res.averaged_std_linear:.2f}",
            file=sys.stderr,
        )
    if args.plot_data:
        write_plot_data(args.plot_data, res.histogram)
    return 0


def cmd_experiment_store(args) -> int:
    params = PropagationParams.friis(args.sigma)
    cfg = PipelineConfig(nu=args.nu, n_avg=args.n_avg)
    reports = run_store_loocv(StoreScenario(), params, cfg, args.seed, combined=not args.inside_only)
    with _output(args.out) as fh:
        w = _writer(fh)
        w.writerow(["target", "precision", "recall", "f_measure", "detection_rate"])
        for name, r in reports.items():
            w.writerow([name, fmt(r.precision), fmt(r.recall), fmt(r.f_measure), fmt(r.detection_rate)])
    return 0


# -- parser -------------------------------------------------------------------


def _add_channel_flags(p):
    p.add_argument("--model", choices=[v.value for v in Variant], default="friis")
    p.add_argument("--pt", type=float, default=-30.0, help="transmit power P_T in dBm")
    p.add_argument("--eta", type=float, default=None, help="path-loss exponent (default: layout value)")
    p.add_argument("--sigma", type=float, default=5.57, help="Gaussian noise std in dB")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--fade-rate", type=float, default=0.561)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rssiguard", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate RSSI beacons for a layout")
    p.add_argument("--layout", required=True)
    p.add_argument("--positions", choices=["areas", "gate", "all"], default="areas")
    p.add_argument("--at", type=_xy, action="append", help="explicit position X,Y (repeatable)")
    p.add_argument("--ap-indices", type=_indices)
    _add_channel_flags(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train a one-class SVM on a target-area CSV")
    p.add_argument("--train-csv", required=True)
    p.add_argument("--nu", type=float, default=0.1)
    p.add_argument("--gamma", type=_gamma, default="auto")
    p.add_argument("--n-avg", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-6, help="KKT tolerance")
    p.add_argument("--model-out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="classify windows of a test CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--test-csv", required=True)
    p.add_argument("--n-avg", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("rate", help="analytic detection rate at points or over the outside domain")
    p.add_argument("--layout", required=True)
    p.add_argument("--area", type=int, default=0, help="index of the target area used as t_in")
    p.add_argument("--t-in", type=_xy)
    p.add_argument("--at", type=_xy, action="append", help="probe X,Y (repeatable; default: gate)")
    p.add_argument("--ap-indices", type=_indices)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--sigma", type=float, default=5.57)
    p.add_argument("--nu", type=float, default=0.1)
    p.add_argument("--domain", action="store_true", help="average over the layout's outside polygon")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("optimize", help="rank AP / target-area placements")
    p.add_argument("--layout", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--max-combinations", type=int, default=DEFAULT_MAX_COMBINATIONS)
    p.add_argument("--validate", choices=["analytic", "ocsvm", "surrogate"])
    p.add_argument("--sigma", type=float, default=5.57)
    p.add_argument("--nu", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--n-avg", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--report", help="write the ranking-validation report as JSON")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("eval", help="leave-one-set-out evaluation from a manifest")
    p.add_argument("--manifest", required=True, help='JSON: {"target": [csv...], "negatives": {zone: [csv...]}}')
    p.add_argument("--nu", type=float, default=0.1)
    p.add_argument("--gamma", type=_gamma, default="auto")
    p.add_argument("--n-avg", type=int, default=1)
    p.add_argument("--classifier", choices=["ocsvm", "surrogate"], default="ocsvm")
    p.add_argument("--positive", choices=["non_target", "target"], default="non_target")
    p.add_argument("--out", help="write the report as JSON")
    p.add_argument("--folds-csv", help="write per-fold results as CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="run a scripted simulation study")
    exp = p.add_subparsers(dest="experiment", required=True, parser_class=_Parser)

    e = exp.add_parser("fig3", help="analytic vs simulated detection rate around a target")
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--trials", type=int, default=1000)
    e.add_argument("--train-trials", type=int)
    e.add_argument("--sigma", type=float, default=5.57)
    e.add_argument("--nu", type=float, default=0.1)
    e.add_argument("--n-avg", type=int, default=1)
    e.add_argument("--classifier", choices=["surrogate", "ocsvm"], default="surrogate")
    e.add_argument("--out", default="-")
    e.add_argument("--plot-data")
    e.set_defaults(func=cmd_experiment_fig3)

    e = exp.add_parser("fig2", help="fading spread before and after averaging")
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--fade-rate", type=float, default=0.561)
    e.add_argument("--n-avg", type=int, default=5)
    e.add_argument("--draws", type=int, default=1_000_000)
    e.add_argument("--out", default="-")
    e.add_argument("--plot-data")
    e.set_defaults(func=cmd_experiment_fig2)

    e = exp.add_parser("store", help="LOOCV on the synthetic shop floor")
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--sigma", type=float, default=5.57)
    e.add_argument("--nu", type=float, default=0.1)
    e.add_argument("--n-avg", type=int, default=5)
    e.add_argument("--inside-only", action="store_true", help="exclude the outside zone from negatives")
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_experiment_store)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"rssiguard: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"rssiguard: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, ArithmeticError) as exc:
        print(f"rssiguard: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
