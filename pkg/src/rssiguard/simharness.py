"""Simulation experiments.

* :func:`run_fig3` compares Monte-Carlo detection rates under both channel
  models with the analytic Marcum-Q rate at probe points around a target.
* :func:`run_fig2` measures how window averaging narrows the Rayleigh
  fading spread.
* :func:`simulate_store` / :func:`run_store_loocv` build a synthetic shop
  floor with target zones, the rest of the shop and the outside, and score
  the full pipeline by leave-one-set-out cross validation.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import polygamma

from .analytic import detection_rates, lambda_t
from .errors import ValidationError
from .evaluation import EvalReport, LabeledDatasets, loocv_detection_rate
from .pipeline import PipelineConfig, fit_detector
from .propagation import (
    LN10_OVER_10,
    PropagationParams,
    as_point,
    generate_dataset,
    mean_rssi_vector,
    sample_fading,
    sample_noise,
)
from .seeding import child_seed, substream

FIG3_COLUMNS = [
    "distance",
    "lambda_t",
    "rate_analytic",
    "rate_mc_friis",
    "rate_mc_rayleigh",
    "se_friis",
    "se_rayleigh",
]


def diagonal_probes(t_in, n: int = 20, near: float = 3.0, far: float = 30.0) -> list:
    """``n`` points on the ray from ``t_in`` along (1, 1), equally spaced in distance."""
    d = np.linspace(near, far, n)
    return [(t_in[0] + r / math.sqrt(2.0), t_in[1] + r / math.sqrt(2.0)) for r in d]


@dataclass(frozen=True)
class Fig3Config:
    aps: tuple = ((0.0, 0.0), (0.0, 10.0), (10.0, 0.0))
    t_in: tuple = (5.0, 5.0)
    nu: float = 0.1
    trials: int = 1000
    train_trials: int | None = None
    probes: tuple | None = None
    # 5.57 dB matches the spread of the Rayleigh fading term in dB.
    sigma: float = 5.57
    eta: float = 2.0
    transmit_power: float = -30.0
    epsilon: float = 0.1
    fade_rate: float = 0.561
    n_avg: int = 1
    classifier: str = "surrogate"

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.train_trials is not None and self.train_trials < 2:
            raise ValidationError("train_trials must be >= 2")
        ap_set = {tuple(map(float, a)) for a in self.aps}
        for p in self.probe_points:
            if tuple(map(float, p)) in ap_set:
                raise ValidationError(f"probe {p} coincides with an AP")

    @property
    def probe_points(self) -> list:
        return list(self.probes) if self.probes is not None else diagonal_probes(self.t_in)

    @property
    def friis(self) -> PropagationParams:
        return PropagationParams.friis(self.sigma, self.transmit_power, self.eta)

    @property
    def rayleigh(self) -> PropagationParams:
        return PropagationParams.rayleigh(self.epsilon, self.fade_rate, self.transmit_power, self.eta)


@dataclass
class Fig3Row:
    x: float
    y: float
    distance: float
    lambda_t: float
    rate_analytic: float
    rate_mc_friis: float
    rate_mc_rayleigh: float
    se_friis: float
    se_rayleigh: float


@dataclass
class Fig3Result:
    config: Fig3Config
    rows: list

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIG3_COLUMNS)
        for r in self.rows:
            w.writerow([f"{getattr(r, c):.6f}" for c in FIG3_COLUMNS])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    def plot_data(self) -> dict:
        return {
            "x_distance": self.column("distance").tolist(),
            "x_lambda_t": self.column("lambda_t").tolist(),
            "series": {
                "analytic": self.column("rate_analytic").tolist(),
                "mc_friis": self.column("rate_mc_friis").tolist(),
                "mc_rayleigh": self.column("rate_mc_rayleigh").tolist(),
            },
            "errors": {
                "mc_friis": self.column("se_friis").tolist(),
                "mc_rayleigh": self.column("se_rayleigh").tolist(),
            },
        }


def _mc_rates(cfg: Fig3Config, params: PropagationParams, probes, seed, model_key: int):
    train_n = (cfg.train_trials or cfg.trials) * cfg.n_avg
    train = generate_dataset([cfg.t_in], cfg.aps, params, train_n, child_seed(seed, model_key, 0))
    detector = fit_detector(
        [train.rssi], PipelineConfig(nu=cfg.nu, n_avg=cfg.n_avg, classifier=cfg.classifier)
    )
    n = cfg.trials * cfg.n_avg
    test = generate_dataset(probes, cfg.aps, params, n, child_seed(seed, model_key, 1))
    rates, ses = [], []
    for i in range(len(probes)):
        flags = detector.predict_target(test.rssi[i * n:(i + 1) * n])
        rate = float(1.0 - flags.mean())
        rates.append(rate)
        ses.append(math.sqrt(rate * (1.0 - rate) / len(flags)))
    return rates, ses


def run_fig3(config: Fig3Config = Fig3Config(), seed=0) -> Fig3Result:
    """Analytic vs simulated detection rate at each probe position."""
    probes = [as_point(p) for p in config.probe_points]
    analytic = detection_rates(probes, config.t_in, config.aps, config.eta, config.sigma, config.nu)
    friis, se_f = _mc_rates(config, config.friis, probes, seed, 0)
    rayleigh, se_r = _mc_rates(config, config.rayleigh, probes, seed, 1)
    rows = []
    for i, p in enumerate(probes):
        rows.append(
            Fig3Row(
                x=p.x,
                y=p.y,
                distance=math.dist(p, config.t_in),
                lambda_t=lambda_t(p, config.t_in, config.aps, config.eta),
                rate_analytic=float(analytic[i]),
                rate_mc_friis=friis[i],
                rate_mc_rayleigh=rayleigh[i],
                se_friis=se_f[i],
                se_rayleigh=se_r[i],
            )
        )
    return Fig3Result(config, rows)


@dataclass
class Fig2Result:
    n_avg: int
    draws: int
    single_std: float
    averaged_std: float
    averaged_std_linear: float
    clt_prediction: float
    linear_prediction: float
    reported_averaged_std: float = 1.8
    histogram: dict = field(default_factory=dict, repr=False)

    @property
    def matches_reported(self) -> bool:
        return abs(self.averaged_std - self.reported_averaged_std) <= 0.05


def fading_std() -> float:
    """Exact standard deviation (dB) of single Rayleigh fading in dB; rate-independent."""
    return math.sqrt(float(polygamma(1, 1))) / LN10_OVER_10


def run_fig2(fade_rate: float = 0.561, n: int = 5, draws: int = 1_000_000, seed=0, bins: int = 120) -> Fig2Result:
    """Spread of single vs ``n``-averaged fading.

    Averaging is done in dB (mean of ``n`` dB values) as in the feature
    pipeline; the linear-power alternative (dB of the mean power) is
    reported alongside for comparison.
    """
    if draws < 10_000:
        raise ValidationError("draws must be >= 10^4")
    if n < 1:
        raise ValidationError("n must be >= 1")
    x = sample_fading(substream(seed, 0), fade_rate, size=(draws, n))
    avg_db = x.mean(axis=1)
    avg_lin = 10.0 * np.log10(np.mean(np.power(10.0, x / 10.0), axis=1))
    edges = np.linspace(-40.0, 20.0, bins + 1)
    hist = {
        "edges": edges.tolist(),
        "single_density": np.histogram(x.ravel(), edges, density=True)[0].tolist(),
        "averaged_density": np.histogram(avg_db, edges, density=True)[0].tolist(),
    }
    single = fading_std()
    return Fig2Result(
        n_avg=n,
        draws=draws,
        single_std=float(x.std()),
        averaged_std=float(avg_db.std()),
        averaged_std_linear=float(avg_lin.std()),
        clt_prediction=single / math.sqrt(n),
        linear_prediction=math.sqrt(float(polygamma(1, n))) / LN10_OVER_10,
        histogram=hist,
    )


# -- synthetic shop floor ---------------------------------------------------

Rect = tuple  # (x0, y0, x1, y1)


def _in_rect(pts: np.ndarray, r: Rect) -> np.ndarray:
    return (pts[:, 0] >= r[0]) & (pts[:, 0] <= r[2]) & (pts[:, 1] >= r[1]) & (pts[:, 1] <= r[3])


@dataclass(frozen=True)
class StoreScenario:
    """Shop floor with rectangular target zones, the remaining floor and an outside strip."""

    aps: tuple = ((1.0, 9.0), (11.0, 9.0), (6.0, 1.0))
    store: Rect = (0.0, 0.0, 12.0, 10.0)
    targets: tuple = (
        ("Z1", (1.5, 6.0, 3.5, 8.0)),
        ("Z2", (8.5, 6.0, 10.5, 8.0)),
        ("Z3", (5.0, 3.5, 7.0, 5.5)),
    )
    inside_label: str = "Z4"
    outside_label: str = "Z5"
    outside: Rect = (2.0, -5.0, 10.0, -0.5)
    sets_per_zone: int = 4
    beacons_per_set: int = 200

    def zone_labels(self) -> list:
        return [name for name, _ in self.targets] + [self.inside_label, self.outside_label]

    def sample_positions(self, label: str, n: int, rng: np.random.Generator) -> np.ndarray:
        targets = dict(self.targets)
        if label in targets:
            r = targets[label]
        elif label == self.outside_label:
            r = self.outside
        elif label == self.inside_label:
            r = self.store
        else:
            raise ValidationError(f"unknown zone {label!r}")
        out = np.empty((0, 2))
        while len(out) < n:
            pts = np.column_stack([rng.uniform(r[0], r[2], 2 * n), rng.uniform(r[1], r[3], 2 * n)])
            if label == self.inside_label:
                for t in targets.values():
                    pts = pts[~_in_rect(pts, t)]
            out = np.vstack([out, pts])
        return out[:n]


def simulate_store(scenario: StoreScenario, params: PropagationParams, seed) -> dict:
    """Raw RSSI sets per zone label.

    Each beacon comes from a position drawn uniformly in its zone; set ``j``
    of zone ``i`` uses the sub-stream keyed ``(i, j)``.
    """
    aps = np.asarray(scenario.aps, dtype=float)
    sets: dict = {}
    for zi, label in enumerate(scenario.zone_labels()):
        sets[label] = []
        for j in range(scenario.sets_per_zone):
            rng = substream(seed, zi, j)
            pos = scenario.sample_positions(label, scenario.beacons_per_set, rng)
            rssi = np.vstack([mean_rssi_vector(p, aps, params) for p in pos])
            rssi += sample_noise(rng, params, size=rssi.shape)
            sets[label].append(rssi)
    return sets


def store_datasets(scenario: StoreScenario, sets: dict, target: str, combined: bool = True) -> LabeledDatasets:
    """Target sets for ``target`` against the other zones.

    With ``combined`` the outside zone counts as a negative; otherwise only
    zones inside the shop do.
    """
    negatives = {
        label: v
        for label, v in sets.items()
        if label != target and (combined or label != scenario.outside_label)
    }
    return LabeledDatasets(sets[target], negatives)


def run_store_loocv(
    scenario: StoreScenario,
    params: PropagationParams,
    config: PipelineConfig,
    seed,
    combined: bool = True,
    positive: str = "non_target",
) -> dict[str, EvalReport]:
    sets = simulate_store(scenario, params, seed)
    return {
        name: loocv_detection_rate(store_datasets(scenario, sets, name, combined), config, positive)
        for name, _ in scenario.targets
    }


def mean_f_measure(reports: dict) -> float:
    return float(np.mean([r.f_measure for r in reports.values()]))


def write_plot_data(path, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
