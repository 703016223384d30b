"""Exhaustive AP / target-area placement by the gate-point criterion.

For a choice of APs ``A`` and target areas ``T`` the score is::

    min over t_in in T of  sum over a in A of  lg(||t_in - a|| / ||t_d - a||)**2

where ``t_d`` is the gate.  It is proportional to the smallest
non-centrality an object leaving through the gate can produce, and the
detection rate is monotone in that quantity, so ranking by the score ranks
placements by worst-case detection rate at the gate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .analytic import detection_rates
from .errors import SingularityError, ValidationError
from .evaluation import pearson
from .pipeline import PipelineConfig, fit_detector
from .propagation import Point, PropagationParams, as_point, generate_dataset
from .seeding import child_seed

DEFAULT_MAX_COMBINATIONS = 10**7


def _log_ratio_sq_table(aps: np.ndarray, areas: np.ndarray, gate) -> np.ndarray:
    """``table[i, j] = lg(||area_j - ap_i|| / ||gate - ap_i||)**2``."""
    d_gate = np.hypot(aps[:, 0] - gate[0], aps[:, 1] - gate[1])
    d_area = np.hypot(areas[None, :, 0] - aps[:, 0:1], areas[None, :, 1] - aps[:, 1:2])
    if np.any(d_gate == 0) or np.any(d_area == 0):
        raise SingularityError("gate or target area coincides with an AP")
    return np.log10(d_area / d_gate[:, None]) ** 2


def placement_objective(aps, areas, t_d, eta: float | None = None) -> float:
    """Gate-point score of a placement.

    ``eta`` is accepted for symmetry with the detection-rate functions; the
    score does not depend on it.
    """
    aps = np.asarray(aps, dtype=float).reshape(-1, 2)
    areas = np.asarray(areas, dtype=float).reshape(-1, 2)
    if len(aps) == 0 or len(areas) == 0:
        raise ValidationError("need at least one AP and one area")
    return float(_log_ratio_sq_table(aps, areas, as_point(t_d)).sum(axis=0).min())


@dataclass(frozen=True)
class PlacementProblem:
    ap_candidates: tuple
    area_candidates: tuple
    k: int
    m: int
    gate: Point
    eta: float = 2.0

    def __post_init__(self):
        aps = tuple(as_point(a) for a in self.ap_candidates)
        areas = tuple(as_point(a) for a in self.area_candidates)
        object.__setattr__(self, "ap_candidates", aps)
        object.__setattr__(self, "area_candidates", areas)
        object.__setattr__(self, "gate", as_point(self.gate))
        if not 1 <= self.k <= len(aps):
            raise ValidationError(f"k must lie in [1, {len(aps)}], got {self.k}")
        if not 1 <= self.m <= len(areas):
            raise ValidationError(f"m must lie in [1, {len(areas)}], got {self.m}")
        if len(set(aps)) != len(aps) or len(set(areas)) != len(areas):
            raise ValidationError("candidate positions must be pairwise distinct")
        if self.gate in aps or self.gate in areas:
            raise ValidationError("gate must differ from every candidate")
        if not self.eta > 0:
            raise ValidationError("eta must be > 0")

    @property
    def combinations(self) -> int:
        return math.comb(len(self.ap_candidates), self.k) * math.comb(len(self.area_candidates), self.m)


@dataclass(frozen=True)
class PlacementSolution:
    ap_indices: tuple
    area_indices: tuple
    objective: float
    rank: int


def optimize(problem: PlacementProblem, max_combinations: int = DEFAULT_MAX_COMBINATIONS) -> list[PlacementSolution]:
    """All feasible placements, best first.

    Ties on the score are ordered lexicographically by
    ``(ap_indices, area_indices)``.
    """
    if problem.combinations > max_combinations:
        raise ValidationError(
            f"{problem.combinations} placements exceed the enumeration guard of {max_combinations}; "
            "raise it with --max-combinations if this is intended"
        )
    table = _log_ratio_sq_table(
        np.asarray(problem.ap_candidates), np.asarray(problem.area_candidates), problem.gate
    )
    area_subsets = list(itertools.combinations(range(len(problem.area_candidates)), problem.m))
    found = []
    for ap_idx in itertools.combinations(range(len(problem.ap_candidates)), problem.k):
        per_area = table[list(ap_idx)].sum(axis=0)
        for area_idx in area_subsets:
            found.append((float(per_area[list(area_idx)].min()), ap_idx, area_idx))
    found.sort(key=lambda s: (-s[0], s[1], s[2]))
    return [PlacementSolution(a, t, obj, rank) for rank, (obj, a, t) in enumerate(found, start=1)]


@dataclass
class RankingReport:
    solutions: list
    rates: np.ndarray
    r: float
    p: float
    method: str
    rates_by_pair: dict = field(default_factory=dict, repr=False)


def _mc_pair_rate(problem, ap_idx, area, params, config, trials, seed) -> float:
    aps = [problem.ap_candidates[i] for i in ap_idx]
    key = (len(ap_idx), area, *ap_idx)
    n = trials * config.n_avg
    train = generate_dataset([problem.area_candidates[area]], aps, params, n, child_seed(seed, 0, *key))
    test = generate_dataset([problem.gate], aps, params, n, child_seed(seed, 1, *key))
    detector = fit_detector([train.rssi], config)
    return float(1.0 - detector.predict_target(test.rssi).mean())


def validate_ranking(
    problem: PlacementProblem,
    sigma: float,
    nu: float,
    trials: int,
    seed=0,
    method: str = "analytic",
    params: PropagationParams | None = None,
    n_avg: int = 1,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
) -> RankingReport:
    """Correlate the placement ranking with detection rates at the gate.

    The rate of a placement is the minimum over its target areas of the
    rate at the gate for an object trained in that area.  ``method`` picks
    how that rate is obtained: ``"analytic"`` (Marcum-Q formula),
    ``"ocsvm"`` or ``"surrogate"`` (Monte Carlo with ``trials`` training and
    test windows per AP-set/area pair).  The reported correlation is
    Pearson's r between the two rank lists, with average ranks for ties.
    """
    if trials < 100:
        raise ValidationError("validate_ranking needs trials >= 100")
    solutions = optimize(problem, max_combinations)
    pair_rates: dict = {}

    if method == "analytic":
        for s in solutions:
            for area in s.area_indices:
                key = (s.ap_indices, area)
                if key not in pair_rates:
                    pair_rates[key] = float(
                        detection_rates(
                            [problem.gate],
                            problem.area_candidates[area],
                            [problem.ap_candidates[i] for i in s.ap_indices],
                            problem.eta,
                            sigma,
                            nu,
                        )[0]
                    )
    elif method in ("ocsvm", "surrogate"):
        if params is None:
            params = PropagationParams.friis(sigma=sigma, path_loss_exponent=problem.eta)
        config = PipelineConfig(nu=nu, n_avg=n_avg, classifier=method)
        for s in solutions:
            for area in s.area_indices:
                key = (s.ap_indices, area)
                if key not in pair_rates:
                    pair_rates[key] = _mc_pair_rate(problem, s.ap_indices, area, params, config, trials, seed)
    else:
        raise ValidationError(f"unknown method {method!r}")

    rates = np.array([min(pair_rates[(s.ap_indices, a)] for a in s.area_indices) for s in solutions])
    objectives = np.array([s.objective for s in solutions])
    r, p = pearson(rankdata(objectives), rankdata(rates))
    return RankingReport(solutions, rates, r, p, method, pair_rates)
