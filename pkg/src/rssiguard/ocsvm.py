"""One-class SVM with an RBF kernel, trained by SMO on the dual.

Dual problem for ``s`` training rows and fraction ``nu``::

    minimize    0.5 * a' K a
    subject to  0 <= a_i <= 1 / (nu * s),   sum(a) = 1

with ``K_ij = exp(-gamma * ||x_i - x_j||^2)``.  The decision value of a
vector ``x`` is ``sum_i a_i K(x_i, x) - rho``; it is classified as target
when the value is >= 0.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConvergenceError, ValidationError
from .features import StandardizerStats


class Verdict(str, enum.Enum):
    TARGET = "target"
    NON_TARGET = "non_target"


@dataclass(frozen=True)
class OcSvmConfig:
    nu: float = 0.1
    gamma: float | str = "auto"
    kkt_tolerance: float = 1e-6
    max_iterations: int | None = None  # None means 10**5 * s
    cache_rows: int = 8192

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise ValidationError(f"nu must lie in (0, 1), got {self.nu}")
        if isinstance(self.gamma, str):
            if self.gamma != "auto":
                raise ValidationError(f"gamma must be a positive number or 'auto', got {self.gamma!r}")
        elif not self.gamma > 0:
            raise ValidationError(f"gamma must be > 0, got {self.gamma}")
        if not self.kkt_tolerance > 0:
            raise ValidationError("kkt_tolerance must be > 0")

    def resolve_gamma(self, k: int) -> float:
        return 1.0 / k if self.gamma == "auto" else float(self.gamma)


def rbf_kernel(x, y, gamma: float) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValidationError(f"dimension mismatch: {x.size} vs {y.size}")
    return math.exp(-gamma * float(np.sum((x - y) ** 2)))


def rbf_matrix(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(a, b, "sqeuclidean"))


@dataclass(frozen=True)
class OcSvmModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    rho: float
    gamma: float
    nu: float
    standardizer: StandardizerStats | None = None
    iterations: int = field(default=0, compare=False)
    kkt_violation: float = field(default=0.0, compare=False)

    @property
    def k(self) -> int:
        return self.support_vectors.shape[1]

    def decision_function(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.k:
            raise ValidationError(f"expected {self.k} features, got {x.shape[1]}")
        if len(x) == 0:
            return np.empty(0)
        return rbf_matrix(x, self.support_vectors, self.gamma) @ self.alphas - self.rho

    def predict_target(self, x) -> np.ndarray:
        return self.decision_function(x) >= 0

    def to_dict(self) -> dict:
        d = {
            "gamma": self.gamma,
            "nu": self.nu,
            "rho": self.rho,
            "support_vectors": self.support_vectors.tolist(),
            "alphas": self.alphas.tolist(),
        }
        if self.standardizer is not None:
            d["standardizer"] = self.standardizer.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "OcSvmModel":
        try:
            sv = np.asarray(d["support_vectors"], dtype=float)
            alphas = np.asarray(d["alphas"], dtype=float)
            model = cls(
                sv.reshape(len(alphas), -1),
                alphas,
                float(d["rho"]),
                float(d["gamma"]),
                float(d["nu"]),
                StandardizerStats.from_dict(d["standardizer"]) if "standardizer" in d else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed model: {exc}") from None
        if len(alphas) == 0 or model.gamma <= 0:
            raise ValidationError("malformed model: no support vectors or non-positive gamma")
        if model.standardizer is not None and model.standardizer.k != model.k:
            raise ValidationError("malformed model: standardizer and support vectors disagree on k")
        return model

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "OcSvmModel":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: not valid JSON ({exc})") from None
        if not isinstance(d, dict):
            raise ValidationError(f"{path}: expected a JSON object")
        return cls.from_dict(d)


def decision_value(model: OcSvmModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValidationError("decision_value takes a single feature vector")
    return float(model.decision_function(x)[0])


def classify(model: OcSvmModel, x) -> Verdict:
    return Verdict.TARGET if decision_value(model, x) >= 0 else Verdict.NON_TARGET


class _KernelRows:
    """Kernel matrix rows, dense when small enough, recomputed otherwise."""

    def __init__(self, x: np.ndarray, gamma: float, cache_rows: int):
        self.x = x
        self.gamma = gamma
        self.full = rbf_matrix(x, x, gamma) if len(x) <= cache_rows else None

    def __getitem__(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        return rbf_matrix(self.x[i:i + 1], self.x, self.gamma)[0]


def dual_objective(alphas, kernel: np.ndarray) -> float:
    alphas = np.asarray(alphas, dtype=float)
    return 0.5 * float(alphas @ kernel @ alphas)


def solve_dual(x: np.ndarray, gamma: float, nu: float, tol: float = 1e-6,
               max_iterations: int | None = None, cache_rows: int = 8192):
    """Return ``(alphas, gradient, iterations, violation)`` for all rows."""
    s = len(x)
    c = 1.0 / (nu * s)
    rows = _KernelRows(x, gamma, cache_rows)
    limit = 100_000 * s if max_iterations is None else max_iterations

    alphas = np.zeros(s)
    n_full = min(int(math.floor(nu * s)), s)
    alphas[:n_full] = c
    rest = 1.0 - n_full * c
    if n_full < s and rest > 0:
        alphas[n_full] = rest

    grad = np.zeros(s)
    for i in np.flatnonzero(alphas):
        grad += alphas[i] * rows[i]

    it = 0
    while True:
        i = int(np.argmin(np.where(alphas < c, grad, np.inf)))
        j = int(np.argmax(np.where(alphas > 0, grad, -np.inf)))
        violation = float(grad[j] - grad[i])
        if violation <= tol:
            break
        if it >= limit:
            raise ConvergenceError("SMO did not converge", violation, it)
        ki, kj = rows[i], rows[j]
        quad = max(ki[i] + kj[j] - 2.0 * ki[j], 1e-12)
        step = violation / quad
        room_i, room_j = c - alphas[i], alphas[j]
        if step >= room_i or step >= room_j:
            if room_i <= room_j:
                step = room_i
                alphas[i] = c
                alphas[j] -= step
                if room_i == room_j:
                    alphas[j] = 0.0
            else:
                step = room_j
                alphas[j] = 0.0
                alphas[i] += step
        else:
            alphas[i] += step
            alphas[j] -= step
        grad += step * (ki - kj)
        it += 1
    polished = _polish(alphas, rows, c)
    if polished is not None and polished[2] <= violation:
        alphas, grad, violation = polished
    return alphas, grad, it, violation


def _max_violation(alphas: np.ndarray, grad: np.ndarray, c: float) -> float:
    lo = np.min(np.where(alphas < c, grad, np.inf))
    hi = np.max(np.where(alphas > 0, grad, -np.inf))
    return float(hi - lo)


def _polish(alphas: np.ndarray, rows: _KernelRows, c: float):
    """Solve the KKT equations exactly on the active set found by SMO.

    With the free set ``F`` and the upper-bound set ``U`` fixed, optimality
    reads ``K_FF a_F - rho = -c K_FU 1`` and ``sum(a_F) = 1 - c |U|``.
    Returns ``(alphas, grad, violation)`` or None when the solution leaves
    the box or the system is singular.
    """
    free = np.flatnonzero((alphas > 0) & (alphas < c))
    upper = np.flatnonzero(alphas >= c)
    if len(free) == 0:
        return None
    f = len(free)
    k_rows = {i: rows[i] for i in np.concatenate([free, upper])}
    system = np.zeros((f + 1, f + 1))
    rhs = np.zeros(f + 1)
    for r, i in enumerate(free):
        system[r, :f] = k_rows[i][free]
        system[r, f] = -1.0
        rhs[r] = -c * k_rows[i][upper].sum()
    system[f, :f] = 1.0
    rhs[f] = 1.0 - c * len(upper)
    try:
        sol = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        return None
    a_free = sol[:f]
    if not np.all(np.isfinite(a_free)) or np.any(a_free <= 0) or np.any(a_free >= c):
        return None
    out = np.zeros_like(alphas)
    out[upper] = c
    out[free] = a_free
    grad = c * sum((k_rows[i] for i in upper), np.zeros(len(alphas)))
    for r, i in enumerate(free):
        grad += a_free[r] * k_rows[i]
    return out, grad, _max_violation(out, grad, c)


def train(features, config: OcSvmConfig = OcSvmConfig(), standardizer: StandardizerStats | None = None) -> OcSvmModel:
    """Fit a one-class SVM on standardized feature rows."""
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise ValidationError("features must be a 2-D matrix")
    s, k = x.shape
    if s < 2:
        raise ValidationError("need at least 2 training rows")
    if config.nu * s < 1:
        raise ValidationError(f"nu * s = {config.nu * s:.3g} < 1; need more rows or a larger nu")
    if not np.all(np.isfinite(x)):
        raise ValidationError("features contain non-finite values")
    gamma = config.resolve_gamma(k)
    c = 1.0 / (config.nu * s)
    alphas, grad, it, violation = solve_dual(
        x, gamma, config.nu, config.kkt_tolerance, config.max_iterations, config.cache_rows
    )

    sv = alphas > 0
    free = sv & (alphas < c)
    rho = float(grad[free].mean()) if np.any(free) else float(grad[sv].min())
    return OcSvmModel(
        support_vectors=x[sv].copy(),
        alphas=alphas[sv].copy(),
        rho=rho,
        gamma=gamma,
        nu=config.nu,
        standardizer=standardizer,
        iterations=it,
        kkt_violation=violation,
    )
