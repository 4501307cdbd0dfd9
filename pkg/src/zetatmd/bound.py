"""Generalisation-gap bound with unit big-O constants, plus the curves built on it.

    bound = L_hat + T1 + T2 + T3 + T4
    T1 = b * S * xi^(2/D) / (N^(2a) * (gamma/8)^(2/D))
    T2 = b^2 * max(0, ln(2 b D C_spec (2 d B)^(1/D))) / (N^(2a) * gamma^(1/D) * delta)
    T3 = 1 / N^(1 - 2a)
    T4 = C_eta * K * xi

with S the sum of squared spectral norms.  The (2dB)^(1/D) factor is taken
as 1 when d*B = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Sequence

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class BoundParams:
    gamma: float
    delta: float
    alpha: float
    n_train: int
    classes: int
    lip_eta: float
    spec_cap: float
    hidden_dim: int
    depth_count: int
    max_degree: int
    feature_bound: float
    weight_sq_norm_sum: float
    train_margin_loss: float
    xi: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.integer, np.floating)):
                raise ContractError(f"{f.name} must be a number, got {v!r}")
            if not math.isfinite(v):
                raise ContractError(f"{f.name} must be finite")
        checks = [
            ("gamma", self.gamma > 0, "> 0"),
            ("delta", 0 < self.delta < 1, "in (0, 1)"),
            ("alpha", 0 < self.alpha < 0.25, "in (0, 0.25)"),
            ("n_train", self.n_train >= 1 and float(self.n_train).is_integer(), "an integer >= 1"),
            ("classes", self.classes >= 2 and float(self.classes).is_integer(), "an integer >= 2"),
            ("lip_eta", self.lip_eta >= 0, ">= 0"),
            ("spec_cap", self.spec_cap > 0, "> 0"),
            ("hidden_dim", self.hidden_dim >= 1 and float(self.hidden_dim).is_integer(), "an integer >= 1"),
            ("depth_count", self.depth_count >= 1 and float(self.depth_count).is_integer(), "an integer >= 1"),
            ("max_degree", self.max_degree >= 0 and float(self.max_degree).is_integer(), "an integer >= 0"),
            ("feature_bound", self.feature_bound >= 0, ">= 0"),
            ("weight_sq_norm_sum", self.weight_sq_norm_sum >= 0, ">= 0"),
            ("train_margin_loss", 0 <= self.train_margin_loss <= 1, "in [0, 1]"),
            ("xi", self.xi >= 0, ">= 0"),
        ]
        for name, ok, rule in checks:
            if not ok:
                raise ContractError(f"{name} must be {rule}, got {getattr(self, name)!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "BoundParams":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ContractError(f"unknown bound parameters: {', '.join(sorted(unknown))}")
        missing = {f.name for f in fields(cls) if f.name != "xi"} - set(d)
        if missing:
            raise ContractError(f"missing bound parameters: {', '.join(sorted(missing))}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def bound_terms(p: BoundParams) -> tuple:
    """(T1, T2, T3, T4)."""
    b, D, N, a = float(p.hidden_dim), float(p.depth_count), float(p.n_train), p.alpha
    scale = N ** (2 * a)
    t1 = b * p.weight_sq_norm_sum * p.xi ** (2 / D) / (scale * (p.gamma / 8) ** (2 / D))
    db = p.max_degree * p.feature_bound
    geom = (2 * db) ** (1 / D) if db > 0 else 1.0
    log_term = max(0.0, math.log(2 * b * D * p.spec_cap * geom))
    t2 = b * b * log_term / (scale * p.gamma ** (1 / D) * p.delta)
    t3 = 1.0 / N ** (1 - 2 * a)
    t4 = p.lip_eta * p.classes * p.xi
    return t1, t2, t3, t4


def generalization_gap_bound(p: BoundParams) -> float:
    t1, t2, t3, t4 = bound_terms(p)
    return p.train_margin_loss + t1 + t2 + t3 + t4


def fixed_encoder_bound(p: BoundParams, xi_latent: float) -> float:
    """Same formula with classifier-only parameters and the latent-space xi."""
    if not xi_latent >= 0:
        raise ContractError("xi_latent must be >= 0")
    return generalization_gap_bound(replace(p, xi=float(xi_latent)))


def bound_curve(per_test_min_dist: Sequence[float], p: BoundParams) -> np.ndarray:
    """Bound with xi set to each prefix maximum of sorted per-test minima."""
    d = np.asarray(per_test_min_dist, dtype=np.float64).ravel()
    if np.any(~np.isfinite(d)) or np.any(d < 0):
        raise ContractError("distances must be finite and >= 0")
    if np.any(np.diff(d) < 0):
        raise ContractError("distances must be sorted ascending")
    prefix = np.maximum.accumulate(d) if d.size else d
    return np.array([generalization_gap_bound(replace(p, xi=float(x))) for x in prefix])


def cumulative_accuracy(per_test_min_dist: Sequence[float], correct: Sequence) -> np.ndarray:
    """Prefix mean of correctness after a stable sort by distance."""
    d = np.asarray(per_test_min_dist, dtype=np.float64).ravel()
    c = np.asarray(correct, dtype=np.float64).ravel()
    if d.shape != c.shape:
        raise ContractError(f"length mismatch: {d.size} distances, {c.size} flags")
    if np.any(~np.isfinite(d)) or np.any(d < 0):
        raise ContractError("distances must be finite and >= 0")
    if np.any((c != 0) & (c != 1)):
        raise ContractError("correctness flags must be 0 or 1")
    order = np.argsort(d, kind="stable")
    return np.cumsum(c[order]) / np.arange(1, d.size + 1)
