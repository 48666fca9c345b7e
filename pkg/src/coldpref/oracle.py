"""Simulated noisy expert: Bradley-Terry preference probabilities over the
true targets, with Bernoulli label draws from an isolated random stream.

Two probability models are supported. Standard mode compares positive
strengths derived from the targets, beta_u / (beta_u + beta_v). Exponential
mode applies a logistic function to the scaled target difference, which
depends only on that difference. The oracle's randomness lives in its own
seeded stream so different query policies face identically distributed
noise per query index.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

STANDARD = "standard"
EXPONENTIAL = "exponential"
MODES = (STANDARD, EXPONENTIAL)

IDENTITY = "identity"
MIN_MAX_SHIFT = "min_max_shift"
TRANSFORMS = (IDENTITY, MIN_MAX_SHIFT)


@dataclass(frozen=True)
class OracleConfig:
    mode: str = EXPONENTIAL
    transform: str = MIN_MAX_SHIFT  # standard mode only
    shift_delta: float = 0.01
    score_scale: float | None = None  # exponential mode; None means 1/std(y)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown oracle mode {self.mode!r}")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"unknown strength transform {self.transform!r}")
        if self.shift_delta <= 0.0:
            raise ValueError("shift_delta must be positive")
        if self.score_scale is not None and self.score_scale <= 0.0:
            raise ValueError("score_scale must be positive")


@dataclass(frozen=True)
class TargetStats:
    y_min: float
    y_max: float
    y_std: float

    @classmethod
    def from_targets(cls, y: np.ndarray) -> "TargetStats":
        y = np.asarray(y, dtype=float)
        return cls(float(y.min()), float(y.max()), float(y.std()))


@dataclass
class OracleLabel:
    u: int
    v: int
    prob_first_preferred: float
    label: int


def default_score_scale(stats: TargetStats) -> float:
    """Logistic scale 1/std(y); unit scale for a constant target."""
    if stats.y_std < 1e-12:
        return 1.0
    return 1.0 / stats.y_std


def strength(y_k: float, config: OracleConfig, y_min: float, y_max: float) -> float:
    """Positive comparison strength for one target value (standard mode)."""
    if not math.isfinite(y_k):
        raise ValueError("target value must be finite")
    if config.transform == IDENTITY:
        if y_k <= 0.0:
            raise ValueError(
                "identity transform needs positive targets; use min_max_shift "
                "or the exponential mode"
            )
        return float(y_k)
    if y_max == y_min:
        return config.shift_delta
    return (y_k - y_min) / (y_max - y_min) + config.shift_delta


def preference_prob(
    y_u: float, y_v: float, config: OracleConfig, stats: TargetStats
) -> float:
    """Probability that the first item is preferred given true targets."""
    if not (math.isfinite(y_u) and math.isfinite(y_v)):
        raise ValueError("target values must be finite")
    if config.mode == STANDARD:
        beta_u = strength(y_u, config, stats.y_min, stats.y_max)
        beta_v = strength(y_v, config, stats.y_min, stats.y_max)
        return beta_u / (beta_u + beta_v)
    scale = config.score_scale
    if scale is None:
        scale = default_score_scale(stats)
    diff = scale * (y_u - y_v)
    if diff >= 0:
        return 1.0 / (1.0 + math.exp(-diff))
    e = math.exp(diff)
    return e / (1.0 + e)


class Oracle:
    """Stateful labeler over one dataset's targets.

    One uniform variate is consumed per query in call order, so the noise
    stream per query index is fixed by the seed alone. Single-threaded use
    per run; distinct runs take distinct seeds.
    """

    def __init__(self, y: np.ndarray, config: OracleConfig, keep_log: bool = False):
        self._y = np.asarray(y, dtype=float)
        self.config = config
        self.stats = TargetStats.from_targets(self._y)
        self._rng = np.random.default_rng(config.seed)
        self.queries_made = 0
        self.log: list[OracleLabel] | None = [] if keep_log else None

    def label_pair(self, u: int, v: int) -> OracleLabel:
        if u == v:
            raise ValueError("degenerate pair")
        prob = preference_prob(
            float(self._y[u]), float(self._y[v]), self.config, self.stats
        )
        label = int(self._rng.random() < prob)
        self.queries_made += 1
        out = OracleLabel(int(u), int(v), prob, label)
        if self.log is not None:
            self.log.append(out)
        return out

    def label_batch(self, pairs: list[tuple[int, int]]) -> np.ndarray:
        return np.asarray([self.label_pair(u, v).label for u, v in pairs])

    def write_log_csv(self, path: str) -> None:
        if self.log is None:
            raise ValueError("oracle was created without keep_log")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["u", "v", "prob", "label"])
            for entry in self.log:
                writer.writerow(
                    [entry.u, entry.v, repr(entry.prob_first_preferred), entry.label]
                )
