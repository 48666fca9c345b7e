"""One-component PCA warm-up: principal direction, residual diagnostics,
pseudo-pair budgeting, and residual-weighted pseudo-label sampling.

The projections onto the leading direction act as surrogate utility scores
before any oracle interaction, so pre-training consumes zero label budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seeds import as_generator

POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000

SCALE_RANGE = (1.0, 100.0)
PENALTY_RANGE = (1e-7, 1e-4)
DEFAULT_EPSILON = 1e-6


@dataclass
class PcaModel:
    """Leading principal direction with per-row reconstruction residuals."""

    direction: np.ndarray  # unit vector, length p
    scores: np.ndarray  # projections, length n
    residuals: np.ndarray  # distance to the rank-1 reconstruction, length n
    residual_variance: float  # mean squared residual

    @property
    def n(self) -> int:
        return len(self.scores)


@dataclass
class WarmupPlan:
    """Pseudo-pair budget and per-row selection probabilities."""

    scale: float
    residual_penalty: float
    epsilon: float
    n_pairs: int
    selection_probs: np.ndarray


@dataclass
class PseudoLabeledPair:
    u: int
    v: int
    label: int  # 1 when the first item scores strictly higher
    source: str = "pca"


def _canonical_sign(direction: np.ndarray) -> np.ndarray:
    # Largest-magnitude entry made positive; argmax takes the lowest index
    # on ties. Keeps scores reproducible across eigensolver sign flips.
    pivot = int(np.argmax(np.abs(direction)))
    if direction[pivot] < 0:
        return -direction
    return direction


def fit_first_component(X: np.ndarray) -> PcaModel:
    """Fit the leading principal direction of a column-centered matrix.

    Power iteration with a deterministic start vector; falls back to a full
    symmetric eigendecomposition when the iteration stalls (for example a
    vanishing eigengap). Raises on degenerate all-zero input.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    n, p = X.shape
    if n < 3:
        raise ValueError("dataset too small")
    if p < 1:
        raise ValueError("X needs at least one column")
    if np.any(np.abs(X.mean(axis=0)) > 1e-6):
        raise ValueError("X must be column-centered")

    cov = X.T @ X / n

    # Ones vector perturbed at index 0 so the start is never orthogonal to
    # a direction with uniform weights.
    v = np.ones(p)
    v[0] += 0.5
    v /= np.linalg.norm(v)

    direction = None
    for _ in range(POWER_MAX_ITER):
        w = cov @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        w /= norm
        if min(np.linalg.norm(w - v), np.linalg.norm(w + v)) < POWER_TOL:
            direction = w
            break
        v = w
    if direction is None:
        eigenvalues, eigenvectors = np.linalg.eigh(cov)
        direction = eigenvectors[:, -1]
        top = float(eigenvalues[-1])
    else:
        top = float(direction @ cov @ direction)
    if top <= 0.0:
        raise ValueError("degenerate data")

    direction = _canonical_sign(direction)
    scores = X @ direction
    residuals = np.linalg.norm(X - np.outer(scores, direction), axis=1)
    return PcaModel(
        direction=direction,
        scores=scores,
        residuals=residuals,
        residual_variance=float(np.mean(residuals**2)),
    )


def pretrain_pair_count(
    n: int, scale: float, residual_penalty: float, residual_variance: float
) -> int:
    """Pseudo-pair budget before clamping: floor(n*scale / (1 + penalty*var))."""
    return math.floor(n * scale / (1.0 + residual_penalty * residual_variance))


def selection_probabilities(residuals: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-row selection weights inversely proportional to the residual."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    weights = 1.0 / (np.asarray(residuals, dtype=float) + epsilon)
    return weights / weights.sum()


def plan_warmup(
    model: PcaModel,
    n: int,
    scale: float,
    residual_penalty: float,
    epsilon: float = DEFAULT_EPSILON,
) -> WarmupPlan:
    """Size the pseudo-pair budget and fix the row selection distribution.

    The budget grows with ``scale`` and shrinks when the rank-1 fit is poor
    (large residual variance); it is clamped to the count of ordered
    distinct pairs.
    """
    if not SCALE_RANGE[0] <= scale <= SCALE_RANGE[1]:
        raise ValueError(f"scale must be in [{SCALE_RANGE[0]}, {SCALE_RANGE[1]}]")
    if not PENALTY_RANGE[0] <= residual_penalty <= PENALTY_RANGE[1]:
        raise ValueError(
            f"residual_penalty must be in [{PENALTY_RANGE[0]}, {PENALTY_RANGE[1]}]"
        )
    if len(model.residuals) != n:
        raise ValueError("model size does not match n")
    raw = pretrain_pair_count(n, scale, residual_penalty, model.residual_variance)
    n_pairs = min(raw, n * (n - 1))
    return WarmupPlan(
        scale=scale,
        residual_penalty=residual_penalty,
        epsilon=epsilon,
        n_pairs=n_pairs,
        selection_probs=selection_probabilities(model.residuals, epsilon),
    )


def draw_warmup_points(
    plan: WarmupPlan, size: int, rng: int | np.random.Generator
) -> np.ndarray:
    """Draw row indices from the plan's selection distribution."""
    rng = as_generator(rng)
    return rng.choice(len(plan.selection_probs), size=size, p=plan.selection_probs)


_REJECTION_ROUNDS = 100


def sample_pseudo_pairs(
    plan: WarmupPlan, model: PcaModel, rng_seed: int | np.random.Generator
) -> list[PseudoLabeledPair]:
    """Sample the pre-training pairs and label them from the scores.

    Each pair draws its first item from the selection distribution and its
    second from the same distribution conditioned on being distinct.
    Duplicate pairs may repeat across the sample. Label 1 means the first
    item scores strictly higher; ties label 0.
    """
    n = model.n
    if plan.n_pairs == 0:
        return []
    if n < 2:
        raise ValueError("need at least two rows to form pairs")
    rng = as_generator(rng_seed)

    first = draw_warmup_points(plan, plan.n_pairs, rng)
    second = draw_warmup_points(plan, plan.n_pairs, rng)
    clash = np.flatnonzero(first == second)
    rounds = 0
    while clash.size and rounds < _REJECTION_ROUNDS:
        second[clash] = draw_warmup_points(plan, clash.size, rng)
        clash = clash[second[clash] == first[clash]]
        rounds += 1
    for i in clash:
        # Nearly-degenerate weights: fall back to the exact conditional.
        probs = plan.selection_probs.copy()
        probs[first[i]] = 0.0
        probs /= probs.sum()
        second[i] = rng.choice(n, p=probs)

    labels = (model.scores[first] > model.scores[second]).astype(int)
    return [
        PseudoLabeledPair(int(u), int(v), int(lab))
        for u, v, lab in zip(first, second, labels)
    ]


def warmup_report(
    model: PcaModel, plan: WarmupPlan, feature_names: list[str], top: int = 10
) -> str:
    """Plain-text diagnostic: heaviest direction weights and the budget."""
    order = np.argsort(-np.abs(model.direction))[:top]
    lines = ["warm-up diagnostics", "==================="]
    for j in order:
        lines.append(f"  {feature_names[j]}: weight {model.direction[j]:+.4f}")
    lines.append(f"residual variance: {model.residual_variance:.6g}")
    lines.append(f"pseudo-label pairs: {plan.n_pairs}")
    return "\n".join(lines) + "\n"
