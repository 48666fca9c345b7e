"""Batch selection of unlabeled pairs: uniform random or model uncertainty.

A PairPool tracks which unordered pairs have already been queried so no
pair is labeled twice within a run. Uncertainty sampling scores a random
candidate subset instead of the full quadratic pair universe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .boosting import PairEnsemble, pair_features
from .prep import PreparedDataset
from .seeds import as_generator

RANDOM = "random"
UNCERTAINTY = "uncertainty"

# Below this many unqueried pairs the sampler enumerates instead of
# rejection-sampling, which keeps near-exhausted pools fast.
_ENUMERATE_LIMIT = 1024


@dataclass
class QueryBatch:
    pairs: list[tuple[int, int]]
    strategy: str


@dataclass
class PairPool:
    """Unordered-pair universe over n rows minus the already-queried set."""

    n: int
    candidate_pool_factor: int = 20
    _queried: set[tuple[int, int]] = field(default_factory=set)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("pool needs at least two rows")
        if self.candidate_pool_factor < 1:
            raise ValueError("candidate_pool_factor must be positive")

    @property
    def total_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def remaining(self) -> int:
        return self.total_pairs - len(self._queried)

    def is_queried(self, u: int, v: int) -> bool:
        return _key(u, v) in self._queried

    def record(self, pairs: list[tuple[int, int]]) -> None:
        """Mark pairs as queried; rejects repeats and degenerate pairs."""
        for u, v in pairs:
            key = _key(u, v)
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"invalid pair ({u}, {v})")
            if key in self._queried:
                raise ValueError(f"pair ({u}, {v}) was already queried")
            self._queried.add(key)


def _key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _draw_unordered(
    pool: PairPool, count: int, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """Draw distinct unqueried unordered pairs uniformly, without replacement."""
    remaining = pool.remaining
    if count > remaining:
        raise ValueError(
            f"pair pool exhausted: requested {count}, only {remaining} remain"
        )
    if remaining <= max(4 * count, _ENUMERATE_LIMIT):
        complement = [
            pair
            for pair in itertools.combinations(range(pool.n), 2)
            if pair not in pool._queried
        ]
        chosen = rng.choice(len(complement), size=count, replace=False)
        return [complement[i] for i in chosen]

    picked: set[tuple[int, int]] = set()
    out: list[tuple[int, int]] = []
    while len(out) < count:
        u = int(rng.integers(pool.n))
        v = int(rng.integers(pool.n))
        if u == v:
            continue
        key = _key(u, v)
        if key in picked or key in pool._queried:
            continue
        picked.add(key)
        out.append(key)
    return out


def _orient(
    pairs: list[tuple[int, int]], rng: np.random.Generator
) -> list[tuple[int, int]]:
    # Fair-coin orientation keeps the two label classes balanced.
    coins = rng.random(len(pairs)) < 0.5
    return [(v, u) if flip else (u, v) for (u, v), flip in zip(pairs, coins)]


def sample_random(
    pool: PairPool, n_b: int, rng_seed: int | np.random.Generator
) -> QueryBatch:
    """Uniform batch over the unqueried pairs, orientation randomized."""
    if n_b < 1:
        raise ValueError("batch size must be positive")
    rng = as_generator(rng_seed)
    pairs = _orient(_draw_unordered(pool, n_b, rng), rng)
    return QueryBatch(pairs=pairs, strategy=RANDOM)


def sample_uncertain(
    pool: PairPool,
    n_b: int,
    model: PairEnsemble,
    dataset: PreparedDataset,
    rng_seed: int | np.random.Generator,
) -> QueryBatch:
    """Pick the batch closest to a 0.5 predicted preference probability.

    Scores a random candidate subset of ``candidate_pool_factor * n_b``
    unqueried pairs with u(z) = 1 - |2 p(z) - 1| and keeps the ``n_b`` most
    uncertain; ties resolve in seeded random order, so a constant-scoring
    model degenerates to random selection among the candidates.
    """
    if n_b < 1:
        raise ValueError("batch size must be positive")
    rng = as_generator(rng_seed)
    n_candidates = min(pool.candidate_pool_factor * n_b, pool.remaining)
    if n_candidates < n_b:
        raise ValueError(
            f"pair pool exhausted: requested {n_b}, only {pool.remaining} remain"
        )
    candidates = _orient(_draw_unordered(pool, n_candidates, rng), rng)
    first = np.fromiter((u for u, _ in candidates), dtype=int, count=n_candidates)
    second = np.fromiter((v for _, v in candidates), dtype=int, count=n_candidates)
    probs = model.predict_prob(pair_features(dataset.X, first, second))
    uncertainty = 1.0 - np.abs(2.0 * probs - 1.0)
    tiebreak = rng.permutation(n_candidates)
    order = np.lexsort((tiebreak, -uncertainty))
    chosen = [candidates[i] for i in order[:n_b]]
    return QueryBatch(pairs=chosen, strategy=UNCERTAINTY)
