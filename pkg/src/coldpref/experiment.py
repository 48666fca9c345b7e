"""Learning-policy orchestration: the active loop, F1 evaluation on a fixed
pair test set, run aggregation, and the practical-limit benchmark.

Three policies are compared. ``random_blank`` starts from a blank model and
queries random pairs. ``warmstart_uncertainty`` starts blank but queries by
model uncertainty. ``coldstart_pretrained`` first pre-trains on PCA
pseudo-labels (consuming zero oracle queries) and then queries by
uncertainty. Runs are independent, deterministic jobs: every random stream
is derived from (master_seed, role, policy, run), and the oracle stream
depends only on the run index so all policies face the same noise sequence
per query index.
"""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .boosting import (
    BoostConfig,
    PairEnsemble,
    default_tree_depth,
    pair_features,
    _sigmoid,
)
from .oracle import Oracle, OracleConfig
from .pca import (
    DEFAULT_EPSILON,
    PcaModel,
    fit_first_component,
    plan_warmup,
    sample_pseudo_pairs,
)
from .prep import PreparedDataset
from .sampler import PairPool, sample_random, sample_uncertain
from .seeds import child_seed

RANDOM_BLANK = "random_blank"
WARMSTART_UNCERTAINTY = "warmstart_uncertainty"
COLDSTART_PRETRAINED = "coldstart_pretrained"
POLICIES = (RANDOM_BLANK, WARMSTART_UNCERTAINTY, COLDSTART_PRETRAINED)

DEFAULT_TEST_PAIRS = 20_000

RESULTS_HEADER = ["dataset", "policy", "run", "seed", "queries", "f1"]
AGGREGATE_HEADER = ["dataset", "policy", "queries", "f1_mean", "f1_std", "n_runs"]
LIMIT_HEADER = ["dataset", "f1_limit"]


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one experiment needs besides the dataset itself."""

    start: int = 50
    step: int = 50
    max_queries: int = 800
    n_runs: int = 40
    n_test: int = DEFAULT_TEST_PAIRS
    policies: tuple[str, ...] = POLICIES
    warmup_scale: float = 2.0
    warmup_residual_penalty: float = 1e-5
    warmup_epsilon: float = DEFAULT_EPSILON
    oracle: OracleConfig = field(default_factory=OracleConfig)
    learning_rate: float = 0.1
    l2_lambda: float = 1.0
    rounds_warmup: int = 500
    rounds_increment: int = 25
    max_depth: int | None = None  # None: round(sqrt(p)) from the dataset
    candidate_pool_factor: int = 20
    limit_batch: int = 1000
    limit_iterations: int = 100
    test_disjoint: bool = False
    reuse_warmup: bool = False
    master_seed: int = 0

    @classmethod
    def low_data(cls, **overrides) -> "ScenarioConfig":
        """Averaged low-budget scenario: 50-pair steps to 800, 40 runs."""
        return cls(**overrides)

    @classmethod
    def extended(cls, **overrides) -> "ScenarioConfig":
        """Single-run trajectory out to 10,000 oracle queries."""
        overrides.setdefault("max_queries", 10_000)
        overrides.setdefault("n_runs", 1)
        return cls(**overrides)

    def validate(self) -> list[str]:
        """Collect every configuration problem instead of failing fast."""
        errors = []
        if self.start <= 0:
            errors.append(f"start must be positive (got {self.start})")
        if self.step <= 0:
            errors.append(f"step must be positive (got {self.step})")
        if self.start > 0 and self.step > 0:
            if self.max_queries < self.start:
                errors.append(
                    f"max_queries must be at least start (got {self.max_queries})"
                )
            elif (self.max_queries - self.start) % self.step != 0:
                errors.append(
                    "max_queries must lie on the query grid "
                    f"(start {self.start} plus multiples of {self.step})"
                )
        if self.n_runs < 1:
            errors.append(f"n_runs must be positive (got {self.n_runs})")
        if self.n_test < 1:
            errors.append(f"n_test must be positive (got {self.n_test})")
        for policy in self.policies:
            if policy not in POLICIES:
                errors.append(
                    f"unknown policy {policy!r}; valid: {', '.join(POLICIES)}"
                )
        if not self.policies:
            errors.append("at least one policy is required")
        if not 1.0 <= self.warmup_scale <= 100.0:
            errors.append(
                f"warmup_scale must be in [1, 100] (got {self.warmup_scale})"
            )
        if not 1e-7 <= self.warmup_residual_penalty <= 1e-4:
            errors.append(
                "warmup_residual_penalty must be in [1e-07, 0.0001] "
                f"(got {self.warmup_residual_penalty})"
            )
        if self.warmup_epsilon <= 0.0:
            errors.append(
                f"warmup_epsilon must be positive (got {self.warmup_epsilon})"
            )
        if self.learning_rate <= 0.0:
            errors.append(
                f"learning_rate must be positive (got {self.learning_rate})"
            )
        if self.l2_lambda < 0.0:
            errors.append(f"l2_lambda must be nonnegative (got {self.l2_lambda})")
        if self.rounds_warmup < 1:
            errors.append(
                f"rounds_warmup must be positive (got {self.rounds_warmup})"
            )
        if self.rounds_increment < 0:
            errors.append(
                f"rounds_increment must be nonnegative (got {self.rounds_increment})"
            )
        if self.max_depth is not None and self.max_depth < 1:
            errors.append(f"max_depth must be positive (got {self.max_depth})")
        if self.candidate_pool_factor < 1:
            errors.append(
                "candidate_pool_factor must be positive "
                f"(got {self.candidate_pool_factor})"
            )
        if self.limit_batch < 1:
            errors.append(f"limit_batch must be positive (got {self.limit_batch})")
        if self.limit_iterations < 1:
            errors.append(
                f"limit_iterations must be positive (got {self.limit_iterations})"
            )
        return errors

    def batch_sizes(self) -> list[int]:
        return [self.start] + [self.step] * ((self.max_queries - self.start) // self.step)

    def query_grid(self) -> list[int]:
        return list(np.cumsum(self.batch_sizes()))

    def learner_config(self, n_dataset_features: int) -> BoostConfig:
        # Depth heuristic takes the dataset column count, not the doubled
        # pair-vector length.
        depth = self.max_depth
        if depth is None:
            depth = default_tree_depth(n_dataset_features)
        return BoostConfig(
            max_depth=depth,
            learning_rate=self.learning_rate,
            l2_lambda=self.l2_lambda,
            rounds_warmup=self.rounds_warmup,
            rounds_increment=self.rounds_increment,
        )


@dataclass
class TestSet:
    """Fixed evaluation pairs labeled noiselessly from the true targets."""

    first: np.ndarray
    second: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    def unordered_pairs(self) -> list[tuple[int, int]]:
        return [
            (int(u), int(v)) if u < v else (int(v), int(u))
            for u, v in zip(self.first, self.second)
        ]


def build_test_set(
    dataset: PreparedDataset, n_test: int = DEFAULT_TEST_PAIRS, seed: int = 0
) -> TestSet:
    """Sample distinct unordered pairs uniformly and label them from y.

    Orientation is randomized by fair coin; the label is 1 when the first
    item's target is strictly larger (ties label 0). Oversized requests
    clamp to the pair universe with a warning.
    """
    cap = dataset.n * (dataset.n - 1) // 2
    if n_test > cap:
        warnings.warn(
            f"n_test={n_test} exceeds the {cap} distinct pairs; clamping",
            stacklevel=2,
        )
        n_test = cap
    rng = np.random.default_rng(seed)
    pool = PairPool(dataset.n)
    batch = sample_random(pool, n_test, rng)
    first = np.asarray([u for u, _ in batch.pairs])
    second = np.asarray([v for _, v in batch.pairs])
    labels = (dataset.y[first] > dataset.y[second]).astype(int)
    return TestSet(first=first, second=second, labels=labels)


def f1_score(predictions, truths) -> float:
    """Positive-class F1; 0 by convention when precision+recall is 0."""
    predictions = np.asarray(predictions)
    truths = np.asarray(truths)
    if predictions.shape != truths.shape:
        raise ValueError("predictions and truths differ in length")
    if predictions.size == 0:
        raise ValueError("empty inputs")
    pred_pos = predictions == 1
    true_pos = truths == 1
    tp = int(np.sum(pred_pos & true_pos))
    fp = int(np.sum(pred_pos & ~true_pos))
    fn = int(np.sum(~pred_pos & true_pos))
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2 * tp / denom


@dataclass
class CurveRow:
    dataset: str
    policy: str
    run: int
    seed: int
    queries: int
    f1: float


@dataclass
class AggregateRow:
    dataset: str
    policy: str
    queries: int
    f1_mean: float
    f1_std: float
    n_runs: int


class _TestScorer:
    """Incremental F1 evaluation against a fixed test set.

    Fitted trees are never modified, so raw scores on the test pairs are
    cached and only trees appended since the last call are evaluated.
    """

    def __init__(self, dataset: PreparedDataset, test_set: TestSet):
        self.Z = pair_features(dataset.X, test_set.first, test_set.second)
        self.labels = test_set.labels
        self._raw: np.ndarray | None = None
        self._trees_done = 0

    def f1(self, model: PairEnsemble) -> float:
        if self._raw is None:
            self._raw = np.full(len(self.Z), model.base_logit)
        for tree in model.trees[self._trees_done :]:
            self._raw += model.config.learning_rate * tree.predict(self.Z)
        self._trees_done = len(model.trees)
        preds = (_sigmoid(self._raw) > 0.5).astype(int)
        return f1_score(preds, self.labels)


def fit_warmup_model(
    dataset: PreparedDataset,
    scenario: ScenarioConfig,
    warmup_seed: int,
    pca_model: PcaModel | None = None,
    flip_scores: bool = False,
) -> PairEnsemble:
    """Pre-train an ensemble on PCA pseudo-labels; zero oracle queries.

    A zero pseudo-pair budget degenerates to a blank model. ``flip_scores``
    trains against the reversed score orientation, used only as a
    diagnostic.
    """
    if pca_model is None:
        pca_model = fit_first_component(dataset.X)
    if flip_scores:
        pca_model = PcaModel(
            direction=-pca_model.direction,
            scores=-pca_model.scores,
            residuals=pca_model.residuals,
            residual_variance=pca_model.residual_variance,
        )
    plan = plan_warmup(
        pca_model,
        dataset.n,
        scenario.warmup_scale,
        scenario.warmup_residual_penalty,
        scenario.warmup_epsilon,
    )
    config = scenario.learner_config(dataset.p)
    pairs = sample_pseudo_pairs(plan, pca_model, warmup_seed)
    if not pairs:
        return PairEnsemble(config)
    first = np.asarray([pair.u for pair in pairs])
    second = np.asarray([pair.v for pair in pairs])
    labels = np.asarray([pair.label for pair in pairs])
    Z = pair_features(dataset.X, first, second)
    return PairEnsemble.fit_initial(Z, labels, config)


def run_policy(
    policy: str,
    dataset: PreparedDataset,
    dataset_id: str,
    scenario: ScenarioConfig,
    run_index: int,
    test_set: TestSet | None = None,
    warm_model: PairEnsemble | None = None,
) -> list[CurveRow]:
    """Execute one policy for one run and return its learning curve."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; valid: {', '.join(POLICIES)}")
    master = scenario.master_seed
    if test_set is None:
        test_set = build_test_set(
            dataset, scenario.n_test, child_seed(master, "testset")
        )
    run_seed = child_seed(master, "run", policy, run_index)
    sampler_rng = np.random.default_rng(
        child_seed(master, "sampler", policy, run_index)
    )
    # The oracle stream ignores the policy so compared policies face the
    # same noise sequence per query index.
    oracle = Oracle(
        dataset.y,
        replace(scenario.oracle, seed=child_seed(master, "oracle", run_index)),
    )

    if policy == COLDSTART_PRETRAINED:
        if warm_model is not None:
            model = warm_model.copy()
        else:
            model = fit_warmup_model(
                dataset,
                scenario,
                child_seed(master, "warmup", policy, run_index),
            )
    else:
        model = PairEnsemble(scenario.learner_config(dataset.p))

    pool = PairPool(dataset.n, scenario.candidate_pool_factor)
    if scenario.test_disjoint:
        pool.record(list(dict.fromkeys(test_set.unordered_pairs())))

    scorer = _TestScorer(dataset, test_set)
    rows = []
    cumulative = 0
    for batch_size in scenario.batch_sizes():
        if policy == RANDOM_BLANK:
            batch = sample_random(pool, batch_size, sampler_rng)
        else:
            batch = sample_uncertain(pool, batch_size, model, dataset, sampler_rng)
        pool.record(batch.pairs)
        labels = oracle.label_batch(batch.pairs)
        first = np.asarray([u for u, _ in batch.pairs])
        second = np.asarray([v for _, v in batch.pairs])
        model.update(pair_features(dataset.X, first, second), labels)
        cumulative += batch_size
        assert oracle.queries_made == cumulative
        rows.append(
            CurveRow(dataset_id, policy, run_index, run_seed, cumulative, scorer.f1(model))
        )
    return rows


def _run_policy_job(args) -> list[CurveRow]:
    return run_policy(*args)


def run_scenario(
    dataset: PreparedDataset,
    dataset_id: str,
    scenario: ScenarioConfig,
    jobs: int = 1,
) -> list[CurveRow]:
    """Run every configured (policy, run) job and return canonical rows.

    Jobs are independent and may execute in parallel; the output ordering
    is canonicalized so parallelism never changes the artifact.
    """
    errors = scenario.validate()
    if errors:
        raise ValueError("invalid scenario: " + "; ".join(errors))
    test_set = build_test_set(
        dataset, scenario.n_test, child_seed(scenario.master_seed, "testset")
    )
    warm_model = None
    if scenario.reuse_warmup and COLDSTART_PRETRAINED in scenario.policies:
        warm_model = fit_warmup_model(
            dataset,
            scenario,
            child_seed(scenario.master_seed, "warmup", COLDSTART_PRETRAINED, 0),
        )

    tasks = [
        (
            policy,
            dataset,
            dataset_id,
            scenario,
            run,
            test_set,
            warm_model if policy == COLDSTART_PRETRAINED else None,
        )
        for policy in scenario.policies
        for run in range(scenario.n_runs)
    ]
    rows: list[CurveRow] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(_run_policy_job, tasks):
                rows.extend(chunk)
    else:
        for task in tasks:
            rows.extend(_run_policy_job(task))
    rows.sort(key=lambda r: (r.dataset, r.policy, r.run, r.queries))
    return rows


def practical_limit(
    dataset: PreparedDataset,
    scenario: ScenarioConfig,
    test_set: TestSet | None = None,
) -> float:
    """Near-saturation benchmark F1 from a large actively-spent budget.

    Fits on one random batch, then refines over the remaining iterations
    with uncertainty-selected batches. When the pair universe cannot cover
    the full budget the batch size scales down proportionally.
    """
    batch = scenario.limit_batch
    iterations = scenario.limit_iterations
    capacity = dataset.n * (dataset.n - 1) // 2
    if batch * iterations > capacity:
        batch = capacity // iterations
        if batch < 1:
            raise ValueError(
                "dataset too small for the practical-limit benchmark"
            )
        warnings.warn(
            f"pair universe too small for the full budget; batch scaled to {batch}",
            stacklevel=2,
        )
    master = scenario.master_seed
    if test_set is None:
        test_set = build_test_set(
            dataset, scenario.n_test, child_seed(master, "testset")
        )
    sampler_rng = np.random.default_rng(child_seed(master, "limit", "sampler"))
    oracle = Oracle(
        dataset.y, replace(scenario.oracle, seed=child_seed(master, "limit", "oracle"))
    )
    pool = PairPool(dataset.n, scenario.candidate_pool_factor)
    config = scenario.learner_config(dataset.p)

    first_batch = sample_random(pool, batch, sampler_rng)
    pool.record(first_batch.pairs)
    labels = oracle.label_batch(first_batch.pairs)
    us = np.asarray([u for u, _ in first_batch.pairs])
    vs = np.asarray([v for _, v in first_batch.pairs])
    model = PairEnsemble.fit_initial(pair_features(dataset.X, us, vs), labels, config)

    for _ in range(iterations - 1):
        next_batch = sample_uncertain(pool, batch, model, dataset, sampler_rng)
        pool.record(next_batch.pairs)
        labels = oracle.label_batch(next_batch.pairs)
        us = np.asarray([u for u, _ in next_batch.pairs])
        vs = np.asarray([v for _, v in next_batch.pairs])
        model.update(pair_features(dataset.X, us, vs), labels)

    scorer = _TestScorer(dataset, test_set)
    return scorer.f1(model)


def warmup_orientation_f1(
    dataset: PreparedDataset,
    scenario: ScenarioConfig,
    test_set: TestSet | None = None,
) -> tuple[float, float]:
    """Warm-up-only test F1 under both score orientations.

    The principal direction's sign is not identifiable without labels;
    this diagnostic shows what pre-training alone achieves as-is versus
    reversed.
    """
    master = scenario.master_seed
    if test_set is None:
        test_set = build_test_set(
            dataset, scenario.n_test, child_seed(master, "testset")
        )
    pca_model = fit_first_component(dataset.X)
    seed = child_seed(master, "warmup", COLDSTART_PRETRAINED, 0)
    out = []
    for flip in (False, True):
        model = fit_warmup_model(dataset, scenario, seed, pca_model, flip_scores=flip)
        out.append(_TestScorer(dataset, test_set).f1(model))
    return out[0], out[1]


def aggregate_runs(rows: list[CurveRow]) -> list[AggregateRow]:
    """Per (dataset, policy, queries): mean, sample std, and run count.

    All runs of a (dataset, policy) group must share the same query grid.
    A single run reports std 0.
    """
    grouped: dict[tuple[str, str], dict[int, list[tuple[int, float]]]] = {}
    for row in rows:
        grouped.setdefault((row.dataset, row.policy), {}).setdefault(
            row.run, []
        ).append((row.queries, row.f1))

    out: list[AggregateRow] = []
    for (dataset_id, policy), runs in sorted(grouped.items()):
        grids = {tuple(q for q, _ in sorted(points)) for points in runs.values()}
        if len(grids) != 1:
            raise ValueError(
                f"inconsistent query grids for {dataset_id}/{policy}"
            )
        grid = grids.pop()
        by_query: dict[int, list[float]] = {q: [] for q in grid}
        for points in runs.values():
            for q, f1 in points:
                by_query[q].append(f1)
        for q in grid:
            values = np.asarray(by_query[q])
            std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
            out.append(
                AggregateRow(
                    dataset_id, policy, q, float(values.mean()), std, len(values)
                )
            )
    return out


def write_results_csv(rows: list[CurveRow], path: str) -> None:
    ordered = sorted(rows, key=lambda r: (r.dataset, r.policy, r.run, r.queries))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in ordered:
            writer.writerow([r.dataset, r.policy, r.run, r.seed, r.queries, repr(r.f1)])


def read_results_csv(path: str) -> list[CurveRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError("empty results CSV")
        if header != RESULTS_HEADER:
            raise ValueError(
                f"unexpected results header {header!r}; want {RESULTS_HEADER!r}"
            )
        rows = [
            CurveRow(r[0], r[1], int(r[2]), int(r[3]), int(r[4]), float(r[5]))
            for r in reader
            if r
        ]
    if not rows:
        raise ValueError("results CSV has no data rows")
    return rows


def write_aggregate_csv(rows: list[AggregateRow], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_HEADER)
        for r in rows:
            writer.writerow(
                [r.dataset, r.policy, r.queries, repr(r.f1_mean), repr(r.f1_std), r.n_runs]
            )


def write_limit_csv(dataset_id: str, f1_limit: float, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LIMIT_HEADER)
        writer.writerow([dataset_id, repr(f1_limit)])


def read_limit_csv(path: str) -> dict[str, float]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != LIMIT_HEADER:
            raise ValueError(
                f"unexpected limit header {header!r}; want {LIMIT_HEADER!r}"
            )
        return {r[0]: float(r[1]) for r in reader if r}
