"""Cold-start active preference learning toolkit.

Bootstraps a pairwise preference model from unlabeled tabular data via
one-component PCA pseudo-labels, refines it in an active loop against a
simulated noisy Bradley-Terry oracle, and benchmarks learning policies by
F1 learning curves.
"""

from .boosting import (
    BoostConfig,
    PairEnsemble,
    default_tree_depth,
    load_ensemble,
    pair_features,
    save_ensemble,
)
from .experiment import (
    POLICIES,
    AggregateRow,
    CurveRow,
    ScenarioConfig,
    TestSet,
    aggregate_runs,
    build_test_set,
    f1_score,
    practical_limit,
    run_policy,
    run_scenario,
)
from .oracle import Oracle, OracleConfig, TargetStats, preference_prob, strength
from .pca import (
    PcaModel,
    PseudoLabeledPair,
    WarmupPlan,
    fit_first_component,
    plan_warmup,
    sample_pseudo_pairs,
)
from .prep import (
    PreparedDataset,
    PrepReport,
    RawTable,
    encode_categoricals,
    generate_synthetic,
    impute_missing,
    prepare_table,
    read_csv,
    read_prepared_csv,
    standardize,
    write_prepared_csv,
)
from .sampler import PairPool, QueryBatch, sample_random, sample_uncertain

__version__ = "0.1.0"

__all__ = [
    "AggregateRow",
    "BoostConfig",
    "CurveRow",
    "Oracle",
    "OracleConfig",
    "POLICIES",
    "PairEnsemble",
    "PairPool",
    "PcaModel",
    "PrepReport",
    "PreparedDataset",
    "PseudoLabeledPair",
    "QueryBatch",
    "RawTable",
    "ScenarioConfig",
    "TargetStats",
    "TestSet",
    "WarmupPlan",
    "aggregate_runs",
    "build_test_set",
    "default_tree_depth",
    "encode_categoricals",
    "f1_score",
    "fit_first_component",
    "generate_synthetic",
    "impute_missing",
    "load_ensemble",
    "pair_features",
    "plan_warmup",
    "practical_limit",
    "prepare_table",
    "preference_prob",
    "read_csv",
    "read_prepared_csv",
    "run_policy",
    "run_scenario",
    "sample_pseudo_pairs",
    "sample_random",
    "sample_uncertain",
    "save_ensemble",
    "standardize",
    "strength",
    "write_prepared_csv",
]
