"""Tests for the one-component PCA warm-up machinery."""

import math

import numpy as np
import pytest

from coldpref.pca import (
    PcaModel,
    draw_warmup_points,
    fit_first_component,
    plan_warmup,
    pretrain_pair_count,
    sample_pseudo_pairs,
    selection_probabilities,
    warmup_report,
)


def oracle_direction(X):
    """Dense eigendecomposition reference for the leading direction."""
    cov = X.T @ X / len(X)
    _, vectors = np.linalg.eigh(cov)
    return vectors[:, -1]


def centered(rng, n, p):
    X = rng.normal(size=(n, p))
    return X - X.mean(axis=0)


class TestFitFirstComponent:
    def test_data_on_one_axis(self):
        X = np.array([[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        model = fit_first_component(X)
        np.testing.assert_allclose(model.direction, [1.0, 0.0], atol=1e-9)
        np.testing.assert_allclose(model.scores, [-1.0, 0.0, 1.0], atol=1e-9)
        np.testing.assert_allclose(model.residuals, 0.0, atol=1e-9)
        assert model.residual_variance == pytest.approx(0.0, abs=1e-12)

    def test_perfectly_collinear(self):
        X = np.array([[1.0, 1.0], [-1.0, -1.0], [2.0, 2.0], [-2.0, -2.0]])
        model = fit_first_component(X)
        np.testing.assert_allclose(model.direction, [1 / math.sqrt(2)] * 2, atol=1e-9)
        np.testing.assert_allclose(model.residuals, 0.0, atol=1e-9)

    def test_matches_dense_eigendecomposition(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(10, 100))
            p = int(rng.integers(2, 9))
            X = centered(rng, n, p)
            model = fit_first_component(X)
            assert abs(model.direction @ oracle_direction(X)) > 1 - 1e-8

    def test_unit_norm_and_score_identity(self):
        rng = np.random.default_rng(4)
        X = centered(rng, 60, 6)
        model = fit_first_component(X)
        assert np.linalg.norm(model.direction) == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(model.scores, X @ model.direction, atol=1e-9)

    def test_projection_optimality(self):
        rng = np.random.default_rng(5)
        X = centered(rng, 80, 7)
        model = fit_first_component(X)
        best = np.var(X @ model.direction)
        for _ in range(50):
            u = rng.normal(size=7)
            u /= np.linalg.norm(u)
            assert np.var(X @ u) <= best + 1e-9

    def test_pythagorean_decomposition(self):
        rng = np.random.default_rng(6)
        X = centered(rng, 90, 5)
        model = fit_first_component(X)
        total = np.trace(X.T @ X / len(X))
        explained = np.mean(model.scores**2) + model.residual_variance
        assert explained == pytest.approx(total, rel=1e-6)

    def test_sign_canonicalized(self):
        rng = np.random.default_rng(7)
        X = centered(rng, 40, 4)
        model = fit_first_component(X)
        pivot = int(np.argmax(np.abs(model.direction)))
        assert model.direction[pivot] > 0

    def test_degenerate_data(self):
        with pytest.raises(ValueError, match="degenerate data"):
            fit_first_component(np.zeros((5, 3)))

    def test_requires_centered_input(self):
        with pytest.raises(ValueError, match="centered"):
            fit_first_component(np.ones((5, 3)) + np.eye(5, 3))

    def test_requires_enough_rows(self):
        with pytest.raises(ValueError, match="too small"):
            fit_first_component(np.array([[1.0], [-1.0]]))

    def test_tied_eigenvalues_fall_back_cleanly(self):
        # Exactly isotropic data has no eigengap; the fallback still
        # produces a valid unit direction.
        X = np.array(
            [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], dtype=float
        )
        model = fit_first_component(X)
        assert np.linalg.norm(model.direction) == pytest.approx(1.0, abs=1e-9)


class TestPlanWarmup:
    def make_model(self, n, residual_variance, residuals=None):
        if residuals is None:
            residuals = np.full(n, math.sqrt(residual_variance))
        return PcaModel(
            direction=np.array([1.0]),
            scores=np.zeros(n),
            residuals=np.asarray(residuals, dtype=float),
            residual_variance=residual_variance,
        )

    def test_zero_residual_variance_gives_full_budget(self):
        model = self.make_model(1000, 0.0)
        plan = plan_warmup(model, 1000, scale=10.0, residual_penalty=1e-5)
        assert plan.n_pairs == 10_000

    def test_formula_arithmetic(self):
        model = self.make_model(1000, 5000.0)
        plan = plan_warmup(model, 1000, scale=2.0, residual_penalty=1e-4)
        assert plan.n_pairs == math.floor(2000 / 1.5) == 1333

    def test_clamped_to_ordered_pair_universe(self):
        model = self.make_model(5, 0.0)
        plan = plan_warmup(model, 5, scale=100.0, residual_penalty=1e-7)
        assert plan.n_pairs == 5 * 4

    def test_selection_probs_inverse_residual(self):
        probs = selection_probabilities(np.array([1.0, 3.0]), epsilon=1e-12)
        np.testing.assert_allclose(probs, [0.75, 0.25], atol=1e-9)

    def test_selection_probs_positive_and_normalized(self):
        rng = np.random.default_rng(8)
        probs = selection_probabilities(rng.uniform(0, 4, size=50), epsilon=1e-6)
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(probs > 0)

    def test_parameter_ranges_enforced(self):
        model = self.make_model(10, 1.0)
        with pytest.raises(ValueError):
            plan_warmup(model, 10, scale=0.5, residual_penalty=1e-5)
        with pytest.raises(ValueError):
            plan_warmup(model, 10, scale=2.0, residual_penalty=1e-3)
        with pytest.raises(ValueError):
            plan_warmup(model, 10, scale=2.0, residual_penalty=1e-5, epsilon=0.0)

    def test_budget_monotonicity(self):
        # Non-increasing in residual variance and penalty, non-decreasing
        # in scale and n.
        base = pretrain_pair_count(1000, 10.0, 1e-5, 100.0)
        assert pretrain_pair_count(1000, 10.0, 1e-5, 500.0) <= base
        assert pretrain_pair_count(1000, 10.0, 1e-4, 100.0) <= base
        assert pretrain_pair_count(1000, 20.0, 1e-5, 100.0) >= base
        assert pretrain_pair_count(2000, 10.0, 1e-5, 100.0) >= base


class TestSamplePseudoPairs:
    def build(self, scores, residuals, n_pairs_scale=1.0):
        model = PcaModel(
            direction=np.array([1.0]),
            scores=np.asarray(scores, dtype=float),
            residuals=np.asarray(residuals, dtype=float),
            residual_variance=float(np.mean(np.asarray(residuals) ** 2)),
        )
        plan = plan_warmup(model, len(scores), n_pairs_scale, 1e-5)
        return model, plan

    def test_exact_count_and_determinism(self):
        model, plan = self.build(np.arange(20.0), np.ones(20), n_pairs_scale=3.0)
        pairs_a = sample_pseudo_pairs(plan, model, rng_seed=42)
        pairs_b = sample_pseudo_pairs(plan, model, rng_seed=42)
        assert len(pairs_a) == plan.n_pairs
        assert [(p.u, p.v, p.label) for p in pairs_a] == [
            (p.u, p.v, p.label) for p in pairs_b
        ]

    def test_pairs_are_distinct_within(self):
        model, plan = self.build(np.arange(10.0), np.ones(10), n_pairs_scale=5.0)
        for pair in sample_pseudo_pairs(plan, model, rng_seed=1):
            assert pair.u != pair.v

    def test_labels_follow_score_order(self):
        scores = np.array([3.0, -1.0, 2.0, 0.0, 5.0])
        model, plan = self.build(scores, np.ones(5), n_pairs_scale=4.0)
        for pair in sample_pseudo_pairs(plan, model, rng_seed=2):
            assert pair.label == int(scores[pair.u] > scores[pair.v])
            assert pair.source == "pca"

    def test_tied_scores_label_zero(self):
        model, plan = self.build(np.zeros(6), np.ones(6), n_pairs_scale=3.0)
        assert all(
            p.label == 0 for p in sample_pseudo_pairs(plan, model, rng_seed=3)
        )

    def test_label_antisymmetry_on_distinct_scores(self):
        scores = np.array([1.0, 4.0, -2.0, 0.5])
        for u in range(4):
            for v in range(4):
                if u == v or scores[u] == scores[v]:
                    continue
                assert int(scores[u] > scores[v]) == 1 - int(scores[v] > scores[u])

    def test_zero_budget_gives_empty_list(self):
        model, plan = self.build(np.arange(12.0), np.full(12, 1e6))
        # Huge residual variance crushes the budget to zero.
        assert plan.n_pairs == 0
        assert sample_pseudo_pairs(plan, model, rng_seed=0) == []

    def test_equal_residuals_draw_uniformly(self):
        model, plan = self.build(np.arange(10.0), np.ones(10))
        draws = draw_warmup_points(plan, 40_000, np.random.default_rng(11))
        counts = np.bincount(draws, minlength=10)
        expected = 40_000 / 10
        sigma = math.sqrt(40_000 * 0.1 * 0.9)
        assert np.all(np.abs(counts - expected) <= 3 * sigma)

    def test_skewed_residuals_prefer_low_residual_rows(self):
        residuals = np.array([0.01] + [10.0] * 9)
        model, plan = self.build(np.arange(10.0), residuals)
        draws = draw_warmup_points(plan, 5000, np.random.default_rng(12))
        assert np.mean(draws == 0) > 0.5


def test_warmup_report_mentions_key_quantities():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(30, 4))
    X -= X.mean(axis=0)
    model = fit_first_component(X)
    plan = plan_warmup(model, 30, 2.0, 1e-5)
    text = warmup_report(model, plan, [f"f{i}" for i in range(4)])
    assert "residual variance" in text
    assert "pseudo-label pairs" in text
