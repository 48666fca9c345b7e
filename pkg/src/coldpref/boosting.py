"""Gradient-boosted regression trees over concatenated pair features.

Binary classifier trained with logistic loss via second-order (Newton)
boosting and exact greedy split search. Supports continuation training:
new batches append trees on top of the frozen existing ensemble, which is
what the active loop relies on. Fitted trees are immutable, so a fitted
ensemble is safe for concurrent prediction.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class BoostConfig:
    max_depth: int
    learning_rate: float = 0.1
    l2_lambda: float = 1.0
    rounds_warmup: int = 500
    rounds_increment: int = 25
    min_child: int = 1

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.l2_lambda < 0.0:
            raise ValueError("l2_lambda must be nonnegative")
        if self.rounds_warmup < 1:
            raise ValueError("rounds_warmup must be positive")
        if self.rounds_increment < 0:
            raise ValueError("rounds_increment must be nonnegative")
        if self.min_child < 1:
            raise ValueError("min_child must be at least 1")


def default_tree_depth(n_features: int) -> int:
    """Depth heuristic: round(sqrt(feature count)), half away from zero."""
    if n_features < 1:
        raise ValueError("n_features must be positive")
    return max(1, math.floor(math.sqrt(n_features) + 0.5))


def pair_features(X: np.ndarray, first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Concatenate the two rows of each pair into one feature vector."""
    return np.hstack([X[np.asarray(first)], X[np.asarray(second)]])


@dataclass
class Tree:
    """Flat-array regression tree; feature < 0 marks a leaf."""

    feature: np.ndarray  # int32
    threshold: np.ndarray  # float64; unused (0.0) at leaves
    left: np.ndarray  # int32; -1 at leaves
    right: np.ndarray  # int32; -1 at leaves
    value: np.ndarray  # float64 leaf weights; 0.0 at internal nodes

    def predict(self, Z: np.ndarray) -> np.ndarray:
        node = np.zeros(len(Z), dtype=np.int32)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            at = node[active]
            go_left = Z[active, self.feature[at]] < self.threshold[at]
            nxt = np.where(go_left, self.left[at], self.right[at])
            node[active] = nxt
            active = active[self.feature[nxt] >= 0]
        return self.value[node]


def _sigmoid(scores: np.ndarray) -> np.ndarray:
    out = np.empty_like(scores, dtype=float)
    pos = scores >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-scores[pos]))
    ez = np.exp(scores[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(scores: np.ndarray, labels: np.ndarray) -> float:
    """Summed binary cross-entropy of raw scores against 0/1 labels."""
    signed = np.where(labels == 1, -scores, scores)
    return float(np.logaddexp(0.0, signed).sum())


def _presort_columns(Z: np.ndarray) -> np.ndarray:
    """Column-wise sample orders, computed once per fitting batch."""
    return np.argsort(Z, axis=0, kind="stable")


def _build_tree(
    Z: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    config: BoostConfig,
    presort: np.ndarray | None = None,
) -> Tree:
    """Exact greedy tree on fixed per-sample gradient statistics.

    Split gain is the usual second-order improvement
    0.5*(GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam)); splits with
    non-positive gain or undersized children are rejected. Ties break
    toward the lowest feature index, then the lowest threshold.

    Feature values never change across rounds, so callers fitting many
    trees pass the column presort and each node filters it by membership
    instead of re-sorting its subset.
    """
    n, d = Z.shape
    lam = config.l2_lambda
    if presort is None:
        presort = _presort_columns(Z)
    feature = [-1]
    threshold = [0.0]
    left = [-1]
    right = [-1]
    value = [0.0]

    member = np.zeros(n, dtype=bool)
    stack = [(0, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        total_g = grad[idx].sum()
        total_h = hess[idx].sum()

        best_gain = 0.0
        best_split = None
        if depth < config.max_depth and idx.size >= 2 * config.min_child:
            parent_score = total_g * total_g / (total_h + lam)
            whole = idx.size == n
            if not whole:
                member[:] = False
                member[idx] = True
            for f in range(d):
                col_order = presort[:, f]
                sel = col_order if whole else col_order[member[col_order]]
                sv = Z[sel, f]
                if sv[0] == sv[-1]:
                    continue
                cg = np.cumsum(grad[sel])
                ch = np.cumsum(hess[sel])
                cuts = np.flatnonzero(sv[:-1] != sv[1:])
                cuts = cuts[
                    (cuts >= config.min_child - 1)
                    & (cuts <= idx.size - config.min_child - 1)
                ]
                if cuts.size == 0:
                    continue
                gl = cg[cuts]
                hl = ch[cuts]
                gr = total_g - gl
                hr = total_h - hl
                gain = 0.5 * (
                    gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent_score
                )
                j = int(np.argmax(gain))
                if gain[j] > best_gain:
                    best_gain = float(gain[j])
                    best_split = (f, 0.5 * (sv[cuts[j]] + sv[cuts[j] + 1]))

        if best_split is None:
            value[node] = -total_g / (total_h + lam)
            continue

        f, thr = best_split
        go_left = Z[idx, f] < thr
        left_id = len(feature)
        feature.extend((-1, -1))
        threshold.extend((0.0, 0.0))
        left.extend((-1, -1))
        right.extend((-1, -1))
        value.extend((0.0, 0.0))
        feature[node] = f
        threshold[node] = thr
        left[node] = left_id
        right[node] = left_id + 1
        stack.append((left_id + 1, idx[~go_left], depth + 1))
        stack.append((left_id, idx[go_left], depth + 1))

    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=float),
    )


_PROB_CLAMP = 1e-6


class PairEnsemble:
    """Additive tree ensemble with a fixed intercept and appended rounds.

    Raw score is base_logit + learning_rate * sum(tree values); predicted
    probability is the sigmoid of the raw score. ``update`` appends trees
    fitted on the new batch only, with gradients taken at the current
    full-ensemble predictions; existing trees are never modified.
    """

    def __init__(self, config: BoostConfig, base_logit: float = 0.0):
        self.config = config
        self.base_logit = float(base_logit)
        self.trees: list[Tree] = []
        self.n_features: int | None = None
        self.last_round_losses: list[float] = []

    @classmethod
    def fit_initial(
        cls, Z: np.ndarray, labels: np.ndarray, config: BoostConfig
    ) -> "PairEnsemble":
        """Fit a fresh ensemble: intercept from the label mean, then
        ``rounds_warmup`` boosting rounds."""
        Z, labels = _check_batch(Z, labels)
        rate = min(max(float(labels.mean()), _PROB_CLAMP), 1.0 - _PROB_CLAMP)
        model = cls(config, base_logit=math.log(rate / (1.0 - rate)))
        model.n_features = Z.shape[1]
        model._boost(Z, labels, config.rounds_warmup)
        return model

    def update(self, Z: np.ndarray, labels: np.ndarray) -> "PairEnsemble":
        """Append ``rounds_increment`` trees fitted on this batch only."""
        Z, labels = _check_batch(Z, labels)
        if self.n_features is None:
            self.n_features = Z.shape[1]
        elif Z.shape[1] != self.n_features:
            raise ValueError(
                f"pair feature length {Z.shape[1]} does not match model "
                f"({self.n_features})"
            )
        self._boost(Z, labels, self.config.rounds_increment)
        return self

    def _boost(self, Z: np.ndarray, labels: np.ndarray, rounds: int) -> None:
        scores = self.raw_scores(Z)
        losses = [logistic_loss(scores, labels)]
        presort = _presort_columns(Z) if rounds else None
        for _ in range(rounds):
            probs = _sigmoid(scores)
            tree = _build_tree(
                Z, probs - labels, probs * (1.0 - probs), self.config, presort
            )
            self.trees.append(tree)
            scores = scores + self.config.learning_rate * tree.predict(Z)
            losses.append(logistic_loss(scores, labels))
        self.last_round_losses = losses

    def raw_scores(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        scores = np.full(len(Z), self.base_logit)
        for tree in self.trees:
            scores += self.config.learning_rate * tree.predict(Z)
        return scores

    def predict_prob(self, z: np.ndarray) -> float | np.ndarray:
        """Probability that the first item of each pair is preferred."""
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = z[None, :] if single else z
        if self.n_features is not None and Z.shape[1] != self.n_features:
            raise ValueError(
                f"pair feature length {Z.shape[1]} does not match model "
                f"({self.n_features})"
            )
        probs = _sigmoid(self.raw_scores(Z))
        return float(probs[0]) if single else probs

    def copy(self) -> "PairEnsemble":
        """Independent ensemble sharing the (immutable) fitted trees."""
        clone = PairEnsemble(self.config, self.base_logit)
        clone.trees = list(self.trees)
        clone.n_features = self.n_features
        return clone


def _check_batch(Z: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Z = np.asarray(Z, dtype=float)
    labels = np.asarray(labels)
    if Z.ndim != 2 or len(Z) == 0:
        raise ValueError("batch must be a nonempty 2-D matrix")
    if labels.shape != (len(Z),):
        raise ValueError("labels must align with the batch rows")
    if not np.all(np.isin(labels, (0, 1))):
        raise ValueError("labels must be 0 or 1")
    if not np.all(np.isfinite(Z)):
        raise ValueError("pair features must be finite")
    return Z, labels.astype(float)


SERIAL_FORMAT = "pair-ensemble/1"


def tree_payload(tree: Tree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
    }


def serialize_tree(tree: Tree) -> bytes:
    """Canonical byte encoding of one tree; stable across updates."""
    return json.dumps(tree_payload(tree), sort_keys=True, separators=(",", ":")).encode()


def dumps_ensemble(model: PairEnsemble) -> str:
    payload = {
        "format": SERIAL_FORMAT,
        "config": asdict(model.config),
        "base_logit": model.base_logit,
        "n_features": model.n_features,
        "trees": [tree_payload(t) for t in model.trees],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def loads_ensemble(text: str) -> PairEnsemble:
    payload = json.loads(text)
    if payload.get("format") != SERIAL_FORMAT:
        raise ValueError("unrecognized ensemble serialization")
    model = PairEnsemble(BoostConfig(**payload["config"]), payload["base_logit"])
    model.n_features = payload["n_features"]
    for record in payload["trees"]:
        model.trees.append(
            Tree(
                feature=np.asarray(record["feature"], dtype=np.int32),
                threshold=np.asarray(record["threshold"], dtype=float),
                left=np.asarray(record["left"], dtype=np.int32),
                right=np.asarray(record["right"], dtype=np.int32),
                value=np.asarray(record["value"], dtype=float),
            )
        )
    return model


def save_ensemble(model: PairEnsemble, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_ensemble(model))


def load_ensemble(path: str) -> PairEnsemble:
    with open(path, encoding="utf-8") as fh:
        return loads_ensemble(fh.read())
