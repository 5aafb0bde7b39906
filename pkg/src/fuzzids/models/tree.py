"""Decision tree and the bagged/randomized ensembles built on it."""

from __future__ import annotations

import numpy as np

from ..errors import EvaluationError, TrainingError
from .base import ClassifierConfig, TrainedModel


def impurity(class_proportions, kind: str = "entropy") -> float:
    """Entropy (base 2) or Gini impurity of a class-proportion vector."""
    p = np.asarray(class_proportions, dtype=float)
    if np.any(p < 0):
        raise EvaluationError("proportions must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise EvaluationError(f"proportions sum to {p.sum()}, expected 1")
    if kind == "entropy":
        nz = p[p > 0]
        return float(-(nz * np.log2(nz)).sum())
    if kind == "gini":
        return float(1.0 - (p ** 2).sum())
    raise EvaluationError(f"unknown impurity kind '{kind}'")


def _impurity_counts(counts: np.ndarray, kind: str) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    return impurity(counts / total, kind)


def _impurity_rows(counts: np.ndarray, kind: str) -> np.ndarray:
    """Impurity of each row of a (M, K) count matrix, vectorized."""
    totals = counts.sum(axis=1, keepdims=True)
    p = counts / np.maximum(totals, 1)
    if kind == "entropy":
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p > 0, p * np.log2(p, where=p > 0), 0.0)
        return -terms.sum(axis=1)
    return 1.0 - (p ** 2).sum(axis=1)


def best_split(
    x: np.ndarray,
    y: np.ndarray,
    candidate_features,
    impurity_kind: str = "entropy",
    min_samples_split: int = 2,
    n_classes: int | None = None,
) -> tuple[int, float, float] | None:
    """Exhaustive best (feature, threshold) by impurity decrease.

    Thresholds are midpoints between consecutive distinct sorted values.
    Returns None when no split yields positive gain. Ties go to the lower
    feature index, then the lower threshold.
    """
    n = len(y)
    if n < min_samples_split:
        return None
    if n_classes is None:
        n_classes = int(y.max()) + 1
    parent_counts = np.bincount(y, minlength=n_classes)
    parent_imp = _impurity_counts(parent_counts, impurity_kind)
    if parent_imp == 0.0:
        return None

    best = None  # (gain, feature, threshold)
    for feat in sorted(candidate_features):
        order = np.argsort(x[:, feat], kind="stable")
        xs = x[order, feat]
        ys = y[order]
        valid = xs[:-1] != xs[1:]
        if not valid.any():
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1.0
        left_counts = np.cumsum(onehot, axis=0)[:-1]
        right_counts = parent_counts[None, :] - left_counts
        n_left = np.arange(1, n, dtype=float)
        child = (
            n_left * _impurity_rows(left_counts, impurity_kind)
            + (n - n_left) * _impurity_rows(right_counts, impurity_kind)
        ) / n
        gains = np.where(valid, parent_imp - child, -np.inf)
        i = int(np.argmax(gains))  # first max wins: lower threshold on ties
        gain = gains[i]
        if gain > 1e-12 and (best is None or gain > best[0] + 1e-12):
            best = (float(gain), feat, (xs[i] + xs[i + 1]) / 2.0)
    if best is None:
        return None
    return best[1], best[2], best[0]


def _random_cut_split(
    x: np.ndarray,
    y: np.ndarray,
    candidate_features,
    impurity_kind: str,
    rng: np.random.Generator,
    n_classes: int,
) -> tuple[int, float, float] | None:
    """Extra-trees style split: one uniform random threshold per candidate."""
    n = len(y)
    parent_counts = np.bincount(y, minlength=n_classes)
    parent_imp = _impurity_counts(parent_counts, impurity_kind)
    if parent_imp == 0.0:
        return None
    best = None
    for feat in sorted(candidate_features):
        col = x[:, feat]
        lo, hi = col.min(), col.max()
        if lo == hi:
            continue
        threshold = rng.uniform(lo, hi)
        left = col <= threshold
        n_left = int(left.sum())
        if n_left == 0 or n_left == n:
            continue
        left_counts = np.bincount(y[left], minlength=n_classes)
        child = (
            n_left * _impurity_counts(left_counts, impurity_kind)
            + (n - n_left) * _impurity_counts(parent_counts - left_counts, impurity_kind)
        ) / n
        gain = parent_imp - child
        if gain > 1e-12 and (best is None or gain > best[0] + 1e-12):
            best = (gain, feat, float(threshold))
    if best is None:
        return None
    return best[1], best[2], best[0]


class TreeNode:
    """Internal node (feature, threshold, children) or leaf (class counts)."""

    __slots__ = ("feature", "threshold", "left", "right", "counts")

    def __init__(self, feature=None, threshold=None, left=None, right=None,
                 counts=None):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.counts = counts

    @property
    def is_leaf(self) -> bool:
        return self.counts is not None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"counts": self.counts.tolist()}
        return {
            "feature": int(self.feature),
            "threshold": float(self.threshold),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TreeNode":
        if "counts" in doc:
            return cls(counts=np.asarray(doc["counts"], dtype=np.int64))
        return cls(
            feature=doc["feature"],
            threshold=doc["threshold"],
            left=cls.from_dict(doc["left"]),
            right=cls.from_dict(doc["right"]),
        )

    def equal(self, other: "TreeNode") -> bool:
        if self.is_leaf != other.is_leaf:
            return False
        if self.is_leaf:
            return bool(np.array_equal(self.counts, other.counts))
        return (
            self.feature == other.feature
            and self.threshold == other.threshold
            and self.left.equal(other.left)
            and self.right.equal(other.right)
        )


def _fallback_split(x: np.ndarray, candidate_features) -> tuple[int, float] | None:
    """Zero-gain tie split: lowest feature with >1 distinct value, lowest
    midpoint threshold. Lets growth continue past locally uninformative
    nodes (e.g. the root of a 4-point XOR, where every split has zero gain
    but the children become separable)."""
    for feat in sorted(candidate_features):
        values = np.unique(x[:, feat])
        if len(values) > 1:
            return feat, float((values[0] + values[1]) / 2.0)
    return None


def _grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    config: ClassifierConfig,
    n_classes: int,
    depth: int,
    rng: np.random.Generator | None,
    random_cuts: bool,
) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes)
    depth_exhausted = config.max_depth is not None and depth >= config.max_depth
    if (
        depth_exhausted
        or len(y) < config.min_samples_split
        or np.count_nonzero(counts) <= 1
    ):
        return TreeNode(counts=counts)

    n_features = x.shape[1]
    k = config.n_candidate_features(n_features)
    if rng is not None and k < n_features:
        candidates = rng.choice(n_features, size=k, replace=False)
    else:
        candidates = range(n_features)

    if random_cuts:
        split = _random_cut_split(x, y, candidates, config.impurity, rng, n_classes)
    else:
        split = best_split(
            x, y, candidates, config.impurity, config.min_samples_split, n_classes
        )
    if split is None:
        if random_cuts:
            return TreeNode(counts=counts)
        fallback = _fallback_split(x, candidates)
        if fallback is None:
            return TreeNode(counts=counts)
        split = (*fallback, 0.0)
    feat, threshold, _ = split
    left = x[:, feat] <= threshold
    return TreeNode(
        feature=feat,
        threshold=threshold,
        left=_grow_tree(x[left], y[left], config, n_classes, depth + 1, rng, random_cuts),
        right=_grow_tree(x[~left], y[~left], config, n_classes, depth + 1, rng, random_cuts),
    )


def _tree_leaf(node: TreeNode, row: np.ndarray) -> np.ndarray:
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node.counts


class DecisionTreeModel(TrainedModel):
    kind = "dt"

    def __init__(self, config, classes, n_features, root: TreeNode):
        super().__init__(config, classes, n_features)
        self.root = root

    def score(self, x: np.ndarray) -> np.ndarray:
        x = self._check_features(x)
        out = np.empty((len(x), len(self.classes)))
        for i, row in enumerate(x):
            counts = _tree_leaf(self.root, row)
            total = counts.sum()
            out[i] = counts / total if total else 1.0 / len(self.classes)
        return out

    def params_dict(self) -> dict:
        return {"root": self.root.to_dict()}


class ForestModel(TrainedModel):
    """Majority-vote ensemble; scores are vote fractions."""

    def __init__(self, config, classes, n_features, trees: list[TreeNode], kind: str):
        super().__init__(config, classes, n_features)
        self.trees = trees
        self.kind = kind

    def score(self, x: np.ndarray) -> np.ndarray:
        x = self._check_features(x)
        k = len(self.classes)
        votes = np.zeros((len(x), k))
        for tree in self.trees:
            for i, row in enumerate(x):
                counts = _tree_leaf(tree, row)
                votes[i, np.argmax(counts)] += 1.0
        return votes / len(self.trees)

    def params_dict(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees]}


def _class_index_labels(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    classes = np.unique(y)
    index = np.searchsorted(classes, y)
    return classes, index.astype(np.int64)


def fit_dt(x: np.ndarray, y: np.ndarray, config: ClassifierConfig) -> DecisionTreeModel:
    """Greedy recursive tree construction on the full feature set."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise TrainingError("cannot train on an empty dataset")
    classes, yi = _class_index_labels(y)
    root = _grow_tree(x, yi, config, len(classes), 0, rng=None, random_cuts=False)
    return DecisionTreeModel(config, classes, x.shape[1], root)


def fit_rf(x: np.ndarray, y: np.ndarray, config: ClassifierConfig) -> ForestModel:
    """Bootstrap-aggregated trees with random feature candidates per node."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise TrainingError("cannot train on an empty dataset")
    classes, yi = _class_index_labels(y)
    trees = []
    for t in range(config.n_trees):
        rng = np.random.default_rng((config.seed, t))
        if config.bootstrap:
            idx = rng.integers(0, len(y), size=len(y))
            xt, yt = x[idx], yi[idx]
        else:
            xt, yt = x, yi
        trees.append(
            _grow_tree(xt, yt, config, len(classes), 0, rng=rng, random_cuts=False)
        )
    return ForestModel(config, classes, x.shape[1], trees, kind="rf")


def fit_et(x: np.ndarray, y: np.ndarray, config: ClassifierConfig) -> ForestModel:
    """Extra-trees: full sample per tree, uniform random cut per candidate."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise TrainingError("cannot train on an empty dataset")
    classes, yi = _class_index_labels(y)
    trees = []
    for t in range(config.n_trees):
        rng = np.random.default_rng((config.seed, t))
        trees.append(
            _grow_tree(x, yi, config, len(classes), 0, rng=rng, random_cuts=True)
        )
    return ForestModel(config, classes, x.shape[1], trees, kind="et")


def mean_impurity_decrease(model: ForestModel | DecisionTreeModel,
                           n_features: int) -> np.ndarray:
    """Per-feature importance: summed (weighted) impurity decrease over nodes.

    Used as the tree-ensemble side of fuzzy/ET score fusion.
    """
    totals = np.zeros(n_features)

    def walk(node: TreeNode):
        if node.is_leaf:
            return node.counts
        lc = walk(node.left)
        rc = walk(node.right)
        counts = lc + rc
        n = counts.sum()
        kind = model.config.impurity
        gain = _impurity_counts(counts, kind) - (
            lc.sum() * _impurity_counts(lc, kind)
            + rc.sum() * _impurity_counts(rc, kind)
        ) / n
        totals[node.feature] += n * gain
        return counts

    roots = model.trees if isinstance(model, ForestModel) else [model.root]
    for root in roots:
        walk(root)
    totals /= len(roots)
    peak = totals.max()
    return totals / peak if peak > 0 else totals
