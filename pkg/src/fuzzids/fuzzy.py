"""Triangular-membership feature scoring, ranking and vector selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .errors import SchemaError


@dataclass(frozen=True)
class TriangularParams:
    """Feet (a, c) and peak (b) of a triangular membership function."""

    a: float = 0.0
    b: float = 0.5
    c: float = 1.0

    def __post_init__(self):
        if not (self.a <= self.b <= self.c):
            raise SchemaError(f"require a <= b <= c, got ({self.a}, {self.b}, {self.c})")


@dataclass(frozen=True)
class FeatureRanking:
    """Per-feature importance scores with a deterministic descending order.

    Ties are broken by the smaller original feature index. ``et_weight`` is
    1.0 for pure fuzzy scores and records the fusion weight otherwise.
    """

    scores: np.ndarray
    order: np.ndarray
    et_weight: float = 1.0

    def __post_init__(self):
        self.scores.setflags(write=False)
        self.order.setflags(write=False)

    def to_dict(self) -> dict:
        return {
            "scores": self.scores.tolist(),
            "order": self.order.tolist(),
            "et_weight": self.et_weight,
        }


@dataclass(frozen=True)
class FeatureVectorSpec:
    """A named, ordered subset of feature indices."""

    name: str
    indices: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise SchemaError(f"vector '{self.name}' has duplicate indices")

    @property
    def length(self) -> int:
        return len(self.indices)


def triangular_membership(x, p: TriangularParams):
    """Membership of x in the triangle (a, b, c); vectorized, total in [0, 1].

    Rises as (x - a) / (b - a) on [a, b], falls as (c - x) / (c - b) on
    [b, c], zero outside. A collapsed shoulder (a == b or b == c) is a step:
    membership 1 exactly at the peak.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    if p.b > p.a:
        rising = (x >= p.a) & (x <= p.b)
        out[rising] = (x[rising] - p.a) / (p.b - p.a)
    if p.c > p.b:
        falling = (x > p.b) & (x <= p.c)
        out[falling] = (p.c - x[falling]) / (p.c - p.b)
    out[x == p.b] = 1.0
    return out if out.ndim else float(out)


def _rank(scores: np.ndarray) -> np.ndarray:
    # stable sort on negated scores gives descending order with
    # index-ascending tie-break
    return np.argsort(-scores, kind="stable")


def fuzzy_importance(
    ds: LabeledDataset, p: TriangularParams, literal_accumulation: bool = False
) -> FeatureRanking:
    """Score each feature as the sum of its samples' membership degrees.

    ``literal_accumulation`` is an audit mode that accrues the same total
    into every feature's score (making all scores equal); it exists only to
    demonstrate why the per-feature reading is the meaningful one.
    """
    if len(ds) == 0:
        raise SchemaError("cannot score features of an empty dataset")
    x = ds.numeric_features()
    mu = triangular_membership(x, p)
    if literal_accumulation:
        total = float(mu.sum())
        scores = np.full(ds.n_features, total)
    else:
        scores = mu.sum(axis=0)
    return FeatureRanking(scores=scores, order=_rank(scores))


def _max_normalize(v: np.ndarray) -> np.ndarray:
    peak = v.max() if len(v) else 0.0
    if peak <= 0.0:
        return np.zeros_like(v)
    return v / peak


def fuse_with_et_importance(
    fr: FeatureRanking, et_scores, weight: float
) -> FeatureRanking:
    """Blend fuzzy scores with tree-ensemble importances.

    fused = weight * normalize(fuzzy) + (1 - weight) * normalize(et), where
    normalize divides by the vector max (all-zero vectors stay zero).
    """
    et_scores = np.asarray(et_scores, dtype=float)
    if len(et_scores) != len(fr.scores):
        raise SchemaError(
            f"score length mismatch: fuzzy {len(fr.scores)}, et {len(et_scores)}"
        )
    if not (0.0 <= weight <= 1.0):
        raise SchemaError("fusion weight must lie in [0, 1]")
    fused = weight * _max_normalize(fr.scores) + (1.0 - weight) * _max_normalize(et_scores)
    return FeatureRanking(scores=fused, order=_rank(fused), et_weight=weight)


def select_vectors(
    fr: FeatureRanking, lengths: list[int], names: list[str]
) -> list[FeatureVectorSpec]:
    """Cut the ranking into named prefixes of the requested lengths."""
    if len(lengths) != len(names):
        raise SchemaError("lengths and names must have equal length")
    specs = []
    for name, length in zip(names, lengths):
        if not (0 < length <= len(fr.order)):
            raise SchemaError(
                f"vector '{name}' length {length} exceeds feature count {len(fr.order)}"
            )
        specs.append(FeatureVectorSpec(name, tuple(int(i) for i in fr.order[:length])))
    return specs
