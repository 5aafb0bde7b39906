"""Shared classifier configuration and the uniform trained-model contract."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import ConfigError, SchemaError

MODEL_KINDS = ("dt", "rf", "et", "gbt", "nb", "svm")

SERIALIZATION_VERSION = 1


@dataclass(frozen=True)
class ClassifierConfig:
    """Hyperparameters for any of the six classifier kinds.

    Fields irrelevant to a kind are simply ignored by its trainer. Together
    with (data, seed) a config fully determines the trained model.
    """

    kind: str
    seed: int = 0
    impurity: str = "entropy"           # dt/rf/et/gbt: entropy | gini
    max_depth: int | None = None        # None = unlimited
    min_samples_split: int = 2
    n_trees: int = 100                  # rf/et
    features_per_split: str | int = "sqrt"  # sqrt | all | fixed int
    learning_rate: float = 0.1          # gbt
    n_rounds: int = 100                 # gbt
    gbt_max_depth: int = 6
    reg_gamma: float = 0.0              # gbt leaf-count penalty
    reg_lambda: float = 1.0             # gbt leaf-weight L2 penalty
    C: float = 1.0                      # svm
    tolerance: float = 1e-4             # svm
    max_iters: int = 1000               # svm
    nb_variant: str = "gaussian"        # gaussian | categorical-laplace
    laplace_alpha: float = 1.0
    bootstrap: bool = True              # rf test hook

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind '{self.kind}'")
        if self.impurity not in ("entropy", "gini"):
            raise ConfigError(f"unknown impurity '{self.impurity}'")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigError("max_depth must be >= 0 or None")
        if self.min_samples_split < 1:
            raise ConfigError("min_samples_split must be positive")
        if self.n_trees < 1 or self.n_rounds < 1:
            raise ConfigError("n_trees and n_rounds must be positive")
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be nonnegative")
        if self.reg_gamma < 0 or self.reg_lambda < 0:
            raise ConfigError("regularization terms must be nonnegative")
        if self.C <= 0 or self.tolerance <= 0 or self.max_iters < 1:
            raise ConfigError("invalid SVM hyperparameters")
        if self.nb_variant not in ("gaussian", "categorical-laplace"):
            raise ConfigError(f"unknown nb_variant '{self.nb_variant}'")
        if self.laplace_alpha <= 0:
            raise ConfigError("laplace_alpha must be positive")
        if isinstance(self.features_per_split, str):
            if self.features_per_split not in ("sqrt", "all"):
                raise ConfigError(
                    f"features_per_split must be 'sqrt', 'all' or an int, "
                    f"got '{self.features_per_split}'"
                )
        elif self.features_per_split < 1:
            raise ConfigError("features_per_split int must be positive")

    def n_candidate_features(self, n_features: int) -> int:
        if self.features_per_split == "all":
            return n_features
        if self.features_per_split == "sqrt":
            return max(1, int(np.sqrt(n_features)))
        return min(int(self.features_per_split), n_features)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ClassifierConfig":
        return cls(**doc)


class TrainedModel:
    """Uniform predict/score contract over all classifier kinds.

    ``score`` returns an (N, K) matrix: class probabilities for dt/rf/et/
    gbt/nb, one-vs-rest margins for svm. ``predict`` is argmax with
    lowest-class-id tie-break. ``classes`` lists the class ids seen at
    training time, ascending.
    """

    kind: str

    def __init__(self, config: ClassifierConfig, classes: np.ndarray,
                 n_features: int):
        self.config = config
        self.classes = np.asarray(classes, dtype=np.int64)
        self.n_features = int(n_features)
        self.flags: dict[str, bool] = {}

    def _check_features(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.shape[1] != self.n_features:
            raise SchemaError(
                f"model expects {self.n_features} features, got {x.shape[1]}"
            )
        return x

    def score(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, x: np.ndarray) -> np.ndarray:
        scores = self.score(x)
        # argmax picks the first (lowest class id) maximum
        return self.classes[np.argmax(scores, axis=1)]

    def positive_score(self, x: np.ndarray, positive_class: int = 1) -> np.ndarray:
        """Ranking statistic for ROC: probability or margin of one class."""
        scores = self.score(x)
        col = int(np.flatnonzero(self.classes == positive_class)[0])
        return scores[:, col]

    def params_dict(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "version": SERIALIZATION_VERSION,
            "kind": self.kind,
            "config": self.config.to_dict(),
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "flags": dict(self.flags),
            "params": self.params_dict(),
        }
