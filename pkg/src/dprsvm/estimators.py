"""Scikit-learn-compatible wrappers around the classification core.

The underlying models arrive pretrained (weight artifacts produced offline),
so these estimators are born fitted: ``fit`` only validates shapes and
returns self, which keeps them usable inside sklearn pipelines, grid search
and metrics utilities.  ``predict`` always returns labels in {-1, +1}.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .cascade import CascadeSpec, cascade_classify_batch
from .core import WeightArtifact
from .errors import DimensionMismatchError, StructuralError


def check_feature_array(X, n_features: int | None = None) -> np.ndarray:
    """Validate a 2-D finite float64 sample matrix, optionally by column count."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise StructuralError(f"expected a 2-D sample matrix, got shape {X.shape}")
    if X.shape[1] == 0:
        raise StructuralError("sample matrix has zero feature columns")
    if not np.all(np.isfinite(X)):
        raise StructuralError("sample matrix contains non-finite values")
    if n_features is not None and X.shape[1] != n_features:
        raise DimensionMismatchError(
            f"samples have {X.shape[1]} features, estimator expects {n_features}"
        )
    return X


def check_labels(y) -> np.ndarray:
    """Validate a label vector with entries in {-1, +1}."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise StructuralError(f"expected a 1-D label vector, got shape {y.shape}")
    if not np.all(np.isin(y, (-1, 1))):
        raise StructuralError("labels must be +1 or -1")
    return y.astype(int)


class LinearSvmClassifier(ClassifierMixin, BaseEstimator):
    """Pretrained linear SVM over a fixed weight artifact.

    Decision rule: ``sign((ac . x) - bias)`` with ties going to +1.
    ``decision_function`` is vectorized over rows; its summation order may
    differ from the scalar reference path by a few ulps, which only matters
    for samples sitting numerically on the boundary.
    """

    def __init__(self, weights: WeightArtifact):
        self.weights = weights

    def fit(self, X, y=None):
        check_feature_array(X, self.weights.dimension)
        self.n_features_in_ = self.weights.dimension
        self.classes_ = np.array([-1, 1])
        return self

    def decision_function(self, X) -> np.ndarray:
        X = check_feature_array(X, self.weights.dimension)
        return X @ self.weights.ac - self.weights.bias

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0.0, 1, -1)


class CascadeSvmClassifier(ClassifierMixin, BaseEstimator):
    """Early-exit cascade of pretrained linear SVM stages.

    A sample is positive as soon as any stage votes positive; later stages
    are not evaluated for it.  `classify_batch` exposes the per-sample exit
    stage and distances that `predict` discards.
    """

    def __init__(self, spec: CascadeSpec):
        self.spec = spec

    def fit(self, X, y=None):
        check_feature_array(X, self.spec.dimension)
        self.n_features_in_ = self.spec.dimension
        self.classes_ = np.array([-1, 1])
        return self

    def classify_batch(self, X):
        X = check_feature_array(X, self.spec.dimension)
        return cascade_classify_batch(self.spec, list(X))

    def predict(self, X) -> np.ndarray:
        return np.array([r.label for r in self.classify_batch(X)], dtype=int)

    def decision_function(self, X) -> np.ndarray:
        """Signed distance of the stage each sample exited at."""
        return np.array([r.per_stage_distances[-1] for r in self.classify_batch(X)])
