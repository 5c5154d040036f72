"""Linear-SVM decision mathematics.

A trained model classifies an instance x by

    sign( sum_i coeff_i * (sv_i . x) - bias )

where ``coeff_i`` is the product of the training multiplier and the class
label of support vector i.  Because the kernel is linear, the double sum
factors into a single precomputed weight vector

    ac[j] = sum_i coeff_i * sv_i[j]

so that online classification is just ``(ac . x) - bias`` regardless of the
number of support vectors.  Both routes are implemented here: the factored
route (`accumulate_weights` + `decision_value`) is the deployable one, the
direct route (`classify_direct`) is kept as an independent reference path.

Summation order is canonical and deterministic: ascending support-vector
index when accumulating ``ac``, ascending feature index inside dot products.
The two routes reassociate floating-point sums differently, so they agree up
to a small relative tolerance, not bit-for-bit; labels can only disagree for
distances inside a narrow guard band around zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError, StructuralError

MELANOMA = 1
NON_MELANOMA = -1

#: labels agree across evaluation routes when |distance| exceeds
#: GUARD_BAND_FACTOR * (1 + ||ac|| * ||x||)
GUARD_BAND_FACTOR = 1e-9


def as_feature_vector(values) -> np.ndarray:
    """Coerce `values` to a finite, nonempty 1-D float64 vector."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise StructuralError(f"feature vector must be 1-D, got shape {x.shape}")
    if x.size == 0:
        raise StructuralError("feature vector must be nonempty")
    if not np.all(np.isfinite(x)):
        raise StructuralError("feature vector contains non-finite values")
    return x


def _require_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise StructuralError(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True, eq=False)
class SupportVector:
    """One training sample with its combined multiplier-times-label coefficient."""

    coefficient: float
    features: np.ndarray

    def __post_init__(self):
        coeff = _require_finite(self.coefficient, "support vector coefficient")
        if coeff == 0.0:
            raise StructuralError("support vector coefficient must be nonzero")
        object.__setattr__(self, "coefficient", coeff)
        object.__setattr__(self, "features", as_feature_vector(self.features))

    @property
    def dimension(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True, eq=False)
class SvmModel:
    """A trained linear SVM: bias plus a nonempty list of support vectors."""

    name: str
    dimension: int
    bias: float
    support_vectors: tuple[SupportVector, ...] = field(default=())

    def __post_init__(self):
        if self.dimension <= 0:
            raise StructuralError(f"model dimension must be positive, got {self.dimension}")
        object.__setattr__(self, "bias", _require_finite(self.bias, "model bias"))
        svs = tuple(self.support_vectors)
        if not svs:
            raise StructuralError("model must contain at least one support vector")
        for i, sv in enumerate(svs):
            if sv.dimension != self.dimension:
                raise StructuralError(
                    f"support vector {i} has dimension {sv.dimension}, "
                    f"model dimension is {self.dimension}"
                )
        object.__setattr__(self, "support_vectors", svs)

    @property
    def n_support_vectors(self) -> int:
        return len(self.support_vectors)


@dataclass(frozen=True, eq=False)
class WeightArtifact:
    """The deployable per-core payload: precomputed weight vector plus bias."""

    name: str
    dimension: int
    ac: np.ndarray
    bias: float

    def __post_init__(self):
        ac = as_feature_vector(self.ac)
        if self.dimension != ac.shape[0]:
            raise StructuralError(
                f"weight artifact declares {self.dimension} features "
                f"but carries {ac.shape[0]} coefficients"
            )
        object.__setattr__(self, "ac", ac)
        object.__setattr__(self, "bias", _require_finite(self.bias, "artifact bias"))

    def __eq__(self, other):
        if not isinstance(other, WeightArtifact):
            return NotImplemented
        return (
            self.name == other.name
            and self.dimension == other.dimension
            and self.bias == other.bias
            and np.array_equal(self.ac, other.ac)
        )

    def __hash__(self):
        return hash((self.name, self.dimension, self.bias, self.ac.tobytes()))


class DecisionOutcome(NamedTuple):
    """A classification verdict: label is +1 iff distance >= 0."""

    label: int
    distance: float


def accumulate_weights(model: SvmModel) -> WeightArtifact:
    """Fold a model's support vectors into a single weight vector.

    Components are summed in ascending support-vector order so the result is
    deterministic. The bias is copied through unchanged.
    """
    ac = np.zeros(model.dimension, dtype=np.float64)
    for i, sv in enumerate(model.support_vectors):
        if sv.dimension != model.dimension:
            raise StructuralError(
                f"support vector {i} has dimension {sv.dimension}, "
                f"model dimension is {model.dimension}"
            )
        ac += sv.coefficient * sv.features
    return WeightArtifact(name=model.name, dimension=model.dimension, ac=ac, bias=model.bias)


def _check_dimensions(expected: int, x: np.ndarray) -> None:
    if x.shape[0] != expected:
        raise DimensionMismatchError(
            f"instance has {x.shape[0]} features, expected {expected}"
        )


def decision_value(weights: WeightArtifact, x, single_precision: bool = False) -> float:
    """Distance of `x` from the decision boundary: ``(ac . x) - bias``.

    The dot product accumulates in ascending feature-index order.  With
    ``single_precision=True`` every operand and intermediate is 32-bit,
    mimicking a fixed single-precision datapath.
    """
    x = as_feature_vector(x)
    _check_dimensions(weights.dimension, x)
    if single_precision:
        ac32 = weights.ac.astype(np.float32)
        x32 = x.astype(np.float32)
        acc = np.float32(0.0)
        for j in range(weights.dimension):
            acc = np.float32(acc + ac32[j] * x32[j])
        return float(np.float32(acc - np.float32(weights.bias)))
    acc = 0.0
    ac = weights.ac
    for j in range(weights.dimension):
        acc += float(ac[j]) * float(x[j])
    return acc - weights.bias


def label_for_distance(distance: float) -> int:
    """Map a distance to a class label; exactly zero counts as positive."""
    return MELANOMA if distance >= 0.0 else NON_MELANOMA


def classify(weights: WeightArtifact, x, single_precision: bool = False) -> DecisionOutcome:
    """Classify an instance with a precomputed weight artifact."""
    distance = decision_value(weights, x, single_precision=single_precision)
    return DecisionOutcome(label=label_for_distance(distance), distance=distance)


def classify_direct(model: SvmModel, x, single_precision: bool = False) -> DecisionOutcome:
    """Classify straight from the support vectors, without the factored weights.

    Reference route: ``sum_i coeff_i * (sv_i . x) - bias``, support vectors
    visited in ascending index order.  Used as the independent oracle for the
    factored route.
    """
    x = as_feature_vector(x)
    _check_dimensions(model.dimension, x)
    sv_matrix = np.stack([sv.features for sv in model.support_vectors])
    coeffs = [sv.coefficient for sv in model.support_vectors]
    if single_precision:
        terms = sv_matrix.astype(np.float32) @ x.astype(np.float32)
        acc = np.float32(0.0)
        for i, c in enumerate(coeffs):
            acc = np.float32(acc + np.float32(c) * terms[i])
        distance = float(np.float32(acc - np.float32(model.bias)))
    else:
        terms = sv_matrix @ x
        acc = 0.0
        for i, c in enumerate(coeffs):
            acc += c * float(terms[i])
        distance = acc - model.bias
    return DecisionOutcome(label=label_for_distance(distance), distance=distance)


def label_guard_band(weights: WeightArtifact, x) -> float:
    """Half-width of the distance band inside which route labels may differ."""
    x = as_feature_vector(x)
    return GUARD_BAND_FACTOR * (1.0 + float(np.linalg.norm(weights.ac)) * float(np.linalg.norm(x)))
