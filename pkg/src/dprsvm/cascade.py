"""Multi-stage cascade classification with early exit.

Stages are evaluated in order against the same raw instance.  The first stage
that votes positive ends the run; only if every stage votes negative does the
cascade return the negative label.  The positive set of the cascade is
therefore the union of the stages' positive sets: false negatives can only
shrink relative to any single stage, false positives can only grow.  For a
screening application that trade is intentional - the stages are ordered so
the sensitive model runs first and later stages re-verify its negatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    MELANOMA,
    NON_MELANOMA,
    WeightArtifact,
    as_feature_vector,
    classify,
)
from .errors import DimensionMismatchError, StructuralError


@dataclass(frozen=True, eq=False)
class CascadeStage:
    name: str
    weights: WeightArtifact


@dataclass(frozen=True, eq=False)
class CascadeSpec:
    """Ordered, nonempty stage list sharing one feature dimension."""

    stages: tuple[CascadeStage, ...]

    def __post_init__(self):
        stages = tuple(self.stages)
        if not stages:
            raise StructuralError("cascade must contain at least one stage")
        names = [s.name for s in stages]
        if len(set(names)) != len(names):
            raise StructuralError(f"cascade stage names must be unique, got {names}")
        dims = {s.weights.dimension for s in stages}
        if len(dims) != 1:
            raise StructuralError(f"cascade stages disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "stages", stages)

    @property
    def dimension(self) -> int:
        return self.stages[0].weights.dimension

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    def stage_names(self) -> list[str]:
        return [s.name for s in self.stages]


@dataclass(frozen=True)
class CascadeResult:
    """Verdict of one cascade run; distances cover evaluated stages only."""

    label: int
    exit_stage: int  # 1-based
    per_stage_distances: tuple[float, ...]


def cascade_classify(spec: CascadeSpec, x, single_precision: bool = False) -> CascadeResult:
    """Run the stages in order, stopping at the first positive verdict."""
    x = as_feature_vector(x)
    if x.shape[0] != spec.dimension:
        raise DimensionMismatchError(
            f"instance has {x.shape[0]} features, cascade expects {spec.dimension}"
        )
    distances = []
    for k, stage in enumerate(spec.stages, start=1):
        outcome = classify(stage.weights, x, single_precision=single_precision)
        distances.append(outcome.distance)
        if outcome.label == MELANOMA:
            return CascadeResult(label=MELANOMA, exit_stage=k, per_stage_distances=tuple(distances))
    return CascadeResult(
        label=NON_MELANOMA, exit_stage=spec.n_stages, per_stage_distances=tuple(distances)
    )


def cascade_classify_batch(
    spec: CascadeSpec, instances, single_precision: bool = False
) -> list[CascadeResult]:
    """Element-wise `cascade_classify`; output order matches input order."""
    results = []
    for i, x in enumerate(instances):
        try:
            results.append(cascade_classify(spec, x, single_precision=single_precision))
        except DimensionMismatchError as exc:
            raise DimensionMismatchError(f"instance {i}: {exc}") from exc
    return results


@dataclass(frozen=True)
class EvaluationReport:
    """Confusion counts and derived rates for a labeled run (+1 = positive)."""

    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    sensitivity: float
    specificity: float
    exit_histogram: dict[int, int]

    @property
    def n_instances(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else math.nan


def report_from_results(y_true, results) -> EvaluationReport:
    """Tally a sequence of CascadeResults against true labels."""
    y_true = list(y_true)
    results = list(results)
    if len(y_true) != len(results):
        raise StructuralError(
            f"{len(y_true)} labels for {len(results)} results"
        )
    tp = tn = fp = fn = 0
    histogram: dict[int, int] = {}
    for label, result in zip(y_true, results):
        if label not in (MELANOMA, NON_MELANOMA):
            raise StructuralError(f"labels must be +1 or -1, got {label!r}")
        predicted = result.label
        if label == MELANOMA:
            if predicted == MELANOMA:
                tp += 1
            else:
                fn += 1
        else:
            if predicted == MELANOMA:
                fp += 1
            else:
                tn += 1
        histogram[result.exit_stage] = histogram.get(result.exit_stage, 0) + 1
    total = tp + tn + fp + fn
    return EvaluationReport(
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
        accuracy=_ratio(tp + tn, total),
        sensitivity=_ratio(tp, tp + fn),
        specificity=_ratio(tn, tn + fp),
        exit_histogram=histogram,
    )


def evaluate(spec: CascadeSpec, labeled_instances, single_precision: bool = False) -> EvaluationReport:
    """Classify a labeled set and tally the confusion counts.

    `labeled_instances` is a sequence of ``(label, features)`` pairs with
    labels in {+1, -1}.
    """
    labeled = list(labeled_instances)
    labels = [label for label, _ in labeled]
    instances = [x for _, x in labeled]
    results = cascade_classify_batch(spec, instances, single_precision=single_precision)
    return report_from_results(labels, results)
