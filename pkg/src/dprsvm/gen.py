"""Seeded synthetic fixtures: models, weight artifacts, instance sets.

The clinical feature data behind the reference models is not distributable,
so desk-scale work runs on generated stand-ins.  Generated values are always
single-precision representable: a 32-bit datapath then computes on exactly
the written values, and the simulated-hardware route agrees bit-for-bit with
the software route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cascade import CascadeSpec, CascadeStage
from .core import SupportVector, SvmModel, WeightArtifact, accumulate_weights
from .errors import StructuralError


@dataclass(frozen=True)
class ReferenceModelInfo:
    """Catalog entry describing a bundled reference model's offline training.

    ``nominal_accuracy_pct`` is the cross-validated accuracy reported for the
    original clinically trained model; it is metadata only and nothing at
    desk scale reproduces it.
    """

    name: str
    features: int
    n_support_vectors: int
    train_positive: int
    train_negative: int
    nominal_accuracy_pct: float


#: the two-stage reference configuration: a melanoma-sensitive first stage
#: and a benign-sensitive second stage, both 27-feature linear models
REFERENCE_MODELS = {
    "M": ReferenceModelInfo(name="M", features=27, n_support_vectors=61,
                            train_positive=100, train_negative=44,
                            nominal_accuracy_pct=97.92),
    "N": ReferenceModelInfo(name="N", features=27, n_support_vectors=139,
                            train_positive=67, train_negative=144,
                            nominal_accuracy_pct=72.51),
}


def _single_precision_exact(values: np.ndarray) -> np.ndarray:
    return values.astype(np.float32).astype(np.float64)


def random_model(rng: np.random.Generator, n_features: int, n_svs: int,
                 name: str = "model", bias: float | None = None) -> SvmModel:
    """A random linear model with single-precision-exact parameters."""
    if n_features < 1 or n_svs < 1:
        raise StructuralError("need at least one feature and one support vector")
    coeffs = _single_precision_exact(rng.uniform(-2.0, 2.0, size=n_svs))
    coeffs[coeffs == 0.0] = 1.0
    features = _single_precision_exact(rng.uniform(-1.0, 1.0, size=(n_svs, n_features)))
    if bias is None:
        bias = float(_single_precision_exact(rng.uniform(-1.0, 1.0, size=1))[0])
    svs = tuple(SupportVector(coefficient=float(c), features=f)
                for c, f in zip(coeffs, features))
    return SvmModel(name=name, dimension=n_features, bias=bias, support_vectors=svs)


def random_weights(rng: np.random.Generator, n_features: int,
                   name: str = "model", bias: float | None = None) -> WeightArtifact:
    """A random weight artifact (single-precision-exact entries)."""
    ac = _single_precision_exact(rng.uniform(-4.0, 4.0, size=n_features))
    if bias is None:
        bias = float(_single_precision_exact(rng.uniform(-1.0, 1.0, size=1))[0])
    return WeightArtifact(name=name, dimension=n_features, ac=ac, bias=bias)


def random_instances(rng: np.random.Generator, count: int, n_features: int,
                     labeled: bool = False) -> list:
    """Random ``(label, features)`` pairs; labels are None when unlabeled."""
    out = []
    for _ in range(count):
        x = _single_precision_exact(rng.uniform(-1.0, 1.0, size=n_features))
        label = int(rng.choice((-1, 1))) if labeled else None
        out.append((label, x))
    return out


def reference_model(name: str, seed: int = 0) -> SvmModel:
    """A synthetic model shaped like catalog entry `name` (same SV/feature counts).

    Stage M gets a negative bias shift (votes positive more readily), stage N
    a positive one, mirroring the sensitive-then-verifying stage ordering.
    """
    try:
        info = REFERENCE_MODELS[name]
    except KeyError:
        raise StructuralError(f"unknown reference model {name!r}, have {sorted(REFERENCE_MODELS)}") from None
    rng = np.random.default_rng((seed, sorted(REFERENCE_MODELS).index(name)))
    bias = -0.25 if name == "M" else 0.25
    return random_model(rng, info.features, info.n_support_vectors, name=name, bias=bias)


def reference_cascade(seed: int = 0) -> CascadeSpec:
    """The two-stage reference cascade built from synthetic M and N models."""
    stages = tuple(
        CascadeStage(name=name, weights=accumulate_weights(reference_model(name, seed)))
        for name in ("M", "N")
    )
    return CascadeSpec(stages=stages)
