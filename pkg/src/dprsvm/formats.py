"""Line-oriented text formats.

Four formats live here:

* the SVM-Light-compatible model file subset (linear kernel only),
* the canonical weight-artifact file (``svm-ac v1``),
* instance files (one instance per line, optional leading label),
* cascade spec files (``cascade v1`` + one stage line per stage).

The weight-artifact and cascade formats are canonical: serialization is
byte-deterministic (LF endings, shortest round-trip float formatting), and
``serialize(parse(b)) == b`` for canonical input.  Parsers reject non-finite
numbers everywhere.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .cascade import CascadeSpec, CascadeStage
from .core import SupportVector, SvmModel, WeightArtifact
from .errors import ParseError, StructuralError, UnsupportedKernelError

LINEAR_KERNEL = 0


def format_float(value: float) -> str:
    """Shortest decimal string that round-trips to the same float64."""
    return repr(float(value))


def _as_text(data) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _parse_float(token: str, lineno: int, path=None) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"expected a decimal number, got {token!r}", path=path, line=lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {token!r}", path=path, line=lineno)
    return value


def _parse_int(token: str, lineno: int, path=None) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", path=path, line=lineno) from None


# ---------------------------------------------------------------------------
# SVM-Light-compatible model files
# ---------------------------------------------------------------------------

def parse_model_file(data, name: str = "model", path=None) -> SvmModel:
    """Parse the linear subset of the SVM-Light model file format.

    Layout (1-based lines, '#' starts a trailing comment anywhere):
      1 version string (ignored)        6 kernel parameter -r (ignored)
      2 kernel type, must be 0          7 highest feature index = dimension
      3 kernel parameter -d (ignored)   8 number of training documents (ignored)
      4 kernel parameter -g (ignored)   9 number of support vectors plus one
      5 kernel parameter -s (ignored)  10 threshold b
    followed by one line per support vector:
      <coefficient> <index>:<value> ...   indices 1-based, strictly ascending.
    Missing indices densify to 0.0.
    """
    lines = _as_text(data).splitlines()

    def content(lineno: int) -> str:
        if lineno > len(lines):
            raise ParseError(f"file truncated, expected at least {lineno} lines", path=path, line=lineno)
        return lines[lineno - 1].split("#", 1)[0].strip()

    # header
    content(1)  # version string, any text
    kernel = _parse_int(content(2), 2, path)
    if kernel != LINEAR_KERNEL:
        raise UnsupportedKernelError(f"unsupported kernel type {kernel}, only 0 (linear)", path=path, line=2)
    for lineno in (3, 4, 5, 6):
        _parse_float(content(lineno), lineno, path)
    dimension = _parse_int(content(7), 7, path)
    if dimension <= 0:
        raise ParseError(f"highest feature index must be positive, got {dimension}", path=path, line=7)
    _parse_int(content(8), 8, path)
    sv_count_plus_one = _parse_int(content(9), 9, path)
    n_sv = sv_count_plus_one - 1
    if n_sv < 0:
        raise ParseError(f"support vector count plus one must be >= 1, got {sv_count_plus_one}", path=path, line=9)
    if n_sv == 0:
        raise StructuralError("model file declares zero support vectors")
    bias = _parse_float(content(10), 10, path)

    support_vectors = []
    lineno = 10
    while len(support_vectors) < n_sv:
        lineno += 1
        if lineno > len(lines):
            raise ParseError(
                f"expected {n_sv} support vector lines, found {len(support_vectors)}",
                path=path, line=lineno,
            )
        text = content(lineno)
        if not text:
            raise ParseError("blank support vector line", path=path, line=lineno)
        tokens = text.split()
        coeff = _parse_float(tokens[0], lineno, path)
        if coeff == 0.0:
            raise ParseError("support vector coefficient must be nonzero", path=path, line=lineno)
        features = np.zeros(dimension, dtype=np.float64)
        previous = 0
        for token in tokens[1:]:
            idx_text, sep, val_text = token.partition(":")
            if not sep:
                raise ParseError(f"expected index:value pair, got {token!r}", path=path, line=lineno)
            idx = _parse_int(idx_text, lineno, path)
            if idx <= previous:
                raise ParseError(f"feature indices must be ascending, got {idx} after {previous}", path=path, line=lineno)
            if idx > dimension:
                raise ParseError(f"feature index {idx} exceeds dimension {dimension}", path=path, line=lineno)
            features[idx - 1] = _parse_float(val_text, lineno, path)
            previous = idx
        support_vectors.append(SupportVector(coefficient=coeff, features=features))

    for extra in range(lineno + 1, len(lines) + 1):
        if content(extra):
            raise ParseError("unexpected content after the last support vector", path=path, line=extra)

    return SvmModel(name=name, dimension=dimension, bias=bias, support_vectors=tuple(support_vectors))


def write_model_file(model: SvmModel, training_docs: int = 0) -> str:
    """Serialize a model in the SVM-Light-compatible subset (sparse lines)."""
    out = [
        "SVM-light compatible model file (linear subset)",
        "0 # kernel type",
        "3 # kernel parameter -d",
        "1 # kernel parameter -g",
        "1 # kernel parameter -s",
        "1 # kernel parameter -r",
        f"{model.dimension} # highest feature index",
        f"{training_docs} # number of training documents",
        f"{model.n_support_vectors + 1} # number of support vectors plus 1",
        f"{format_float(model.bias)} # threshold b",
    ]
    for sv in model.support_vectors:
        pairs = [
            f"{j + 1}:{format_float(v)}"
            for j, v in enumerate(sv.features)
            if v != 0.0
        ]
        out.append(" ".join([format_float(sv.coefficient)] + pairs) + " #")
    return "\n".join(out) + "\n"


def load_model_file(path, name=None) -> SvmModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    return parse_model_file(data, name=name, path=str(path))


# ---------------------------------------------------------------------------
# Weight-artifact files
# ---------------------------------------------------------------------------

WEIGHTS_MAGIC = "svm-ac v1"


def _check_artifact_name(name: str) -> str:
    if not name or any(c.isspace() for c in name):
        raise StructuralError(f"artifact name must be one nonempty token, got {name!r}")
    return name


def serialize_weight_artifact(weights: WeightArtifact) -> bytes:
    """Canonical byte form: header, then one coefficient per line, LF endings."""
    _check_artifact_name(weights.name)
    lines = [
        WEIGHTS_MAGIC,
        f"name {weights.name}",
        f"features {weights.dimension}",
        f"bias {format_float(weights.bias)}",
    ]
    lines.extend(format_float(v) for v in weights.ac)
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_weight_artifact(data, path=None) -> WeightArtifact:
    lines = _as_text(data).splitlines()
    if not lines or lines[0] != WEIGHTS_MAGIC:
        raise ParseError(f"expected header {WEIGHTS_MAGIC!r}", path=path, line=1)
    if len(lines) < 4:
        raise ParseError("truncated weight artifact header", path=path, line=len(lines))

    def header(lineno: int, key: str) -> str:
        head, sep, rest = lines[lineno - 1].partition(" ")
        if head != key or not sep:
            raise ParseError(f"expected '{key} <value>'", path=path, line=lineno)
        return rest

    name = _check_artifact_name(header(2, "name"))
    dimension = _parse_int(header(3, "features"), 3, path)
    if dimension <= 0:
        raise ParseError(f"feature count must be positive, got {dimension}", path=path, line=3)
    bias = _parse_float(header(4, "bias"), 4, path)

    body = lines[4:]
    if len(body) != dimension:
        raise ParseError(
            f"header declares {dimension} coefficients, body has {len(body)}",
            path=path, line=len(lines),
        )
    ac = np.empty(dimension, dtype=np.float64)
    for i, token in enumerate(body):
        ac[i] = _parse_float(token.strip(), 5 + i, path)
    return WeightArtifact(name=name, dimension=dimension, ac=ac, bias=bias)


def load_weight_artifact(path) -> WeightArtifact:
    with open(path, "rb") as fh:
        return parse_weight_artifact(fh.read(), path=str(path))


def save_weight_artifact(weights: WeightArtifact, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_weight_artifact(weights))


# ---------------------------------------------------------------------------
# Instance files
# ---------------------------------------------------------------------------

def parse_instance_file(data, expected_dim: int, labeled: bool = False, path=None):
    """Parse instances, one per line, comma- or whitespace-separated.

    Returns a list of ``(label, features)`` pairs; labels are +1/-1 in
    labeled mode and None otherwise.  '#' lines and blank lines are skipped.
    """
    if expected_dim <= 0:
        raise StructuralError(f"expected_dim must be positive, got {expected_dim}")
    instances = []
    for lineno, raw in enumerate(_as_text(data).splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.replace(",", " ").split()
        label = None
        if labeled:
            try:
                label = int(tokens[0])
            except ValueError:
                raise ParseError(f"expected a +1/-1 label, got {tokens[0]!r}", path=path, line=lineno) from None
            if label not in (1, -1):
                raise ParseError(f"label must be +1 or -1, got {tokens[0]!r}", path=path, line=lineno)
            tokens = tokens[1:]
        if len(tokens) != expected_dim:
            raise ParseError(
                f"expected {expected_dim} values, got {len(tokens)}",
                path=path, line=lineno,
            )
        values = np.empty(expected_dim, dtype=np.float64)
        for j, token in enumerate(tokens):
            values[j] = _parse_float(token, lineno, path)
        instances.append((label, values))
    return instances


def write_instance_file(instances, labeled: bool = False) -> str:
    """Serialize ``(label, features)`` pairs; space separated, LF endings."""
    out = []
    for label, values in instances:
        fields = []
        if labeled:
            if label not in (1, -1):
                raise StructuralError(f"labeled mode needs +1/-1 labels, got {label!r}")
            fields.append("+1" if label == 1 else "-1")
        fields.extend(format_float(v) for v in values)
        out.append(" ".join(fields))
    return "\n".join(out) + ("\n" if out else "")


def load_instance_file(path, expected_dim: int, labeled: bool = False):
    with open(path, "rb") as fh:
        return parse_instance_file(fh.read(), expected_dim, labeled=labeled, path=str(path))


# ---------------------------------------------------------------------------
# Cascade spec files
# ---------------------------------------------------------------------------

CASCADE_MAGIC = "cascade v1"


def write_cascade_file(stage_entries) -> str:
    """Serialize ``(stage_name, artifact_path)`` pairs to the cascade format."""
    lines = [CASCADE_MAGIC]
    for name, rel_path in stage_entries:
        _check_artifact_name(name)
        lines.append(f"stage {name} {rel_path}")
    return "\n".join(lines) + "\n"


def load_cascade_file(path) -> CascadeSpec:
    """Load a cascade spec; artifact paths resolve relative to the spec file."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CASCADE_MAGIC:
        raise ParseError(f"expected header {CASCADE_MAGIC!r}", path=str(path), line=1)
    base = os.path.dirname(os.path.abspath(path))
    stages = []
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split(None, 2)
        if len(parts) != 3 or parts[0] != "stage":
            raise ParseError("expected 'stage <name> <weight-artifact-path>'", path=str(path), line=lineno)
        _, name, artifact_path = parts
        if not os.path.isabs(artifact_path):
            artifact_path = os.path.join(base, artifact_path)
        stages.append(CascadeStage(name=name, weights=load_weight_artifact(artifact_path)))
    if not stages:
        raise ParseError("cascade file declares no stages", path=str(path), line=len(lines))
    return CascadeSpec(stages=tuple(stages))
