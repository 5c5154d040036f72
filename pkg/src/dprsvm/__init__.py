"""Cascade linear-SVM classification with a reconfigurable-fabric simulator.

Three layers:

* decision core (`core`, `cascade`, `formats`): precomputed-weight linear
  SVM math, early-exit cascades, and the text artifact formats around them;
* sklearn-style estimators (`estimators`): `LinearSvmClassifier` and
  `CascadeSvmClassifier` for composing with the wider ML ecosystem;
* platform models (`perf`, `fabric`): calibrated latency/resource/power
  estimates and a desk-scale simulator of a runtime-reconfigurable
  single-core device, including its configuration-bitstream workflow.

The `dprsvm` CLI (see `cli`) ties the layers together.
"""

from .cascade import (
    CascadeResult,
    CascadeSpec,
    CascadeStage,
    EvaluationReport,
    cascade_classify,
    cascade_classify_batch,
    evaluate,
)
from .core import (
    DecisionOutcome,
    SupportVector,
    SvmModel,
    WeightArtifact,
    accumulate_weights,
    classify,
    classify_direct,
    decision_value,
)
from .errors import (
    CapacityError,
    ConfigOrderError,
    DimensionMismatchError,
    DprsvmError,
    ParseError,
    StructuralError,
    UnsupportedKernelError,
)
from .estimators import CascadeSvmClassifier, LinearSvmClassifier
from .fabric import (
    Bitstream,
    ConfigPort,
    ConfigurationLibrary,
    DeviceState,
    ReconfigurableModule,
    ReconfigurablePartition,
    build_configuration_library,
    config_time,
    configure_full,
    core_run,
    dpr_cascade_run,
    reconfigure_partial,
)
from .perf import (
    Calibration,
    Device,
    LatencyParams,
    PowerModelParams,
    ResourceFootprint,
    ResourceModelParams,
    SystemDescriptor,
    cascade_processing_time,
    core_latency_cycles,
    estimate_power,
    estimate_resources,
    processing_time,
    speedup_vs_software,
)

__version__ = "0.1.0"

__all__ = [
    "Bitstream",
    "Calibration",
    "CapacityError",
    "CascadeResult",
    "CascadeSpec",
    "CascadeStage",
    "CascadeSvmClassifier",
    "ConfigOrderError",
    "ConfigPort",
    "ConfigurationLibrary",
    "DecisionOutcome",
    "Device",
    "DeviceState",
    "DimensionMismatchError",
    "DprsvmError",
    "EvaluationReport",
    "LatencyParams",
    "LinearSvmClassifier",
    "ParseError",
    "PowerModelParams",
    "ReconfigurableModule",
    "ReconfigurablePartition",
    "ResourceFootprint",
    "ResourceModelParams",
    "StructuralError",
    "SupportVector",
    "SvmModel",
    "SystemDescriptor",
    "UnsupportedKernelError",
    "WeightArtifact",
    "accumulate_weights",
    "build_configuration_library",
    "cascade_classify",
    "cascade_classify_batch",
    "cascade_processing_time",
    "classify",
    "classify_direct",
    "config_time",
    "configure_full",
    "core_latency_cycles",
    "core_run",
    "decision_value",
    "dpr_cascade_run",
    "estimate_power",
    "estimate_resources",
    "evaluate",
    "processing_time",
    "reconfigure_partial",
    "speedup_vs_software",
]
