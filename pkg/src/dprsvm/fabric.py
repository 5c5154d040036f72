"""Desk-scale simulator of a partially reconfigurable classification fabric.

The simulated system mirrors a hybrid SoC: a static wrapper (host interface,
interconnect, optional cycle counter) plus one reconfigurable partition (RP)
that hosts exactly one classification core at a time.  Each candidate core is
a reconfigurable module (RM); a configuration library pairs every RM with a
full bitstream (whole device) and a partial bitstream (RP only).  The full
bitstream must be loaded once before any partial swap.

The host talks to the loaded core through a word-addressed register file
(`CoreRegisterFile`): it writes the feature window, sets START, polls DONE
and reads back the class label and the raw distance.  Feature registers are
32-bit single-precision patterns - exactly what a fixed 32-bit bus carries -
so values that are not single-precision representable are quantized on write.
Computation itself uses the double-precision reference math on the quantized
window contents.

No real bitstream encoding is modeled; sizes come from a bits-per-slice
model, which is enough to reproduce the partial-vs-full configuration-time
relationship the workflow relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cascade import CascadeResult, CascadeSpec
from .core import MELANOMA, DecisionOutcome, WeightArtifact, as_feature_vector, classify
from .errors import (
    CapacityError,
    ConfigOrderError,
    DimensionMismatchError,
    ParseError,
    StructuralError,
)
from .formats import format_float, parse_weight_artifact, serialize_weight_artifact
from .perf import (
    DEFAULT_RESOURCE_PARAMS,
    PIPELINED_LATENCY,
    ZYNQ_7020,
    Device,
    LatencyParams,
    ResourceFootprint,
    core_latency_cycles,
)

FULL = "full"
PARTIAL = "partial"

DEFAULT_BITS_PER_SLICE_FULL = 400.0
DEFAULT_BITS_PER_SLICE_PARTIAL = 400.0


@dataclass(frozen=True)
class ConfigPort:
    """A configuration access port; only its throughput matters here."""

    kind: str
    bits_per_second: float

    def __post_init__(self):
        if self.bits_per_second <= 0:
            raise StructuralError("port rate must be positive")


JTAG = ConfigPort(kind="JTAG", bits_per_second=33e6)
PCAP = ConfigPort(kind="PCAP", bits_per_second=3.2e9)

PORTS = {"jtag": JTAG, "pcap": PCAP}


# ---------------------------------------------------------------------------
# Register map of one loaded core (word offsets on a 32-bit bus)
# ---------------------------------------------------------------------------

REG_CTRL = 0          # bit0 START (self-clearing)
REG_STATUS = 1        # bit0 DONE, bit1 IDLE
REG_DIM = 2           # read-only feature count
REG_FEATURES = 16     # input window, one single-precision word per feature
REG_RESULT = 128      # signed +1 / -1 (two's complement)
REG_DISTANCE_LO = 129  # double-precision distance, low word
REG_DISTANCE_HI = 130  # double-precision distance, high word

CTRL_START = 0x1
STATUS_DONE = 0x1
STATUS_IDLE = 0x2

FEATURE_WINDOW_WORDS = REG_RESULT - REG_FEATURES

_WORD_MASK = 0xFFFFFFFF


def _float32_bits(value: float) -> int:
    return int(np.float32(value).view(np.uint32))


def _bits_to_float32(word: int) -> float:
    return float(np.uint32(word).view(np.float32))


def _float64_bits(value: float) -> int:
    return int(np.float64(value).view(np.uint64))


class CoreRegisterFile:
    """Host-visible register image of the classification core in the RP."""

    def __init__(self, weights: WeightArtifact, latency_params: LatencyParams = PIPELINED_LATENCY):
        if weights.dimension > FEATURE_WINDOW_WORDS:
            raise StructuralError(
                f"register map supports at most {FEATURE_WINDOW_WORDS} features, "
                f"module has {weights.dimension}"
            )
        self.weights = weights
        self.latency_params = latency_params
        self._feature_words = [0] * weights.dimension
        self._done = False
        self._result_word = 0
        self._distance_bits = 0

    @property
    def dimension(self) -> int:
        return self.weights.dimension

    def read_word(self, offset: int) -> int:
        if offset == REG_CTRL:
            return 0  # START self-clears
        if offset == REG_STATUS:
            return STATUS_IDLE | (STATUS_DONE if self._done else 0)
        if offset == REG_DIM:
            return self.dimension
        if REG_FEATURES <= offset < REG_FEATURES + self.dimension:
            return self._feature_words[offset - REG_FEATURES]
        if offset == REG_RESULT:
            return self._result_word
        if offset == REG_DISTANCE_LO:
            return self._distance_bits & _WORD_MASK
        if offset == REG_DISTANCE_HI:
            return self._distance_bits >> 32
        raise StructuralError(f"read from unmapped register offset {offset}")

    def write_word(self, offset: int, word: int) -> None:
        if not 0 <= word <= _WORD_MASK:
            raise StructuralError(f"register words are 32-bit, got {word:#x}")
        if offset == REG_CTRL:
            if word & CTRL_START:
                self._execute()
            return
        if REG_FEATURES <= offset < REG_FEATURES + self.dimension:
            self._feature_words[offset - REG_FEATURES] = word
            self._done = False
            return
        if offset in (REG_STATUS, REG_DIM, REG_RESULT, REG_DISTANCE_LO, REG_DISTANCE_HI):
            raise StructuralError(f"register offset {offset} is read-only")
        raise StructuralError(f"write to unmapped register offset {offset}")

    def write_feature(self, index: int, value: float) -> None:
        self.write_word(REG_FEATURES + index, _float32_bits(value))

    def read_feature(self, index: int) -> float:
        return _bits_to_float32(self.read_word(REG_FEATURES + index))

    def window_features(self) -> np.ndarray:
        """Feature window contents as the core sees them."""
        return np.array([_bits_to_float32(w) for w in self._feature_words], dtype=np.float64)

    def _execute(self) -> None:
        outcome = classify(self.weights, self.window_features())
        self._result_word = outcome.label & _WORD_MASK
        self._distance_bits = _float64_bits(outcome.distance)
        self._done = True

    def outcome(self) -> DecisionOutcome:
        label_word = self.read_word(REG_RESULT)
        label = label_word - (1 << 32) if label_word & 0x80000000 else label_word
        bits = (self.read_word(REG_DISTANCE_HI) << 32) | self.read_word(REG_DISTANCE_LO)
        distance = float(np.uint64(bits).view(np.float64))
        return DecisionOutcome(label=label, distance=distance)


# ---------------------------------------------------------------------------
# Modules, partitions, bitstreams
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReconfigurableModule:
    """One swappable classification core: weights plus its synthesis footprint."""

    name: str
    weights: WeightArtifact
    footprint: ResourceFootprint = DEFAULT_RESOURCE_PARAMS.per_core
    latency_params: LatencyParams = PIPELINED_LATENCY

    def __post_init__(self):
        if self.footprint.is_zero():
            raise StructuralError(f"module {self.name!r} must have a nonzero footprint")
        if self.weights.dimension > FEATURE_WINDOW_WORDS:
            raise StructuralError(
                f"module {self.name!r} has {self.weights.dimension} features; "
                f"the register map supports at most {FEATURE_WINDOW_WORDS}"
            )


@dataclass(frozen=True)
class ReconfigurablePartition:
    """The reserved fabric region, sized for the largest admissible module."""

    rp_id: str
    allocated: ResourceFootprint
    admissible_rms: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class Bitstream:
    """A configuration artifact: full (whole device) or partial (one RP)."""

    kind: str
    target: str
    rm_name: str
    payload: WeightArtifact
    size_bits: int
    footprint: ResourceFootprint
    latency_params: LatencyParams = PIPELINED_LATENCY
    rp: ReconfigurablePartition | None = None

    def __post_init__(self):
        if self.kind not in (FULL, PARTIAL):
            raise StructuralError(f"bitstream kind must be 'full' or 'partial', got {self.kind!r}")
        if self.size_bits <= 0:
            raise StructuralError("bitstream size must be positive")


def full_bitstream_size(device: Device, bits_per_slice: float = DEFAULT_BITS_PER_SLICE_FULL) -> int:
    return int(round(bits_per_slice * device.capacity.slices))


def partial_bitstream_size(rp: ReconfigurablePartition,
                           bits_per_slice: float = DEFAULT_BITS_PER_SLICE_PARTIAL) -> int:
    return int(round(bits_per_slice * rp.allocated.slices))


@dataclass(frozen=True)
class ConfigurationLibrary:
    """All bitstreams for one RP, plus the module catalog behind them."""

    device: Device
    rp: ReconfigurablePartition
    rms: dict[str, ReconfigurableModule]
    bitstreams: tuple[Bitstream, ...]

    def _find(self, kind: str, rm_name: str) -> Bitstream:
        for bs in self.bitstreams:
            if bs.kind == kind and bs.rm_name == rm_name:
                return bs
        raise StructuralError(f"library has no {kind} bitstream for module {rm_name!r}")

    def full_for(self, rm_name: str) -> Bitstream:
        return self._find(FULL, rm_name)

    def partial_for(self, rm_name: str) -> Bitstream:
        return self._find(PARTIAL, rm_name)


def build_configuration_library(
    static_footprint: ResourceFootprint,
    rms,
    device: Device = ZYNQ_7020,
    margin: ResourceFootprint = DEFAULT_RESOURCE_PARAMS.dpr_margin,
    bits_per_slice_full: float = DEFAULT_BITS_PER_SLICE_FULL,
    bits_per_slice_partial: float = DEFAULT_BITS_PER_SLICE_PARTIAL,
    rp_id: str = "rp0",
) -> ConfigurationLibrary:
    """Size the RP for a set of modules and emit their configuration files.

    The RP is allocated the component-wise maximum of the module footprints
    plus the swap margin.  Every module gets one full bitstream (static
    wrapper + that module) and one partial bitstream (RP contents only);
    bitstreams are ordered by module name, full before partial.
    """
    rms = list(rms)
    if not rms:
        raise StructuralError("configuration library needs at least one module")
    names = [rm.name for rm in rms]
    if len(set(names)) != len(names):
        raise StructuralError(f"duplicate module names: {names}")
    dims = {rm.weights.dimension for rm in rms}
    if len(dims) != 1:
        raise StructuralError(f"modules disagree on feature dimension: {sorted(dims)}")

    allocated = rms[0].footprint
    for rm in rms[1:]:
        allocated = allocated.max_with(rm.footprint)
    allocated = allocated + margin

    total = static_footprint + allocated
    over = total.overflowing(device.capacity)
    if over:
        raise CapacityError(
            f"static wrapper plus partition exceed {device.name} capacity in: {', '.join(over)}"
        )

    by_name = {rm.name: rm for rm in rms}
    rp = ReconfigurablePartition(rp_id=rp_id, allocated=allocated,
                                 admissible_rms=tuple(sorted(names)))
    full_size = full_bitstream_size(device, bits_per_slice_full)
    partial_size = partial_bitstream_size(rp, bits_per_slice_partial)
    if partial_size >= full_size:
        raise StructuralError(
            f"partial bitstream ({partial_size} bits) must be smaller than full ({full_size} bits)"
        )

    bitstreams = []
    for name in sorted(names):
        rm = by_name[name]
        bitstreams.append(Bitstream(
            kind=FULL, target=device.name, rm_name=name, payload=rm.weights,
            size_bits=full_size, footprint=device.capacity,
            latency_params=rm.latency_params, rp=rp,
        ))
        bitstreams.append(Bitstream(
            kind=PARTIAL, target=rp_id, rm_name=name, payload=rm.weights,
            size_bits=partial_size, footprint=allocated,
            latency_params=rm.latency_params, rp=rp,
        ))
    return ConfigurationLibrary(device=device, rp=rp, rms=by_name, bitstreams=tuple(bitstreams))


# ---------------------------------------------------------------------------
# Bitstream files
# ---------------------------------------------------------------------------

BITSTREAM_MAGIC = "bitstream v1"


def serialize_bitstream(bs: Bitstream) -> bytes:
    f = bs.footprint
    header = [
        BITSTREAM_MAGIC,
        f"kind {bs.kind}",
        f"target {bs.target}",
        f"rm {bs.rm_name}",
        f"size_bits {bs.size_bits}",
        f"footprint {f.slices} {f.luts} {f.lut_ram} {f.bram} {f.dsp}",
    ]
    return ("\n".join(header) + "\n\n").encode("utf-8") + serialize_weight_artifact(bs.payload)


def parse_bitstream_file(
    data,
    bits_per_slice_full: float = DEFAULT_BITS_PER_SLICE_FULL,
    bits_per_slice_partial: float = DEFAULT_BITS_PER_SLICE_PARTIAL,
    latency_params: LatencyParams = PIPELINED_LATENCY,
    path=None,
) -> Bitstream:
    """Parse a canonical bitstream file; size must agree with the size model."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = data.splitlines()
    if len(lines) < 7 or lines[0] != BITSTREAM_MAGIC:
        raise ParseError(f"expected header {BITSTREAM_MAGIC!r}", path=path, line=1)

    def header(lineno: int, key: str) -> str:
        head, sep, rest = lines[lineno - 1].partition(" ")
        if head != key or not sep:
            raise ParseError(f"expected '{key} <value>'", path=path, line=lineno)
        return rest

    kind = header(2, "kind")
    if kind not in (FULL, PARTIAL):
        raise ParseError(f"kind must be 'full' or 'partial', got {kind!r}", path=path, line=2)
    target = header(3, "target")
    rm_name = header(4, "rm")
    try:
        size_bits = int(header(5, "size_bits"))
    except ValueError:
        raise ParseError("size_bits must be an integer", path=path, line=5) from None
    tokens = header(6, "footprint").split()
    if len(tokens) != 5:
        raise ParseError("footprint needs 5 counts: slices luts lutram bram dsp", path=path, line=6)
    try:
        footprint = ResourceFootprint(*(int(t) for t in tokens))
    except (ValueError, StructuralError) as exc:
        raise ParseError(f"bad footprint: {exc}", path=path, line=6) from None
    if lines[6] != "":
        raise ParseError("expected a blank line before the weight payload", path=path, line=7)

    bits_per_slice = bits_per_slice_full if kind == FULL else bits_per_slice_partial
    expected = int(round(bits_per_slice * footprint.slices))
    if size_bits != expected:
        raise ParseError(
            f"size_bits {size_bits} inconsistent with size model ({expected} for {footprint.slices} slices)",
            path=path, line=5,
        )
    payload = parse_weight_artifact("\n".join(lines[7:]) + "\n", path=path)
    return Bitstream(kind=kind, target=target, rm_name=rm_name, payload=payload,
                     size_bits=size_bits, footprint=footprint, latency_params=latency_params)


# ---------------------------------------------------------------------------
# Device state and configuration operations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    """One logged device action; `t` is the simulation time at its start."""

    t: float
    kind: str
    detail: str
    duration: float


EVENT_CONFIGURE_FULL = "configure-full"
EVENT_CONFIGURE_PARTIAL = "configure-partial"
EVENT_RUN = "run"


class DeviceState:
    """Mutable simulated fabric: single owner, never mutated concurrently."""

    def __init__(self, device: Device = ZYNQ_7020, timer_enabled: bool = False):
        self.device = device
        self.timer_enabled = timer_enabled
        self.static_loaded = False
        self.rp_id: str | None = None
        self.rp: ReconfigurablePartition | None = None
        self.rp_contents: str | None = None
        self.core: CoreRegisterFile | None = None
        self.event_log: list[Event] = []
        self.cumulative_config_time = 0.0
        self.sim_time = 0.0
        self._cycle_counter = 0

    def _log(self, kind: str, detail: str, duration: float) -> None:
        self.event_log.append(Event(t=self.sim_time, kind=kind, detail=detail, duration=duration))
        self.sim_time += duration
        self._cycle_counter += int(round(duration * self.device.clock_hz))
        if kind in (EVENT_CONFIGURE_FULL, EVENT_CONFIGURE_PARTIAL):
            self.cumulative_config_time += duration

    def read_cycle_counter(self) -> int:
        """Free-running counter of the optional timer peripheral."""
        if not self.timer_enabled:
            raise StructuralError("this system was built without the cycle-counter peripheral")
        return self._cycle_counter


def config_time(bs: Bitstream, port: ConfigPort) -> float:
    """Seconds to push a bitstream through a configuration port."""
    return bs.size_bits / port.bits_per_second


def configure_full(state: DeviceState, bs: Bitstream, port: ConfigPort) -> DeviceState:
    """Program the whole device: static wrapper plus the bitstream's module."""
    if bs.kind != FULL:
        raise ConfigOrderError(f"configure_full needs a full bitstream, got {bs.kind!r}")
    if bs.target != state.device.name:
        raise ConfigOrderError(
            f"bitstream targets {bs.target!r}, device is {state.device.name!r}"
        )
    duration = config_time(bs, port)
    state.static_loaded = True
    state.rp = bs.rp
    state.rp_id = bs.rp.rp_id if bs.rp is not None else None
    state.rp_contents = bs.rm_name
    state.core = CoreRegisterFile(bs.payload, bs.latency_params)
    state._log(
        EVENT_CONFIGURE_FULL,
        f"rm={bs.rm_name} port={port.kind} size_bits={bs.size_bits}",
        duration,
    )
    return state


def reconfigure_partial(state: DeviceState, bs: Bitstream, port: ConfigPort) -> DeviceState:
    """Swap the RP contents at runtime; the static region stays untouched."""
    if bs.kind != PARTIAL:
        raise ConfigOrderError(f"reconfigure_partial needs a partial bitstream, got {bs.kind!r}")
    if not state.static_loaded:
        raise ConfigOrderError("device is unconfigured: load a full bitstream first")
    if state.rp_id is None:
        # full bitstream carried no partition metadata (file-only flow);
        # the first partial swap pins the partition id
        state.rp_id = bs.target
    if bs.target != state.rp_id:
        raise ConfigOrderError(f"bitstream targets partition {bs.target!r}, device has {state.rp_id!r}")
    if state.rp is not None and bs.rm_name not in state.rp.admissible_rms:
        raise ConfigOrderError(
            f"module {bs.rm_name!r} is not admissible for partition {state.rp_id!r}"
        )
    duration = config_time(bs, port)
    state.rp_contents = bs.rm_name
    state.core = CoreRegisterFile(bs.payload, bs.latency_params)
    state._log(
        EVENT_CONFIGURE_PARTIAL,
        f"rm={bs.rm_name} port={port.kind} size_bits={bs.size_bits}",
        duration,
    )
    return state


def core_run(state: DeviceState, x) -> tuple[DeviceState, DecisionOutcome, int]:
    """One host-driven classification on the loaded core.

    Simulates the full bus transaction: write the feature window, set START,
    poll DONE, then read RESULT and the distance registers back.
    """
    if not state.static_loaded or state.core is None or state.rp_contents is None:
        raise ConfigOrderError("no module loaded: configure the device first")
    x = as_feature_vector(x)
    core = state.core
    if x.shape[0] != core.dimension:
        raise DimensionMismatchError(
            f"instance has {x.shape[0]} features, loaded module expects {core.dimension}"
        )
    for i, value in enumerate(x):
        core.write_feature(i, float(value))
    core.write_word(REG_CTRL, CTRL_START)
    while not core.read_word(REG_STATUS) & STATUS_DONE:
        pass  # simulated core completes within the START write
    outcome = core.outcome()
    cycles = core_latency_cycles(core.dimension, core.latency_params)
    duration = cycles / state.device.clock_hz
    state._log(
        EVENT_RUN,
        f"rm={state.rp_contents} cycles={cycles} label={outcome.label:+d}",
        duration,
    )
    return state, outcome, cycles


# ---------------------------------------------------------------------------
# DPR-driven cascade runs
# ---------------------------------------------------------------------------

LAZY = "lazy"
EAGER_RESTORE = "eager-restore"

POLICIES = (LAZY, EAGER_RESTORE)


@dataclass(frozen=True)
class SwapEvent:
    instance_index: int
    from_rm: str
    to_rm: str
    seconds: float
    at_time: float


@dataclass
class DprTrace:
    """Every runtime swap performed during a DPR cascade run."""

    policy: str
    swaps: list[SwapEvent] = field(default_factory=list)

    @property
    def swap_count(self) -> int:
        return len(self.swaps)

    @property
    def total_config_seconds(self) -> float:
        return sum(s.seconds for s in self.swaps)


def dpr_cascade_run(
    state: DeviceState,
    spec: CascadeSpec,
    library: ConfigurationLibrary,
    instances,
    port: ConfigPort = JTAG,
    policy: str = LAZY,
) -> tuple[DeviceState, list[CascadeResult], DprTrace]:
    """Run a cascade on a single-core device by swapping stage modules.

    Per instance the stages run in order on the one loaded core; whenever the
    next stage's module is not the one currently loaded, its partial bitstream
    is applied first.  Under the ``lazy`` policy the device keeps whatever was
    loaded last; ``eager-restore`` swaps back to the first stage after every
    instance.  Labels match the software cascade on the same stream (the
    feature window is single-precision, so feed single-precision-representable
    features for bit-exact parity).
    """
    if policy not in POLICIES:
        raise StructuralError(f"unknown swap policy {policy!r}, expected one of {POLICIES}")
    for stage in spec.stages:
        rm = library.rms.get(stage.name)
        if rm is None:
            raise StructuralError(f"configuration library has no module for stage {stage.name!r}")
        if rm.weights != stage.weights:
            raise StructuralError(
                f"library module {stage.name!r} carries different weights than the cascade stage"
            )
    if not state.static_loaded:
        raise ConfigOrderError("device is unconfigured: load the first stage's full bitstream")
    first = spec.stages[0].name
    if state.rp_contents != first:
        raise ConfigOrderError(
            f"device must start with stage 1 module {first!r} loaded, found {state.rp_contents!r}"
        )

    trace = DprTrace(policy=policy)

    def swap_to(rm_name: str, index: int) -> None:
        previous = state.rp_contents
        bs = library.partial_for(rm_name)
        at = state.sim_time
        reconfigure_partial(state, bs, port)
        trace.swaps.append(SwapEvent(
            instance_index=index, from_rm=previous, to_rm=rm_name,
            seconds=config_time(bs, port), at_time=at,
        ))

    results = []
    for i, x in enumerate(instances):
        distances = []
        label = -1
        exit_stage = spec.n_stages
        for k, stage in enumerate(spec.stages, start=1):
            if state.rp_contents != stage.name:
                swap_to(stage.name, i)
            try:
                _, outcome, _ = core_run(state, x)
            except DimensionMismatchError as exc:
                raise DimensionMismatchError(f"instance {i}: {exc}") from exc
            distances.append(outcome.distance)
            if outcome.label == MELANOMA:
                label = MELANOMA
                exit_stage = k
                break
        results.append(CascadeResult(
            label=label, exit_stage=exit_stage, per_stage_distances=tuple(distances)
        ))
        if policy == EAGER_RESTORE and state.rp_contents != first:
            swap_to(first, i)
    return state, results, trace


# ---------------------------------------------------------------------------
# Event traces
# ---------------------------------------------------------------------------

def event_trace_lines(state: DeviceState) -> list[str]:
    """One machine-diffable line per logged event."""
    return [f"{format_float(e.t)} {e.kind} {e.detail}" for e in state.event_log]


def write_event_trace(state: DeviceState, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in event_trace_lines(state):
            fh.write(line + "\n")
