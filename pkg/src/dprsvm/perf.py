"""Calibrated analytical models: core latency, processing time, area, power.

The shipped default constants reproduce the measured reference points of the
target platform (a Zynq-7020-class device at 100 MHz): 278 / 148 cycles for a
27-feature core without / with loop pipelining, the monolithic / cascaded /
partially-reconfigurable utilization rows, and the 1.54 / 1.56 / 1.55 W power
points.  Only those totals are ground truth; the decomposition into
per-iteration cost, pipeline depth, base vs per-core footprint and so on is a
modeling choice, and every constant can be overridden through a calibration
file (see `load_calibration`).
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from decimal import ROUND_HALF_UP, Decimal

from .errors import CapacityError, ParseError, StructuralError

RESOURCE_KINDS = ("slices", "luts", "lut_ram", "bram", "dsp")


@dataclass(frozen=True)
class ResourceFootprint:
    """Fabric resource counts; supports component-wise arithmetic."""

    slices: int = 0
    luts: int = 0
    lut_ram: int = 0
    bram: int = 0
    dsp: int = 0

    def __post_init__(self):
        for kind in RESOURCE_KINDS:
            if getattr(self, kind) < 0:
                raise StructuralError(f"resource count {kind} must be >= 0")

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(getattr(self, kind) for kind in RESOURCE_KINDS)

    def __add__(self, other: "ResourceFootprint") -> "ResourceFootprint":
        return ResourceFootprint(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def scaled(self, n: int) -> "ResourceFootprint":
        return ResourceFootprint(*(n * a for a in self.as_tuple()))

    def max_with(self, other: "ResourceFootprint") -> "ResourceFootprint":
        return ResourceFootprint(*(max(a, b) for a, b in zip(self.as_tuple(), other.as_tuple())))

    def fits_within(self, capacity: "ResourceFootprint") -> bool:
        return all(a <= b for a, b in zip(self.as_tuple(), capacity.as_tuple()))

    def overflowing(self, capacity: "ResourceFootprint") -> list[str]:
        """Names of the resources that exceed `capacity`."""
        return [
            kind
            for kind, a, b in zip(RESOURCE_KINDS, self.as_tuple(), capacity.as_tuple())
            if a > b
        ]

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.as_tuple())


@dataclass(frozen=True)
class Device:
    """A target fabric: capacity limits plus the system clock."""

    name: str
    capacity: ResourceFootprint
    clock_hz: float

    def __post_init__(self):
        if any(c <= 0 for c in self.capacity.as_tuple()):
            raise StructuralError("device capacity must be strictly positive in every field")
        if self.clock_hz <= 0:
            raise StructuralError("device clock must be positive")


ZYNQ_7020 = Device(
    name="xc7z020",
    capacity=ResourceFootprint(slices=106400, luts=53200, lut_ram=17400, bram=140, dsp=220),
    clock_hz=100e6,
)


# ---------------------------------------------------------------------------
# Latency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatencyParams:
    """Cycle model for the classification core's feature loop."""

    pipelined: bool
    iteration_latency: int
    initiation_interval: int
    pipeline_depth: int
    fixed_overhead: int

    def __post_init__(self):
        for name in ("iteration_latency", "initiation_interval", "pipeline_depth", "fixed_overhead"):
            if getattr(self, name) < 0:
                raise StructuralError(f"latency parameter {name} must be >= 0")
        if self.pipelined and self.initiation_interval < 1:
            raise StructuralError("initiation_interval must be >= 1 when pipelined")


# Defaults calibrated so a 27-feature core costs 278 cycles sequentially and
# 148 cycles pipelined; the loop runs features+1 trips.
SEQUENTIAL_LATENCY = LatencyParams(
    pipelined=False, iteration_latency=9, initiation_interval=1, pipeline_depth=0, fixed_overhead=26
)
PIPELINED_LATENCY = LatencyParams(
    pipelined=True, iteration_latency=9, initiation_interval=5, pipeline_depth=13, fixed_overhead=0
)


def core_latency_cycles(num_features: int, params: LatencyParams = PIPELINED_LATENCY) -> int:
    """Clock cycles one classification takes on the core.

    The hardware loop iterates ``num_features + 1`` times (the extra trip
    covers the final bias subtract/compare slot).
    """
    if num_features < 1:
        raise StructuralError(f"num_features must be >= 1, got {num_features}")
    trips = num_features + 1
    if params.pipelined:
        return params.pipeline_depth + (trips - 1) * params.initiation_interval + params.fixed_overhead
    return trips * params.iteration_latency + params.fixed_overhead


def processing_time(cycles: int, clock_hz: float) -> float:
    """Seconds spent for `cycles` at `clock_hz`."""
    if clock_hz <= 0:
        raise StructuralError(f"clock_hz must be positive, got {clock_hz}")
    return cycles / clock_hz


def cascade_processing_time(spec, exit_stage: int, clock_hz: float,
                            params: LatencyParams = PIPELINED_LATENCY) -> float:
    """Compute time of one cascade run that left at `exit_stage` (1-based).

    Sums per-stage core times for stages 1..exit_stage; reconfiguration time
    is accounted separately by the fabric simulator's event log.
    """
    if not 1 <= exit_stage <= spec.n_stages:
        raise StructuralError(f"exit_stage {exit_stage} out of range 1..{spec.n_stages}")
    total = 0.0
    for stage in spec.stages[:exit_stage]:
        total += processing_time(core_latency_cycles(stage.weights.dimension, params), clock_hz)
    return total


# ---------------------------------------------------------------------------
# Resources
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResourceModelParams:
    """Additive footprint model: base + n*per_core (+ margin, + timer)."""

    base: ResourceFootprint
    per_core: ResourceFootprint
    dpr_margin: ResourceFootprint
    timer: ResourceFootprint


# Solved from the reference utilization table: per_core is the cascaded-row
# minus monolithic-row delta, base is what remains of the monolithic row.
DEFAULT_RESOURCE_PARAMS = ResourceModelParams(
    base=ResourceFootprint(slices=307, luts=238, lut_ram=68, bram=0, dsp=0),
    per_core=ResourceFootprint(slices=739, luts=620, lut_ram=2, bram=1, dsp=5),
    dpr_margin=ResourceFootprint(slices=4, luts=9, lut_ram=0, bram=0, dsp=0),
    timer=ResourceFootprint(slices=260, luts=590, lut_ram=0, bram=0, dsp=0),
)


@dataclass(frozen=True)
class SystemDescriptor:
    """What is instantiated on the fabric: core count, DPR wrapper, timer."""

    n_cores: int = 1
    dpr: bool = False
    timer: bool = False

    def __post_init__(self):
        if self.n_cores < 1:
            raise StructuralError(f"n_cores must be >= 1, got {self.n_cores}")
        if self.dpr and self.n_cores != 1:
            raise StructuralError("a DPR system hosts exactly one loaded core")


def estimate_resources(system: SystemDescriptor,
                       params: ResourceModelParams = DEFAULT_RESOURCE_PARAMS,
                       device: Device | None = None) -> ResourceFootprint:
    """Estimated fabric footprint of a system; checks capacity if a device is given."""
    total = params.base + params.per_core.scaled(system.n_cores)
    if system.dpr:
        total = total + params.dpr_margin
    if system.timer:
        total = total + params.timer
    if device is not None:
        over = total.overflowing(device.capacity)
        if over:
            raise CapacityError(
                f"system footprint exceeds {device.name} capacity in: {', '.join(over)}"
            )
    return total


def _round_half_up(value: float, exponent: str) -> Decimal:
    return Decimal(repr(value)).quantize(Decimal(exponent), rounding=ROUND_HALF_UP)


def utilization_percent(count: int, capacity: int) -> str:
    """Utilization as the reference tables print it, e.g. '1%' or '2.3%'.

    The raw ratio is rounded half-up to two decimals first and then to one,
    which matches the reference utilization tables cell for cell
    (5/220 -> 2.3%, 10/220 -> 4.6%).  Integral percentages drop the decimal.
    """
    if capacity <= 0:
        raise StructuralError(f"capacity must be positive, got {capacity}")
    rounded = _round_half_up(float(_round_half_up(100.0 * count / capacity, "0.01")), "0.1")
    if rounded == rounded.to_integral_value():
        return f"{int(rounded)}%"
    return f"{rounded}%"


# ---------------------------------------------------------------------------
# Power
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerModelParams:
    base_watts: float = 1.52
    per_core_watts: float = 0.02
    dpr_overhead_watts: float = 0.01
    static_fraction: float = 0.10
    ps_fraction_of_dynamic: float = 0.95

    def __post_init__(self):
        for name in ("base_watts", "per_core_watts", "dpr_overhead_watts"):
            if getattr(self, name) < 0:
                raise StructuralError(f"{name} must be >= 0")
        for name in ("static_fraction", "ps_fraction_of_dynamic"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise StructuralError(f"{name} must lie in (0, 1)")


DEFAULT_POWER_PARAMS = PowerModelParams()


@dataclass(frozen=True)
class PowerBreakdown:
    total_watts: float
    static_watts: float
    ps_dynamic_watts: float
    pl_dynamic_watts: float


def estimate_power(system: SystemDescriptor,
                   params: PowerModelParams = DEFAULT_POWER_PARAMS) -> PowerBreakdown:
    """Total power plus the static / PS-dynamic / PL-dynamic split.

    The device burns `static_fraction` of the total statically; the host
    processor half dominates the dynamic remainder.  The PL share is computed
    as the exact remainder so the three parts always sum to the total.
    """
    total = params.base_watts + system.n_cores * params.per_core_watts
    if system.dpr:
        total += params.dpr_overhead_watts
    static = params.static_fraction * total
    ps_dynamic = params.ps_fraction_of_dynamic * (total - static)
    pl_dynamic = total - static - ps_dynamic
    return PowerBreakdown(
        total_watts=total,
        static_watts=static,
        ps_dynamic_watts=ps_dynamic,
        pl_dynamic_watts=pl_dynamic,
    )


def speedup_vs_software(hw_time: float, baseline_time: float) -> float:
    """How many times faster the accelerator is than the software baseline."""
    if hw_time <= 0 or baseline_time <= 0:
        raise StructuralError("speedup needs strictly positive times")
    return baseline_time / hw_time


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Calibration:
    """Every tunable constant of the models, bundled for override files."""

    device: Device = ZYNQ_7020
    latency_sequential: LatencyParams = SEQUENTIAL_LATENCY
    latency_pipelined: LatencyParams = PIPELINED_LATENCY
    resources: ResourceModelParams = DEFAULT_RESOURCE_PARAMS
    power: PowerModelParams = DEFAULT_POWER_PARAMS
    bits_per_slice_full: float = 400.0
    bits_per_slice_partial: float = 400.0
    jtag_bits_per_second: float = 33e6
    pcap_bits_per_second: float = 3.2e9

    def latency(self, pipelined: bool) -> LatencyParams:
        return self.latency_pipelined if pipelined else self.latency_sequential


DEFAULT_CALIBRATION = Calibration()


def _set_footprint_field(footprint: ResourceFootprint, kind: str, value: int) -> ResourceFootprint:
    if kind not in RESOURCE_KINDS:
        raise KeyError(kind)
    return replace(footprint, **{kind: value})


def _apply_key(cal: Calibration, key: str, value: str) -> Calibration:
    def as_int():
        return int(value)

    def as_float():
        return float(value)

    parts = key.split(".")
    if parts[0] == "device":
        if parts[1] == "name":
            return replace(cal, device=replace(cal.device, name=value))
        if parts[1] == "clock_hz":
            return replace(cal, device=replace(cal.device, clock_hz=as_float()))
        capacity = _set_footprint_field(cal.device.capacity, parts[1], as_int())
        return replace(cal, device=replace(cal.device, capacity=capacity))
    if parts[0] in ("latency_sequential", "latency_pipelined"):
        current = getattr(cal, parts[0])
        if parts[1] not in {f.name for f in fields(LatencyParams)}:
            raise KeyError(key)
        new = replace(current, **{parts[1]: as_int()})
        return replace(cal, **{parts[0]: new})
    if parts[0] == "resources":
        section = getattr(cal.resources, parts[1])
        new = _set_footprint_field(section, parts[2], as_int())
        return replace(cal, resources=replace(cal.resources, **{parts[1]: new}))
    if parts[0] == "power":
        if parts[1] not in {f.name for f in fields(PowerModelParams)}:
            raise KeyError(key)
        return replace(cal, power=replace(cal.power, **{parts[1]: as_float()}))
    if key in ("bits_per_slice_full", "bits_per_slice_partial",
               "jtag_bits_per_second", "pcap_bits_per_second"):
        return replace(cal, **{key: as_float()})
    raise KeyError(key)


def parse_calibration(data, base: Calibration = DEFAULT_CALIBRATION, path=None) -> Calibration:
    """Apply ``key=value`` overrides to a base calibration.

    '#' comments and blank lines are skipped.  Keys use dotted paths, e.g.
    ``latency_pipelined.initiation_interval=4`` or ``power.base_watts=1.6``.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    cal = base
    for lineno, raw in enumerate(data.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ParseError("expected 'key = value'", path=path, line=lineno)
        try:
            cal = _apply_key(cal, key.strip(), value.strip())
        except KeyError:
            raise ParseError(f"unknown calibration key {key.strip()!r}", path=path, line=lineno) from None
        except ValueError as exc:
            raise ParseError(f"bad value for {key.strip()!r}: {exc}", path=path, line=lineno) from None
        except StructuralError as exc:
            raise ParseError(str(exc), path=path, line=lineno) from None
    return cal


def load_calibration(path, base: Calibration = DEFAULT_CALIBRATION) -> Calibration:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_calibration(fh.read(), base=base, path=str(path))
