"""Performance-model tests: latency, timing, resources, power, calibration."""

import pytest

from dprsvm import gen
from dprsvm.errors import CapacityError, ParseError, StructuralError
from dprsvm.perf import (
    DEFAULT_CALIBRATION,
    DEFAULT_POWER_PARAMS,
    DEFAULT_RESOURCE_PARAMS,
    PIPELINED_LATENCY,
    SEQUENTIAL_LATENCY,
    ZYNQ_7020,
    Device,
    LatencyParams,
    ResourceFootprint,
    SystemDescriptor,
    cascade_processing_time,
    core_latency_cycles,
    estimate_power,
    estimate_resources,
    parse_calibration,
    processing_time,
    speedup_vs_software,
    utilization_percent,
)


# ---------------------------------------------------------------------------
# latency
# ---------------------------------------------------------------------------

def test_latency_defaults_reproduce_reference_cycle_counts():
    assert core_latency_cycles(27, SEQUENTIAL_LATENCY) == 278
    assert core_latency_cycles(27, PIPELINED_LATENCY) == 148


def test_latency_13_features():
    # trips = 14: 14*9 + 26 = 152 sequential, 13 + 13*5 = 78 pipelined
    assert core_latency_cycles(13, SEQUENTIAL_LATENCY) == 152
    assert core_latency_cycles(13, PIPELINED_LATENCY) == 78


def test_latency_strictly_monotonic_both_modes():
    for params in (SEQUENTIAL_LATENCY, PIPELINED_LATENCY):
        counts = [core_latency_cycles(n, params) for n in range(1, 513)]
        assert all(a < b for a, b in zip(counts, counts[1:]))


def test_pipelining_wins_from_small_feature_counts():
    """With the defaults, the pipelined loop is cheaper whenever trips >= 4."""
    for n in range(3, 129):
        assert core_latency_cycles(n, PIPELINED_LATENCY) < core_latency_cycles(n, SEQUENTIAL_LATENCY)


def test_latency_rejects_zero_features():
    with pytest.raises(StructuralError):
        core_latency_cycles(0, PIPELINED_LATENCY)


def test_latency_params_validation():
    with pytest.raises(StructuralError):
        LatencyParams(pipelined=True, iteration_latency=9, initiation_interval=0,
                      pipeline_depth=13, fixed_overhead=0)
    with pytest.raises(StructuralError):
        LatencyParams(pipelined=False, iteration_latency=-1, initiation_interval=1,
                      pipeline_depth=0, fixed_overhead=0)


# ---------------------------------------------------------------------------
# timing
# ---------------------------------------------------------------------------

def test_processing_time_reference_point():
    assert processing_time(148, 100e6) == 1.48e-6


def test_processing_time_zero_cycles():
    assert processing_time(0, 100e6) == 0.0


def test_processing_time_250mhz():
    assert processing_time(148, 250e6) == pytest.approx(0.592e-6, rel=1e-12)


def test_cascade_processing_time_two_stage_negative_path():
    spec = gen.reference_cascade(seed=0)
    assert cascade_processing_time(spec, 2, 100e6, PIPELINED_LATENCY) == pytest.approx(2.96e-6, rel=1e-12)


def test_cascade_processing_time_positive_path_is_one_stage():
    spec = gen.reference_cascade(seed=0)
    one = processing_time(core_latency_cycles(27, PIPELINED_LATENCY), 100e6)
    assert cascade_processing_time(spec, 1, 100e6, PIPELINED_LATENCY) == one


def test_cascade_processing_time_additivity():
    from dprsvm.cascade import CascadeSpec, CascadeStage
    rng_weights = [gen.random_weights(__import__("numpy").random.default_rng(i), 27, name=f"s{i}")
                   for i in range(3)]
    spec = CascadeSpec(stages=tuple(CascadeStage(name=f"s{i}", weights=w)
                                    for i, w in enumerate(rng_weights)))
    one = processing_time(core_latency_cycles(27, PIPELINED_LATENCY), 100e6)
    assert cascade_processing_time(spec, 3, 100e6, PIPELINED_LATENCY) == pytest.approx(3 * one, rel=1e-15)


def test_cascade_processing_time_bad_exit_stage():
    spec = gen.reference_cascade(seed=0)
    with pytest.raises(StructuralError):
        cascade_processing_time(spec, 3, 100e6)


# ---------------------------------------------------------------------------
# resources
# ---------------------------------------------------------------------------

TABLE_ROWS = {
    "monolithic": (SystemDescriptor(n_cores=1), (1046, 858, 70, 1, 5)),
    "cascaded": (SystemDescriptor(n_cores=2), (1785, 1478, 72, 2, 10)),
    "dpr": (SystemDescriptor(n_cores=1, dpr=True), (1050, 867, 70, 1, 5)),
}


@pytest.mark.parametrize("name", sorted(TABLE_ROWS))
def test_resource_defaults_reproduce_reference_rows(name):
    system, expected = TABLE_ROWS[name]
    assert estimate_resources(system).as_tuple() == expected


def test_per_core_footprint_is_the_row_delta():
    one = estimate_resources(SystemDescriptor(n_cores=1))
    two = estimate_resources(SystemDescriptor(n_cores=2))
    delta = tuple(b - a for a, b in zip(one.as_tuple(), two.as_tuple()))
    assert delta == DEFAULT_RESOURCE_PARAMS.per_core.as_tuple() == (739, 620, 2, 1, 5)


def test_resource_additivity_per_core():
    for n in range(1, 8):
        a = estimate_resources(SystemDescriptor(n_cores=n))
        b = estimate_resources(SystemDescriptor(n_cores=n + 1))
        assert (a + DEFAULT_RESOURCE_PARAMS.per_core).as_tuple() == b.as_tuple()


def test_timer_footprint_delta():
    base = estimate_resources(SystemDescriptor(n_cores=1))
    timed = estimate_resources(SystemDescriptor(n_cores=1, timer=True))
    assert timed.as_tuple() == (1306, 1448, 70, 1, 5)
    assert tuple(b - a for a, b in zip(base.as_tuple(), timed.as_tuple())) == (260, 590, 0, 0, 0)


def test_dpr_with_timer_row():
    timed = estimate_resources(SystemDescriptor(n_cores=1, dpr=True, timer=True))
    assert timed.as_tuple() == (1310, 1457, 70, 1, 5)


def test_capacity_error_names_resources():
    tiny = Device(name="tiny", capacity=ResourceFootprint(2000, 2000, 100, 3, 11), clock_hz=1e8)
    with pytest.raises(CapacityError, match="dsp"):
        estimate_resources(SystemDescriptor(n_cores=3), device=tiny)


def test_descriptor_validation():
    with pytest.raises(StructuralError):
        SystemDescriptor(n_cores=0)
    with pytest.raises(StructuralError):
        SystemDescriptor(n_cores=2, dpr=True)


@pytest.mark.parametrize("count, capacity, expected", [
    (1046, 106400, "1%"),
    (858, 53200, "1.6%"),
    (70, 17400, "0.4%"),
    (1, 140, "0.7%"),
    (5, 220, "2.3%"),
    (1785, 106400, "1.7%"),
    (1478, 53200, "2.8%"),
    (2, 140, "1.4%"),
    (10, 220, "4.6%"),
    (1050, 106400, "1%"),
    (867, 53200, "1.6%"),
    (862, 53200, "1.6%"),
])
def test_utilization_percent_matches_reference_rounding(count, capacity, expected):
    assert utilization_percent(count, capacity) == expected


# ---------------------------------------------------------------------------
# power
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("system, expected", [
    (SystemDescriptor(n_cores=1), 1.54),
    (SystemDescriptor(n_cores=2), 1.56),
    (SystemDescriptor(n_cores=1, dpr=True), 1.55),
])
def test_power_defaults_reproduce_reference_points(system, expected):
    assert estimate_power(system).total_watts == expected


def test_power_breakdown_fractions():
    p = estimate_power(SystemDescriptor(n_cores=1))
    assert p.static_watts == pytest.approx(0.10 * p.total_watts, rel=1e-12)
    dynamic = p.total_watts - p.static_watts
    assert p.ps_dynamic_watts == pytest.approx(0.95 * dynamic, rel=1e-12)
    assert p.static_watts + p.ps_dynamic_watts + p.pl_dynamic_watts == pytest.approx(
        p.total_watts, abs=1e-12)


def test_power_additivity():
    for n in range(1, 6):
        a = estimate_power(SystemDescriptor(n_cores=n)).total_watts
        b = estimate_power(SystemDescriptor(n_cores=n + 1)).total_watts
        assert b - a == pytest.approx(DEFAULT_POWER_PARAMS.per_core_watts, abs=1e-12)


def test_power_params_validation():
    from dprsvm.perf import PowerModelParams
    with pytest.raises(StructuralError):
        PowerModelParams(static_fraction=0.0)
    with pytest.raises(StructuralError):
        PowerModelParams(per_core_watts=-0.1)


# ---------------------------------------------------------------------------
# speedup
# ---------------------------------------------------------------------------

def test_speedup_reference_ratio():
    assert speedup_vs_software(1.8e-6, 9.0e-6) == 5.0


def test_speedup_equal_times():
    assert speedup_vs_software(2.0e-6, 2.0e-6) == 1.0


def test_speedup_halving_hw_time_doubles_ratio():
    assert speedup_vs_software(0.9e-6, 9.0e-6) == 2 * speedup_vs_software(1.8e-6, 9.0e-6)


def test_speedup_rejects_nonpositive():
    with pytest.raises(StructuralError):
        speedup_vs_software(0.0, 1.0)


# ---------------------------------------------------------------------------
# calibration files
# ---------------------------------------------------------------------------

def test_calibration_overrides():
    text = """
    # tweak a few constants
    latency_pipelined.initiation_interval = 4
    power.base_watts = 1.60
    resources.per_core.dsp = 7
    device.clock_hz = 250e6
    bits_per_slice_partial = 200
    """
    cal = parse_calibration(text)
    assert cal.latency_pipelined.initiation_interval == 4
    assert cal.power.base_watts == 1.60
    assert cal.resources.per_core.dsp == 7
    assert cal.device.clock_hz == 250e6
    assert cal.bits_per_slice_partial == 200.0
    # untouched constants stay at defaults
    assert cal.latency_sequential == DEFAULT_CALIBRATION.latency_sequential
    assert cal.resources.base == DEFAULT_CALIBRATION.resources.base


def test_calibration_unknown_key():
    with pytest.raises(ParseError):
        parse_calibration("latency_pipelined.voltage = 3\n")


def test_calibration_bad_value():
    with pytest.raises(ParseError):
        parse_calibration("power.base_watts = plenty\n")


def test_calibration_missing_equals():
    with pytest.raises(ParseError):
        parse_calibration("power.base_watts 1.6\n")


def test_default_device_capacities():
    assert ZYNQ_7020.capacity.as_tuple() == (106400, 53200, 17400, 140, 220)
    assert ZYNQ_7020.clock_hz == 100e6
