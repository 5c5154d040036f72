"""Acceptance suite: one test per release criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
pass/fail lines on the terminal.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from dprsvm import gen
from dprsvm.cascade import cascade_classify_batch, evaluate
from dprsvm.core import (
    accumulate_weights,
    classify,
    classify_direct,
    label_guard_band,
)
from dprsvm.errors import ParseError, StructuralError, UnsupportedKernelError
from dprsvm.fabric import (
    JTAG,
    DeviceState,
    ReconfigurableModule,
    build_configuration_library,
    config_time,
    configure_full,
    dpr_cascade_run,
    parse_bitstream_file,
    serialize_bitstream,
)
from dprsvm.formats import (
    parse_instance_file,
    parse_model_file,
    parse_weight_artifact,
    serialize_weight_artifact,
)
from dprsvm.perf import (
    DEFAULT_RESOURCE_PARAMS,
    PIPELINED_LATENCY,
    SEQUENTIAL_LATENCY,
    SystemDescriptor,
    cascade_processing_time,
    core_latency_cycles,
    estimate_power,
    estimate_resources,
    processing_time,
    speedup_vs_software,
    utilization_percent,
)


@contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        print(f"criterion {number}: FAIL - {title}")
        raise
    print(f"criterion {number}: PASS - {title}")


def test_criterion_1_factorization_equivalence():
    """Direct and factored evaluation agree on 1000 seeded random pairs."""
    with criterion(1, "factorization equivalence over 1000 seeded pairs"):
        rng = np.random.default_rng(2024)
        start = time.perf_counter()
        for _ in range(1000):
            dim = int(rng.integers(1, 65))
            n_sv = int(rng.integers(1, 201))
            model = gen.random_model(rng, dim, n_sv)
            x = gen.random_instances(rng, 1, dim)[0][1]
            weights = accumulate_weights(model)
            direct = classify_direct(model, x)
            factored = classify(weights, x)
            assert abs(direct.distance - factored.distance) <= 1e-6 * (1 + abs(direct.distance))
            if abs(direct.distance) > label_guard_band(weights, x):
                assert direct.label == factored.label
        elapsed = time.perf_counter() - start
        assert elapsed < 2.0, f"equivalence sweep took {elapsed:.2f}s"


def test_criterion_2_latency_calibration():
    """Default latency constants hit the reference cycle counts and are monotonic."""
    with criterion(2, "latency calibration (278 / 148 cycles, monotone 1..512)"):
        assert core_latency_cycles(27, SEQUENTIAL_LATENCY) == 278
        assert core_latency_cycles(27, PIPELINED_LATENCY) == 148
        for params in (SEQUENTIAL_LATENCY, PIPELINED_LATENCY):
            counts = [core_latency_cycles(n, params) for n in range(1, 513)]
            assert all(a < b for a, b in zip(counts, counts[1:]))


def test_criterion_3_timing():
    """Per-stage and cascade timings line up with the reference figures."""
    with criterion(3, "timing (1.48 us stage, 2.96 us negative path)"):
        one_stage = processing_time(148, 100e6)
        assert one_stage == 1.48e-6
        assert abs(one_stage - 1.5e-6) / 1.5e-6 <= 0.05
        spec = gen.reference_cascade(seed=0)
        negative_path = cascade_processing_time(spec, 2, 100e6, PIPELINED_LATENCY)
        assert negative_path == pytest.approx(2.96e-6, rel=1e-12)
        assert abs(negative_path - 3e-6) / 3e-6 <= 0.05
        assert cascade_processing_time(spec, 1, 100e6, PIPELINED_LATENCY) == one_stage


# reference utilization rows: footprint tuple, reference percentage strings
REFERENCE_ROWS = [
    ("monolithic-1", SystemDescriptor(n_cores=1),
     (1046, 858, 70, 1, 5), ("1%", "1.6%", "0.4%", "0.7%", "2.3%"), "exact"),
    ("monolithic-2", SystemDescriptor(n_cores=1),
     (1046, 856, 70, 1, 5), ("1%", "1.6%", "0.4%", "0.7%", "2.3%"), "1pct"),
    ("cascaded", SystemDescriptor(n_cores=2),
     (1785, 1478, 72, 2, 10), ("1.7%", "2.8%", "0.4%", "1.4%", "4.6%"), "exact"),
    ("rm-sensitive", SystemDescriptor(n_cores=1, dpr=True),
     (1050, 867, 70, 1, 5), ("1%", "1.6%", "0.4%", "0.7%", "2.3%"), "1pct"),
    ("rm-verifying", SystemDescriptor(n_cores=1, dpr=True),
     (1050, 862, 70, 1, 5), ("1%", "1.6%", "0.4%", "0.7%", "2.3%"), "1pct"),
]


def test_criterion_4_resource_calibration():
    """All five reference utilization rows reproduce within the stated bounds."""
    with criterion(4, "resource calibration (five reference rows, printed rounding)"):
        from dprsvm.perf import ZYNQ_7020 as device
        for name, system, reference_row, percents, mode in REFERENCE_ROWS:
            estimated = estimate_resources(system).as_tuple()
            if mode == "exact":
                assert estimated == reference_row, name
            for est, ref in zip(estimated, reference_row):
                assert abs(est - ref) <= 0.01 * ref, (name, est, ref)
            caps = device.capacity.as_tuple()
            got = tuple(utilization_percent(c, cap) for c, cap in zip(reference_row, caps))
            assert got == percents, name


def test_criterion_5_power_calibration():
    """Power totals are exact; the split honors the stated fractions."""
    with criterion(5, "power calibration (1.54 / 1.56 / 1.55 W, 10% / 95% split)"):
        cases = [
            (SystemDescriptor(n_cores=1), 1.54),
            (SystemDescriptor(n_cores=2), 1.56),
            (SystemDescriptor(n_cores=1, dpr=True), 1.55),
        ]
        for system, expected in cases:
            breakdown = estimate_power(system)
            assert breakdown.total_watts == expected
            static_share = breakdown.static_watts / breakdown.total_watts
            dynamic = breakdown.total_watts - breakdown.static_watts
            ps_share = breakdown.ps_dynamic_watts / dynamic
            assert abs(static_share - 0.10) <= 0.005
            assert abs(ps_share - 0.95) <= 0.005


def test_criterion_6_dpr_equivalence():
    """A 500-instance stream classifies identically with and without swapping."""
    with criterion(6, "dpr equivalence, swap-count oracle, config-time accounting"):
        spec = gen.reference_cascade(seed=42)
        rng = np.random.default_rng(4242)
        instances = [x for _, x in gen.random_instances(rng, 500, spec.dimension)]

        rms = [ReconfigurableModule(name=s.name, weights=s.weights) for s in spec.stages]
        library = build_configuration_library(DEFAULT_RESOURCE_PARAMS.base, rms)
        state = DeviceState(library.device)
        configure_full(state, library.full_for(spec.stages[0].name), JTAG)
        state, dpr_results, trace = dpr_cascade_run(state, spec, library, instances,
                                                    port=JTAG, policy="lazy")
        static_results = cascade_classify_batch(spec, instances)
        assert [r.label for r in dpr_results] == [r.label for r in static_results]

        # replay oracle: swaps happen exactly at module transitions
        loaded = spec.stages[0].name
        expected_swaps = 0
        for result in static_results:
            for k in range(result.exit_stage):
                needed = spec.stages[k].name
                if needed != loaded:
                    expected_swaps += 1
                    loaded = needed
        assert trace.swap_count == expected_swaps

        replayed = sum(e.duration for e in state.event_log if e.kind.startswith("configure"))
        assert state.cumulative_config_time == replayed

        full_time = config_time(library.full_for(spec.stages[0].name), JTAG)
        for swap in trace.swaps:
            assert 0.1e-3 <= swap.seconds <= 100e-3
            assert swap.seconds < full_time
        assert trace.swap_count > 0  # the stream exercises both stages


def test_criterion_7_cascade_fn_property():
    """On 20 seeded labeled sets the cascade never loses positives to a stage."""
    with criterion(7, "cascade FN <= stage FN and FP >= stage FP on 20 seeded sets"):
        for i in range(20):
            spec = gen.reference_cascade(seed=i)
            rng = np.random.default_rng(1000 + i)
            labeled = gen.random_instances(rng, 150, spec.dimension, labeled=True)
            report = evaluate(spec, labeled)
            stage_fns, stage_fps = [], []
            for stage in spec.stages:
                fn = fp = 0
                for label, x in labeled:
                    predicted = classify(stage.weights, x).label
                    if label == 1 and predicted == -1:
                        fn += 1
                    if label == -1 and predicted == 1:
                        fp += 1
                stage_fns.append(fn)
                stage_fps.append(fp)
            assert report.fn <= min(stage_fns), (i, report.fn, stage_fns)
            assert report.fp >= max(stage_fps), (i, report.fp, stage_fps)


def test_criterion_8_serialization():
    """Round trips are byte-exact and malformed inputs fail loudly and typed."""
    with criterion(8, "serialization round trips and malformed-input rejection"):
        rng = np.random.default_rng(88)
        for _ in range(1000):
            w = gen.random_weights(rng, int(rng.integers(1, 48)), name="w")
            first = serialize_weight_artifact(w)
            second = serialize_weight_artifact(parse_weight_artifact(first))
            assert second == first

        for i in range(100):
            dim = int(rng.integers(1, 24))
            lib = build_configuration_library(
                DEFAULT_RESOURCE_PARAMS.base,
                [ReconfigurableModule(name="A", weights=gen.random_weights(rng, dim, name="A")),
                 ReconfigurableModule(name="B", weights=gen.random_weights(rng, dim, name="B"))],
            )
            for bs in (lib.full_for("A"), lib.partial_for("B")):
                first = serialize_bitstream(bs)
                second = serialize_bitstream(parse_bitstream_file(first))
                assert second == first

        # wrong counts
        with pytest.raises(ParseError):
            parse_weight_artifact(b"svm-ac v1\nname m\nfeatures 3\nbias 0.0\n1.0\n2.0\n")
        with pytest.raises(ParseError):
            parse_instance_file("1.0 2.0 3.0\n", expected_dim=2)
        # bad kernel code
        with pytest.raises(UnsupportedKernelError):
            parse_model_file("v\n2\n3\n1\n1\n1\n2\n5\n2\n0.0\n1.0 1:1.0 #\n")
        # non-finite values
        with pytest.raises(ParseError):
            parse_weight_artifact(b"svm-ac v1\nname m\nfeatures 1\nbias inf\n1.0\n")
        with pytest.raises(ParseError):
            parse_model_file("v\n0\n3\n1\n1\n1\n1\n5\n2\nnan\n1.0 1:1.0 #\n")
        # non-finite content cannot even be constructed for serialization
        with pytest.raises(StructuralError):
            from dprsvm.core import WeightArtifact
            WeightArtifact(name="m", dimension=1, ac=np.array([math.inf]), bias=0.0)


def test_criterion_9_desk_scale_boundaries():
    """Clinical accuracies and the ARM speedup exist only as metadata/arithmetic."""
    with criterion(9, "desk-scale boundary: catalog metadata and 5.0x ratio"):
        catalog = gen.REFERENCE_MODELS
        assert catalog["M"].n_support_vectors == 61
        assert catalog["N"].n_support_vectors == 139
        assert catalog["M"].nominal_accuracy_pct == 97.92
        assert catalog["N"].nominal_accuracy_pct == 72.51
        assert catalog["M"].features == catalog["N"].features == 27
        # the reference hardware-vs-software ratio is pure arithmetic here
        assert speedup_vs_software(1.8e-6, 9.0e-6) == 5.0
