"""Command-line front end.

Subcommands:
  build   turn a trained model file into a deployable weight artifact
  synth   estimate resources/power/latency for a system configuration
  run     classify an instance file (monolithic, cascade or dpr mode)
  report  line up several run reports in one comparison table
  gen     produce seeded synthetic models, instances and cascades

Exit codes: 0 success, 2 parse/structure errors, 3 dimension mismatches,
4 capacity violations, 5 configuration-order errors, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import replace

import numpy as np

from . import cascade as casc
from . import fabric, formats, gen, perf, reports
from .core import accumulate_weights, classify
from .errors import (
    CapacityError,
    ConfigOrderError,
    DimensionMismatchError,
    DprsvmError,
    ParseError,
    StructuralError,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_CAPACITY = 4
EXIT_CONFIG_ORDER = 5

CALIBRATION_ENV = "DPRSVM_CALIBRATION"


def _load_calibration(args) -> perf.Calibration:
    path = getattr(args, "calibration", None) or os.environ.get(CALIBRATION_ENV)
    if path:
        return perf.load_calibration(path)
    return perf.DEFAULT_CALIBRATION


def _device(cal: perf.Calibration, args) -> perf.Device:
    clock_mhz = getattr(args, "clock_mhz", None)
    if clock_mhz is not None:
        return replace(cal.device, clock_hz=clock_mhz * 1e6)
    return cal.device


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------

def cmd_build(args) -> int:
    model = formats.load_model_file(args.model, name=args.name)
    weights = accumulate_weights(model)
    formats.save_weight_artifact(weights, args.output)
    print(f"model {model.name}: dimension={model.dimension} "
          f"support_vectors={model.n_support_vectors}")
    print(f"wrote {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    cal = _load_calibration(args)
    device = _device(cal, args)
    system = perf.SystemDescriptor(n_cores=args.cores, dpr=args.dpr, timer=args.timer)
    footprint = perf.estimate_resources(system, cal.resources, device=device)
    power = perf.estimate_power(system, cal.power)
    latency = cal.latency(not args.no_pipeline)
    cycles = perf.core_latency_cycles(args.features, latency)
    seconds = perf.processing_time(cycles, device.clock_hz)
    text = reports.format_synth_report(system, footprint, device, power, cycles,
                                       seconds, args.features, not args.no_pipeline)
    sys.stdout.write(text)
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric", "value"])
        for kind in perf.RESOURCE_KINDS:
            writer.writerow([kind, getattr(footprint, kind)])
            writer.writerow([f"{kind}_util", perf.utilization_percent(
                getattr(footprint, kind), getattr(device.capacity, kind))])
        writer.writerow(["power_total_watts", repr(power.total_watts)])
        writer.writerow(["power_static_watts", repr(power.static_watts)])
        writer.writerow(["power_ps_dynamic_watts", repr(power.ps_dynamic_watts)])
        writer.writerow(["power_pl_dynamic_watts", repr(power.pl_dynamic_watts)])
        writer.writerow(["latency_cycles", cycles])
        writer.writerow(["processing_seconds", repr(seconds)])
        _write_text(args.csv, buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _sniff_seed(path) -> int | None:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline().strip()
    except OSError:
        return None
    if first.startswith("# seed="):
        try:
            return int(first.removeprefix("# seed="))
        except ValueError:
            return None
    return None


def _run_monolithic(weights, instances, latency, clock_hz):
    results = [
        casc.CascadeResult(label=o.label, exit_stage=1, per_stage_distances=(o.distance,))
        for o in (classify(weights, x) for x in instances)
    ]
    per_run = perf.processing_time(perf.core_latency_cycles(weights.dimension, latency), clock_hz)
    return results, per_run * len(instances), 0.0, None, None


def _run_cascade(spec, instances, latency, clock_hz):
    results = casc.cascade_classify_batch(spec, instances)
    compute = sum(
        perf.cascade_processing_time(spec, r.exit_stage, clock_hz, latency) for r in results
    )
    return results, compute, 0.0, None, None


def _run_dpr(spec, instances, cal, device, port, policy):
    rms = [
        fabric.ReconfigurableModule(
            name=stage.name, weights=stage.weights,
            footprint=cal.resources.per_core, latency_params=cal.latency_pipelined,
        )
        for stage in spec.stages
    ]
    library = fabric.build_configuration_library(
        cal.resources.base, rms, device=device, margin=cal.resources.dpr_margin,
        bits_per_slice_full=cal.bits_per_slice_full,
        bits_per_slice_partial=cal.bits_per_slice_partial,
    )
    state = fabric.DeviceState(device)
    fabric.configure_full(state, library.full_for(spec.stages[0].name), port)
    state, results, trace = fabric.dpr_cascade_run(state, spec, library, instances,
                                                   port=port, policy=policy)
    compute = sum(
        perf.cascade_processing_time(spec, r.exit_stage, device.clock_hz, cal.latency_pipelined)
        for r in results
    )
    return results, compute, state.cumulative_config_time, state, trace


def cmd_run(args) -> int:
    cal = _load_calibration(args)
    device = _device(cal, args)
    latency = cal.latency_pipelined

    if args.mode == "monolithic":
        if not args.model:
            raise StructuralError("monolithic mode needs --model")
        weights = formats.load_weight_artifact(args.model)
        spec = casc.CascadeSpec(stages=(casc.CascadeStage(name=weights.name, weights=weights),))
        source = args.model
    else:
        if not args.cascade:
            raise StructuralError(f"{args.mode} mode needs --cascade")
        spec = formats.load_cascade_file(args.cascade)
        source = args.cascade

    labeled = args.labeled
    pairs = formats.load_instance_file(args.instances, spec.dimension, labeled=labeled)
    instances = [x for _, x in pairs]
    y_true = [label for label, _ in pairs] if labeled else None

    state = trace = None
    if args.mode == "monolithic":
        results, compute, config_s, state, trace = _run_monolithic(
            spec.stages[0].weights, instances, latency, device.clock_hz)
        system = perf.SystemDescriptor(n_cores=1, timer=args.timer)
    elif args.mode == "cascade":
        results, compute, config_s, state, trace = _run_cascade(
            spec, instances, latency, device.clock_hz)
        system = perf.SystemDescriptor(n_cores=spec.n_stages, timer=args.timer)
    else:
        port = fabric.PORTS[args.port]
        results, compute, config_s, state, trace = _run_dpr(
            spec, instances, cal, device, port, args.policy)
        system = perf.SystemDescriptor(n_cores=1, dpr=True, timer=args.timer)

    footprint = perf.estimate_resources(system, cal.resources, device=device)
    power = perf.estimate_power(system, cal.power)

    report = reports.RunReport(
        mode=args.mode,
        source=source,
        n_instances=len(instances),
        clock_hz=device.clock_hz,
        labels=[r.label for r in results],
        exit_stages=[r.exit_stage for r in results],
        distances=[list(r.per_stage_distances) for r in results],
        compute_seconds=compute,
        config_seconds=config_s,
        resources=reports.resources_dict(footprint),
        utilization=reports.utilization_dict(footprint, device),
        power=reports.power_dict(power),
        evaluation=(reports.evaluation_dict(casc.report_from_results(y_true, results))
                    if labeled else None),
        port=args.port if args.mode == "dpr" else None,
        policy=args.policy if args.mode == "dpr" else None,
        swap_count=trace.swap_count if trace is not None else None,
        trace_path=args.trace,
        seed=_sniff_seed(args.instances),
    )

    if args.trace:
        if state is None:
            raise StructuralError("--trace is only meaningful in dpr mode")
        fabric.write_event_trace(state, args.trace)
    if args.out:
        _write_text(args.out, report.to_json())
    if args.csv:
        _write_text(args.csv, reports.per_instance_csv(report))

    positives = sum(1 for r in results if r.label == 1)
    print(f"mode={args.mode} instances={len(instances)} positives={positives} "
          f"compute={compute * 1e6:g}us config={config_s * 1e3:g}ms")
    if report.evaluation:
        ev = report.evaluation
        print(f"tp={ev['tp']} tn={ev['tn']} fp={ev['fp']} fn={ev['fn']} "
              f"accuracy={ev['accuracy']:.4f}")
    if args.out:
        print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def cmd_report(args) -> int:
    loaded = []
    names = []
    for path in args.reports:
        try:
            loaded.append(reports.load_run_report(path))
        except ValueError as exc:
            raise ParseError(str(exc), path=path) from None
        names.append(os.path.splitext(os.path.basename(path))[0])
    sys.stdout.write(reports.format_comparison(loaded, names))
    if args.csv:
        _write_text(args.csv, reports.comparison_csv(loaded, names))
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.what == "model":
        model = gen.random_model(rng, args.features, args.svs, name=args.name)
        # the seed rides on the ignored version line
        text = formats.write_model_file(model).replace(
            "SVM-light compatible model file (linear subset)",
            f"SVM-light compatible model file (linear subset) seed={args.seed}", 1)
        _write_text(args.output, text)
        print(f"wrote {args.output} (seed={args.seed}, features={args.features}, svs={args.svs})")
    elif args.what == "instances":
        pairs = gen.random_instances(rng, args.count, args.features, labeled=args.labeled)
        body = formats.write_instance_file(pairs, labeled=args.labeled)
        _write_text(args.output, f"# seed={args.seed}\n" + body)
        print(f"wrote {args.output} (seed={args.seed}, count={args.count}, "
              f"features={args.features}, labeled={args.labeled})")
    else:  # cascade
        spec = gen.reference_cascade(seed=args.seed)
        os.makedirs(args.output, exist_ok=True)
        entries = []
        for stage in spec.stages:
            rel = f"{stage.name}.ac"
            formats.save_weight_artifact(stage.weights, os.path.join(args.output, rel))
            entries.append((stage.name, rel))
        cascade_path = os.path.join(args.output, "cascade.txt")
        _write_text(cascade_path, formats.write_cascade_file(entries))
        print(f"wrote {cascade_path} (seed={args.seed}, stages={spec.stage_names()})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dprsvm",
        description="Cascade linear-SVM engine with a reconfigurable-fabric simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="compile a model file into a weight artifact")
    p.add_argument("model", help="SVM-Light-compatible model file (linear kernel)")
    p.add_argument("-o", "--output", required=True, help="weight artifact to write")
    p.add_argument("--name", default=None, help="artifact name (default: model file stem)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("synth", help="estimate resources, power and latency")
    p.add_argument("--cores", type=int, default=1)
    p.add_argument("--dpr", action="store_true", help="single swappable core behind a partition")
    p.add_argument("--timer", action="store_true", help="include the cycle-counter peripheral")
    p.add_argument("--features", type=int, default=27)
    p.add_argument("--no-pipeline", action="store_true", help="use the sequential-loop core")
    p.add_argument("--clock-mhz", type=float, default=None)
    p.add_argument("--calibration", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="classify an instance file")
    p.add_argument("--mode", choices=("monolithic", "cascade", "dpr"), required=True)
    p.add_argument("--model", default=None, help="weight artifact (monolithic mode)")
    p.add_argument("--cascade", default=None, help="cascade spec file (cascade/dpr modes)")
    p.add_argument("--instances", required=True)
    p.add_argument("--labeled", action="store_true", help="instances carry leading +1/-1 labels")
    p.add_argument("--clock-mhz", type=float, default=None)
    p.add_argument("--port", choices=sorted(fabric.PORTS), default="jtag")
    p.add_argument("--policy", choices=fabric.POLICIES, default=fabric.LAZY)
    p.add_argument("--timer", action="store_true")
    p.add_argument("--calibration", default=None)
    p.add_argument("--out", default=None, help="write the run report (JSON)")
    p.add_argument("--csv", default=None, help="write per-instance results as CSV")
    p.add_argument("--trace", default=None, help="write the device event trace (dpr mode)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="compare run reports side by side")
    p.add_argument("reports", nargs="+")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gen", help="generate seeded synthetic fixtures")
    p.add_argument("what", choices=("model", "instances", "cascade"))
    p.add_argument("-o", "--output", required=True, help="output file (or directory for cascade)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--features", type=int, default=27)
    p.add_argument("--svs", type=int, default=61)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--labeled", action="store_true")
    p.add_argument("--name", default="model")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ConfigOrderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ORDER
    except DprsvmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
