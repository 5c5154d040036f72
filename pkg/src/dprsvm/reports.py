"""Run reports and their text/CSV/JSON renderings.

A `RunReport` captures everything one classification run produced:
per-instance verdicts, timing totals, the labeled-set evaluation when labels
were available, and the resource/power estimate of the system that (would)
run it.  Reports serialize to deterministic JSON - identical runs produce
byte-identical files - and several reports can be lined up in an aligned
comparison table.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

from .cascade import EvaluationReport
from .perf import RESOURCE_KINDS, Device, PowerBreakdown, ResourceFootprint, utilization_percent

REPORT_FORMAT = "dprsvm-run-report v1"


@dataclass
class RunReport:
    mode: str
    source: str
    n_instances: int
    clock_hz: float
    labels: list[int] = field(default_factory=list)
    exit_stages: list[int] = field(default_factory=list)
    distances: list[list[float]] = field(default_factory=list)
    compute_seconds: float = 0.0
    config_seconds: float = 0.0
    resources: dict = field(default_factory=dict)
    utilization: dict = field(default_factory=dict)
    power: dict = field(default_factory=dict)
    evaluation: dict | None = None
    port: str | None = None
    policy: str | None = None
    swap_count: int | None = None
    trace_path: str | None = None
    seed: int | None = None

    def to_json(self) -> str:
        payload = {"format": REPORT_FORMAT}
        payload.update(asdict(self))
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def resources_dict(footprint: ResourceFootprint) -> dict:
    return {kind: getattr(footprint, kind) for kind in RESOURCE_KINDS}


def utilization_dict(footprint: ResourceFootprint, device: Device) -> dict:
    return {
        kind: utilization_percent(getattr(footprint, kind), getattr(device.capacity, kind))
        for kind in RESOURCE_KINDS
    }


def power_dict(breakdown: PowerBreakdown) -> dict:
    return {
        "total_watts": breakdown.total_watts,
        "static_watts": breakdown.static_watts,
        "ps_dynamic_watts": breakdown.ps_dynamic_watts,
        "pl_dynamic_watts": breakdown.pl_dynamic_watts,
    }


def evaluation_dict(report: EvaluationReport) -> dict:
    return {
        "tp": report.tp,
        "tn": report.tn,
        "fp": report.fp,
        "fn": report.fn,
        "accuracy": report.accuracy,
        "sensitivity": report.sensitivity,
        "specificity": report.specificity,
        "exit_histogram": {str(k): v for k, v in sorted(report.exit_histogram.items())},
    }


def load_run_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("format") != REPORT_FORMAT:
        raise ValueError(f"{path}: not a {REPORT_FORMAT} file")
    return data


# ---------------------------------------------------------------------------
# Text renderings
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        if math.isnan(value):
            return "n/a"
        return f"{value:g}"
    return str(value)


def render_table(rows: list[tuple], headers: list[str]) -> str:
    """Align a list of (label, value...) rows under the given headers."""
    table = [[_fmt(c) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in table:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in table:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


RESOURCE_ROW_LABELS = {
    "slices": "Slices",
    "luts": "LUTs",
    "lut_ram": "Memory LUT",
    "bram": "BRAM",
    "dsp": "DSP48",
}


def format_synth_report(system, footprint: ResourceFootprint, device: Device,
                        power: PowerBreakdown, cycles: int, seconds: float,
                        n_features: int, pipelined: bool) -> str:
    out = [
        f"system: cores={system.n_cores} dpr={'yes' if system.dpr else 'no'} "
        f"timer={'yes' if system.timer else 'no'}",
        f"device: {device.name} @ {device.clock_hz / 1e6:g} MHz",
        "",
    ]
    rows = [
        (RESOURCE_ROW_LABELS[kind],
         getattr(footprint, kind),
         getattr(device.capacity, kind),
         utilization_percent(getattr(footprint, kind), getattr(device.capacity, kind)))
        for kind in RESOURCE_KINDS
    ]
    out.append(render_table(rows, ["resource", "used", "capacity", "util"]))
    out.append(
        f"power: {power.total_watts:.2f} W "
        f"(static {power.static_watts:.3f}, ps-dynamic {power.ps_dynamic_watts:.3f}, "
        f"pl-dynamic {power.pl_dynamic_watts:.3f})"
    )
    mode = "pipelined" if pipelined else "sequential"
    out.append(f"latency: {cycles} cycles per classification ({n_features} features, {mode})")
    out.append(f"processing time: {seconds * 1e6:g} us per classification")
    return "\n".join(out) + "\n"


_COMPARISON_ROWS = (
    ("mode", lambda r: r.get("mode")),
    ("source", lambda r: r.get("source")),
    ("Slices", lambda r: r.get("resources", {}).get("slices")),
    ("LUTs", lambda r: r.get("resources", {}).get("luts")),
    ("Memory LUT", lambda r: r.get("resources", {}).get("lut_ram")),
    ("BRAM", lambda r: r.get("resources", {}).get("bram")),
    ("DSP48", lambda r: r.get("resources", {}).get("dsp")),
    ("Power (W)", lambda r: r.get("power", {}).get("total_watts")),
    ("Frequency (MHz)", lambda r: r.get("clock_hz", 0.0) / 1e6),
    ("Instances", lambda r: r.get("n_instances")),
    ("Compute time (us)", lambda r: r.get("compute_seconds", 0.0) * 1e6),
    ("Config time (ms)", lambda r: r.get("config_seconds", 0.0) * 1e3),
    ("Swaps", lambda r: r.get("swap_count")),
    ("Accuracy", lambda r: (r.get("evaluation") or {}).get("accuracy")),
    ("Sensitivity", lambda r: (r.get("evaluation") or {}).get("sensitivity")),
    ("Specificity", lambda r: (r.get("evaluation") or {}).get("specificity")),
)


def comparison_rows(reports: list[dict]) -> list[tuple]:
    return [(label,) + tuple(extract(r) for r in reports)
            for label, extract in _COMPARISON_ROWS]


def format_comparison(reports: list[dict], names: list[str]) -> str:
    return render_table(comparison_rows(reports), ["metric"] + names)


def comparison_csv(reports: list[dict], names: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric"] + names)
    for row in comparison_rows(reports):
        writer.writerow([_fmt(c) for c in row])
    return buf.getvalue()


def per_instance_csv(report: RunReport) -> str:
    """One row per classified instance: label, exit stage, exit distance."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "label", "exit_stage", "distance"])
    for i, (label, exit_stage, dists) in enumerate(
        zip(report.labels, report.exit_stages, report.distances)
    ):
        writer.writerow([i, label, exit_stage, repr(dists[-1]) if dists else ""])
    return buf.getvalue()
