"""Report rendering: human text, stable-keyed JSON and long-format CSV."""

from __future__ import annotations

import csv
import io
import json

FORMATS = ("human", "machine", "csv")


def emit_report(doc: dict, fmt: str = "human") -> bytes:
    """Render a report document (see :func:`fogsim.scenario.report_document`)."""
    if fmt == "machine":
        return dumps_machine(doc).encode()
    if fmt == "csv":
        return _csv(doc).encode()
    if fmt == "human":
        return _human(doc).encode()
    raise ValueError(f"unknown report format {fmt!r}; choose from {', '.join(FORMATS)}")


def dumps_machine(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def loads_machine(text: str | bytes) -> dict:
    return json.loads(text)


def csv_rows(doc: dict) -> list[tuple[str, str, float]]:
    """``(metric, entity, value)`` rows: one per loop, one per device, three totals."""
    m = doc["metrics"]
    rows = [("loop_mean_ms", label, s["mean_ms"]) for label, s in m["loops"].items()]
    rows += [("energy_j", device, e) for device, e in m["energy_j"].items()]
    rows += [
        ("network_kb", "total", m["network"]["total_kb"]),
        ("network_usage_kb_ms", "total", m["network"]["usage_kb_ms"]),
        ("total_cost", "total", m["total_cost"]),
    ]
    return rows


def _csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "entity", "value"])
    writer.writerows(csv_rows(doc))
    return buf.getvalue()


def _human(doc: dict) -> str:
    m = doc["metrics"]
    scenario = doc.get("scenario", {})
    lines = [
        f"Scenario {scenario.get('name', '?')}  seed={m['seed']}  horizon={m['horizon_ms']:g} ms",
        "",
        "Application loop latency",
    ]
    if not m["loops"]:
        lines.append("  (no loops defined)")
    for label, s in m["loops"].items():
        mean = f"{s['mean_ms']:.3f} ms" if s["count"] else "n/a"
        lines.append(f"  {label}: mean {mean} over {s['count']} samples")
    lines += ["", "Energy consumed (J)"]
    width = max((len(d) for d in m["energy_j"]), default=0)
    for device, e in m["energy_j"].items():
        lines.append(f"  {device:<{width}}  {e:.3f}")
    lines += [
        "",
        f"Network usage: {m['network']['total_kb']:.3f} kB transferred, "
        f"{m['network']['usage_kb_ms']:.3f} kB*ms (size x latency)",
        f"Cost of execution: {m['total_cost']:.3f}",
    ]
    if m.get("processing_delay_ms"):
        lines += ["", "Mean processing delay (ms) by tuple type"]
        for tuple_type, d in m["processing_delay_ms"].items():
            lines.append(f"  {tuple_type}: {d:.3f}")
    return "\n".join(lines) + "\n"
