"""Independent reference computations used to check the simulator.

Nothing here imports simulator internals beyond plain data: the replay
functions work on event-log records (dicts) and device tables (dicts), the
cluster oracle on coordinates and parent ids.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict


def parse_log(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line]


def replay_cost(records: list[dict], devices: list[dict]) -> float:
    """Sum rate_per_mips(host) * cpu_length over processing completions, in log order."""
    rate = {d["id"]: d["rate_per_mips"] for d in devices}
    total = 0.0
    for r in records:
        if r["kind"] == "processing-complete":
            total += rate[r["device"]] * r["cpu_length"]
    return total


def replay_network(records: list[dict]) -> tuple[float, float]:
    kb = usage = 0.0
    for r in records:
        if r["kind"] == "transmit":
            kb += r["nw_length"]
            usage += r["nw_length"] * r["latency"]
    return kb, usage


def replay_energy(records: list[dict], devices: list[dict], horizon: float) -> dict[str, float]:
    """Integrate the linear power model over the utilization step function."""
    by_id = {d["id"]: d for d in devices}
    steps = defaultdict(list)
    for r in records:
        if r["kind"] == "utilization":
            steps[r["device"]].append((r["t"], r["u"]))
    energy = {}
    for dev_id, d in by_id.items():
        idle, busy = d["idle_power"], d["busy_power"]
        t_prev, u_prev, joules = 0.0, 0.0, 0.0
        for t, u in steps[dev_id] + [(horizon, None)]:
            joules += (t - t_prev) * (idle + (busy - idle) * u_prev) / 1000.0
            t_prev, u_prev = t, u
        energy[d["name"]] = joules
    return energy


def brute_force_clusters(points: dict[int, tuple[float, float, int | None, int]], threshold: float):
    """Connected components of the 'close sibling' graph, by repeated flooding.

    ``points`` maps id -> (x, y, parent, level). Returns a set of frozensets.
    """
    ids = sorted(points)

    def close(a, b):
        xa, ya, pa, la = points[a]
        xb, yb, pb, lb = points[b]
        return pa == pb and la == lb and math.hypot(xa - xb, ya - yb) < threshold

    unseen = set(ids)
    components = set()
    while unseen:
        start = min(unseen)
        component = {start}
        frontier = [start]
        while frontier:
            a = frontier.pop()
            for b in ids:
                if b not in component and close(a, b):
                    component.add(b)
                    frontier.append(b)
        unseen -= component
        components.add(frozenset(component))
    return components


def binomial_3sigma(n: int, p: float) -> tuple[int, int]:
    mean = n * p
    sd = math.sqrt(n * p * (1 - p))
    return math.ceil(mean - 3 * sd), math.floor(mean + 3 * sd)


def single_leaf_loop_latency() -> float:
    """Closed-form first loop sample for the one-gateway, one-leaf deadline_test variant.

    sensor latency + clientModule service + RawData uplink (serialization + latency)
    + mainModule service + ResultData downlink + clientModule service + actuator latency.
    """
    sensor_latency = 6.0
    client_service = 100 / 1000 * 1000      # IoTSensor 100 MI on 1000 MIPS
    raw_up = 600 / 10000 * 1000 + 2         # 600 kB over 10000 kB/s, leaf uplink latency 2
    main_service = 6000 / 1500 * 1000       # RawData 6000 MI on 1500 MIPS
    result_down = 50 / 10000 * 1000 + 2     # 50 kB over gateway down_bw, leaf link latency 2
    response_service = 100 / 1000 * 1000    # ResultData 100 MI on 1000 MIPS
    actuator_latency = 1.0
    return (sensor_latency + client_service + raw_up + main_service + result_down
            + response_service + actuator_latency)
