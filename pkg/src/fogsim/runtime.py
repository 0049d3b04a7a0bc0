"""Executes a placed scenario on the event kernel.

Sensors emit tuples, links serialize transmissions, module instances serve
tuples FIFO, selectivity mappings derive new tuples, and actuators receive the
final ones. Tuples climb toward the cloud until a device hosts their
destination module; every forwarding hop is pushed onto ``down_path`` so that
DOWN tuples can retrace the route exactly.
"""

from __future__ import annotations

import copy
import itertools
import json
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from fogsim.application import (
    Application,
    AppEdge,
    Direction,
    EdgeKind,
    Tuple,
    derive_tuples,
    is_subsequence,
    loop_terminal_type,
    validate_application,
)
from fogsim.errors import RoutingError, ValidationError
from fogsim.kernel import Event, EventKind, Kernel, RngStream
from fogsim.metrics import Metrics, MetricsReport
from fogsim.placement import ModuleInstance, Placement
from fogsim.topology import MobilityEntry, Sensor, Topology, schedule_mobility

logger = logging.getLogger(__name__)


@dataclass
class LinkState:
    src: int
    dst: int
    direction: Direction
    bandwidth: float
    latency: float
    busy_until: float = 0.0


@dataclass
class InstanceQueue:
    index: int
    instance: ModuleInstance
    pending: deque = field(default_factory=deque)
    busy_until: float = 0.0
    # (tuple, enqueue time) in service, if any
    current: tuple[Tuple, float] | None = None


class EventLog:
    """In-memory, line-delimited record of everything that happened in a run."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.records: list[dict] = []

    def add(self, t: float, kind: str, device: int | None = None, tup: Tuple | None = None, **extra) -> None:
        if not self.enabled:
            return
        rec = {
            "t": t,
            "kind": kind,
            "device": device,
            "tuple_id": tup.id if tup else None,
            "lineage_id": tup.lineage_id if tup else None,
            "tuple_type": tup.tuple_type if tup else None,
        }
        rec.update(extra)
        self.records.append(rec)

    def lines(self) -> Iterable[str]:
        for rec in self.records:
            yield json.dumps(rec, sort_keys=True, separators=(",", ":"))

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.lines())


@dataclass
class RunCounters:
    created: int = 0
    delivered: int = 0
    consumed: int = 0
    derived: int = 0
    in_flight: int = 0


class Simulation:
    """One run of a fully built scenario.

    The topology is copied, so mobility during the run never touches the
    caller's object.
    """

    def __init__(
        self,
        topology: Topology,
        app: Application,
        placement: Placement,
        *,
        seed: int = 0,
        horizon: float = 10000.0,
        mobility: Iterable[MobilityEntry] = (),
        log_events: bool = True,
        trace: bool = False,
    ):
        self.topology = copy.deepcopy(topology)
        self.app = app
        self.placement = placement
        self.seed = int(seed)
        self.horizon = float(horizon)
        self.mobility = sorted(mobility, key=lambda m: m.at_time)
        self.kernel = Kernel(trace=trace)
        self.log = EventLog(log_events)
        self.counters = RunCounters()
        self.metrics = Metrics(
            self.topology.devices, [loop.label for loop in app.loops], seed=self.seed
        )
        self._selectivity = RngStream(self.seed, "selectivity")
        self._tuple_ids = itertools.count(1)
        self._lineage_ids = itertools.count(1)
        self._uplinks: dict[int, LinkState] = {}
        self._downlinks: dict[tuple[int, int], LinkState] = {}
        self._queues = [InstanceQueue(i, inst) for i, inst in enumerate(placement.instances)]
        self._queue_index: dict[tuple[int, str], list[InstanceQueue]] = {}
        for q in self._queues:
            self._queue_index.setdefault((q.instance.host, q.instance.module), []).append(q)
        self._busy_mips = {d: 0.0 for d in self.topology.devices}
        self._emitted = {s.id: 0 for s in self.topology.sensors}
        self._loop_terminals = [
            (loop, loop_terminal_type(app, loop)) for loop in app.loops
        ]
        self._report: MetricsReport | None = None

        k = self.kernel
        k.on(EventKind.SENSOR_EMIT, self._on_sensor_emit)
        k.on(EventKind.TUPLE_ARRIVAL, self._on_tuple_arrival)
        k.on(EventKind.TRANSMISSION_COMPLETE, self._on_transmission_complete)
        k.on(EventKind.PROCESSING_COMPLETE, self._on_processing_complete)
        k.on(EventKind.MOBILITY, self._on_mobility)
        k.on(EventKind.PERIODIC_EDGE_FIRE, self._on_periodic_fire)

    # -- setup ----------------------------------------------------------------

    def validate(self) -> list[str]:
        problems = list(self.topology.validate())
        problems.extend(validate_application(self.app))
        names = {m.name for m in self.app.modules}
        for inst in self.placement.instances:
            if inst.host not in self.topology.devices:
                problems.append(f"instance of {inst.module!r} on unknown device {inst.host}")
            if inst.module not in names:
                problems.append(f"instance of unknown module {inst.module!r}")
        for module in names:
            if not self.placement.of(module):
                problems.append(f"module {module!r} has no placed instance")
        for s in self.topology.sensors:
            if self.app.sensor_edge(s.tuple_type) is None:
                problems.append(f"sensor {s.name!r}: no SENSOR edge for tuple type {s.tuple_type!r}")
        actuator_names = self.app.actuator_names()
        for dev_id in sorted({s.gateway_device for s in self.topology.sensors}):
            present = {a.name for a in self.topology.actuators_on(dev_id)}
            for missing in sorted(actuator_names - present):
                problems.append(
                    f"device {self.topology.devices[dev_id].name!r} has a sensor but no "
                    f"actuator named {missing!r}"
                )
        for d in self.topology.devices.values():
            if d.parent is not None and not d.up_bw > 0:
                problems.append(f"device {d.name!r}: up_bw must be > 0 to reach its parent")
            if self.topology.children(d.id) and not d.down_bw > 0:
                problems.append(f"device {d.name!r}: down_bw must be > 0 to reach its children")
        return problems

    def run(self) -> MetricsReport:
        problems = self.validate()
        if problems:
            raise ValidationError(problems)
        for entry in self.mobility:
            schedule_mobility(self.kernel, self.topology, entry)
        for sensor in self.topology.sensors:
            if sensor.max_tuples != 0:
                self.kernel.schedule(EventKind.SENSOR_EMIT, sensor, sensor.emission_interval)
        for edge in self.app.edges:
            if edge.period is None:
                continue
            for q in self._queues:
                if q.instance.module == edge.source:
                    self.kernel.schedule(EventKind.PERIODIC_EDGE_FIRE, (edge, q.index), edge.period)
        self.kernel.run_until(self.horizon)
        self.counters.in_flight = self._count_in_flight()
        self._report = self.metrics.finalize(self.horizon)
        return self._report

    def _count_in_flight(self) -> int:
        pending = sum(1 for ev in self.kernel.pending() if ev.kind is EventKind.TUPLE_ARRIVAL)
        queued = sum(len(q.pending) + (q.current is not None) for q in self._queues)
        return pending + queued

    # -- tuple creation -------------------------------------------------------

    def _new_tuple(self, edge: AppEdge, source: str, origin: int, sensor_type: str | None, chain=()) -> Tuple:
        return Tuple(
            id=next(self._tuple_ids),
            lineage_id=next(self._lineage_ids),
            tuple_type=edge.tuple_type,
            direction=edge.direction,
            edge_kind=edge.edge_kind,
            cpu_length=edge.cpu_length,
            nw_length=edge.nw_length,
            source_module=source,
            dest_module=edge.destination,
            origin_device=origin,
            emitted_at=self.kernel.now(),
            chain=tuple(chain),
            sensor_type=sensor_type,
        )

    def _on_sensor_emit(self, ev: Event) -> None:
        self.emit_sensor_tuple(ev.payload)

    def emit_sensor_tuple(self, sensor: Sensor) -> None:
        if sensor.max_tuples is not None and self._emitted[sensor.id] >= sensor.max_tuples:
            return
        edge = self.app.sensor_edge(sensor.tuple_type)
        tup = self._new_tuple(edge, sensor.name, sensor.gateway_device, edge.tuple_type)
        now = self.kernel.now()
        self.counters.created += 1
        self._emitted[sensor.id] += 1
        self.log.add(now, "tuple-created", sensor.gateway_device, tup, origin="sensor", sensor=sensor.id)
        self.kernel.schedule(
            EventKind.TUPLE_ARRIVAL, {"device": sensor.gateway_device, "tuple": tup}, sensor.latency
        )
        if sensor.max_tuples is None or self._emitted[sensor.id] < sensor.max_tuples:
            self.kernel.schedule(EventKind.SENSOR_EMIT, sensor, sensor.emission_interval)

    def _on_periodic_fire(self, ev: Event) -> None:
        edge, index = ev.payload
        inst = self._queues[index].instance
        origin = inst.client_scope if inst.client_scope is not None else inst.host
        tup = self._new_tuple(edge, edge.source, origin, None, chain=(edge.source,))
        self.counters.created += 1
        self.log.add(self.kernel.now(), "tuple-created", inst.host, tup, origin="periodic")
        self.route_tuple(inst.host, tup)
        self.kernel.schedule(EventKind.PERIODIC_EDGE_FIRE, (edge, index), edge.period)

    # -- routing --------------------------------------------------------------

    def _on_tuple_arrival(self, ev: Event) -> None:
        payload = ev.payload
        tup = payload["tuple"]
        if "actuator" in payload:
            self._deliver(payload["device"], payload["actuator"], tup)
            return
        self.log.add(self.kernel.now(), "tuple-arrival", payload["device"], tup)
        self.route_tuple(payload["device"], tup)

    def _find_queue(self, device: int, module: str, origin: int) -> InstanceQueue | None:
        shared = None
        for q in self._queue_index.get((device, module), ()):
            if q.instance.client_scope == origin:
                return q
            if q.instance.client_scope is None and shared is None:
                shared = q
        return shared

    def route_tuple(self, device: int, tup: Tuple) -> str:
        """Decide what happens to ``tup`` at ``device`` and act on it.

        Returns one of ``"local"``, ``"parent"``, ``"child"`` or ``"actuator"``.
        """
        if tup.edge_kind is EdgeKind.ACTUATOR and device == tup.origin_device:
            actuator = next(
                (a for a in self.topology.actuators_on(device) if a.name == tup.dest_module), None
            )
            if actuator is None:
                raise RoutingError(
                    f"no actuator {tup.dest_module!r} on device {self.topology.devices[device].name!r}"
                )
            self.kernel.schedule(
                EventKind.TUPLE_ARRIVAL,
                {"device": device, "actuator": actuator.id, "tuple": tup},
                actuator.latency,
            )
            return "actuator"

        if tup.edge_kind is not EdgeKind.ACTUATOR:
            q = self._find_queue(device, tup.dest_module, tup.origin_device)
            if q is not None:
                self._enqueue(q, tup)
                return "local"

        if tup.direction is Direction.UP and tup.edge_kind is not EdgeKind.ACTUATOR:
            parent = self.topology.devices[device].parent
            if parent is None:
                raise RoutingError(
                    f"{tup.tuple_type} tuple {tup.id} reached the root with no instance of "
                    f"{tup.dest_module!r} serving device {tup.origin_device}"
                )
            tup.down_path.append(device)
            self.transmit(device, parent, Direction.UP, tup)
            return "parent"

        if not tup.down_path:
            raise RoutingError(
                f"{tup.tuple_type} tuple {tup.id} at {self.topology.devices[device].name!r} "
                f"has no instance of {tup.dest_module!r} and an empty down path"
            )
        child = tup.down_path.pop()
        self.transmit(device, child, Direction.DOWN, tup)
        return "child"

    def _link(self, src: int, dst: int, direction: Direction) -> LinkState:
        if direction is Direction.UP:
            link = self._uplinks.get(src)
            if link is None:
                dev = self.topology.devices[src]
                link = self._uplinks[src] = LinkState(src, dst, direction, dev.up_bw, dev.uplink_latency)
            link.dst = dst
            return link
        link = self._downlinks.get((src, dst))
        if link is None:
            link = self._downlinks[(src, dst)] = LinkState(
                src,
                dst,
                direction,
                self.topology.devices[src].down_bw,
                self.topology.devices[dst].uplink_latency,
            )
        return link

    def transmit(self, src: int, dst: int, direction: Direction, tup: Tuple) -> float:
        """Serialize ``tup`` onto the link and schedule its arrival; return the arrival time."""
        link = self._link(src, dst, direction)
        if not link.bandwidth > 0:
            raise ValidationError(f"link {src}->{dst} has zero bandwidth")
        now = self.kernel.now()
        start = max(now, link.busy_until)
        service = tup.nw_length / link.bandwidth * 1000.0
        link.busy_until = start + service
        arrival = link.busy_until + link.latency
        self.metrics.record_transmission(tup.nw_length, link.latency)
        self.log.add(
            now, "transmit", src, tup,
            to=dst, direction=direction.value, start=start, end=link.busy_until,
            arrival=arrival, nw_length=tup.nw_length, latency=link.latency,
        )
        self.kernel.schedule(EventKind.TRANSMISSION_COMPLETE, (src, dst, direction.value), link.busy_until - now)
        self.kernel.schedule(EventKind.TUPLE_ARRIVAL, {"device": dst, "tuple": tup}, arrival - now)
        return arrival

    def _on_transmission_complete(self, ev: Event) -> None:
        src, dst, direction = ev.payload
        self.log.add(self.kernel.now(), "transmission-complete", src, to=dst, direction=direction)

    def _deliver(self, device: int, actuator_id: int, tup: Tuple) -> None:
        now = self.kernel.now()
        self.counters.delivered += 1
        self.log.add(now, "actuator-delivery", device, tup, actuator=actuator_id, emitted_at=tup.emitted_at)
        if tup.sensor_type is None:
            return
        for loop, terminal in self._loop_terminals:
            if (
                terminal == tup.tuple_type
                and loop.sequence[0] == tup.sensor_type
                and is_subsequence(loop.modules, tup.chain)
            ):
                self.metrics.record_loop_completion(loop.label, tup.emitted_at, now)
                self.log.add(now, "loop-completion", device, tup, loop=loop.label, latency=now - tup.emitted_at)

    # -- processing -----------------------------------------------------------

    def _enqueue(self, q: InstanceQueue, tup: Tuple) -> None:
        q.pending.append((tup, self.kernel.now()))
        if q.current is None:
            self._start_next(q)

    def _start_next(self, q: InstanceQueue) -> None:
        tup, enqueued_at = q.pending.popleft()
        q.current = (tup, enqueued_at)
        now = self.kernel.now()
        service = tup.cpu_length / q.instance.allocated_mips * 1000.0
        q.busy_until = now + service
        self.log.add(now, "processing-start", q.instance.host, tup, module=q.instance.module, instance=q.index)
        self._set_busy(q.instance.host, q.instance.allocated_mips)
        self.kernel.schedule(EventKind.PROCESSING_COMPLETE, q.index, service)

    def _set_busy(self, device: int, delta: float) -> None:
        self._busy_mips[device] += delta
        mips = self.topology.devices[device].mips
        u = min(1.0, max(0.0, self._busy_mips[device] / mips))
        now = self.kernel.now()
        self.metrics.record_utilization_change(device, u, now)
        self.log.add(now, "utilization", device, u=u)

    def _on_processing_complete(self, ev: Event) -> None:
        self.process_complete(self._queues[ev.payload])

    def process_complete(self, q: InstanceQueue) -> None:
        tup, enqueued_at = q.current
        q.current = None
        now = self.kernel.now()
        host = self.topology.devices[q.instance.host]
        self.counters.consumed += 1
        self.metrics.accrue_cost(host, tup.cpu_length)
        self.metrics.record_processing_delay(tup.tuple_type, now - enqueued_at)
        self.log.add(
            now, "processing-complete", host.id, tup,
            module=q.instance.module, instance=q.index, cpu_length=tup.cpu_length,
        )
        self._set_busy(host.id, -q.instance.allocated_mips)
        outputs = derive_tuples(
            self.app, q.instance.module, tup, self._selectivity, lambda: next(self._tuple_ids)
        )
        for out in outputs:
            self.counters.created += 1
            self.counters.derived += 1
            self.log.add(now, "tuple-created", host.id, out, origin="derived", parent=tup.id)
            self.route_tuple(host.id, out)
        if q.pending and q.current is None:
            self._start_next(q)

    # -- mobility -------------------------------------------------------------

    def _on_mobility(self, ev: Event) -> None:
        self.apply_mobility(ev.payload)

    def apply_mobility(self, entry: MobilityEntry) -> None:
        device = self.topology.devices[entry.device]
        new_parent = self.topology.devices[entry.new_parent]
        old_parent = device.parent
        if new_parent.level != device.level - 1:
            logger.warning(
                "%s (level %d) moved under %s at level %d",
                device.name, device.level, new_parent.name, new_parent.level,
            )
        device.parent = new_parent.id
        now = self.kernel.now()
        old_name = None if old_parent is None else self.topology.devices[old_parent].name
        logger.info("t=%s %s is now connected to %s (was %s)", now, device.name, new_parent.name, old_name)
        self.log.add(now, "mobility", device.id, old_parent=old_parent, new_parent=new_parent.id)
