"""Physical layer: fog devices in a hierarchy, IoT endpoints and topology procedures.

Level 0 is the cloud; levels increase toward the edge. Every non-root device
has a parent exactly one level closer to the cloud, except orphans awaiting
:func:`select_gateways`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from fogsim.errors import ValidationError
from fogsim.kernel import EventKind, Kernel

logger = logging.getLogger(__name__)

DEFAULT_CLUSTER_DISTANCE = 2.0
DEFAULT_MAX_NUMBER = 9999999.0


@dataclass
class FogDevice:
    name: str
    mips: float
    ram: float
    up_bw: float
    down_bw: float
    level: int
    rate_per_mips: float
    busy_power: float
    idle_power: float
    parent: int | None = None
    uplink_latency: float = 0.0
    x: float = 0.0
    y: float = 0.0
    # stored for completeness, never consumed by the cost model
    cost_per_mem: float = 0.05
    cost_per_storage: float = 0.001
    cost_per_bw: float = 0.0
    id: int = -1

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "mips": self.mips,
            "ram": self.ram,
            "up_bw": self.up_bw,
            "down_bw": self.down_bw,
            "level": self.level,
            "rate_per_mips": self.rate_per_mips,
            "busy_power": self.busy_power,
            "idle_power": self.idle_power,
            "parent": self.parent,
            "uplink_latency": self.uplink_latency,
            "x": self.x,
            "y": self.y,
        }


@dataclass
class Sensor:
    """IoT sensor. Its name and emitted tuple type must be identical."""

    name: str
    tuple_type: str
    gateway_device: int
    latency: float
    emission_interval: float
    max_tuples: int | None = None
    id: int = -1


@dataclass
class Actuator:
    name: str
    consumed_tuple_type: str
    gateway_device: int
    latency: float
    id: int = -1


@dataclass(frozen=True)
class MobilityEntry:
    device: int
    at_time: float
    new_parent: int


@dataclass(frozen=True)
class ClusterConfig:
    cluster_distance: float = DEFAULT_CLUSTER_DISTANCE
    max_number: float = DEFAULT_MAX_NUMBER

    def __post_init__(self):
        if not self.cluster_distance > 0:
            raise ValidationError(f"cluster_distance must be > 0, got {self.cluster_distance}")


@dataclass
class Topology:
    devices: dict[int, FogDevice] = field(default_factory=dict)
    sensors: list[Sensor] = field(default_factory=list)
    actuators: list[Actuator] = field(default_factory=list)

    def __post_init__(self):
        self._by_name = {d.name: d.id for d in self.devices.values()}

    # -- construction ---------------------------------------------------------

    def add_device(self, device: FogDevice, parent: str | int | None = None) -> int:
        """Register ``device`` and return its new id.

        ``parent`` may be a device name or id; it overrides ``device.parent``.
        A non-root device may be added without a parent (an orphan).
        """
        problems = []
        if device.name in self._by_name:
            problems.append(f"duplicate device name {device.name!r}")
        if not device.mips > 0:
            problems.append(f"device {device.name!r}: mips must be > 0, got {device.mips}")
        if not device.busy_power >= device.idle_power >= 0:
            problems.append(
                f"device {device.name!r}: require busy_power >= idle_power >= 0 "
                f"(busy={device.busy_power}, idle={device.idle_power})"
            )
        if device.level < 0:
            problems.append(f"device {device.name!r}: level must be >= 0")
        for attr in ("up_bw", "down_bw", "ram", "uplink_latency", "rate_per_mips"):
            if getattr(device, attr) < 0:
                problems.append(f"device {device.name!r}: {attr} must be >= 0")

        parent_id = device.parent if parent is None else self.resolve(parent, problems)
        if device.level == 0:
            if parent_id is not None:
                problems.append(f"device {device.name!r}: level-0 device cannot have a parent")
            if self.root_id() is not None:
                problems.append(f"device {device.name!r}: a level-0 root already exists")
        elif parent_id is not None and parent_id in self.devices:
            parent_level = self.devices[parent_id].level
            if parent_level != device.level - 1:
                problems.append(
                    f"device {device.name!r} at level {device.level} cannot have parent "
                    f"{self.devices[parent_id].name!r} at level {parent_level}"
                )
        elif parent_id is not None:
            problems.append(f"device {device.name!r}: unknown parent id {parent_id}")
        if problems:
            raise ValidationError(problems)

        new_id = len(self.devices)
        registered = replace(device, id=new_id, parent=parent_id)
        self.devices[new_id] = registered
        self._by_name[registered.name] = new_id
        return new_id

    def attach_sensor(self, sensor: Sensor) -> int:
        problems = []
        if sensor.name.strip() != sensor.tuple_type.strip():
            problems.append(
                f"sensor {sensor.name!r}: name must equal its emitted tuple type "
                f"({sensor.tuple_type!r})"
            )
        if sensor.gateway_device not in self.devices:
            problems.append(f"sensor {sensor.name!r}: unknown gateway device {sensor.gateway_device}")
        if not sensor.emission_interval > 0:
            problems.append(f"sensor {sensor.name!r}: emission_interval must be > 0")
        if sensor.latency < 0:
            problems.append(f"sensor {sensor.name!r}: latency must be >= 0")
        if sensor.max_tuples is not None and sensor.max_tuples < 0:
            problems.append(f"sensor {sensor.name!r}: max_tuples must be >= 0")
        if problems:
            raise ValidationError(problems)
        registered = replace(sensor, id=len(self.sensors))
        self.sensors.append(registered)
        return registered.id

    def attach_actuator(self, actuator: Actuator) -> int:
        problems = []
        if actuator.gateway_device not in self.devices:
            problems.append(
                f"actuator {actuator.name!r}: unknown gateway device {actuator.gateway_device}"
            )
        if actuator.latency < 0:
            problems.append(f"actuator {actuator.name!r}: latency must be >= 0")
        if problems:
            raise ValidationError(problems)
        registered = replace(actuator, id=len(self.actuators))
        self.actuators.append(registered)
        return registered.id

    # -- queries --------------------------------------------------------------

    def resolve(self, ref: str | int, problems: list[str] | None = None) -> int | None:
        """Map a device name or id to an id."""
        if isinstance(ref, int) and not isinstance(ref, bool):
            if ref in self.devices:
                return ref
            msg = f"unknown device id {ref}"
        else:
            if ref in self._by_name:
                return self._by_name[ref]
            msg = f"unknown device {ref!r}"
        if problems is None:
            raise ValidationError(msg)
        problems.append(msg)
        return None

    def by_name(self, name: str) -> FogDevice:
        return self.devices[self.resolve(name)]

    def root_id(self) -> int | None:
        for d in self.devices.values():
            if d.level == 0:
                return d.id
        return None

    def children(self, device_id: int) -> list[int]:
        return sorted(d.id for d in self.devices.values() if d.parent == device_id)

    def is_leaf(self, device_id: int) -> bool:
        return device_id != self.root_id() and not self.children(device_id)

    def leaves(self) -> list[int]:
        return [i for i in sorted(self.devices) if self.is_leaf(i)]

    def at_level(self, level: int) -> list[int]:
        return sorted(d.id for d in self.devices.values() if d.level == level)

    def path_to_root(self, device_id: int) -> list[int]:
        """Device ids from ``device_id`` up to the root, inclusive."""
        path = [device_id]
        seen = {device_id}
        current = self.devices[device_id].parent
        while current is not None:
            if current in seen:
                raise ValidationError(f"parent links form a cycle through device {current}")
            path.append(current)
            seen.add(current)
            current = self.devices[current].parent
        return path

    def sensors_on(self, device_id: int) -> list[Sensor]:
        return [s for s in self.sensors if s.gateway_device == device_id]

    def actuators_on(self, device_id: int) -> list[Actuator]:
        return [a for a in self.actuators if a.gateway_device == device_id]

    def validate(self) -> list[str]:
        """Check the whole-tree invariants; return every violation found."""
        problems = []
        roots = [d for d in self.devices.values() if d.level == 0]
        if len(roots) != 1:
            problems.append(f"expected exactly one level-0 device, found {len(roots)}")
        for d in self.devices.values():
            if d.level == 0:
                if d.parent is not None:
                    problems.append(f"root device {d.name!r} has a parent")
                continue
            if d.parent is None:
                problems.append(f"device {d.name!r} has no parent")
                continue
            if d.parent not in self.devices:
                problems.append(f"device {d.name!r} has unknown parent {d.parent}")
                continue
            parent = self.devices[d.parent]
            if parent.level != d.level - 1:
                problems.append(
                    f"device {d.name!r} (level {d.level}) has parent {parent.name!r} "
                    f"at level {parent.level}"
                )
        if not problems:
            for d in self.devices.values():
                try:
                    self.path_to_root(d.id)
                except ValidationError as exc:
                    problems.extend(exc.violations)
                    break
        return problems

    def dump(self) -> list[dict]:
        return [self.devices[i].as_dict() for i in sorted(self.devices)]


def euclidean_distance(a: FogDevice, b: FogDevice) -> float:
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2)


def select_gateways(topology: Topology, cfg: ClusterConfig | None = None) -> dict[int, int]:
    """Connect every orphan to the nearest device one level closer to the cloud.

    Orphans are processed by ascending level then id. Ties on distance go to
    the lower candidate id. Returns ``{orphan id: chosen parent id}``.
    """
    cfg = cfg or ClusterConfig()
    orphans = sorted(
        (d for d in topology.devices.values() if d.level > 0 and d.parent is None),
        key=lambda d: (d.level, d.id),
    )
    chosen = {}
    for orphan in orphans:
        best, best_distance = None, cfg.max_number
        for cand_id in topology.at_level(orphan.level - 1):
            distance = euclidean_distance(orphan, topology.devices[cand_id])
            if distance < best_distance:
                best, best_distance = cand_id, distance
        if best is None:
            raise ValidationError(
                f"device {orphan.name!r} has no candidate parent at level {orphan.level - 1}"
            )
        orphan.parent = best
        chosen[orphan.id] = best
        logger.debug("gateway selection: %s -> %s", orphan.name, topology.devices[best].name)
    return chosen


class _DisjointSet:
    def __init__(self, items: Iterable[int]):
        self.parent = {i: i for i in items}

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller id becomes the representative
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def form_clusters(topology: Topology, level: int, cfg: ClusterConfig | None = None) -> dict[int, list[int]]:
    """Group same-level devices that share a parent and lie within the cluster distance.

    Membership is the transitive closure of the pair relation. Cluster ids are
    assigned 0, 1, ... in order of each cluster's smallest device id; member
    lists are sorted. Singletons form their own cluster.
    """
    cfg = cfg or ClusterConfig()
    members = topology.at_level(level)
    dsu = _DisjointSet(members)
    for i, a in enumerate(members):
        da = topology.devices[a]
        for b in members[i + 1:]:
            db = topology.devices[b]
            if (
                da.parent == db.parent
                and da.level == db.level
                and euclidean_distance(da, db) < cfg.cluster_distance
            ):
                dsu.union(a, b)
    groups: dict[int, list[int]] = {}
    for m in members:
        groups.setdefault(dsu.find(m), []).append(m)
    return {cid: groups[root] for cid, root in enumerate(sorted(groups))}


def schedule_mobility(kernel: Kernel, topology: Topology, entry: MobilityEntry) -> int:
    """Queue a reparenting event that fires at ``entry.at_time``."""
    problems = []
    for ref in (entry.device, entry.new_parent):
        if ref not in topology.devices:
            problems.append(f"mobility entry references unknown device id {ref}")
    if entry.device == entry.new_parent:
        problems.append(f"mobility entry moves device {entry.device} under itself")
    if entry.at_time < kernel.now():
        problems.append(f"mobility time {entry.at_time} is before the current clock {kernel.now()}")
    if problems:
        raise ValidationError(problems)
    return kernel.schedule(EventKind.MOBILITY, entry, entry.at_time - kernel.now())
