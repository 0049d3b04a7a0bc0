"""Module placement policies: static pins, edge-ward, deadline-aware and cloud-only."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from fogsim.application import Application
from fogsim.errors import ValidationError
from fogsim.topology import FogDevice, Topology

logger = logging.getLogger(__name__)

POLICIES = ("cloud_only", "edge_ward", "deadline_aware")


@dataclass(frozen=True)
class ModuleInstance:
    module: str
    host: int
    client_scope: int | None
    allocated_mips: float

    def serves(self, origin_device: int) -> bool:
        return self.client_scope is None or self.client_scope == origin_device


@dataclass
class Placement:
    instances: list[ModuleInstance] = field(default_factory=list)
    used_mips: dict[int, float] = field(default_factory=dict)

    def add(self, instance: ModuleInstance) -> ModuleInstance:
        self.instances.append(instance)
        self.used_mips[instance.host] = self.used_mips.get(instance.host, 0) + instance.allocated_mips
        return instance

    def on(self, device_id: int) -> list[ModuleInstance]:
        return [i for i in self.instances if i.host == device_id]

    def of(self, module: str) -> list[ModuleInstance]:
        return [i for i in self.instances if i.module == module]

    def used(self, device_id: int) -> float:
        return self.used_mips.get(device_id, 0)

    def find(self, device_id: int, module: str, origin_device: int) -> ModuleInstance | None:
        """Instance of ``module`` on ``device_id`` serving ``origin_device``.

        A client-scoped instance for that origin wins over a shared one.
        """
        shared = None
        for inst in self.instances:
            if inst.host != device_id or inst.module != module:
                continue
            if inst.client_scope == origin_device:
                return inst
            if inst.client_scope is None and shared is None:
                shared = inst
        return shared

    def recomputed_ledger(self) -> dict[int, float]:
        ledger: dict[int, float] = {}
        for inst in self.instances:
            ledger[inst.host] = ledger.get(inst.host, 0) + inst.allocated_mips
        return ledger

    def dump(self, topology: Topology) -> list[dict]:
        return [
            {
                "module": i.module,
                "host": topology.devices[i.host].name,
                "client_scope": None if i.client_scope is None else topology.devices[i.client_scope].name,
                "allocated_mips": i.allocated_mips,
            }
            for i in self.instances
        ]


@dataclass
class PinList:
    entries: list[tuple[str, str]] = field(default_factory=list)


def pin_module(pins: PinList, app: Application, topology: Topology, module: str, device: str) -> PinList:
    """Append a static ``module -> device`` assignment."""
    problems = []
    if not app.has_module(module):
        problems.append(f"cannot pin unknown module {module!r}")
    topology.resolve(device, problems)
    if problems:
        raise ValidationError(problems)
    pins.entries.append((module, device))
    return pins


def capacity_check(device: FogDevice, used: float, base: float, extra: float) -> bool:
    """True when the device can take ``base + extra`` more MIPS (strict inequality)."""
    return used + base + extra < device.mips


def _allocation(app: Application, module: str, client: int | None) -> float:
    base = app.module(module).mips
    if client is None:
        return base
    return base + app.additional_mips_info.get(client, {}).get(module, 0)


def apply_pins(app: Application, topology: Topology, pins: PinList, placement: Placement | None = None) -> Placement:
    """Create pinned instances; a pin on a leaf is scoped to that leaf."""
    placement = placement or Placement()
    for module, device in pins.entries:
        host = topology.resolve(device)
        scope = host if topology.is_leaf(host) else None
        placement.add(ModuleInstance(module, host, scope, _allocation(app, module, scope)))
    return placement


def _pinned_modules(pins: PinList) -> set[str]:
    return {m for m, _ in pins.entries}


def cloud_only_place(app: Application, topology: Topology, pins: PinList) -> Placement:
    placement = apply_pins(app, topology, pins)
    root = topology.root_id()
    pinned = _pinned_modules(pins)
    for module in app.module_order():
        if module not in pinned:
            placement.add(ModuleInstance(module, root, None, app.module(module).mips))
    return placement


def edge_ward_place(
    app: Application,
    topology: Topology,
    pins: PinList,
    placement: Placement | None = None,
    skip: set[str] | frozenset[str] = frozenset(),
) -> Placement:
    """Push each module up from the edge until a device has room for it.

    Leaves are walked in id order. Along each leaf-to-root path, modules are
    taken in upward dataflow order; a module's search starts at the highest
    host of its UP predecessors on this path (the leaf for sensor-fed modules)
    and climbs. On the way up an existing instance serving this leaf is reused;
    otherwise the first device with ``remaining mips >= module mips`` gets a new
    shared instance. When ``placement`` is given, its instances are kept and
    reused; ``skip`` names modules this pass must leave alone.
    """
    if placement is None:
        placement = apply_pins(app, topology, pins)
    pinned = _pinned_modules(pins) | set(skip)
    order = app.module_order()
    preds = app.upward_predecessors()

    for leaf in topology.leaves():
        path = topology.path_to_root(leaf)
        host_on_path: dict[str, int] = {}
        for module in order:
            start = max((host_on_path[p] for p in preds[module] if p in host_on_path), default=0)
            existing = next(
                (i for i, dev in enumerate(path) if placement.find(dev, module, leaf) is not None),
                None,
            )
            if module in pinned:
                if existing is not None:
                    host_on_path[module] = existing
                continue
            chosen = None
            for i in range(start, len(path)):
                dev = path[i]
                if placement.find(dev, module, leaf) is not None:
                    chosen = i
                    break
                device = topology.devices[dev]
                if device.mips - placement.used(dev) >= app.module(module).mips:
                    placement.add(ModuleInstance(module, dev, None, app.module(module).mips))
                    chosen = i
                    break
            if chosen is None:
                root = topology.devices[path[-1]]
                deficit = app.module(module).mips - (root.mips - placement.used(root.id))
                raise ValidationError(
                    f"module {module!r} cannot be placed on the path from "
                    f"{topology.devices[leaf].name!r}: root {root.name!r} is short by {deficit} MIPS"
                )
            host_on_path[module] = chosen

    # modules not reachable from any leaf still need a home
    for module in order:
        if module not in pinned and not placement.of(module):
            placement.add(ModuleInstance(module, topology.root_id(), None, app.module(module).mips))
    return placement


def deadline_aware_place(
    app: Application,
    topology: Topology,
    pins: PinList,
    module_to_place: str,
) -> Placement:
    """Per-client instances of ``module_to_place`` on gateways, tightest deadline first.

    For each level-1 device, its children are sorted by ascending deadline for
    ``module_to_place`` (ties by device id). Each child's instance needs the
    module's base MIPS plus the child's additional MIPS; it goes on the gateway
    if :func:`capacity_check` passes, otherwise on the gateway's parent without
    any capacity check. Modules that are neither pinned nor ``module_to_place``
    are then placed edge-ward around the result.
    """
    if not app.has_module(module_to_place):
        raise ValidationError(f"module_to_place {module_to_place!r} is not in the application")
    placement = apply_pins(app, topology, pins)
    base = app.module(module_to_place).mips
    for gw_id in topology.at_level(1):
        gateway = topology.devices[gw_id]
        children = topology.children(gw_id)
        missing = [
            topology.devices[c].name
            for c in children
            if module_to_place not in app.deadline_info.get(c, {})
            or module_to_place not in app.additional_mips_info.get(c, {})
        ]
        if missing:
            raise ValidationError(
                f"missing deadline or additional-mips entry for {module_to_place!r} on {missing}"
            )
        ordered = sorted(children, key=lambda c: (app.deadline_info[c][module_to_place], c))
        for child in ordered:
            extra = app.additional_mips_info[child][module_to_place]
            need = base + extra
            if capacity_check(gateway, placement.used(gw_id), base, extra):
                host = gw_id
            else:
                host = gateway.parent
            placement.add(ModuleInstance(module_to_place, host, child, need))
            logger.debug(
                "deadline-aware: %s for %s on %s",
                module_to_place, topology.devices[child].name, topology.devices[host].name,
            )
    if not placement.of(module_to_place):
        raise ValidationError(f"no level-1 device has children to host {module_to_place!r}")
    return edge_ward_place(app, topology, pins, placement=placement, skip={module_to_place})


def place(
    policy: str,
    app: Application,
    topology: Topology,
    pins: PinList,
    module_to_place: str | None = None,
) -> Placement:
    if policy == "cloud_only":
        return cloud_only_place(app, topology, pins)
    if policy == "edge_ward":
        return edge_ward_place(app, topology, pins)
    if policy == "deadline_aware":
        if module_to_place is None:
            raise ValidationError("deadline_aware placement needs module_to_place")
        return deadline_aware_place(app, topology, pins, module_to_place)
    raise ValidationError(f"unknown placement policy {policy!r}; valid options: {', '.join(POLICIES)}")
