"""Scenario documents: parsing, builtin generators and end-to-end orchestration.

A scenario is a YAML (or JSON) mapping::

    format_version: 1
    name: deadline_test
    seed: 7
    horizon: 10000.0
    topology:
      tiers: [...]        # generated hierarchy, one entry per level
      devices: [...]      # explicit devices, added after the tiers
    application: {builtin: deadline_test}   # or modules/edges/mappings/loops
    placement: {policy: deadline_aware, module_to_place: mainModule, pins: [...],
                deadlines: {...}, additional_mips: {...}}
    mobility: {entries: [...], random: {...}}
    clusters: {level: 2}
    config: {cluster_distance: 2.0, max_number: 9999999.0}

Any numeric device or sensor field may be a number or a ``[min, max]`` pair,
sampled uniformly from ``[min, max)`` with the scenario seed. See
``docs/scenario-format.md`` for the full schema.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from fogsim import __version__
from fogsim.application import Application, builtin_application, validate_application, BUILTIN_APPLICATIONS
from fogsim.errors import FogSimError, ScenarioSyntaxError, ValidationError
from fogsim.kernel import RngStream
from fogsim.placement import POLICIES, PinList, Placement, place
from fogsim.runtime import EventLog, RunCounters, Simulation
from fogsim.metrics import MetricsReport
from fogsim.topology import (
    Actuator,
    ClusterConfig,
    FogDevice,
    MobilityEntry,
    Sensor,
    Topology,
    form_clusters,
    select_gateways,
)

FORMAT_VERSION = 1
DEFAULT_HORIZON = 10000.0

_DEVICE_NUMERIC = (
    "mips", "ram", "up_bw", "down_bw", "rate_per_mips",
    "busy_power", "idle_power", "uplink_latency", "x", "y",
)
_DEVICE_REQUIRED = ("mips", "up_bw", "down_bw", "busy_power", "idle_power")
_DEVICE_DEFAULTS = {"ram": 0.0, "rate_per_mips": 0.0, "uplink_latency": 0.0, "x": 0.0, "y": 0.0}
_TOP_LEVEL_KEYS = {
    "format_version", "name", "description", "seed", "horizon", "topology",
    "application", "placement", "mobility", "clusters", "config",
}


@dataclass
class Scenario:
    name: str
    seed: int
    horizon: float
    topology: dict
    application: dict
    placement: dict
    mobility: dict = field(default_factory=dict)
    clusters: dict | None = None
    config: dict = field(default_factory=dict)
    description: str | None = None

    def to_dict(self) -> dict:
        doc = {"format_version": FORMAT_VERSION, "name": self.name}
        if self.description is not None:
            doc["description"] = self.description
        doc.update(
            seed=self.seed,
            horizon=self.horizon,
            topology=copy.deepcopy(self.topology),
            application=copy.deepcopy(self.application),
            placement=copy.deepcopy(self.placement),
        )
        if self.mobility:
            doc["mobility"] = copy.deepcopy(self.mobility)
        if self.clusters is not None:
            doc["clusters"] = copy.deepcopy(self.clusters)
        if self.config:
            doc["config"] = copy.deepcopy(self.config)
        return doc

    @classmethod
    def from_dict(cls, doc: Any) -> "Scenario":
        problems = []
        if not isinstance(doc, dict):
            raise ValidationError("scenario document must be a mapping")
        version = doc.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            problems.append(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
        for key in sorted(set(doc) - _TOP_LEVEL_KEYS):
            problems.append(f"unknown top-level key {key!r}")
        for key in ("topology", "application", "placement"):
            if not isinstance(doc.get(key), dict):
                problems.append(f"section {key!r} is required and must be a mapping")
        seed = doc.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            problems.append(f"seed must be an integer, got {seed!r}")
        horizon = doc.get("horizon", DEFAULT_HORIZON)
        if not isinstance(horizon, (int, float)) or isinstance(horizon, bool) or horizon < 0:
            problems.append(f"horizon must be a non-negative number, got {horizon!r}")
        if problems:
            raise ValidationError(problems)
        return cls(
            name=str(doc.get("name", "scenario")),
            seed=seed,
            horizon=float(horizon),
            topology=doc["topology"],
            application=doc["application"],
            placement=doc["placement"],
            mobility=doc.get("mobility") or {},
            clusters=doc.get("clusters"),
            config=doc.get("config") or {},
            description=doc.get("description"),
        )


def dump_scenario(scenario: Scenario, header: str | None = None) -> str:
    text = yaml.safe_dump(scenario.to_dict(), sort_keys=False, default_flow_style=None, width=100)
    if header:
        text = "".join(f"# {line}\n" if line else "#\n" for line in header.splitlines()) + text
    return text


def load_scenario_text(text: str) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ScenarioSyntaxError(
            f"invalid scenario syntax: {exc.problem}",
            line=mark.line + 1 if mark else None,
            column=mark.column + 1 if mark else None,
        ) from None
    except yaml.YAMLError as exc:
        raise ScenarioSyntaxError(f"invalid scenario syntax: {exc}") from None
    if doc is None:
        raise ScenarioSyntaxError("scenario document is empty", line=1, column=1)
    return Scenario.from_dict(doc)


def parse_scenario(path: str | Path) -> Scenario:
    """Read, parse and fully validate a scenario file.

    Raises :class:`ScenarioSyntaxError` for malformed text and
    :class:`ValidationError` listing every semantic problem otherwise.
    """
    text = Path(path).read_text()
    scenario = load_scenario_text(text)
    build_scenario(scenario)
    return scenario


# -- building ---------------------------------------------------------------------


@dataclass
class BuiltScenario:
    scenario: Scenario
    seed: int
    horizon: float
    topology: Topology
    app: Application
    pins: PinList
    placement: Placement
    mobility: list[MobilityEntry]
    clusters: dict[int, list[int]] | None
    cluster_config: ClusterConfig
    policy: str


def _sample(value, stream: RngStream, what: str, problems: list[str]):
    if isinstance(value, bool):
        problems.append(f"{what}: expected a number, got {value!r}")
        return 0.0
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        lo, hi = value
        if lo > hi:
            problems.append(f"{what}: range min {lo} > max {hi}")
            return lo
        return stream.uniform(lo, hi)
    problems.append(f"{what}: expected a number or [min, max], got {value!r}")
    return 0.0


def _expand_tiers(tiers: list, problems: list[str]) -> list[dict]:
    """Turn tier generators into explicit device entries (values may still be ranges).

    Name patterns may use ``{i}`` (index within the tier), ``{j}`` (index under
    the parent) and ``{path}`` (dash-joined indices from the first tier down).
    """
    entries: list[dict] = []
    previous: list[tuple[dict, str]] = []
    for k, tier in enumerate(tiers):
        if not isinstance(tier, dict) or "name" not in tier:
            problems.append(f"topology tier {k}: must be a mapping with a 'name' pattern")
            previous = []
            continue
        pattern = tier["name"]
        base = {key: v for key, v in tier.items() if key not in ("name", "count", "per_parent", "orphan")}
        base.setdefault("level", k)
        current: list[tuple[dict, str]] = []
        if k == 0 or tier.get("orphan"):
            for i in range(tier.get("count", 1)):
                path = "" if k == 0 else str(i)
                name = _fmt(pattern, problems, i=i, j=i, path=path)
                current.append((dict(base, name=name, parent=None), path))
        else:
            i = 0
            for parent, parent_path in previous:
                for j in range(tier.get("per_parent", 1)):
                    path = f"{parent_path}-{j}" if parent_path else str(j)
                    name = _fmt(pattern, problems, i=i, j=j, path=path)
                    current.append((dict(base, name=name, parent=parent["name"]), path))
                    i += 1
        entries.extend(e for e, _ in current)
        previous = current
    return entries


def _fmt(pattern: str, problems: list[str], **keys) -> str:
    try:
        return pattern.format(**keys)
    except (KeyError, IndexError, ValueError) as exc:
        problems.append(f"bad device name pattern {pattern!r}: {exc}")
        return pattern


def _build_topology(scenario: Scenario, stream: RngStream, problems: list[str]) -> Topology:
    section = scenario.topology
    entries = _expand_tiers(section.get("tiers") or [], problems)
    entries.extend(copy.deepcopy(section.get("devices") or []))
    if not entries:
        problems.append("topology defines no devices")
    topo = Topology()
    endpoints = []
    for n, entry in enumerate(entries):
        if not isinstance(entry, dict) or "name" not in entry:
            problems.append(f"device entry {n}: must be a mapping with a name")
            continue
        name = entry["name"]
        values = {}
        for key in _DEVICE_NUMERIC:
            if key in entry:
                values[key] = _sample(entry[key], stream, f"device {name!r} {key}", problems)
            elif key in _DEVICE_DEFAULTS:
                values[key] = _DEVICE_DEFAULTS[key]
            else:
                problems.append(f"device {name!r}: missing required field {key!r}")
                values[key] = 1.0
        level = entry.get("level")
        if not isinstance(level, int) or isinstance(level, bool):
            problems.append(f"device {name!r}: level must be an integer")
            continue
        device = FogDevice(name=name, level=level, **values)
        parent = entry.get("parent")
        try:
            dev_id = topo.add_device(device, parent=parent)
        except ValidationError as exc:
            problems.extend(exc.violations)
            continue
        endpoints.append((dev_id, entry))

    for dev_id, entry in endpoints:
        name = topo.devices[dev_id].name
        for s in entry.get("sensors") or []:
            try:
                sensor_name = s["name"]
                interval = _sample(s["emission_interval"], stream, f"sensor on {name!r} interval", problems)
                topo.attach_sensor(Sensor(
                    name=sensor_name,
                    tuple_type=s.get("tuple_type", sensor_name),
                    gateway_device=dev_id,
                    latency=float(s.get("latency", 0.0)),
                    emission_interval=interval,
                    max_tuples=s.get("max_tuples"),
                ))
            except KeyError as exc:
                problems.append(f"sensor on {name!r}: missing field {exc.args[0]!r}")
            except ValidationError as exc:
                problems.extend(exc.violations)
        for a in entry.get("actuators") or []:
            try:
                topo.attach_actuator(Actuator(
                    name=a["name"],
                    consumed_tuple_type=a.get("consumed_tuple_type", ""),
                    gateway_device=dev_id,
                    latency=float(a.get("latency", 0.0)),
                ))
            except KeyError as exc:
                problems.append(f"actuator on {name!r}: missing field {exc.args[0]!r}")
            except ValidationError as exc:
                problems.extend(exc.violations)
    return topo


def _build_application(section: dict, problems: list[str]) -> Application | None:
    if "builtin" in section:
        try:
            return builtin_application(section["builtin"], section.get("app_id"))
        except ValidationError as exc:
            problems.extend(exc.violations)
            return None
    app = Application(section.get("app_id", "app"))
    for m in section.get("modules") or []:
        try:
            app.add_module(m["name"], m.get("ram", 0), m["mips"], m.get("size", 0), m.get("bw", 0))
        except KeyError as exc:
            problems.append(f"module entry missing field {exc.args[0]!r}")
        except ValidationError as exc:
            problems.extend(exc.violations)
    for e in section.get("edges") or []:
        try:
            app.add_edge(
                e["source"], e["destination"], e.get("cpu_length", 0), e.get("nw_length", 0),
                e["tuple_type"], e.get("direction", "UP"), e.get("kind", "MODULE"), e.get("period"),
            )
        except KeyError as exc:
            problems.append(f"edge entry missing field {exc.args[0]!r}")
        except ValueError as exc:
            problems.append(f"edge entry: {exc}")
        except ValidationError as exc:
            problems.extend(exc.violations)
    for m in section.get("mappings") or []:
        try:
            app.add_tuple_mapping(m["module"], m["input"], m["output"], m.get("selectivity", 1.0))
        except KeyError as exc:
            problems.append(f"mapping entry missing field {exc.args[0]!r}")
        except ValidationError as exc:
            problems.extend(exc.violations)
    for loop in section.get("loops") or []:
        app.add_loop(list(loop))
    return app


def _deadline_tables(section: dict, app: Application, topo: Topology, stream: RngStream, problems: list[str]):
    """Per-leaf deadline and additional-MIPS tables, sampled leaf by leaf."""
    deadlines = section.get("deadlines") or {}
    extras = section.get("additional_mips") or {}
    deadline_info: dict[int, dict[str, float]] = {}
    extra_info: dict[int, dict[str, int]] = {}
    for module in set(deadlines) | set(extras):
        if not app.has_module(module):
            problems.append(f"deadline/additional_mips given for unknown module {module!r}")
    for leaf in topo.leaves():
        leaf_name = topo.devices[leaf].name
        for module, entry in deadlines.items():
            value = _per_device(entry, leaf_name, stream, f"deadline {module!r} for {leaf_name!r}", problems)
            if value is not None:
                deadline_info.setdefault(leaf, {})[module] = float(value)
        for module, entry in extras.items():
            if isinstance(entry, (list, tuple)) and len(entry) == 2:
                value = stream.integer(int(entry[0]), int(entry[1]))
            else:
                value = _per_device(entry, leaf_name, stream, f"additional_mips {module!r} for {leaf_name!r}", problems)
            if value is not None:
                extra_info.setdefault(leaf, {})[module] = int(value)
    return deadline_info, extra_info


def _per_device(entry, device_name: str, stream: RngStream, what: str, problems: list[str]):
    if isinstance(entry, dict):
        if device_name not in entry:
            return None
        return _sample(entry[device_name], stream, what, problems)
    return _sample(entry, stream, what, problems)


def _build_pins(section: dict, app: Application, topo: Topology, problems: list[str]) -> PinList:
    pins = PinList()
    for n, pin in enumerate(section.get("pins") or []):
        module = pin.get("module") if isinstance(pin, dict) else None
        if module is None:
            problems.append(f"pin {n}: needs a 'module'")
            continue
        if not app.has_module(module):
            problems.append(f"pin {n}: unknown module {module!r}")
            continue
        if "device" in pin:
            if topo.resolve(pin["device"], problems) is not None:
                pins.entries.append((module, pin["device"]))
        elif "level" in pin:
            targets = topo.at_level(pin["level"])
            if not targets:
                problems.append(f"pin {n}: no devices at level {pin['level']}")
            pins.entries.extend((module, topo.devices[d].name) for d in targets)
        else:
            problems.append(f"pin {n}: needs 'device' or 'level'")
    return pins


def route_problems(app: Application, topo: Topology, placement: Placement, leaf: int) -> list[str]:
    """Check that every module is reachable climbing from sensor device ``leaf``."""
    path = topo.path_to_root(leaf)
    preds = app.upward_predecessors()
    host_index: dict[str, int] = {}
    problems = []
    for module in app.module_order():
        start = max((host_index[p] for p in preds[module] if p in host_index), default=0)
        found = next(
            (i for i in range(start, len(path)) if placement.find(path[i], module, leaf) is not None),
            None,
        )
        if found is None:
            problems.append(
                f"tuples from {topo.devices[leaf].name!r} cannot reach module {module!r} "
                f"along {[topo.devices[d].name for d in path]}"
            )
        else:
            host_index[module] = found
    return problems


def _build_mobility(scenario, topo, app, placement, stream, problems) -> list[MobilityEntry]:
    section = scenario.mobility or {}
    entries = []
    for n, e in enumerate(section.get("entries") or []):
        dev = topo.resolve(e.get("device"), problems) if "device" in e else None
        new_parent = topo.resolve(e.get("new_parent"), problems) if "new_parent" in e else None
        if dev is None or new_parent is None:
            problems.append(f"mobility entry {n}: needs known 'device' and 'new_parent'")
            continue
        if dev == new_parent:
            problems.append(f"mobility entry {n}: device cannot move under itself")
            continue
        entries.append(MobilityEntry(dev, float(e.get("at", 0.0)), new_parent))

    rnd = section.get("random")
    if rnd:
        new_parent = topo.resolve(rnd.get("new_parent"), problems)
        level = rnd.get("level")
        probability = float(rnd.get("probability", 0.5))
        keep_routable = bool(rnd.get("keep_routable", False))
        if new_parent is not None:
            for dev in topo.at_level(level):
                # the coin is flipped for every candidate so the stream stays aligned
                moves = stream.bernoulli(probability)
                if not moves or dev == new_parent or topo.devices[dev].parent == new_parent:
                    continue
                if keep_routable and _move_breaks_routes(app, topo, placement, dev, new_parent):
                    continue
                entries.append(MobilityEntry(dev, float(rnd.get("at", 0.0)), new_parent))

    for entry in entries:
        for p in _move_problems(app, topo, placement, entry.device, entry.new_parent):
            problems.append(f"mobility of {topo.devices[entry.device].name!r}: {p}")
    return entries


def _origins(topo: Topology) -> list[int]:
    """Devices that emit tuples, i.e. those carrying at least one sensor."""
    return sorted({s.gateway_device for s in topo.sensors})


def _move_problems(app, topo, placement, device, new_parent) -> list[str]:
    if placement is None or app is None:
        return []
    moved = copy.deepcopy(topo)
    moved.devices[device].parent = new_parent
    try:
        affected = [o for o in _origins(moved) if device in moved.path_to_root(o)]
    except ValidationError as exc:
        return exc.violations
    problems = []
    for leaf in affected:
        problems.extend(route_problems(app, moved, placement, leaf))
    return problems


def _move_breaks_routes(app, topo, placement, device, new_parent) -> bool:
    return bool(_move_problems(app, topo, placement, device, new_parent))


def build_scenario(scenario: Scenario, seed: int | None = None, horizon: float | None = None,
                   policy: str | None = None) -> BuiltScenario:
    """Materialize a scenario into simulation objects, collecting every violation."""
    seed = scenario.seed if seed is None else int(seed)
    horizon = scenario.horizon if horizon is None else float(horizon)
    problems: list[str] = []
    config = scenario.config or {}
    try:
        cluster_cfg = ClusterConfig(
            float(config.get("cluster_distance", 2.0)), float(config.get("max_number", 9999999.0))
        )
    except ValidationError as exc:
        problems.extend(exc.violations)
        cluster_cfg = ClusterConfig()

    topo = _build_topology(scenario, RngStream(seed, "topology"), problems)
    if any(d.parent is None and d.level > 0 for d in topo.devices.values()):
        try:
            select_gateways(topo, cluster_cfg)
        except ValidationError as exc:
            problems.extend(exc.violations)
    problems.extend(topo.validate())

    app = _build_application(scenario.application, problems)
    placement = None
    pins = PinList()
    section = scenario.placement
    policy = policy or section.get("policy", "edge_ward")
    if policy not in POLICIES:
        problems.append(f"unknown placement policy {policy!r}; valid options: {', '.join(POLICIES)}")
    if app is not None:
        deadline_info, extra_info = _deadline_tables(section, app, topo, RngStream(seed, "placement"), problems)
        app.deadline_info, app.additional_mips_info = deadline_info, extra_info
        problems.extend(validate_application(app))
        pins = _build_pins(section, app, topo, problems)
        module_to_place = section.get("module_to_place")
        if policy == "deadline_aware" and module_to_place is None:
            problems.append("deadline_aware placement needs 'module_to_place'")
        if not problems:
            try:
                placement = place(policy, app, topo, pins, module_to_place)
            except ValidationError as exc:
                problems.extend(exc.violations)
        if placement is not None:
            for origin in _origins(topo):
                problems.extend(route_problems(app, topo, placement, origin))
        for s in topo.sensors:
            if app.sensor_edge(s.tuple_type) is None:
                problems.append(f"sensor {s.name!r}: application has no SENSOR edge {s.tuple_type!r}")

    mobility = _build_mobility(scenario, topo, app, placement, RngStream(seed, "mobility"), problems)

    clusters = None
    if scenario.clusters is not None:
        level = scenario.clusters.get("level")
        if not isinstance(level, int):
            problems.append("clusters.level must be an integer")
        else:
            clusters = form_clusters(topo, level, cluster_cfg)

    if problems:
        raise ValidationError(problems)
    return BuiltScenario(
        scenario, seed, horizon, topo, app, pins, placement, mobility, clusters, cluster_cfg, policy
    )


# -- running ----------------------------------------------------------------------


@dataclass
class RunResult:
    built: BuiltScenario
    report: MetricsReport
    event_log: EventLog
    counters: RunCounters
    final_topology: Topology


def run_scenario(scenario: Scenario, seed: int | None = None, horizon: float | None = None,
                 policy: str | None = None, log_events: bool = True) -> RunResult:
    built = build_scenario(scenario, seed=seed, horizon=horizon, policy=policy)
    sim = Simulation(
        built.topology, built.app, built.placement,
        seed=built.seed, horizon=built.horizon, mobility=built.mobility, log_events=log_events,
    )
    report = sim.run()
    return RunResult(built, report, sim.log, sim.counters, sim.topology)


def report_document(result: RunResult) -> dict:
    """Machine-readable report: metrics plus topology, placement and scenario echo."""
    built = result.built
    topo = built.topology
    echo = built.scenario.to_dict()
    echo["seed"], echo["horizon"] = built.seed, built.horizon
    echo["placement"]["policy"] = built.policy
    doc = {
        "format_version": FORMAT_VERSION,
        "tool": {"name": "fogsim", "version": __version__},
        "metrics": result.report.as_dict(),
        "topology": topo.dump(),
        "sensors": [
            {"name": s.name, "device": topo.devices[s.gateway_device].name, "latency": s.latency,
             "emission_interval": s.emission_interval, "max_tuples": s.max_tuples}
            for s in topo.sensors
        ],
        "placement": built.placement.dump(topo),
        "mobility": [
            {"device": topo.devices[m.device].name, "at": m.at_time,
             "new_parent": topo.devices[m.new_parent].name}
            for m in built.mobility
        ],
        "clusters": None if built.clusters is None else {
            str(cid): [topo.devices[d].name for d in members] for cid, members in built.clusters.items()
        },
        "counters": {
            "created": result.counters.created,
            "delivered": result.counters.delivered,
            "consumed": result.counters.consumed,
            "derived": result.counters.derived,
            "in_flight": result.counters.in_flight,
        },
        "scenario": echo,
    }
    return doc


# -- builtin scenarios ------------------------------------------------------------

_CLOUD = {
    "name": "cloud", "mips": 44800, "ram": 40000, "up_bw": 100, "down_bw": 10000, "level": 0,
    "rate_per_mips": 0.01, "busy_power": 16 * 103, "idle_power": 16 * 83.25,
}
_FOG_RANGES = {
    "mips": [12000, 15000], "ram": [4000, 8000], "up_bw": [200, 300], "down_bw": [500, 1000],
    "rate_per_mips": 0.01, "busy_power": [100, 120], "idle_power": [70, 75], "uplink_latency": 10,
}
_GATEWAY = {
    "mips": 2800, "ram": 4000, "up_bw": 10000, "down_bw": 10000, "rate_per_mips": 0.0,
    "busy_power": 107.339, "idle_power": 83.4333, "uplink_latency": 4,
}
_END_DEVICE = {
    "mips": 3200, "ram": 1000, "up_bw": 10000, "down_bw": 270, "rate_per_mips": 0,
    "busy_power": 87.53, "idle_power": 82.44, "uplink_latency": 2,
}
_LOW_LEVEL = {
    "mips": 1000, "ram": 1000, "up_bw": 10000, "down_bw": 270, "rate_per_mips": 0,
    "busy_power": 87.53, "idle_power": 82.44, "uplink_latency": 2,
}
_COORDS = {"x": [10.0, 20.0], "y": [15.0, 25.0]}


def _endpoints(sensor: str, actuator: str, consumed: str, interval, max_tuples=None) -> dict:
    s = {"name": sensor, "latency": 6.0, "emission_interval": interval}
    if max_tuples is not None:
        s["max_tuples"] = max_tuples
    return {
        "sensors": [s],
        "actuators": [{"name": actuator, "consumed_tuple_type": consumed, "latency": 1.0}],
    }


def _three_tier(sensor: str, actuator: str, consumed: str, interval) -> dict:
    return {
        "tiers": [
            {"name": "cloud", **{k: v for k, v in _CLOUD.items() if k != "name"}},
            {"name": "g-{path}", "per_parent": 2, **_GATEWAY},
            {"name": "e-{path}", "per_parent": 3, **_END_DEVICE,
             **_endpoints(sensor, actuator, consumed, interval)},
        ]
    }


def _builtin_fog_ranges() -> dict:
    return {
        "name": "snippet1",
        "description": "Cloud plus ten heterogeneous fog devices drawn from fixed ranges.",
        "horizon": DEFAULT_HORIZON,
        "topology": {"tiers": [
            {"name": "cloud", **{k: v for k, v in _CLOUD.items() if k != "name"}},
            {"name": "FogDevice-{path}", "per_parent": 10, **_FOG_RANGES,
             **_endpoints("Sensor", "Actuators", "OutputData", [5.0, 15.0])},
        ]},
        "application": {"builtin": "client_main"},
        "placement": {"policy": "edge_ward"},
    }


def _builtin_master_worker() -> dict:
    return {
        "name": "master_worker",
        "description": "Master-worker application on a cloud / gateway / end-device hierarchy.",
        "horizon": DEFAULT_HORIZON,
        "topology": _three_tier("Sensor", "Actuators", "OutputData", [5.0, 15.0]),
        "application": {"builtin": "master_worker"},
        "placement": {"policy": "edge_ward"},
    }


def _builtin_sequential() -> dict:
    return {
        "name": "sequential",
        "description": "Sequential unidirectional four-module dataflow.",
        "horizon": DEFAULT_HORIZON,
        "topology": _three_tier("Sensor", "Actuators", "OutputData", [5.0, 15.0]),
        "application": {"builtin": "sequential"},
        "placement": {"policy": "edge_ward"},
    }


def _builtin_deadline_test() -> dict:
    return {
        "name": "deadline_test",
        "description": "Deadline-aware placement of mainModule on 2 gateways x 3 end devices.",
        "horizon": DEFAULT_HORIZON,
        "topology": _three_tier("IoTSensor", "IoTActuator", "Response", 5.0),
        "application": {"builtin": "deadline_test"},
        "placement": {
            "policy": "deadline_aware",
            "module_to_place": "mainModule",
            "pins": [{"module": "storageModule", "device": "cloud"},
                     {"module": "clientModule", "level": 2}],
            "deadlines": {"mainModule": [3.0, 5.0]},
            "additional_mips": {"mainModule": [0, 500]},
        },
    }


def _builtin_mobility_demo() -> dict:
    return {
        "name": "mobility_demo",
        "description": "About half of the low-level devices move under FogDevice-0 at t=100 ms.",
        "horizon": DEFAULT_HORIZON,
        "topology": {"tiers": [
            {"name": "cloud", **{k: v for k, v in _CLOUD.items() if k != "name"}},
            {"name": "FogDevice-{path}", "per_parent": 2, **_FOG_RANGES},
            {"name": "LowLevelFogDevice-{path}", "per_parent": 3, **_LOW_LEVEL,
             **_endpoints("Sensor", "Actuators", "OutputData", [5.0, 15.0])},
        ]},
        "application": {"builtin": "client_main"},
        "placement": {"policy": "edge_ward", "pins": [{"module": "ClientModule", "level": 1}]},
        "mobility": {"random": {"level": 2, "at": 100.0, "new_parent": "FogDevice-0", "probability": 0.5}},
    }


def _builtin_cluster_demo() -> dict:
    return {
        "name": "cluster_demo",
        "description": "Orphan low-level devices join the nearest gateway, then cluster by distance.",
        "horizon": DEFAULT_HORIZON,
        "topology": {"tiers": [
            {"name": "cloud", **{k: v for k, v in _CLOUD.items() if k != "name"}},
            {"name": "FogDevice-{path}", "per_parent": 2, **_FOG_RANGES, **_COORDS},
            {"name": "LowLevelFogDevice-{i}", "orphan": True, "count": 8, **_LOW_LEVEL, **_COORDS,
             **_endpoints("Sensor", "Actuators", "OutputData", [5.0, 15.0])},
        ]},
        "application": {"builtin": "client_main"},
        "placement": {"policy": "edge_ward", "pins": [{"module": "ClientModule", "level": 1}]},
        "clusters": {"level": 2},
        "config": {"cluster_distance": 2.0, "max_number": 9999999.0},
    }


HEALTHCARE_HEADER = """\
Smart-healthcare case study: a composed fog scenario.
Artifact choices (not fixed by the source material): 3 tiers, a cloud with 2
gateways and 3 phones per gateway; phones get random coordinates and those
closer than cluster_distance under the same gateway form clusters; about half of
the phones move under g-0 at t=100 ms, but only when their modules stay
reachable; dataFiltering is placed deadline-aware with per-phone deadlines and
extra MIPS; each pulse sensor sends at most 100 tuples. The health_monitor
application uses small tuples (a few MI, tens of kB) so the loop keeps up with
5-15 ms sensing."""

MOBILITY_HEADER = """\
Mobility demo. Artifact choice: ClientModule is pinned to the level-1 fog
devices so leaves forward every sensor tuple upward straight away, which makes
the re-targeted uplink visible in the event log before and after t=100 ms."""

CLUSTER_HEADER = """\
Cluster demo. Artifact choice: eight low-level devices start unconnected at
random coordinates and join the nearest level-1 device before clustering."""


def _builtin_healthcare() -> dict:
    phone = dict(_END_DEVICE, **_COORDS)
    phone.update(_endpoints("PulseSensor", "Display", "AlertView", [5.0, 15.0], max_tuples=100))
    return {
        "name": "healthcare",
        "description": "Composed healthcare case study (clusters, mobility, deadline-aware placement).",
        "horizon": DEFAULT_HORIZON,
        "topology": {"tiers": [
            {"name": "cloud", **{k: v for k, v in _CLOUD.items() if k != "name"}},
            {"name": "g-{path}", "per_parent": 2, **_GATEWAY, **_COORDS},
            {"name": "phone-{path}", "per_parent": 3, **phone},
        ]},
        "application": {"builtin": "health_monitor"},
        "placement": {
            "policy": "deadline_aware",
            "module_to_place": "dataFiltering",
            "pins": [{"module": "clientModule", "level": 2}],
            "deadlines": {"dataFiltering": [3.0, 5.0]},
            "additional_mips": {"dataFiltering": [0, 500]},
        },
        "mobility": {"random": {"level": 2, "at": 100.0, "new_parent": "g-0",
                                "probability": 0.5, "keep_routable": True}},
        "clusters": {"level": 2},
        "config": {"cluster_distance": 2.0, "max_number": 9999999.0},
    }


BUILTIN_SCENARIOS = {
    "snippet1": _builtin_fog_ranges,
    "master_worker": _builtin_master_worker,
    "sequential": _builtin_sequential,
    "deadline_test": _builtin_deadline_test,
    "mobility_demo": _builtin_mobility_demo,
    "cluster_demo": _builtin_cluster_demo,
    "healthcare": _builtin_healthcare,
}

BUILTIN_HEADERS = {
    "healthcare": HEALTHCARE_HEADER,
    "mobility_demo": MOBILITY_HEADER,
    "cluster_demo": CLUSTER_HEADER,
}


def generate_builtin(name: str, seed: int = 0) -> Scenario:
    """Builtin scenario ``name``; random fields are drawn from ``seed`` when built."""
    try:
        doc = BUILTIN_SCENARIOS[name]()
    except KeyError:
        raise ValidationError(
            f"unknown builtin scenario {name!r}; choose from {', '.join(BUILTIN_SCENARIOS)}"
        ) from None
    doc["seed"] = int(seed)
    return Scenario.from_dict(doc)


__all__ = [
    "BUILTIN_APPLICATIONS", "BUILTIN_SCENARIOS", "BuiltScenario", "FogSimError", "RunResult",
    "Scenario", "build_scenario", "dump_scenario", "generate_builtin", "load_scenario_text",
    "parse_scenario", "report_document", "route_problems", "run_scenario",
]
