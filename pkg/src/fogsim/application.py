"""Logical layer: modules, typed edges, selectivity mappings, loops and tuples."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

from fogsim.errors import ValidationError
from fogsim.kernel import RngStream


class Direction(str, enum.Enum):
    UP = "UP"
    DOWN = "DOWN"


class EdgeKind(str, enum.Enum):
    SENSOR = "SENSOR"
    MODULE = "MODULE"
    ACTUATOR = "ACTUATOR"


def _norm(name: str) -> str:
    return name.strip()


@dataclass(frozen=True)
class AppModule:
    name: str
    ram: float
    mips: float
    size: float
    bw: float


@dataclass(frozen=True)
class AppEdge:
    source: str
    destination: str
    cpu_length: float
    nw_length: float
    tuple_type: str
    direction: Direction
    edge_kind: EdgeKind
    period: float | None = None


@dataclass(frozen=True)
class TupleMapping:
    module: str
    input_type: str
    output_type: str
    selectivity: float


@dataclass(frozen=True)
class AppLoop:
    sequence: tuple[str, ...]

    @property
    def modules(self) -> tuple[str, ...]:
        """The module part of the loop, without the sensor and actuator ends."""
        return self.sequence[1:-1]

    @property
    def label(self) -> str:
        return "->".join(self.sequence)


@dataclass
class Tuple:
    id: int
    lineage_id: int
    tuple_type: str
    direction: Direction
    edge_kind: EdgeKind
    cpu_length: float
    nw_length: float
    source_module: str
    dest_module: str
    origin_device: int
    emitted_at: float
    down_path: list[int] = field(default_factory=list)
    # modules that processed this tuple's ancestors, oldest first
    chain: tuple[str, ...] = ()
    parent_id: int | None = None
    # tuple type of the sensor that started the lineage; None for periodic tuples
    sensor_type: str | None = None


@dataclass
class Application:
    app_id: str
    modules: list[AppModule] = field(default_factory=list)
    edges: list[AppEdge] = field(default_factory=list)
    mappings: list[TupleMapping] = field(default_factory=list)
    loops: list[AppLoop] = field(default_factory=list)
    deadline_info: dict[int, dict[str, float]] = field(default_factory=dict)
    additional_mips_info: dict[int, dict[str, int]] = field(default_factory=dict)

    # -- construction ---------------------------------------------------------

    def add_module(self, name: str, ram: float, mips: float, size: float, bw: float) -> None:
        name = _norm(name)
        problems = []
        if self.has_module(name):
            problems.append(f"duplicate module name {name!r}")
        if not mips > 0:
            problems.append(f"module {name!r}: mips must be > 0, got {mips}")
        if problems:
            raise ValidationError(problems)
        self.modules.append(AppModule(name, ram, mips, size, bw))

    def add_edge(
        self,
        source: str,
        destination: str,
        cpu_length: float,
        nw_length: float,
        tuple_type: str,
        direction: Direction | str,
        edge_kind: EdgeKind | str,
        period: float | None = None,
    ) -> None:
        edge = AppEdge(
            _norm(source),
            _norm(destination),
            cpu_length,
            nw_length,
            _norm(tuple_type),
            Direction(direction),
            EdgeKind(edge_kind),
            period,
        )
        problems = self._edge_problems(edge)
        if problems:
            raise ValidationError(problems)
        self.edges.append(edge)

    def _edge_problems(self, edge: AppEdge, existing: list[AppEdge] | None = None) -> list[str]:
        existing = self.edges if existing is None else existing
        problems = []
        label = f"edge {edge.source!r}->{edge.destination!r}"
        if any(e.tuple_type == edge.tuple_type for e in existing):
            problems.append(f"{label}: duplicate tuple type {edge.tuple_type!r}")
        if edge.cpu_length < 0 or edge.nw_length < 0:
            problems.append(f"{label}: cpu_length and nw_length must be >= 0")
        if edge.period is not None and not edge.period > 0:
            problems.append(f"{label}: period must be > 0")
        if edge.edge_kind is EdgeKind.SENSOR:
            if edge.source != edge.tuple_type:
                problems.append(f"{label}: a SENSOR edge's source must equal its tuple type")
            if not self.has_module(edge.destination):
                problems.append(f"{label}: unknown destination module {edge.destination!r}")
        elif edge.edge_kind is EdgeKind.ACTUATOR:
            if not self.has_module(edge.source):
                problems.append(f"{label}: unknown source module {edge.source!r}")
            if self.has_module(edge.destination):
                problems.append(f"{label}: ACTUATOR edge must end at an actuator, not a module")
        else:
            for end in (edge.source, edge.destination):
                if not self.has_module(end):
                    problems.append(f"{label}: unknown module {end!r}")
        return problems

    def add_tuple_mapping(self, module: str, input_type: str, output_type: str, selectivity: float) -> None:
        mapping = TupleMapping(_norm(module), _norm(input_type), _norm(output_type), float(selectivity))
        problems = self._mapping_problems(mapping)
        if problems:
            raise ValidationError(problems)
        self.mappings.append(mapping)

    def _mapping_problems(self, m: TupleMapping) -> list[str]:
        problems = []
        label = f"mapping {m.module}:{m.input_type}->{m.output_type}"
        if not self.has_module(m.module):
            problems.append(f"{label}: unknown module {m.module!r}")
        if not 0.0 <= m.selectivity <= 1.0:
            problems.append(f"{label}: selectivity {m.selectivity} outside [0, 1]")
        edge = self.edge_for(m.output_type)
        if edge is None or edge.source != m.module:
            problems.append(f"{label}: no edge of type {m.output_type!r} leaves {m.module!r}")
        return problems

    def add_loop(self, sequence: list[str]) -> None:
        self.loops.append(AppLoop(tuple(_norm(s) for s in sequence)))

    # -- queries --------------------------------------------------------------

    def has_module(self, name: str) -> bool:
        return any(m.name == name for m in self.modules)

    def module(self, name: str) -> AppModule:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    def edge_for(self, tuple_type: str) -> AppEdge | None:
        for e in self.edges:
            if e.tuple_type == tuple_type:
                return e
        return None

    def sensor_edge(self, tuple_type: str) -> AppEdge | None:
        edge = self.edge_for(_norm(tuple_type))
        if edge is not None and edge.edge_kind is EdgeKind.SENSOR:
            return edge
        return None

    def mappings_for(self, module: str, input_type: str) -> list[TupleMapping]:
        return [m for m in self.mappings if m.module == module and m.input_type == input_type]

    def actuator_names(self) -> set[str]:
        return {e.destination for e in self.edges if e.edge_kind is EdgeKind.ACTUATOR}

    def module_order(self) -> list[str]:
        """Modules in upward dataflow order (Kahn's algorithm over UP module edges).

        Ties and modules outside the UP graph keep registration order.
        """
        names = [m.name for m in self.modules]
        preds = self.upward_predecessors()
        placed: list[str] = []
        remaining = list(names)
        while remaining:
            for name in remaining:
                if all(p in placed for p in preds[name]):
                    placed.append(name)
                    remaining.remove(name)
                    break
            else:
                raise ValidationError(f"UP module edges form a cycle among {remaining}")
        return placed

    def upward_predecessors(self) -> dict[str, list[str]]:
        """For each module, the modules feeding it through UP module edges."""
        preds: dict[str, list[str]] = {m.name: [] for m in self.modules}
        for e in self.edges:
            if e.edge_kind is EdgeKind.MODULE and e.direction is Direction.UP:
                if e.destination in preds and e.source not in preds[e.destination]:
                    preds[e.destination].append(e.source)
        return preds


def derive_tuples(
    app: Application,
    module: str,
    input_tuple: Tuple,
    rng: RngStream,
    next_id: Callable[[], int],
) -> list[Tuple]:
    """Tuples emitted by ``module`` after processing ``input_tuple``.

    Every mapping matching ``(module, input type)`` is evaluated independently,
    in registration order. Selectivities of exactly 0 or 1 consume no random
    draw, so all-certain applications are independent of the stream.
    """
    out = []
    chain = input_tuple.chain + (module,)
    for mapping in app.mappings_for(module, input_tuple.tuple_type):
        p = mapping.selectivity
        if p <= 0.0:
            continue
        if p < 1.0 and not rng.random() < p:
            continue
        edge = app.edge_for(mapping.output_type)
        out.append(
            Tuple(
                id=next_id(),
                lineage_id=input_tuple.lineage_id,
                tuple_type=edge.tuple_type,
                direction=edge.direction,
                edge_kind=edge.edge_kind,
                cpu_length=edge.cpu_length,
                nw_length=edge.nw_length,
                source_module=module,
                dest_module=edge.destination,
                origin_device=input_tuple.origin_device,
                emitted_at=input_tuple.emitted_at,
                down_path=list(input_tuple.down_path),
                chain=chain,
                parent_id=input_tuple.id,
                sensor_type=input_tuple.sensor_type,
            )
        )
    return out


def is_subsequence(needle: tuple[str, ...], haystack: tuple[str, ...]) -> bool:
    it = iter(haystack)
    return all(any(x == y for y in it) for x in needle)


def validate_application(app: Application) -> list[str]:
    """Return every invariant violation; an empty list means the application is sound."""
    problems = []
    seen = set()
    for m in app.modules:
        if m.name in seen:
            problems.append(f"duplicate module name {m.name!r}")
        seen.add(m.name)
        if not m.mips > 0:
            problems.append(f"module {m.name!r}: mips must be > 0")
    for i, e in enumerate(app.edges):
        problems.extend(app._edge_problems(e, existing=app.edges[:i]))
    for m in app.mappings:
        problems.extend(app._mapping_problems(m))

    for loop in app.loops:
        if len(loop.sequence) < 2:
            problems.append(f"loop {loop.label}: needs at least two elements")
            continue
        for a, b in zip(loop.sequence, loop.sequence[1:]):
            if not any(e.source == a and e.destination == b for e in app.edges):
                problems.append(f"loop {loop.label}: no edge {a!r}->{b!r}")
    for i, a in enumerate(app.loops):
        for b in app.loops[i + 1:]:
            if _terminal_type(app, a) is None or _terminal_type(app, a) != _terminal_type(app, b):
                continue
            if is_subsequence(a.modules, b.modules) or is_subsequence(b.modules, a.modules):
                problems.append(f"loops {a.label} and {b.label} cannot be told apart")

    for device, per_module in app.deadline_info.items():
        for name, deadline in per_module.items():
            if not app.has_module(name):
                problems.append(f"deadline for unknown module {name!r} (device {device})")
            if not deadline > 0:
                problems.append(f"deadline for {name!r} on device {device} must be > 0")
    for device, per_module in app.additional_mips_info.items():
        for name, extra in per_module.items():
            if not app.has_module(name):
                problems.append(f"additional mips for unknown module {name!r} (device {device})")
            if extra < 0:
                problems.append(f"additional mips for {name!r} on device {device} must be >= 0")
    return problems


def _terminal_type(app: Application, loop: AppLoop) -> str | None:
    if len(loop.sequence) < 2:
        return None
    for e in app.edges:
        if e.source == loop.sequence[-2] and e.destination == loop.sequence[-1]:
            return e.tuple_type
    return None


def loop_terminal_type(app: Application, loop: AppLoop) -> str | None:
    return _terminal_type(app, loop)


# -- builtin applications -------------------------------------------------------

# Two-argument module form: only RAM is given, so mips/size/bw take these values.
_SHORT_FORM_DEFAULTS = {"mips": 1000, "size": 10000, "bw": 1000}


def _short_module(app: Application, name: str, ram: float) -> None:
    app.add_module(name, ram, **_SHORT_FORM_DEFAULTS)


def _master_worker(app_id: str) -> Application:
    app = Application(app_id)
    _short_module(app, "MasterModule", 10)
    for k in (1, 2, 3):
        _short_module(app, f"WorkerModule-{k}", 10)
    app.add_edge("Sensor", "MasterModule", 3000, 500, "Sensor", "UP", "SENSOR")
    for k in (1, 2, 3):
        app.add_edge("MasterModule", f"WorkerModule-{k}", 100, 1000, f"Task-{k}", "UP", "MODULE")
    for k in (1, 2, 3):
        app.add_edge(f"WorkerModule-{k}", "MasterModule", 20, 50, f"Response-{k}", "DOWN", "MODULE")
    app.add_edge("MasterModule", "Actuators", 100, 50, "OutputData", "DOWN", "ACTUATOR")
    for k in (1, 2, 3):
        app.add_tuple_mapping("MasterModule", " Sensor ", f"Task-{k}", 0.3)
    for k in (1, 2, 3):
        app.add_tuple_mapping(f"WorkerModule-{k}", f"Task-{k}", f"Response-{k}", 1.0)
    for k in (1, 2, 3):
        app.add_tuple_mapping("MasterModule", f"Response-{k}", "OutputData", 0.3)
    for k in (1, 2, 3):
        app.add_loop(["Sensor", "MasterModule", f"WorkerModule-{k}", "MasterModule", "Actuators"])
    return app


def _sequential(app_id: str) -> Application:
    app = Application(app_id)
    for k in (1, 2, 3, 4):
        _short_module(app, f"Module{k}", 10)
    app.add_edge("Sensor", "Module1", 3000, 500, "Sensor", "UP", "SENSOR")
    app.add_edge("Module1", "Module2", 100, 1000, "ProcessedData-1", "UP", "MODULE")
    app.add_edge("Module2", "Module3", 100, 1000, "ProcessedData-2", "UP", "MODULE")
    app.add_edge("Module3", "Module4", 100, 1000, "ProcessedData-3", "UP", "MODULE")
    app.add_edge("Module4", "Module1", 100, 1000, "ProcessedData-4", "DOWN", "MODULE")
    app.add_edge("Module1", "Actuators", 100, 50, "OutputData", "DOWN", "ACTUATOR")
    app.add_tuple_mapping("Module1", "Sensor", "ProcessedData-1", 1.0)
    app.add_tuple_mapping("Module2", "ProcessedData-1", "ProcessedData-2", 1.0)
    app.add_tuple_mapping("Module3", "ProcessedData-2", "ProcessedData-3", 1.0)
    app.add_tuple_mapping("Module4", "ProcessedData-3", "ProcessedData-4", 1.0)
    app.add_tuple_mapping("Module1", "ProcessedData-4", "OutputData", 1.0)
    app.add_loop(["Sensor", "Module1", "Module2", "Module3", "Module4", "Module1", "Actuators"])
    return app


def _client_main(app_id: str) -> Application:
    app = Application(app_id)
    app.add_module("ClientModule", 20, 500, 1024, 1500)
    app.add_module("MainModule", 100, 1200, 4000, 100)
    app.add_edge("Sensor", "ClientModule", 3000, 500, "Sensor", "UP", "SENSOR")
    app.add_edge("ClientModule", "MainModule", 100, 1000, "PreProcessedData", "UP", "MODULE")
    app.add_edge("MainModule", "ClientModule", 100, 1000, "ProcessedData", "DOWN", "MODULE")
    app.add_edge("ClientModule", "Actuators", 100, 50, "OutputData", "DOWN", "ACTUATOR")
    app.add_tuple_mapping("ClientModule", "Sensor", "PreProcessedData", 1.0)
    app.add_tuple_mapping("MainModule", "PreProcessedData", "ProcessedData", 1.0)
    app.add_tuple_mapping("ClientModule", "ProcessedData", "OutputData", 1.0)
    app.add_loop(["Sensor", "ClientModule", "MainModule", "ClientModule", "Actuators"])
    return app


def _deadline_test(app_id: str) -> Application:
    app = Application(app_id)
    app.add_module("clientModule", 10, 1000, 1000, 100)
    app.add_module("mainModule", 50, 1500, 4000, 800)
    app.add_module("storageModule", 10, 50, 12000, 100)
    app.add_edge("IoTSensor", "clientModule", 100, 200, "IoTSensor", "UP", "SENSOR")
    app.add_edge("clientModule", "mainModule", 6000, 600, "RawData", "UP", "MODULE")
    app.add_edge("mainModule", "storageModule", 1000, 300, "StoreData", "UP", "MODULE")
    app.add_edge("mainModule", "clientModule", 100, 50, "ResultData", "DOWN", "MODULE")
    app.add_edge("clientModule", "IoTActuator", 100, 50, "Response", "DOWN", "ACTUATOR")
    app.add_tuple_mapping("clientModule", "IoTSensor", "RawData", 1.0)
    app.add_tuple_mapping("mainModule", "RawData", "ResultData", 1.0)
    app.add_tuple_mapping("mainModule", "RawData", "StoreData", 1.0)
    app.add_tuple_mapping("clientModule", "ResultData", "Response", 1.0)
    app.add_loop(["IoTSensor", "clientModule", "mainModule", "clientModule", "IoTActuator"])
    return app


def _health_monitor(app_id: str) -> Application:
    """Four-module pipeline for the healthcare scenario.

    Tuples are small so a phone sensing every 5-15 ms does not saturate its
    modules; the loop closes within tens of milliseconds.
    """
    app = Application(app_id)
    app.add_module("clientModule", 10, 1000, 1000, 100)
    app.add_module("dataFiltering", 50, 1500, 4000, 800)
    app.add_module("dataAnalysis", 50, 800, 4000, 800)
    app.add_module("eventManagement", 20, 500, 2000, 500)
    app.add_edge("PulseSensor", "clientModule", 2, 20, "PulseSensor", "UP", "SENSOR")
    app.add_edge("clientModule", "dataFiltering", 10, 50, "RawVitals", "UP", "MODULE")
    app.add_edge("dataFiltering", "dataAnalysis", 2, 20, "FilteredVitals", "UP", "MODULE")
    app.add_edge("dataAnalysis", "eventManagement", 0.5, 10, "Diagnosis", "UP", "MODULE")
    app.add_edge("eventManagement", "clientModule", 2, 10, "Alert", "DOWN", "MODULE")
    app.add_edge("clientModule", "Display", 1, 5, "AlertView", "DOWN", "ACTUATOR")
    app.add_tuple_mapping("clientModule", "PulseSensor", "RawVitals", 1.0)
    app.add_tuple_mapping("dataFiltering", "RawVitals", "FilteredVitals", 1.0)
    app.add_tuple_mapping("dataAnalysis", "FilteredVitals", "Diagnosis", 1.0)
    app.add_tuple_mapping("eventManagement", "Diagnosis", "Alert", 1.0)
    app.add_tuple_mapping("clientModule", "Alert", "AlertView", 1.0)
    app.add_loop(
        ["PulseSensor", "clientModule", "dataFiltering", "dataAnalysis",
         "eventManagement", "clientModule", "Display"]
    )
    return app


BUILTIN_APPLICATIONS: dict[str, Callable[[str], Application]] = {
    "master_worker": _master_worker,
    "sequential": _sequential,
    "client_main": _client_main,
    "deadline_test": _deadline_test,
    "health_monitor": _health_monitor,
}


def builtin_application(name: str, app_id: str | None = None) -> Application:
    try:
        factory = BUILTIN_APPLICATIONS[name]
    except KeyError:
        raise ValidationError(
            f"unknown builtin application {name!r}; choose from {sorted(BUILTIN_APPLICATIONS)}"
        ) from None
    return factory(app_id or name)


def with_deadlines(
    app: Application,
    deadline_info: dict[int, dict[str, float]],
    additional_mips_info: dict[int, dict[str, int]],
) -> Application:
    return replace(
        app,
        deadline_info={k: dict(v) for k, v in deadline_info.items()},
        additional_mips_info={k: dict(v) for k, v in additional_mips_info.items()},
    )
