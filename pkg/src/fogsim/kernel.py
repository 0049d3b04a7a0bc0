"""Event kernel: simulation clock, ordered event queue and seeded random streams.

Time is measured in milliseconds. Events fire in ascending ``(fire_at, seq)``
order, where ``seq`` is the insertion counter, so simultaneous events are
delivered first-in first-out and every run is reproducible.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator

from fogsim.errors import SimulationError, ValidationError


class EventKind(str, enum.Enum):
    SENSOR_EMIT = "sensor-emit"
    TUPLE_ARRIVAL = "tuple-arrival"
    TRANSMISSION_COMPLETE = "transmission-complete"
    PROCESSING_COMPLETE = "processing-complete"
    MOBILITY = "mobility"
    PERIODIC_EDGE_FIRE = "periodic-edge-fire"
    SIMULATION_END = "simulation-end"


@dataclass(order=True, frozen=True)
class Event:
    fire_at: float
    seq: int
    kind: EventKind = field(compare=False)
    payload: Any = field(compare=False, default=None)


Handler = Callable[[Event], None]


class Kernel:
    """Single-threaded discrete-event engine.

    Handlers are registered per :class:`EventKind`. With ``trace=True`` every
    dispatched event is appended to :attr:`dispatched` as ``(fire_at, seq, kind)``.
    """

    def __init__(self, trace: bool = False):
        self._queue: list[Event] = []
        self._seq = itertools.count()
        self._handlers: dict[EventKind, Handler] = {}
        self._now = 0.0
        self._terminated = False
        self.trace = trace
        self.dispatched: list[tuple[float, int, EventKind]] = []

    def now(self) -> float:
        return self._now

    def on(self, kind: EventKind, handler: Handler) -> None:
        self._handlers[EventKind(kind)] = handler

    def schedule(self, kind: EventKind, payload: Any = None, delay: float = 0.0) -> int:
        """Enqueue an event ``delay`` ms from now and return its id (the seq)."""
        if self._terminated:
            raise SimulationError("cannot schedule on a terminated run")
        if not (delay >= 0.0) or math.isinf(delay):
            raise ValidationError(f"event delay must be finite and >= 0, got {delay!r}")
        seq = next(self._seq)
        heapq.heappush(self._queue, Event(self._now + delay, seq, EventKind(kind), payload))
        return seq

    def peek(self) -> Event | None:
        return self._queue[0] if self._queue else None

    def pending(self) -> Iterator[Event]:
        """Events still queued, in no particular order."""
        return iter(self._queue)

    def __len__(self) -> int:
        return len(self._queue)

    def run_until(self, t_end: float) -> float:
        """Dispatch events with ``fire_at <= t_end``; return the final clock value.

        Events beyond ``t_end`` stay queued. The clock is not advanced past the
        last dispatched event.
        """
        while self._queue and self._queue[0].fire_at <= t_end:
            event = heapq.heappop(self._queue)
            self._now = event.fire_at
            if self.trace:
                self.dispatched.append((event.fire_at, event.seq, event.kind))
            handler = self._handlers.get(event.kind)
            if handler is None:
                continue
            try:
                handler(event)
            except SimulationError:
                self._terminated = True
                raise
            except Exception as exc:
                self._terminated = True
                raise SimulationError(
                    f"handler for {event.kind.value} event at t={event.fire_at} failed: {exc}"
                ) from exc
        return self._now

    def terminate(self) -> None:
        self._terminated = True


class RngStream:
    """Named, seeded random stream.

    The underlying generator is CPython's Mersenne Twister seeded from the
    string ``"<seed>/<name>"`` (hashed with SHA-512), which yields identical
    sequences on every platform.
    """

    ALGORITHM = "mt19937/sha512-str-seed/v1"

    def __init__(self, seed: int, name: str = "default"):
        self.seed = int(seed)
        self.name = name
        self._rng = random.Random(f"{self.seed}/{name}")

    def random(self) -> float:
        return self._rng.random()

    def uniform(self, lo: float, hi: float) -> float:
        return sample_uniform(self, lo, hi)

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi)``; ``lo`` when the interval is empty."""
        if lo > hi:
            raise ValidationError(f"integer range min {lo} > max {hi}")
        if lo == hi:
            return int(lo)
        return self._rng.randrange(int(lo), int(hi))

    def bernoulli(self, p: float) -> bool:
        return self._rng.random() < p


def sample_uniform(stream: RngStream, lo: float, hi: float) -> float:
    """Uniform real in ``[lo, hi)``; exactly ``lo`` for a degenerate interval."""
    if lo > hi:
        raise ValidationError(f"uniform range min {lo} > max {hi}")
    if lo == hi:
        return float(lo)
    value = lo + (hi - lo) * stream.random()
    # rounding can land on hi for wide intervals
    if value >= hi:
        value = math.nextafter(hi, lo)
    return value
