"""Run accounting: linear-power energy, network usage, execution cost and loop latency."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from fogsim.errors import FogSimError
from fogsim.topology import FogDevice

logger = logging.getLogger(__name__)


@dataclass
class EnergyLedger:
    busy_power: float
    idle_power: float
    last_update: float = 0.0
    current_utilization: float = 0.0
    accumulated_energy: float = 0.0

    def power(self) -> float:
        return self.idle_power + (self.busy_power - self.idle_power) * self.current_utilization


@dataclass(frozen=True)
class LoopStats:
    count: int
    samples: tuple[float, ...]
    mean: float


@dataclass(frozen=True)
class MetricsReport:
    loops: Mapping[str, LoopStats]
    energy: Mapping[str, float]
    network_kb: float
    network_usage_kb_ms: float
    total_cost: float
    processing_delay: Mapping[str, float]
    horizon: float
    seed: int

    def as_dict(self) -> dict:
        return {
            "loops": {
                name: {"count": s.count, "mean_ms": s.mean, "samples_ms": list(s.samples)}
                for name, s in self.loops.items()
            },
            "energy_j": dict(self.energy),
            "network": {"total_kb": self.network_kb, "usage_kb_ms": self.network_usage_kb_ms},
            "total_cost": self.total_cost,
            "processing_delay_ms": dict(self.processing_delay),
            "horizon_ms": self.horizon,
            "seed": self.seed,
        }


class Metrics:
    """Mutable accumulator for one run; :meth:`finalize` freezes it into a report."""

    def __init__(self, devices: Mapping[int, FogDevice], loop_labels: list[str] = (), seed: int = 0):
        self._names = {i: d.name for i, d in devices.items()}
        self.ledgers = {i: EnergyLedger(d.busy_power, d.idle_power) for i, d in devices.items()}
        self.loop_samples: dict[str, list[float]] = {label: [] for label in loop_labels}
        self.network_kb = 0.0
        self.network_usage_kb_ms = 0.0
        self.total_cost = 0.0
        self._delay_sum: dict[str, float] = {}
        self._delay_count: dict[str, int] = {}
        self.seed = seed
        self._report: MetricsReport | None = None

    def record_utilization_change(self, device: int, new_u: float, t: float) -> None:
        ledger = self.ledgers[device]
        if t < ledger.last_update:
            raise FogSimError(
                f"utilization update for {self._names[device]} at t={t} precedes last update {ledger.last_update}"
            )
        if not 0.0 <= new_u <= 1.0:
            logger.warning("utilization %r for %s clamped to [0, 1]", new_u, self._names[device])
            new_u = min(1.0, max(0.0, new_u))
        ledger.accumulated_energy += (t - ledger.last_update) / 1000.0 * ledger.power()
        ledger.current_utilization = new_u
        ledger.last_update = t

    def record_transmission(self, nw_length: float, latency: float) -> None:
        self.network_kb += nw_length
        self.network_usage_kb_ms += nw_length * latency

    def accrue_cost(self, device: FogDevice, cpu_length: float) -> None:
        self.total_cost += device.rate_per_mips * cpu_length

    def record_processing_delay(self, tuple_type: str, delay: float) -> None:
        self._delay_sum[tuple_type] = self._delay_sum.get(tuple_type, 0.0) + delay
        self._delay_count[tuple_type] = self._delay_count.get(tuple_type, 0) + 1

    def record_loop_completion(self, loop: str, t_emit: float, t_done: float) -> None:
        if t_done < t_emit:
            raise FogSimError(f"loop {loop}: completion at {t_done} precedes emission at {t_emit}")
        self.loop_samples.setdefault(loop, []).append(t_done - t_emit)

    def finalize(self, t_end: float) -> MetricsReport:
        if self._report is not None:
            raise FogSimError("metrics already finalized")
        for device, ledger in self.ledgers.items():
            self.record_utilization_change(device, ledger.current_utilization, t_end)
        loops = {}
        for label, samples in self.loop_samples.items():
            mean = sum(samples) / len(samples) if samples else 0.0
            loops[label] = LoopStats(len(samples), tuple(samples), mean)
        self._report = MetricsReport(
            loops=MappingProxyType(loops),
            energy=MappingProxyType(
                {self._names[i]: self.ledgers[i].accumulated_energy for i in sorted(self.ledgers)}
            ),
            network_kb=self.network_kb,
            network_usage_kb_ms=self.network_usage_kb_ms,
            total_cost=self.total_cost,
            processing_delay=MappingProxyType(
                {k: self._delay_sum[k] / self._delay_count[k] for k in sorted(self._delay_sum)}
            ),
            horizon=t_end,
            seed=self.seed,
        )
        return self._report
