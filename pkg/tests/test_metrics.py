import logging

import pytest

from conftest import make_device
from fogsim.errors import FogSimError
from fogsim.metrics import Metrics


@pytest.fixture
def metrics():
    devices = {0: make_device("cloud", 0, busy=100.0, idle=80.0, rate=0.01), 1: make_device("edge", 1)}
    for i, d in devices.items():
        d.id = i
    return Metrics(devices, ["S->A->Act"], seed=3)


class TestEnergy:
    def test_piecewise_integration(self, metrics):
        metrics.record_utilization_change(0, 0.5, 1000.0)
        metrics.record_utilization_change(0, 0.0, 3000.0)
        report = metrics.finalize(4000.0)
        # 1 s idle, 2 s at 90 W, 1 s idle
        assert report.energy["cloud"] == pytest.approx(80 + 180 + 80, rel=1e-12)

    def test_idle_only(self, metrics):
        assert metrics.finalize(2500.0).energy["edge"] == pytest.approx(80.0 * 2.5, rel=1e-12)

    def test_out_of_range_utilization_is_clamped(self, metrics, caplog):
        with caplog.at_level(logging.WARNING):
            metrics.record_utilization_change(0, 1.7, 0.0)
        assert "clamped" in caplog.text
        assert metrics.finalize(1000.0).energy["cloud"] == pytest.approx(100.0)

    def test_time_cannot_go_backwards(self, metrics):
        metrics.record_utilization_change(0, 0.2, 50.0)
        with pytest.raises(FogSimError):
            metrics.record_utilization_change(0, 0.3, 40.0)


def test_network_views(metrics):
    metrics.record_transmission(100, 4)
    metrics.record_transmission(50, 2)
    report = metrics.finalize(10.0)
    assert (report.network_kb, report.network_usage_kb_ms) == (150, 500)


def test_cost_uses_host_rate(metrics):
    metrics.accrue_cost(make_device("x", 1, rate=0.01), 6000)
    metrics.accrue_cost(make_device("y", 1, rate=0.0), 6000)
    assert metrics.finalize(1.0).total_cost == pytest.approx(60.0)


def test_loop_statistics(metrics):
    metrics.record_loop_completion("S->A->Act", 10.0, 30.0)
    metrics.record_loop_completion("S->A->Act", 20.0, 60.0)
    stats = metrics.finalize(100.0).loops["S->A->Act"]
    assert (stats.count, stats.mean, stats.samples) == (2, 30.0, (20.0, 40.0))


def test_loop_completion_before_emission_rejected(metrics):
    with pytest.raises(FogSimError):
        metrics.record_loop_completion("S->A->Act", 30.0, 10.0)


def test_empty_loop_reports_zero_count(metrics):
    stats = metrics.finalize(1.0).loops["S->A->Act"]
    assert stats.count == 0 and stats.samples == ()


def test_processing_delay_mean(metrics):
    metrics.record_processing_delay("S", 10.0)
    metrics.record_processing_delay("S", 30.0)
    assert metrics.finalize(1.0).processing_delay["S"] == 20.0


def test_report_is_frozen(metrics):
    report = metrics.finalize(1.0)
    with pytest.raises(TypeError):
        report.energy["cloud"] = 0.0
    with pytest.raises(FogSimError, match="already finalized"):
        metrics.finalize(2.0)
    assert report.as_dict()["seed"] == 3
