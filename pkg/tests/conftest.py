import pytest

from fogsim.application import builtin_application
from fogsim.placement import PinList, cloud_only_place, pin_module
from fogsim.topology import Actuator, FogDevice, Sensor, Topology

# acceptance verdict lines, echoed in the terminal summary
VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)


def make_device(name, level, mips=1000.0, *, up_bw=10000.0, down_bw=10000.0, rate=0.0,
                busy=100.0, idle=80.0, latency=0.0, x=0.0, y=0.0):
    return FogDevice(
        name=name, mips=mips, ram=1000, up_bw=up_bw, down_bw=down_bw, level=level,
        rate_per_mips=rate, busy_power=busy, idle_power=idle, uplink_latency=latency, x=x, y=y,
    )


def deadline_single_leaf(max_tuples=1, interval=5.0):
    """cloud -> g-0 -> e-0-0 with the deadline_test constants and mainModule pinned on g-0."""
    topo = Topology()
    topo.add_device(FogDevice("cloud", 44800, 40000, 100, 10000, 0, 0.01, 1648, 1332))
    topo.add_device(FogDevice("g-0", 2800, 4000, 10000, 10000, 1, 0.0, 107.339, 83.4333,
                              uplink_latency=4), parent="cloud")
    leaf = topo.add_device(FogDevice("e-0-0", 3200, 1000, 10000, 270, 2, 0, 87.53, 82.44,
                                     uplink_latency=2), parent="g-0")
    topo.attach_sensor(Sensor("IoTSensor", "IoTSensor", leaf, 6.0, interval, max_tuples))
    topo.attach_actuator(Actuator("IoTActuator", "Response", leaf, 1.0))
    app = builtin_application("deadline_test")
    pins = PinList()
    pin_module(pins, app, topo, "clientModule", "e-0-0")
    pin_module(pins, app, topo, "mainModule", "g-0")
    pin_module(pins, app, topo, "storageModule", "cloud")
    return topo, app, cloud_only_place(app, topo, pins)


@pytest.fixture
def single_leaf():
    return deadline_single_leaf()


@pytest.fixture
def three_tier():
    """cloud, two gateways, two leaves each; no endpoints."""
    topo = Topology()
    topo.add_device(make_device("cloud", 0, 40000))
    for g in range(2):
        topo.add_device(make_device(f"g-{g}", 1, 2800), parent="cloud")
        for e in range(2):
            topo.add_device(make_device(f"e-{g}-{e}", 2, 1000), parent=f"g-{g}")
    return topo
