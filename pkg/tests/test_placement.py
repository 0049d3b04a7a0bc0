from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_device
from fogsim.application import Application, builtin_application
from fogsim.errors import ValidationError
from fogsim.placement import (
    PinList,
    Placement,
    ModuleInstance,
    apply_pins,
    capacity_check,
    cloud_only_place,
    deadline_aware_place,
    edge_ward_place,
    pin_module,
    place,
)
from fogsim.topology import Topology


def deadline_world(n_gateways=2, leaves=3, gateway_mips=2800):
    topo = Topology()
    topo.add_device(make_device("cloud", 0, 44800))
    for g in range(n_gateways):
        topo.add_device(make_device(f"g-{g}", 1, gateway_mips), parent="cloud")
        for e in range(leaves):
            topo.add_device(make_device(f"e-{g}-{e}", 2, 3200), parent=f"g-{g}")
    return topo


def with_tables(app, topo, deadlines, extras, module="mainModule"):
    for leaf, d, x in zip(topo.leaves(), deadlines, extras):
        app.deadline_info[leaf] = {module: d}
        app.additional_mips_info[leaf] = {module: x}
    return app


def deadline_pins(app, topo):
    pins = PinList()
    pin_module(pins, app, topo, "storageModule", "cloud")
    for leaf in topo.leaves():
        pin_module(pins, app, topo, "clientModule", topo.devices[leaf].name)
    return pins


class TestCapacityCheck:
    def test_strict_inequality(self):
        gw = make_device("g", 1, 2800)
        assert not capacity_check(gw, 800, 1500, 500)
        assert capacity_check(gw, 799, 1500, 500)

    def test_empty_device(self):
        assert capacity_check(make_device("g", 1, 2800), 0, 1500, 0)


class TestPins:
    def test_leaf_pin_is_client_scoped_with_extra(self):
        topo = deadline_world(1, 1)
        app = builtin_application("deadline_test")
        leaf = topo.leaves()[0]
        app.additional_mips_info[leaf] = {"clientModule": 77}
        placement = apply_pins(app, topo, PinList([("clientModule", "e-0-0")]))
        (inst,) = placement.instances
        assert inst.client_scope == leaf and inst.allocated_mips == 1077

    def test_unknown_module_or_device(self):
        topo = deadline_world(1, 1)
        app = builtin_application("deadline_test")
        with pytest.raises(ValidationError) as exc:
            pin_module(PinList(), app, topo, "ghost", "nowhere")
        assert len(exc.value.violations) == 2


class TestDeadlineAware:
    def test_tightest_deadline_wins_gateway(self):
        topo = deadline_world(1, 3)
        app = with_tables(builtin_application("deadline_test"), topo, [4.5, 3.1, 3.9], [100, 200, 50])
        placement = deadline_aware_place(app, topo, deadline_pins(app, topo), "mainModule")
        on_gateway = [i for i in placement.of("mainModule") if i.host == topo.by_name("g-0").id]
        assert [topo.devices[i.client_scope].name for i in on_gateway] == ["e-0-1"]
        assert on_gateway[0].allocated_mips == 1700

    def test_equal_deadlines_break_on_id(self):
        topo = deadline_world(1, 3)
        app = with_tables(builtin_application("deadline_test"), topo, [4.0, 4.0, 4.0], [0, 0, 0])
        placement = deadline_aware_place(app, topo, deadline_pins(app, topo), "mainModule")
        gw = topo.by_name("g-0").id
        assert [i.client_scope for i in placement.of("mainModule") if i.host == gw] == [topo.by_name("e-0-0").id]

    def test_fallback_ignores_cloud_capacity(self):
        topo = Topology()
        topo.add_device(make_device("cloud", 0, 100))
        topo.add_device(make_device("g-0", 1, 2800), parent="cloud")
        for e in range(3):
            topo.add_device(make_device(f"e-0-{e}", 2, 3200), parent="g-0")
        app = builtin_application("deadline_test")
        with_tables(app, topo, [3.0, 3.5, 4.0], [0, 0, 0])
        placement = deadline_aware_place(app, topo, deadline_pins(app, topo), "mainModule")
        assert sum(1 for i in placement.of("mainModule") if i.host == 0) == 2
        assert placement.used(0) > topo.devices[0].mips

    def test_big_gateway_takes_several(self):
        topo = deadline_world(1, 3, gateway_mips=5000)
        app = with_tables(builtin_application("deadline_test"), topo, [3.0, 3.5, 4.0], [100, 100, 100])
        placement = deadline_aware_place(app, topo, deadline_pins(app, topo), "mainModule")
        # running totals 1600, 3200, 4800 all stay below 5000
        assert Counter(i.host for i in placement.of("mainModule")) == {1: 3}

    def test_missing_table_entry(self):
        topo = deadline_world(1, 2)
        app = with_tables(builtin_application("deadline_test"), topo, [3.0], [0])
        with pytest.raises(ValidationError, match="missing deadline"):
            deadline_aware_place(app, topo, deadline_pins(app, topo), "mainModule")

    def test_ledger_matches_instances(self):
        topo = deadline_world()
        app = with_tables(builtin_application("deadline_test"), topo, [3, 4, 5, 4.4, 3.3, 3.7], [1, 2, 3, 4, 5, 6])
        placement = deadline_aware_place(app, topo, deadline_pins(app, topo), "mainModule")
        assert placement.recomputed_ledger() == placement.used_mips


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.floats(3.0, 5.0, exclude_max=True), min_size=3, max_size=3),
    st.lists(st.integers(0, 499), min_size=3, max_size=3),
)
def test_gateway_clients_form_deadline_prefix(deadlines, extras):
    topo = deadline_world(1, 3)
    app = with_tables(builtin_application("deadline_test"), topo, deadlines, extras)
    placement = deadline_aware_place(app, topo, deadline_pins(app, topo), "mainModule")
    ordered = sorted(topo.children(1), key=lambda c: (app.deadline_info[c]["mainModule"], c))
    on_gw = [i.client_scope for i in placement.of("mainModule") if i.host == 1]
    assert on_gw == ordered[: len(on_gw)]
    assert len(on_gw) == 1


class TestEdgeWard:
    def _chain(self, mips=(500, 1200)):
        app = Application("c")
        app.add_module("A", 1, mips[0], 1, 1)
        app.add_module("B", 1, mips[1], 1, 1)
        app.add_edge("S", "A", 1, 1, "S", "UP", "SENSOR")
        app.add_edge("A", "B", 1, 1, "AB", "UP", "MODULE")
        app.add_edge("B", "A", 1, 1, "BA", "DOWN", "MODULE")
        app.add_edge("A", "Act", 1, 1, "Out", "DOWN", "ACTUATOR")
        return app

    def test_modules_climb_until_they_fit(self):
        topo = deadline_world(1, 2)
        for d in topo.devices.values():
            d.mips = {0: 10000, 1: 1500, 2: 1000}[d.level]
        placement = edge_ward_place(self._chain(), topo, PinList())
        hosts = {(i.module, topo.devices[i.host].name) for i in placement.instances}
        assert hosts == {("A", "e-0-0"), ("A", "e-0-1"), ("B", "g-0")}

    def test_shared_instance_reused_by_siblings(self):
        topo = deadline_world(1, 3)
        placement = edge_ward_place(self._chain(mips=(5000, 100)), topo, PinList())
        # A does not fit any leaf or the gateway; one cloud instance serves all leaves
        assert [topo.devices[i.host].name for i in placement.of("A")] == ["cloud"]
        assert [topo.devices[i.host].name for i in placement.of("B")] == ["cloud"]

    def test_never_placed_below_predecessor(self):
        topo = deadline_world(1, 1)
        topo.devices[2].mips = 100
        placement = edge_ward_place(self._chain(mips=(2000, 50)), topo, PinList())
        # A lands on the gateway, so B must not go back down to the leaf, which has room for it
        assert [i.host for i in placement.of("B")] == [1]

    def test_root_too_small(self):
        topo = deadline_world(1, 1)
        for d in topo.devices.values():
            d.mips = 10
        with pytest.raises(ValidationError, match="short by"):
            edge_ward_place(self._chain(), topo, PinList())

    def test_remaining_capacity_respected(self):
        topo = deadline_world(2, 3)
        placement = place("edge_ward", builtin_application("client_main"), topo, PinList())
        for dev, used in placement.used_mips.items():
            if dev != topo.root_id():
                assert used <= topo.devices[dev].mips


def test_cloud_only_puts_everything_on_root():
    topo = deadline_world()
    placement = cloud_only_place(builtin_application("sequential"), topo, PinList())
    assert {i.host for i in placement.instances} == {0}
    assert len(placement.instances) == 4


def test_unknown_policy_names_options():
    with pytest.raises(ValidationError, match="cloud_only, edge_ward, deadline_aware"):
        place("random", builtin_application("sequential"), deadline_world(), PinList())


def test_find_prefers_client_scoped():
    p = Placement()
    p.add(ModuleInstance("M", 1, None, 10))
    scoped = p.add(ModuleInstance("M", 1, 7, 10))
    assert p.find(1, "M", 7) is scoped
    assert p.find(1, "M", 8).client_scope is None
    assert p.find(2, "M", 7) is None
