"""Cost model validation, structural summaries, power and area estimates."""
import json
import math

import pytest

from sdmnoc.metrics import (
    DEFAULT_AREA,
    DEFAULT_ENERGY,
    DEFAULT_LEAKAGE,
    CostModel,
    CostModelError,
    Structure,
    compare_networks,
    estimate_area,
    estimate_power,
    load_cost_model,
    sdm_structure,
    wormhole_structure,
)
from sdmnoc.platform import MeshConfig, build_mesh
from sdmnoc.sim import FIFO_DEPTH, FlowStats, SimResult


def mesh(rows=1, cols=2, m=4, units=8, h_units=0, f=1_000_000):
    return MeshConfig(rows=rows, cols=cols, link_width=m * units, unit_width=m,
                      hardwired_per_port=m * h_units, frequency_hz=f)


# ---------------------------------------------------------------- cost model

def test_default_model_valid_and_hash_stable():
    a = CostModel()
    b = CostModel()
    h = a.coefficient_hash()
    assert h == b.coefficient_hash()
    assert len(h) == 12 and int(h, 16) >= 0


def test_hash_tracks_coefficients():
    base = CostModel()
    e = dict(DEFAULT_ENERGY)
    e["buffer_write"] = 1.5
    assert CostModel(energy=e).coefficient_hash() != base.coefficient_hash()


def test_round_trip_through_json():
    m = CostModel()
    again = CostModel.from_json_dict(json.loads(json.dumps(m.to_json_dict())))
    assert again == m
    assert again.coefficient_hash() == m.coefficient_hash()


def test_partial_override_merges_defaults():
    m = CostModel.from_json_dict({"energy": {"link_per_bit_per_hop": 0.07}})
    assert m.energy["link_per_bit_per_hop"] == 0.07
    assert m.energy["buffer_write"] == DEFAULT_ENERGY["buffer_write"]
    assert m.leakage == DEFAULT_LEAKAGE and m.area == DEFAULT_AREA


@pytest.mark.parametrize("bad", [
    {"voltage": {}},                                        # unknown section
    {"energy": 3},                                          # not an object
    {"energy": {"made_up": 1.0}},                           # unknown key
    {"energy": {"buffer_write": 0}},                        # non-positive
    {"energy": {"buffer_write": True}},                     # bool
    {"energy": {"crosspoint_hardwired": 0.5}},              # >= configurable
    {"leakage": {"storage_per_bit": 1.0,
                 "crosspoint_configurable": 2.0,
                 "crosspoint_hardwired": 1.0}},             # storage not dominant
])
def test_model_rejects(bad):
    with pytest.raises(CostModelError):
        CostModel.from_json_dict(bad)


def test_model_rejects_missing_key_direct():
    e = dict(DEFAULT_ENERGY)
    del e["route_compute"]
    with pytest.raises(CostModelError):
        CostModel(energy=e)


def test_load_cost_model(tmp_path):
    p = tmp_path / "model.json"
    p.write_text(json.dumps({"area": {"arbiter": 25.0}}), encoding="utf-8")
    m = load_cost_model(str(p))
    assert m.area["arbiter"] == 25.0
    p.write_text("{broken", encoding="utf-8")
    with pytest.raises(CostModelError):
        load_cost_model(str(p))


# ---------------------------------------------------------------- structures

def test_sdm_structure_two_node_line_by_hand():
    # two routers, two ports each (one mesh dir + local), u = 8, no straight
    # pairs exist on a 1x2 line so the pattern is empty
    p = build_mesh(mesh(rows=1, cols=2, m=4, units=8, h_units=2))
    s = sdm_structure(p)
    outputs = 2 * 8
    assert s.crosspoint_hardwired == 0
    assert s.crosspoint_configurable == 2 * outputs * (2 - 1) * 8
    select_bits = outputs * math.ceil(math.log2((2 - 1) * 8))
    reg_bits = 2 * 32
    assert s.storage_bits == 2 * (reg_bits + select_bits)
    assert s.arbiters == 0 and s.route_units == 0


def test_sdm_structure_counts_hardwired_positions():
    # middle router of a 1x3 line carries W->E and E->W chains
    h = 2
    p = build_mesh(mesh(rows=1, cols=3, m=4, units=8, h_units=h))
    s = sdm_structure(p)
    assert s.crosspoint_hardwired == 2 * h
    p0 = build_mesh(mesh(rows=1, cols=3, m=4, units=8, h_units=0))
    s0 = sdm_structure(p0)
    assert s0.crosspoint_hardwired == 0
    # hardwiring replaces configurable outputs one for one
    assert s0.crosspoint_configurable - s.crosspoint_configurable == 2 * h * 2 * 8
    assert s0.storage_bits > s.storage_bits  # fewer select bits when hardwired


def test_wormhole_structure_two_node_line_by_hand():
    cfg = mesh(rows=1, cols=2, m=4, units=8)
    s = wormhole_structure(cfg)
    assert s.storage_bits == 2 * 2 * FIFO_DEPTH * 32
    assert s.crosspoint_configurable == 2 * 2 * 1 * 8
    assert s.crosspoint_hardwired == 0
    assert s.arbiters == 4
    assert s.route_units == 2


def test_structure_json_shape():
    s = wormhole_structure(mesh())
    d = s.to_json_dict()
    assert set(d) == {"storage_bits", "crosspoint_configurable",
                      "crosspoint_hardwired", "arbiters", "route_units"}


# ---------------------------------------------------------------- power

def fake_result(kind, events, cycles=1000, f=1_000_000):
    return SimResult(kind=kind, cycles=cycles, frequency_hz=f, packet_bits=1024,
                     flow_stats={0: FlowStats(offered=1, delivered=1,
                                              latency_sum=5, latency_max=5)},
                     events=events)


def test_power_arithmetic_wormhole_events():
    model = CostModel()
    cfg = mesh()
    st = Structure(storage_bits=10, crosspoint_configurable=4,
                   crosspoint_hardwired=2, arbiters=3, route_units=1)
    res = fake_result("wormhole", {"buffer_write": 100, "arbiter_decision": 50,
                                   "link_bit_hops": 2000})
    rep = estimate_power(res, model, st, cfg)
    scale = res.frequency_hz / res.cycles
    expect_dyn = (100 * 1.0 + 50 * 0.20 + 2000 * 0.05) * scale
    assert rep.dynamic == pytest.approx(expect_dyn)
    leak = model.leakage
    expect_leak = (10 * leak["storage_per_bit"] + 4 * leak["crosspoint_configurable"]
                   + 2 * leak["crosspoint_hardwired"] + 3 * leak["arbiter"]
                   + 1 * leak["route_compute"])
    assert rep.leakage == pytest.approx(expect_leak)
    assert rep.total == pytest.approx(expect_dyn + expect_leak)
    assert rep.coefficient_hash == model.coefficient_hash()


def test_power_scales_register_events_by_unit_width():
    model = CostModel()
    cfg = mesh(m=4, units=8)  # m/N = 1/8
    st = Structure(storage_bits=1, crosspoint_configurable=2,
                   crosspoint_hardwired=1, arbiters=1, route_units=1)
    res = fake_result("sdm", {"register_write": 800})
    rep = estimate_power(res, model, st, cfg)
    scale = res.frequency_hz / res.cycles
    assert rep.dynamic == pytest.approx(800 * 1.0 * (4 / 32) * scale)
    assert rep.dynamic_by_component["register_write"] == pytest.approx(rep.dynamic)


def test_power_rejects_unknown_event_class():
    res = fake_result("sdm", {"mystery": 1})
    st = Structure(1, 2, 1, 1, 1)
    with pytest.raises(CostModelError):
        estimate_power(res, CostModel(), st, mesh())


def test_power_json_shape():
    res = fake_result("sdm", {"link_bit_hops": 10})
    rep = estimate_power(res, CostModel(), Structure(1, 2, 1, 1, 1), mesh())
    d = rep.to_json_dict()
    assert d["total"] == pytest.approx(d["dynamic"] + d["leakage"])
    assert "link_bit_hops" in d["dynamic_by_component"]


# ---------------------------------------------------------------- area

def test_area_dot_product():
    model = CostModel()
    st = Structure(storage_bits=100, crosspoint_configurable=10,
                   crosspoint_hardwired=5, arbiters=2, route_units=1)
    a = model.area
    expect = (100 * a["storage_per_bit"] + 10 * a["crosspoint_configurable"]
              + 5 * a["crosspoint_hardwired"] + 2 * a["arbiter"]
              + 1 * a["route_compute"])
    assert estimate_area(model, st) == pytest.approx(expect)


def test_sdm_area_below_wormhole_on_like_mesh():
    cfg = mesh(rows=4, cols=4, m=4, units=8, h_units=4)
    model = CostModel()
    sdm = estimate_area(model, sdm_structure(build_mesh(cfg)))
    worm = estimate_area(model, wormhole_structure(cfg))
    assert sdm < worm


# ---------------------------------------------------------------- comparison

def test_compare_networks_shape_and_signs():
    model = CostModel()
    cfg = mesh()
    st = Structure(10, 4, 2, 3, 1)
    sdm_res = fake_result("sdm", {"register_write": 10})
    worm_res = fake_result("wormhole", {"buffer_write": 1000, "route_compute": 100})
    sdm_p = estimate_power(sdm_res, model, Structure(5, 4, 2, 1, 1), cfg)
    worm_p = estimate_power(worm_res, model, st, cfg)
    doc = compare_networks(sdm_res, worm_res, sdm_p, worm_p, 50.0, 100.0)
    assert set(doc) == {"latency", "power", "area", "delivery"}
    assert doc["area"]["saving"] == pytest.approx(0.5)
    assert doc["latency"]["saving"] == pytest.approx(0.0)  # equal fake latencies
    assert doc["power"]["coefficient_hash"] == model.coefficient_hash()
    assert doc["delivery"]["offered"] == 1


def test_compare_networks_handles_no_deliveries():
    model = CostModel()
    cfg = mesh()
    empty = SimResult(kind="sdm", cycles=10, frequency_hz=1000, packet_bits=8,
                      flow_stats={}, events={"link_bit_hops": 0})
    p = estimate_power(empty, model, Structure(1, 2, 1, 1, 1), cfg)
    doc = compare_networks(empty, empty, p, p, 1.0, 2.0)
    assert doc["latency"]["saving"] is None
    assert doc["delivery"]["sdm_delivered"] == 0
