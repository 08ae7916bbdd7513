"""Configurable power and area model applied to simulation event counts.

Dynamic power is activity-based: each simulator reports event counts, each
event class carries an energy coefficient, and power is energy * f / cycles.
Leakage and area are structural: they depend on how many storage bits,
crosspoints, arbiters and route units the router design instantiates, not on
traffic. All coefficients live in one JSON-serializable model so a report can
be tied to the exact numbers that produced it via a short hash.

Unit conventions: energy coefficients are per event in arbitrary energy units
(think pJ); leakage coefficients are per structure in energy units per second,
so dynamic and leakage totals add directly; area units are arbitrary.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from typing import Dict, Optional

from .platform import MeshConfig, Platform
from .sim import FIFO_DEPTH, SimResult


class CostModelError(ValueError):
    pass


_ENERGY_KEYS = (
    "buffer_write",
    "buffer_read",
    "crosspoint_configurable",
    "crosspoint_hardwired",
    "link_per_bit_per_hop",
    "arbiter_decision",
    "route_compute",
)
_STRUCT_KEYS = (
    "storage_per_bit",
    "crosspoint_configurable",
    "crosspoint_hardwired",
    "arbiter",
    "route_compute",
)

DEFAULT_ENERGY = {
    "buffer_write": 1.0,
    "buffer_read": 1.0,
    "crosspoint_configurable": 0.30,
    "crosspoint_hardwired": 0.10,
    "link_per_bit_per_hop": 0.05,
    "arbiter_decision": 0.20,
    "route_compute": 0.20,
}
DEFAULT_LEAKAGE = {
    "storage_per_bit": 2000.0,
    "crosspoint_configurable": 130.0,
    "crosspoint_hardwired": 40.0,
    "arbiter": 10000.0,
    "route_compute": 10000.0,
}
DEFAULT_AREA = {
    "storage_per_bit": 2.0,
    "crosspoint_configurable": 0.1,
    "crosspoint_hardwired": 0.02,
    "arbiter": 20.0,
    "route_compute": 20.0,
}


@dataclass(frozen=True)
class CostModel:
    energy: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_ENERGY))
    leakage: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_LEAKAGE))
    area: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_AREA))

    def __post_init__(self):
        for name, keys, d in (
            ("energy", _ENERGY_KEYS, self.energy),
            ("leakage", _STRUCT_KEYS, self.leakage),
            ("area", _STRUCT_KEYS, self.area),
        ):
            missing = [k for k in keys if k not in d]
            extra = [k for k in d if k not in keys]
            if missing:
                raise CostModelError(f"{name} section missing keys: {missing}")
            if extra:
                raise CostModelError(f"{name} section has unknown keys: {extra}")
            for k, v in d.items():
                if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
                    raise CostModelError(f"{name}.{k} must be a positive number, got {v!r}")
            if d["crosspoint_hardwired"] >= d["crosspoint_configurable"]:
                raise CostModelError(
                    f"{name}: a hardwired crosspoint must be cheaper than a "
                    f"configurable one"
                )
        for name in ("leakage", "area"):
            d = getattr(self, name)
            if d["storage_per_bit"] <= d["crosspoint_configurable"]:
                raise CostModelError(
                    f"{name}: storage_per_bit must exceed crosspoint_configurable; "
                    f"buffered routers are storage-dominated"
                )

    def to_json_dict(self) -> dict:
        return {
            "energy": {k: self.energy[k] for k in _ENERGY_KEYS},
            "leakage": {k: self.leakage[k] for k in _STRUCT_KEYS},
            "area": {k: self.area[k] for k in _STRUCT_KEYS},
        }

    def coefficient_hash(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    @classmethod
    def from_json_dict(cls, d: dict) -> "CostModel":
        if not isinstance(d, dict):
            raise CostModelError("cost model must be a JSON object")
        unknown = [k for k in d if k not in ("energy", "leakage", "area")]
        if unknown:
            raise CostModelError(f"unknown cost model sections: {unknown}")
        merged = {
            "energy": dict(DEFAULT_ENERGY),
            "leakage": dict(DEFAULT_LEAKAGE),
            "area": dict(DEFAULT_AREA),
        }
        for sec in ("energy", "leakage", "area"):
            if sec in d:
                if not isinstance(d[sec], dict):
                    raise CostModelError(f"{sec} section must be an object")
                merged[sec].update(d[sec])
        return cls(**merged)


def load_cost_model(path: str) -> CostModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise CostModelError(f"JSON syntax error at position {e.pos}") from e
    return CostModel.from_json_dict(d)


# ---------------------------------------------------------------------------
# structural summaries

@dataclass(frozen=True)
class Structure:
    """What one network instantiates, in cost-model structural units."""

    storage_bits: int
    crosspoint_configurable: int
    crosspoint_hardwired: int
    arbiters: int
    route_units: int

    def to_json_dict(self) -> dict:
        return asdict(self)


def sdm_structure(platform: Platform) -> Structure:
    """Circuit-switched router: per-unit crossbar plus pipeline registers.

    Every output unit is either one hardwired connection or a configurable
    mux over all other ports' input units; configurable outputs also need
    select bits. One link-width register per input port. No arbiters and no
    route logic: paths are set up ahead of time.
    """
    cfg = platform.cfg
    u = cfg.units
    reg_bits = 0
    config_bits = 0
    xpt_cfg = 0
    xpt_hw = 0
    for node in range(cfg.n_nodes):
        ports = platform.router_ports(node)
        p = len(ports)
        hw_here = platform.pattern.per_node.get(node, 0)
        outputs = p * u
        cfg_outputs = outputs - hw_here
        xpt_cfg += cfg_outputs * (p - 1) * u
        xpt_hw += hw_here
        config_bits += cfg_outputs * max(1, math.ceil(math.log2((p - 1) * u)))
        reg_bits += p * cfg.link_width
    return Structure(
        storage_bits=reg_bits + config_bits,
        crosspoint_configurable=xpt_cfg,
        crosspoint_hardwired=xpt_hw,
        arbiters=0,
        route_units=0,
    )


def wormhole_structure(cfg: MeshConfig) -> Structure:
    """Packet-switched router: FIFO per input port, port-level crossbar,
    one allocator per output, one route unit per router."""
    buffer_bits = 0
    xbar_units = 0
    arbiters = 0
    unit_equiv = cfg.link_width // cfg.unit_width
    for node in range(cfg.n_nodes):
        x, y = node % cfg.cols, node // cfg.cols
        p = 1  # local
        p += 1 if x + 1 < cfg.cols else 0
        p += 1 if x > 0 else 0
        p += 1 if y > 0 else 0
        p += 1 if y + 1 < cfg.rows else 0
        buffer_bits += p * FIFO_DEPTH * cfg.link_width
        xbar_units += p * (p - 1) * unit_equiv
        arbiters += p
    return Structure(
        storage_bits=buffer_bits,
        crosspoint_configurable=xbar_units,
        crosspoint_hardwired=0,
        arbiters=arbiters,
        route_units=cfg.n_nodes,
    )


# ---------------------------------------------------------------------------
# power and area estimation

# event class -> (energy key, scale expression)
_EVENT_ENERGY = {
    "buffer_write": "buffer_write",
    "buffer_read": "buffer_read",
    "register_write": "buffer_write",  # scaled by m/N below
    "register_read": "buffer_read",
    "crosspoint_configurable": "crosspoint_configurable",
    "crosspoint_hardwired": "crosspoint_hardwired",
    "crossbar_unit": "crosspoint_configurable",
    "link_bit_hops": "link_per_bit_per_hop",
    "arbiter_decision": "arbiter_decision",
    "route_compute": "route_compute",
}
_UNIT_SCALED = ("register_write", "register_read")


@dataclass(frozen=True)
class PowerReport:
    kind: str
    dynamic: float
    leakage: float
    dynamic_by_component: Dict[str, float]
    coefficient_hash: str

    @property
    def total(self) -> float:
        return self.dynamic + self.leakage

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dynamic": self.dynamic,
            "leakage": self.leakage,
            "total": self.total,
            "dynamic_by_component": {
                k: self.dynamic_by_component[k] for k in sorted(self.dynamic_by_component)
            },
            "coefficient_hash": self.coefficient_hash,
        }


def estimate_power(
    result: SimResult,
    model: CostModel,
    structure: Structure,
    cfg: MeshConfig,
) -> PowerReport:
    """Total power for the traffic captured in result on the given structure.

    SDM pipeline register events are per unit-hop, so their energy is a
    buffer access scaled to m/N of a link width.
    """
    unit_scale = cfg.unit_width / cfg.link_width
    f = result.frequency_hz
    by_comp: Dict[str, float] = {}
    dyn_energy = 0.0
    for ev, count in result.events.items():
        key = _EVENT_ENERGY.get(ev)
        if key is None:
            raise CostModelError(f"no energy coefficient for event class {ev!r}")
        e = model.energy[key] * count
        if ev in _UNIT_SCALED:
            e *= unit_scale
        by_comp[ev] = e * f / result.cycles
        dyn_energy += e
    leak = model.leakage
    leakage = (
        structure.storage_bits * leak["storage_per_bit"]
        + structure.crosspoint_configurable * leak["crosspoint_configurable"]
        + structure.crosspoint_hardwired * leak["crosspoint_hardwired"]
        + structure.arbiters * leak["arbiter"]
        + structure.route_units * leak["route_compute"]
    )
    return PowerReport(
        kind=result.kind,
        dynamic=dyn_energy * f / result.cycles,
        leakage=leakage,
        dynamic_by_component=by_comp,
        coefficient_hash=model.coefficient_hash(),
    )


def estimate_area(model: CostModel, structure: Structure) -> float:
    a = model.area
    return (
        structure.storage_bits * a["storage_per_bit"]
        + structure.crosspoint_configurable * a["crosspoint_configurable"]
        + structure.crosspoint_hardwired * a["crosspoint_hardwired"]
        + structure.arbiters * a["arbiter"]
        + structure.route_units * a["route_compute"]
    )


def compare_networks(
    sdm_sim: SimResult,
    worm_sim: SimResult,
    sdm_power: PowerReport,
    worm_power: PowerReport,
    sdm_area: float,
    worm_area: float,
) -> dict:
    """Headline comparison: positive savings mean the SDM network is better."""
    sdm_lat = sdm_sim.mean_latency()
    worm_lat = worm_sim.mean_latency()
    lat_saving = None
    if sdm_lat is not None and worm_lat is not None and worm_lat > 0:
        lat_saving = 1.0 - sdm_lat / worm_lat
    return {
        "latency": {
            "sdm_mean_cycles": sdm_lat,
            "wormhole_mean_cycles": worm_lat,
            "saving": lat_saving,
        },
        "power": {
            "sdm_total": sdm_power.total,
            "wormhole_total": worm_power.total,
            "saving": 1.0 - sdm_power.total / worm_power.total,
            "sdm_dynamic": sdm_power.dynamic,
            "wormhole_dynamic": worm_power.dynamic,
            "coefficient_hash": sdm_power.coefficient_hash,
        },
        "area": {
            "sdm": sdm_area,
            "wormhole": worm_area,
            "saving": 1.0 - sdm_area / worm_area,
        },
        "delivery": {
            "sdm_delivered": sdm_sim.delivered,
            "wormhole_delivered": worm_sim.delivered,
            "offered": sdm_sim.offered,
            "wormhole_saturated": worm_sim.saturated,
        },
    }
