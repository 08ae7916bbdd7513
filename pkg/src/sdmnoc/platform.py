"""Mesh platform model: SDM link partitioning and hardwired crosspoints.

Every directed link carries N wires split into U = N/m units of m wires each.
A router's crossbar connects any input unit to any output unit on a different
port; a hardwired pattern additionally fixes some (input unit -> output unit)
positions as cheap pass-through crosspoints. The default pattern wires the
first H = L/m units of each port straight through (W->E, E->W, N->S, S->N)
at the same unit index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

Coord = Tuple[int, int]  # (x, y), x grows east, y grows south

DIRS = ("E", "W", "N", "S")
DELTA = {"E": (1, 0), "W": (-1, 0), "N": (0, -1), "S": (0, 1)}
OPPOSITE = {"E": "W", "W": "E", "N": "S", "S": "N"}
LOCAL = "L"
# straight continuations: data moving east enters through the W port
STRAIGHT_IO = (("W", "E"), ("E", "W"), ("N", "S"), ("S", "N"))


class PlatformError(ValueError):
    """Raised for invalid mesh/SDM configurations or pattern tables."""


def manhattan_dist(a: Coord, b: Coord) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass(frozen=True)
class MeshConfig:
    rows: int
    cols: int
    link_width: int  # N, wires per directed link
    unit_width: int  # m, wires per unit
    hardwired_per_port: int  # L, wires per port fixed straight-through
    frequency_hz: int
    c_hardwired: int = 1  # routing cost per unit on a hardwired arc
    c_regular: int = 2

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise PlatformError(f"mesh {self.rows}x{self.cols} must be at least 1x1")
        if self.link_width < 1:
            raise PlatformError(f"link_width must be >= 1, got {self.link_width}")
        if not (1 <= self.unit_width <= self.link_width):
            raise PlatformError(
                f"unit_width {self.unit_width} outside 1..{self.link_width}"
            )
        if self.link_width % self.unit_width != 0:
            raise PlatformError(
                f"unit_width {self.unit_width} must divide link_width {self.link_width}"
            )
        if not (0 <= self.hardwired_per_port <= self.link_width):
            raise PlatformError(
                f"hardwired_per_port {self.hardwired_per_port} outside 0..{self.link_width}"
            )
        if self.hardwired_per_port % self.unit_width != 0:
            raise PlatformError(
                f"unit_width {self.unit_width} must divide hardwired_per_port "
                f"{self.hardwired_per_port}"
            )
        if not isinstance(self.frequency_hz, int) or self.frequency_hz < 1:
            raise PlatformError(f"frequency_hz must be a positive integer, got {self.frequency_hz!r}")
        if not (0 < self.c_hardwired < self.c_regular):
            raise PlatformError(
                f"need 0 < c_hardwired < c_regular, got {self.c_hardwired}, {self.c_regular}"
            )

    @property
    def units(self) -> int:
        return self.link_width // self.unit_width

    @property
    def hardwired_units(self) -> int:
        return self.hardwired_per_port // self.unit_width

    @property
    def n_nodes(self) -> int:
        return self.rows * self.cols

    def unit_bandwidth_bps(self) -> int:
        # one unit moves m bits per cycle
        return self.unit_width * self.frequency_hz

    def to_json_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "link_width": self.link_width,
            "unit_width": self.unit_width,
            "hardwired_per_port": self.hardwired_per_port,
            "frequency_hz": self.frequency_hz,
            "c_hardwired": self.c_hardwired,
            "c_regular": self.c_regular,
        }


@dataclass(frozen=True)
class Link:
    id: int
    src: int  # node index
    dst: int
    direction: str  # direction of travel, one of DIRS


class HardwiredPattern:
    """Fixed (input port, input unit) -> (output port, output unit) positions per router.

    Injective per router output: each output unit has at most one hardwired source.
    The local port is never hardwired; injection and ejection stay configurable.
    """

    def __init__(self, cfg: MeshConfig, entries: List[Tuple[int, str, int, str, int]]):
        # entry = (node, in_port, in_unit, out_port, out_unit)
        self.cfg = cfg
        self.by_out: Dict[Tuple[int, str, int], Tuple[str, int]] = {}
        self.by_io: Dict[Tuple[int, str, str], List[Tuple[int, int]]] = {}
        self.per_node: Dict[int, int] = {}
        for node, in_p, in_u, out_p, out_u in entries:
            if in_p == out_p:
                raise PlatformError(f"pattern at node {node}: port {in_p} connects to itself")
            if LOCAL in (in_p, out_p):
                raise PlatformError(f"pattern at node {node}: local port cannot be hardwired")
            for port, unit in ((in_p, in_u), (out_p, out_u)):
                if port not in DIRS:
                    raise PlatformError(f"pattern at node {node}: unknown port {port!r}")
                if not (0 <= unit < cfg.units):
                    raise PlatformError(
                        f"pattern at node {node}: unit {unit} outside 0..{cfg.units - 1}"
                    )
                if not _port_exists(cfg, node, port):
                    raise PlatformError(f"pattern at node {node}: port {port} absent on this router")
            key = (node, out_p, out_u)
            if key in self.by_out:
                raise PlatformError(
                    f"pattern at node {node}: output ({out_p}, {out_u}) has two sources"
                )
            self.by_out[key] = (in_p, in_u)
            self.by_io.setdefault((node, in_p, out_p), []).append((in_u, out_u))
            self.per_node[node] = self.per_node.get(node, 0) + 1
        for lst in self.by_io.values():
            lst.sort()

    @classmethod
    def straight(cls, cfg: MeshConfig) -> "HardwiredPattern":
        h = cfg.hardwired_units
        entries = []
        for node in range(cfg.n_nodes):
            for in_p, out_p in STRAIGHT_IO:
                if _port_exists(cfg, node, in_p) and _port_exists(cfg, node, out_p):
                    for k in range(h):
                        entries.append((node, in_p, k, out_p, k))
        return cls(cfg, entries)

    def source_of(self, node: int, out_port: str, out_unit: int) -> Optional[Tuple[str, int]]:
        return self.by_out.get((node, out_port, out_unit))

    def io_entries(self, node: int, in_port: str, out_port: str) -> List[Tuple[int, int]]:
        return self.by_io.get((node, in_port, out_port), [])

    def n_entries(self, node: int) -> int:
        return self.per_node.get(node, 0)

    def is_hardwired(self, node: int, in_port: str, in_unit: int, out_port: str, out_unit: int) -> bool:
        return self.by_out.get((node, out_port, out_unit)) == (in_port, in_unit)


def _port_exists(cfg: MeshConfig, node: int, port: str) -> bool:
    x, y = node % cfg.cols, node // cfg.cols
    dx, dy = DELTA[port]
    return 0 <= x + dx < cfg.cols and 0 <= y + dy < cfg.rows


class Platform:
    """A built mesh: nodes, directed links, pattern, and a unit-occupancy ledger."""

    def __init__(self, cfg: MeshConfig, pattern: Optional[HardwiredPattern] = None):
        self.cfg = cfg
        self.pattern = pattern if pattern is not None else HardwiredPattern.straight(cfg)
        self.links: List[Link] = []
        self.link_of: Dict[Tuple[int, str], Link] = {}  # (src node, direction) -> link
        for node in range(cfg.n_nodes):
            for d in DIRS:
                if _port_exists(cfg, node, d):
                    dx, dy = DELTA[d]
                    x, y = node % cfg.cols, node // cfg.cols
                    dst = (y + dy) * cfg.cols + (x + dx)
                    link = Link(id=len(self.links), src=node, dst=dst, direction=d)
                    self.links.append(link)
                    self.link_of[(node, d)] = link
        # occupancy ledger: per link, unit index -> owning flow id
        self.taken: List[Dict[int, int]] = [dict() for _ in self.links]
        # per link, units charged against the hardwired / regular arc pools
        self.hw_used: List[int] = [0] * len(self.links)
        self.reg_used: List[int] = [0] * len(self.links)

    def node_index(self, coord: Coord) -> int:
        x, y = coord
        if not (0 <= x < self.cfg.cols and 0 <= y < self.cfg.rows):
            raise PlatformError(f"coordinate {coord} outside {self.cfg.cols}x{self.cfg.rows} mesh")
        return y * self.cfg.cols + x

    def node_coord(self, idx: int) -> Coord:
        return (idx % self.cfg.cols, idx // self.cfg.cols)

    def router_ports(self, node: int) -> List[str]:
        ports = [d for d in DIRS if _port_exists(self.cfg, node, d)]
        ports.append(LOCAL)
        return ports

    def free_units(self, link_id: int) -> int:
        return self.cfg.units - len(self.taken[link_id])

    def reset_ledger(self) -> None:
        for d in self.taken:
            d.clear()
        self.hw_used = [0] * len(self.links)
        self.reg_used = [0] * len(self.links)


def build_mesh(cfg: MeshConfig, pattern: Optional[HardwiredPattern] = None) -> Platform:
    return Platform(cfg, pattern)


def parse_platform(text: str) -> Platform:
    """Parse a platform config from JSON text and build the mesh.

    Schema: {"rows", "cols", "link_width", "unit_width", "hardwired_per_port",
    "frequency_hz", "c_hardwired"?, "c_regular"?, "hardwired_pattern"?:
    "straight" | [{"node": [x, y], "in_port", "in_unit", "out_port", "out_unit"}...]}
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise PlatformError(f"JSON syntax error at position {e.pos}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise PlatformError("top level must be a JSON object")
    required = {"rows", "cols", "link_width", "unit_width", "hardwired_per_port", "frequency_hz"}
    missing = required - set(doc)
    if missing:
        raise PlatformError(f"missing required keys: {sorted(missing)}")
    allowed = required | {"c_hardwired", "c_regular", "hardwired_pattern"}
    unknown = set(doc) - allowed
    if unknown:
        raise PlatformError(f"unknown keys: {sorted(unknown)}")
    kwargs = {k: doc[k] for k in required}
    for opt in ("c_hardwired", "c_regular"):
        if opt in doc:
            kwargs[opt] = doc[opt]
    for k, v in kwargs.items():
        if not isinstance(v, int) or isinstance(v, bool):
            raise PlatformError(f"{k} must be an integer, got {v!r}")
    cfg = MeshConfig(**kwargs)
    spec = doc.get("hardwired_pattern", "straight")
    if spec == "straight":
        pattern = HardwiredPattern.straight(cfg)
    elif isinstance(spec, list):
        entries = []
        for i, e in enumerate(spec):
            if not isinstance(e, dict) or set(e) != {"node", "in_port", "in_unit", "out_port", "out_unit"}:
                raise PlatformError(f"pattern entry {i}: expected node/in_port/in_unit/out_port/out_unit")
            node = e["node"]
            if (not isinstance(node, list) or len(node) != 2
                    or not all(isinstance(c, int) and not isinstance(c, bool) for c in node)):
                raise PlatformError(f"pattern entry {i}: node must be [x, y]")
            x, y = node
            if not (0 <= x < cfg.cols and 0 <= y < cfg.rows):
                raise PlatformError(f"pattern entry {i}: node {node} outside mesh")
            entries.append((y * cfg.cols + x, e["in_port"], e["in_unit"], e["out_port"], e["out_unit"]))
        pattern = HardwiredPattern(cfg, entries)
    else:
        raise PlatformError(f"hardwired_pattern must be 'straight' or a table, got {spec!r}")
    return Platform(cfg, pattern)


def load_platform(path: str) -> Platform:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_platform(fh.read())
