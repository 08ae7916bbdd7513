"""Communication task graphs: parsing, validation, synthesis.

A task graph is a directed graph over task ids 0..tasks-1. Each edge is a flow
with a positive integer bandwidth demand in bits per second. At most one flow
per ordered (src, dst) pair, no self-loops.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import List, Optional, Tuple


class CtgError(ValueError):
    """Raised for malformed task graph files or inconsistent graphs."""


@dataclass(frozen=True)
class Flow:
    id: int
    src: int
    dst: int
    demand_bps: int  # positive integer, bits per second


@dataclass(frozen=True)
class TaskGraph:
    n_tasks: int
    flows: Tuple[Flow, ...]
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        problems = validate_ctg(self)
        if problems:
            raise CtgError("; ".join(problems))

    def total_demand_bps(self) -> int:
        return sum(f.demand_bps for f in self.flows)


def validate_ctg(g: TaskGraph) -> List[str]:
    """Return a list of invariant violations (empty when the graph is well formed)."""
    out: List[str] = []
    if not isinstance(g.n_tasks, int) or isinstance(g.n_tasks, bool) or g.n_tasks < 1:
        out.append(f"tasks must be a positive integer, got {g.n_tasks!r}")
        return out
    seen_pairs = set()
    for pos, f in enumerate(g.flows):
        if f.id != pos:
            out.append(f"flow at position {pos} has id {f.id}, ids must equal position")
        for end, label in ((f.src, "src"), (f.dst, "dst")):
            if not isinstance(end, int) or isinstance(end, bool) or not (0 <= end < g.n_tasks):
                out.append(f"flow {pos}: {label}={end!r} outside 0..{g.n_tasks - 1}")
        if f.src == f.dst:
            out.append(f"flow {pos}: self-loop on task {f.src}")
        # demands are bit-exact integers; floats are rejected even when integral
        if not isinstance(f.demand_bps, int) or isinstance(f.demand_bps, bool) or f.demand_bps <= 0:
            out.append(f"flow {pos}: demand_bps must be a positive integer, got {f.demand_bps!r}")
        pair = (f.src, f.dst)
        if pair in seen_pairs:
            out.append(f"flow {pos}: duplicate flow for pair {pair}")
        seen_pairs.add(pair)
    return out


def parse_ctg(text: str) -> TaskGraph:
    """Parse a task graph from JSON text.

    Schema: {"tasks": int, "flows": [{"src", "dst", "demand_bps"}...], "name"?: str}
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CtgError(f"JSON syntax error at position {e.pos}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise CtgError("top level must be a JSON object")
    for key in ("tasks", "flows"):
        if key not in doc:
            raise CtgError(f"missing required key {key!r}")
    unknown = set(doc) - {"tasks", "flows", "name"}
    if unknown:
        raise CtgError(f"unknown keys: {sorted(unknown)}")
    n_tasks = doc["tasks"]
    if not isinstance(n_tasks, int) or isinstance(n_tasks, bool) or n_tasks < 1:
        raise CtgError(f"tasks must be a positive integer, got {n_tasks!r}")
    raw_flows = doc["flows"]
    if not isinstance(raw_flows, list):
        raise CtgError("flows must be a list")
    flows = []
    for i, rf in enumerate(raw_flows):
        if not isinstance(rf, dict):
            raise CtgError(f"flow {i}: must be an object")
        missing = {"src", "dst", "demand_bps"} - set(rf)
        if missing:
            raise CtgError(f"flow {i}: missing {sorted(missing)}")
        extra = set(rf) - {"src", "dst", "demand_bps"}
        if extra:
            raise CtgError(f"flow {i}: unknown keys {sorted(extra)}")
        flows.append(Flow(id=i, src=rf["src"], dst=rf["dst"], demand_bps=rf["demand_bps"]))
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise CtgError(f"name must be a string, got {name!r}")
    return TaskGraph(n_tasks=n_tasks, flows=tuple(flows), name=name)


def render_ctg(g: TaskGraph) -> str:
    """Serialize to the JSON format accepted by parse_ctg. Round-trips exactly."""
    doc = {}
    if g.name is not None:
        doc["name"] = g.name
    doc["tasks"] = g.n_tasks
    doc["flows"] = [
        {"src": f.src, "dst": f.dst, "demand_bps": f.demand_bps} for f in g.flows
    ]
    return json.dumps(doc, indent=2) + "\n"


def load_ctg(path: str) -> TaskGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ctg(fh.read())


def generate_synthetic_ctg(
    n_tasks: int,
    n_flows: int,
    demand_lo: int,
    demand_hi: int,
    seed: int,
    name: Optional[str] = None,
) -> TaskGraph:
    """Generate a seeded random task graph.

    A random spanning arborescence is laid down first so the graph is weakly
    connected whenever n_flows >= n_tasks - 1; remaining flows are drawn
    uniformly from the unused ordered pairs. Demands are uniform integers in
    [demand_lo, demand_hi]. Same arguments, same graph.
    """
    if n_tasks < 1:
        raise CtgError(f"n_tasks must be >= 1, got {n_tasks}")
    if not (0 <= n_flows <= n_tasks * (n_tasks - 1)):
        raise CtgError(f"n_flows={n_flows} outside 0..{n_tasks * (n_tasks - 1)}")
    if not (1 <= demand_lo <= demand_hi):
        raise CtgError(f"demand range [{demand_lo}, {demand_hi}] invalid")
    rng = random.Random(seed)
    order = list(range(n_tasks))
    rng.shuffle(order)
    tree_edges = []
    for i in range(1, n_tasks):
        parent = order[rng.randrange(i)]
        tree_edges.append((parent, order[i]))
    edges = tree_edges[:n_flows]
    if n_flows > len(tree_edges):
        used = set(edges)
        pool = [
            (s, d)
            for s in range(n_tasks)
            for d in range(n_tasks)
            if s != d and (s, d) not in used
        ]
        edges = edges + rng.sample(pool, n_flows - len(tree_edges))
    flows = tuple(
        Flow(id=i, src=s, dst=d, demand_bps=rng.randint(demand_lo, demand_hi))
        for i, (s, d) in enumerate(edges)
    )
    if name is None:
        name = f"synthetic-{n_tasks}t-{n_flows}f-s{seed}"
    return TaskGraph(n_tasks=n_tasks, flows=flows, name=name)
