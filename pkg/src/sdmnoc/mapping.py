"""Task-to-node mapping on the mesh.

Objective: minimize sum over flows of demand x manhattan distance between the
mapped endpoints. The heuristic mapper is constructive (heaviest task at a
center node, then greedy insertion by attraction to already-placed tasks)
followed by steepest-descent improvement over pairwise swaps and moves to
empty nodes. An exhaustive mapper provides ground truth on tiny instances.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .ctg import TaskGraph
from .platform import Coord, MeshConfig, manhattan_dist


class MappingError(ValueError):
    """Raised when a mapping is invalid or an instance exceeds solver guards."""


@dataclass(frozen=True)
class Mapping:
    rows: int
    cols: int
    placement: Tuple[Coord, ...]  # placement[task_id] = (x, y)

    def __post_init__(self):
        seen = set()
        for t, (x, y) in enumerate(self.placement):
            if not (0 <= x < self.cols and 0 <= y < self.rows):
                raise MappingError(f"task {t} at {(x, y)} outside {self.cols}x{self.rows} mesh")
            if (x, y) in seen:
                raise MappingError(f"node {(x, y)} assigned to two tasks")
            seen.add((x, y))

    def node_of(self, task: int) -> Coord:
        return self.placement[task]

    def to_json_dict(self) -> dict:
        return {
            "mesh": {"rows": self.rows, "cols": self.cols},
            "placement": [
                {"task": t, "node": [x, y]} for t, (x, y) in enumerate(self.placement)
            ],
        }


def mapping_cost(g: TaskGraph, m: Mapping) -> int:
    """Total demand-weighted hop distance, in bit-hops per second."""
    return sum(
        f.demand_bps * manhattan_dist(m.placement[f.src], m.placement[f.dst])
        for f in g.flows
    )


def _check_fits(g: TaskGraph, cfg: MeshConfig) -> None:
    if g.n_tasks > cfg.n_nodes:
        raise MappingError(
            f"{g.n_tasks} tasks do not fit on a {cfg.rows}x{cfg.cols} mesh "
            f"({cfg.n_nodes} nodes)"
        )


def _pick(rng: random.Random, tied: List) -> object:
    # tied is already sorted by index; the seed only decides among exact ties
    if len(tied) == 1:
        return tied[0]
    return tied[rng.randrange(len(tied))]


def map_tasks_random(g: TaskGraph, cfg: MeshConfig, seed: int) -> Mapping:
    _check_fits(g, cfg)
    rng = random.Random(seed)
    nodes = rng.sample(range(cfg.n_nodes), g.n_tasks)
    placement = tuple((n % cfg.cols, n // cfg.cols) for n in nodes)
    return Mapping(rows=cfg.rows, cols=cfg.cols, placement=placement)


def map_tasks_exhaustive(g: TaskGraph, cfg: MeshConfig, limit: int = 10_000_000) -> Mapping:
    """Optimal mapping by enumeration; ties resolved to the lexicographically
    smallest node-index assignment. Guarded by `limit` placements."""
    _check_fits(g, cfg)
    count = 1
    for i in range(g.n_tasks):
        count *= cfg.n_nodes - i
        if count > limit:
            raise MappingError(
                f"exhaustive mapping would enumerate > {limit} placements"
            )
    flows = [(f.src, f.dst, f.demand_bps) for f in g.flows]
    cols = cfg.cols
    best_cost: Optional[int] = None
    best: Optional[Tuple[int, ...]] = None
    for perm in itertools.permutations(range(cfg.n_nodes), g.n_tasks):
        cost = 0
        for s, d, dem in flows:
            a, b = perm[s], perm[d]
            cost += dem * (abs(a % cols - b % cols) + abs(a // cols - b // cols))
        if best_cost is None or cost < best_cost:
            best_cost, best = cost, perm
    assert best is not None
    placement = tuple((n % cols, n // cols) for n in best)
    return Mapping(rows=cfg.rows, cols=cfg.cols, placement=placement)


def map_tasks_heuristic(g: TaskGraph, cfg: MeshConfig, seed: int = 0) -> Mapping:
    _check_fits(g, cfg)
    rng = random.Random(seed)
    n, cols, rows = g.n_tasks, cfg.cols, cfg.rows

    comm: Dict[int, Dict[int, int]] = {t: {} for t in range(n)}
    weight = [0] * n
    for f in g.flows:
        comm[f.src][f.dst] = comm[f.src].get(f.dst, 0) + f.demand_bps
        comm[f.dst][f.src] = comm[f.dst].get(f.src, 0) + f.demand_bps
        weight[f.src] += f.demand_bps
        weight[f.dst] += f.demand_bps

    # constructive phase
    cx, cy = (cols - 1) / 2.0, (rows - 1) / 2.0
    center = min(
        range(cfg.n_nodes), key=lambda i: (abs(i % cols - cx) + abs(i // cols - cy), i)
    )
    heaviest = [t for t in range(n) if weight[t] == max(weight)]
    first = _pick(rng, heaviest)
    node_of: Dict[int, int] = {first: center}
    free = [i for i in range(cfg.n_nodes) if i != center]
    unplaced = [t for t in range(n) if t != first]
    while unplaced:
        attraction = {
            t: sum(w for u, w in comm[t].items() if u in node_of) for t in unplaced
        }
        best_key = max((attraction[t], weight[t]) for t in unplaced)
        task = _pick(rng, [t for t in unplaced if (attraction[t], weight[t]) == best_key])
        costs = []
        for node in free:
            x, y = node % cols, node // cols
            c = sum(
                w * (abs(x - node_of[u] % cols) + abs(y - node_of[u] // cols))
                for u, w in comm[task].items()
                if u in node_of
            )
            costs.append((c, node))
        low = min(c for c, _ in costs)
        node = _pick(rng, [nd for c, nd in costs if c == low])
        node_of[task] = node
        free.remove(node)
        unplaced.remove(task)

    pos = [node_of[t] for t in range(n)]
    incident: List[List[Tuple[int, int, int]]] = [[] for _ in range(n)]
    for f in g.flows:
        incident[f.src].append((f.src, f.dst, f.demand_bps))
        if f.dst != f.src:
            incident[f.dst].append((f.src, f.dst, f.demand_bps))

    def dist(a: int, b: int) -> int:
        return abs(a % cols - b % cols) + abs(a // cols - b // cols)

    def local_cost(tasks: Sequence[int], p: List[int]) -> int:
        seen = set()
        c = 0
        for t in tasks:
            for s, d, dem in incident[t]:
                if (s, d) in seen:
                    continue
                seen.add((s, d))
                c += dem * dist(p[s], p[d])
        return c

    # steepest-descent improvement: best strict improvement each round,
    # enumeration order breaks ties
    while True:
        best_delta = 0
        best_move = None
        for i in range(n):
            for j in range(i + 1, n):
                before = local_cost((i, j), pos)
                pos[i], pos[j] = pos[j], pos[i]
                after = local_cost((i, j), pos)
                pos[i], pos[j] = pos[j], pos[i]
                if after - before < best_delta:
                    best_delta = after - before
                    best_move = ("swap", i, j)
        for i in range(n):
            for node in free:
                before = local_cost((i,), pos)
                old = pos[i]
                pos[i] = node
                after = local_cost((i,), pos)
                pos[i] = old
                if after - before < best_delta:
                    best_delta = after - before
                    best_move = ("move", i, node)
        if best_move is None:
            break
        if best_move[0] == "swap":
            _, i, j = best_move
            pos[i], pos[j] = pos[j], pos[i]
        else:
            _, i, node = best_move
            free.remove(node)
            free.append(pos[i])
            pos[i] = node

    placement = tuple((p % cols, p // cols) for p in pos)
    return Mapping(rows=rows, cols=cols, placement=placement)
