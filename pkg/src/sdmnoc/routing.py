"""Unit-granular route allocation and circuit realization.

Each flow becomes a commodity demanding ceil(demand / unit_bandwidth) units.
Routing is restricted to minimal paths inside the bounding rectangle of the
mapped endpoints, so every branch of a flow has the same hop count and chunks
split across branches arrive simultaneously.

Every directed link carries two capacity pools: a regular pool (U - H units,
cost c_regular per unit) and a hardwired pool (H units, cost c_hardwired).
The hardwired pool on link l is usable by a path only when the driving
router's pattern has entries matching the path's arrival port, i.e. the path
runs straight through the router. First links arrive through the local port
and never match, turn links never match under the straight pattern. This is
what makes large hardwiring shares lose routability: regular capacity shrinks
while turning and injecting traffic cannot touch the hardwired pool.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from heapq import heappush, heappop
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .ctg import TaskGraph
from .mapping import Mapping
from .platform import (
    DELTA,
    LOCAL,
    OPPOSITE,
    Link,
    MeshConfig,
    Platform,
    build_mesh,
)


class RoutingInfeasible(Exception):
    """The instance admits no allocation within capacities."""

    def __init__(self, reason: str, flow_id: Optional[int] = None):
        super().__init__(reason)
        self.reason = reason
        self.flow_id = flow_id


class BudgetExceeded(Exception):
    """The exact solver ran out of its node budget (not a feasibility verdict)."""


class RealizationError(ValueError):
    """Allocation inconsistent with platform occupancy (programming error)."""


def compute_unit_demand(demand_bps: int, cfg: MeshConfig) -> int:
    """Units needed so that units * m * f >= demand > (units - 1) * m * f."""
    if demand_bps <= 0:
        raise ValueError(f"demand must be positive, got {demand_bps}")
    ub = cfg.unit_bandwidth_bps()
    return -(-demand_bps // ub)


@dataclass(frozen=True)
class Commodity:
    id: int  # flow id
    src: int  # node index
    dst: int
    units: int


class FlowNetwork:
    """Per-link parallel capacity pools plus the commodity list."""

    def __init__(self, platform: Platform, commodities: List[Commodity]):
        self.platform = platform
        self.cfg = platform.cfg
        self.commodities = commodities
        h = self.cfg.hardwired_units
        u = self.cfg.units
        self.hw_cap = [h - platform.hw_used[l.id] for l in platform.links]
        self.reg_cap = [(u - h) - platform.reg_used[l.id] for l in platform.links]

    def arc_count(self) -> int:
        return 2 * len(self.platform.links)


def build_flow_network(platform: Platform, m: Mapping, g: TaskGraph) -> FlowNetwork:
    if (m.rows, m.cols) != (platform.cfg.rows, platform.cfg.cols):
        raise ValueError("mapping mesh does not match platform mesh")
    commodities = []
    for f in g.flows:
        src = platform.node_index(m.placement[f.src])
        dst = platform.node_index(m.placement[f.dst])
        assert src != dst, "mapping is injective and flows have distinct endpoints"
        commodities.append(
            Commodity(id=f.id, src=src, dst=dst, units=compute_unit_demand(f.demand_bps, platform.cfg))
        )
    return FlowNetwork(platform, commodities)


def minimal_path_count(platform: Platform, src: int, dst: int) -> int:
    (x0, y0), (x1, y1) = platform.node_coord(src), platform.node_coord(dst)
    dx, dy = abs(x1 - x0), abs(y1 - y0)
    return math.comb(dx + dy, dx)


def iter_minimal_paths(platform: Platform, src: int, dst: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Yield (link_ids, node_ids) of every minimal path, x-moves before y-moves."""
    cfg = platform.cfg
    (x1, y1) = platform.node_coord(dst)

    def rec(node: int, links: List[int], nodes: List[int]):
        if node == dst:
            yield tuple(links), tuple(nodes)
            return
        x, y = node % cfg.cols, node // cfg.cols
        moves = []
        if x != x1:
            moves.append("E" if x1 > x else "W")
        if y != y1:
            moves.append("S" if y1 > y else "N")
        for d in moves:
            link = platform.link_of[(node, d)]
            links.append(link.id)
            nodes.append(link.dst)
            yield from rec(link.dst, links, nodes)
            links.pop()
            nodes.pop()

    yield from rec(src, [], [src])


def _path_eligibility(platform: Platform, link_ids: Sequence[int]) -> Tuple[bool, ...]:
    """Per position: may this path draw from the link's hardwired pool?"""
    out = [False] * len(link_ids)
    links = platform.links
    for i in range(1, len(link_ids)):
        prev, cur = links[link_ids[i - 1]], links[link_ids[i]]
        in_port = OPPOSITE[prev.direction]
        if platform.pattern.io_entries(cur.src, in_port, cur.direction):
            out[i] = True
    return tuple(out)


@dataclass
class Branch:
    nodes: Tuple[int, ...]
    links: Tuple[int, ...]
    width: int
    elig: Tuple[bool, ...]
    hw_at: Tuple[int, ...] = ()  # per position: units charged to the hardwired pool


class Allocation:
    """Integer unit flows per commodity, decomposed into equal-length branches."""

    def __init__(self, net: FlowNetwork, branches: Dict[int, List[Branch]], cost: int):
        self.net = net
        self.branches = branches
        self.cost = cost

    def units_of(self, cid: int) -> int:
        return sum(b.width for b in self.branches.get(cid, []))

    def link_loads(self) -> Tuple[List[int], List[int]]:
        """(hardwired units, regular units) per link id."""
        hw = [0] * len(self.net.platform.links)
        reg = [0] * len(self.net.platform.links)
        for cid in sorted(self.branches):
            for b in self.branches[cid]:
                for i, l in enumerate(b.links):
                    hw[l] += b.hw_at[i]
                    reg[l] += b.width - b.hw_at[i]
        return hw, reg


def make_allocation(net: FlowNetwork, paths: Dict[int, List[Tuple[Tuple[int, ...], Tuple[int, ...], int]]]) -> Allocation:
    """Build an audited Allocation from {commodity: [(link_ids, node_ids, width)...]}.

    Splits each link's usage between the pools deterministically: eligible
    units claim hardwired capacity in (commodity id, branch order) order,
    everything else pays the regular cost.
    """
    platform = net.platform
    hw_left = list(net.hw_cap)
    branches: Dict[int, List[Branch]] = {}
    for cid in sorted(paths):
        blist = []
        for link_ids, node_ids, width in paths[cid]:
            if width <= 0:
                continue
            elig = _path_eligibility(platform, link_ids)
            hw_at = []
            for i, l in enumerate(link_ids):
                take = min(width, hw_left[l]) if elig[i] else 0
                hw_left[l] -= take
                hw_at.append(take)
            blist.append(Branch(nodes=node_ids, links=link_ids, width=width,
                                elig=elig, hw_at=tuple(hw_at)))
        branches[cid] = blist
    cost = 0
    for blist in branches.values():
        for b in blist:
            for i in range(len(b.links)):
                cost += net.cfg.c_hardwired * b.hw_at[i]
                cost += net.cfg.c_regular * (b.width - b.hw_at[i])
    alloc = Allocation(net, branches, cost)
    audit_allocation(alloc)
    return alloc


def audit_allocation(alloc: Allocation) -> None:
    """Raise if the allocation violates conservation, capacity, rectangle or
    minimality invariants."""
    net = alloc.net
    platform = net.platform
    hw, reg = alloc.link_loads()
    for l in range(len(platform.links)):
        if hw[l] > net.hw_cap[l] or reg[l] > net.reg_cap[l]:
            raise RealizationError(
                f"link {l}: pools over capacity (hw {hw[l]}/{net.hw_cap[l]}, "
                f"reg {reg[l]}/{net.reg_cap[l]})"
            )
    for c in net.commodities:
        blist = alloc.branches.get(c.id, [])
        if sum(b.width for b in blist) != c.units:
            raise RealizationError(f"commodity {c.id}: branch widths do not sum to demand")
        (x0, y0) = platform.node_coord(c.src)
        (x1, y1) = platform.node_coord(c.dst)
        lo_x, hi_x = min(x0, x1), max(x0, x1)
        lo_y, hi_y = min(y0, y1), max(y0, y1)
        hops = manhattan = abs(x1 - x0) + abs(y1 - y0)
        for b in blist:
            if len(b.links) != hops or b.nodes[0] != c.src or b.nodes[-1] != c.dst:
                raise RealizationError(f"commodity {c.id}: branch is not a minimal src->dst path")
            for nd in b.nodes:
                x, y = platform.node_coord(nd)
                if not (lo_x <= x <= hi_x and lo_y <= y <= hi_y):
                    raise RealizationError(f"commodity {c.id}: branch leaves the rectangle")
            for i in range(len(b.links)):
                if b.hw_at[i] and not b.elig[i]:
                    raise RealizationError(
                        f"commodity {c.id}: hardwired units on a non-eligible position"
                    )


# ---------------------------------------------------------------------------
# heuristic solver: negotiated congestion over (node, arrival direction) states

def solve_mcnf_heuristic(net: FlowNetwork, max_iters: int = 64) -> Allocation:
    """Rip-up-and-reroute with escalating congestion penalties.

    Each commodity is routed unit by unit along the currently cheapest minimal
    path; the regular pool may be temporarily over-subscribed at a penalty that
    grows each iteration until no link is over capacity.
    """
    reason = quick_infeasibility_reason(net)
    if reason is not None:
        raise RoutingInfeasible(reason)
    platform = net.platform
    cfg = net.cfg
    links = platform.links
    n_links = len(links)
    load_t = [0] * n_links  # total units
    load_e = [0] * n_links  # units that arrived straight (hardwired-eligible)
    hist = [0.0] * n_links
    order = sorted(net.commodities, key=lambda c: (-c.units, c.id))
    # unit paths per commodity: list of (link_ids, elig)
    routed: Dict[int, List[Tuple[Tuple[int, ...], Tuple[bool, ...]]]] = {c.id: [] for c in order}
    pres = 1.0

    def over(l: int) -> int:
        usable_hw = min(load_e[l], net.hw_cap[l])
        return max(0, load_t[l] - usable_hw - net.reg_cap[l])

    def route_unit(c: Commodity) -> Optional[Tuple[Tuple[int, ...], Tuple[bool, ...]]]:
        # Dijkstra over (node, arrival direction); forward moves only
        (x1, y1) = platform.node_coord(c.dst)
        start = (c.src, None)
        dist: Dict[Tuple[int, Optional[str]], float] = {start: 0.0}
        prev: Dict[Tuple[int, Optional[str]], Tuple[Tuple[int, Optional[str]], int, bool]] = {}
        heap: List[Tuple[float, int, int, Optional[str]]] = [(0.0, 0, c.src, None)]
        tick = 0
        goal = None
        while heap:
            d, _, node, pd = heappop(heap)
            if d > dist.get((node, pd), float("inf")):
                continue
            if node == c.dst:
                goal = (node, pd)
                break
            x, y = node % cfg.cols, node // cfg.cols
            moves = []
            if x != x1:
                moves.append("E" if x1 > x else "W")
            if y != y1:
                moves.append("S" if y1 > y else "N")
            for mv in moves:
                link = platform.link_of[(node, mv)]
                l = link.id
                elig = (
                    pd is not None
                    and bool(platform.pattern.io_entries(node, OPPOSITE[pd], mv))
                )
                hw_open = elig and min(load_e[l], net.hw_cap[l]) < net.hw_cap[l]
                base = cfg.c_hardwired if hw_open else cfg.c_regular
                e_after = load_e[l] + (1 if elig else 0)
                over_after = max(0, load_t[l] + 1 - min(e_after, net.hw_cap[l]) - net.reg_cap[l])
                w = base + hist[l] + pres * over_after
                state = (link.dst, mv)
                nd = d + w
                if nd < dist.get(state, float("inf")) - 1e-12:
                    dist[state] = nd
                    prev[state] = ((node, pd), l, elig)
                    tick += 1
                    heappush(heap, (nd, tick, link.dst, mv))
        if goal is None:
            return None
        path: List[int] = []
        eligs: List[bool] = []
        st = goal
        while st != start:
            st, l, elig = prev[st]
            path.append(l)
            eligs.append(elig)
        path.reverse()
        eligs.reverse()
        return tuple(path), tuple(eligs)

    feasible = False
    for _ in range(max_iters):
        for c in order:
            for link_ids, eligs in routed[c.id]:
                for l, e in zip(link_ids, eligs):
                    load_t[l] -= 1
                    load_e[l] -= 1 if e else 0
            routed[c.id] = []
            for _unit in range(c.units):
                got = route_unit(c)
                if got is None:  # rectangle disconnected; cannot happen on a mesh
                    raise RoutingInfeasible(f"no path for flow {c.id}", flow_id=c.id)
                link_ids, eligs = got
                routed[c.id].append(got)
                for l, e in zip(link_ids, eligs):
                    load_t[l] += 1
                    load_e[l] += 1 if e else 0
        overused = [l for l in range(n_links) if over(l) > 0]
        if not overused:
            feasible = True
            break
        for l in overused:
            hist[l] += 1.0 * over(l)
        pres *= 1.8
    if not feasible:
        overused = [l for l in range(n_links) if over(l) > 0]
        raise RoutingInfeasible(
            f"congestion not resolved after {max_iters} iterations "
            f"({len(overused)} links over capacity)"
        )
    paths: Dict[int, List[Tuple[Tuple[int, ...], Tuple[int, ...], int]]] = {}
    for c in net.commodities:
        groups: Dict[Tuple[int, ...], int] = {}
        for link_ids, _ in routed[c.id]:
            groups[link_ids] = groups.get(link_ids, 0) + 1
        plist = []
        for link_ids in sorted(groups):
            nodes = (c.src,) + tuple(links[l].dst for l in link_ids)
            plist.append((link_ids, nodes, groups[link_ids]))
        paths[c.id] = plist
    return make_allocation(net, paths)


# ---------------------------------------------------------------------------
# exact solver: branch and bound over per-commodity path-width compositions

def solve_mcnf_exact(
    net: FlowNetwork,
    node_budget: int = 4_000_000,
    guard: bool = True,
) -> Allocation:
    """Minimum-cost integer multi-commodity flow by depth-first branch and bound.

    Branches over integer width assignments to each commodity's minimal paths;
    the bound is the sum of capacity-ignoring shortest-path costs of the
    remaining commodities. Deterministic ordering throughout. Intended for
    small instances; raises BudgetExceeded beyond the guard or node budget.
    """
    reason = quick_infeasibility_reason(net)
    if reason is not None:
        raise RoutingInfeasible(reason)
    platform = net.platform
    cfg = net.cfg
    if guard and (cfg.n_nodes > 36 or len(net.commodities) > 20):
        raise BudgetExceeded(
            f"instance outside exact-solver guard ({cfg.rows}x{cfg.cols}, "
            f"{len(net.commodities)} commodities); pass guard=False to override"
        )

    # incumbent from the heuristic when it succeeds
    best_cost = math.inf
    best_paths: Optional[Dict[int, List[Tuple[Tuple[int, ...], Tuple[int, ...], int]]]] = None
    try:
        inc = solve_mcnf_heuristic(net)
        best_cost = inc.cost
        best_paths = {
            cid: [(b.links, b.nodes, b.width) for b in blist]
            for cid, blist in inc.branches.items()
        }
    except RoutingInfeasible:
        pass

    coms = list(net.commodities)
    pathsets = []
    for c in coms:
        plist = []
        for link_ids, node_ids in iter_minimal_paths(platform, c.src, c.dst):
            elig = _path_eligibility(platform, link_ids)
            # capacity-ignoring per-unit cost, used for ordering and bounds
            unit_cost = sum(
                cfg.c_hardwired if (e and net.hw_cap[l] > 0) else cfg.c_regular
                for l, e in zip(link_ids, elig)
            )
            plist.append((unit_cost, link_ids, node_ids, elig))
        plist.sort(key=lambda t: (t[0], t[1]))
        pathsets.append(plist)

    # most-constrained commodity first
    com_order = sorted(
        range(len(coms)), key=lambda i: (len(pathsets[i]), -coms[i].units, coms[i].id)
    )
    lb_unit = [min(p[0] for p in pathsets[i]) for i in range(len(coms))]
    suffix_lb = [0] * (len(coms) + 1)
    for pos in range(len(coms) - 1, -1, -1):
        i = com_order[pos]
        suffix_lb[pos] = suffix_lb[pos + 1] + lb_unit[i] * coms[i].units

    n_links = len(platform.links)
    load_t = [0] * n_links
    load_e = [0] * n_links
    expansions = 0

    def link_cost(l: int) -> int:
        usable = min(load_e[l], net.hw_cap[l])
        return cfg.c_hardwired * usable + cfg.c_regular * (load_t[l] - usable)

    def add(path: Sequence[int], elig: Sequence[bool], w: int) -> int:
        """Apply w units along path; return the cost delta."""
        delta = 0
        for l, e in zip(path, elig):
            before = link_cost(l)
            load_t[l] += w
            if e:
                load_e[l] += w
            delta += link_cost(l) - before
        return delta

    def remove(path: Sequence[int], elig: Sequence[bool], w: int) -> None:
        for l, e in zip(path, elig):
            load_t[l] -= w
            if e:
                load_e[l] -= w

    def max_addable(path: Sequence[int], elig: Sequence[bool]) -> int:
        w = math.inf
        for l, e in zip(path, elig):
            if e:
                w = min(w, net.hw_cap[l] + net.reg_cap[l] - load_t[l])
            else:
                w = min(w, net.reg_cap[l] + min(load_e[l], net.hw_cap[l]) - load_t[l])
        return int(w) if w != math.inf else 0

    chosen: Dict[int, List[Tuple[Tuple[int, ...], Tuple[int, ...], int]]] = {}

    def assign(pos: int, cost_so_far: int) -> None:
        nonlocal best_cost, best_paths, expansions
        if cost_so_far + suffix_lb[pos] >= best_cost:
            return
        if pos == len(coms):
            best_cost = cost_so_far
            best_paths = {cid: list(ps) for cid, ps in chosen.items()}
            return
        c = coms[com_order[pos]]
        plist = pathsets[com_order[pos]]
        picked: List[Tuple[Tuple[int, ...], Tuple[int, ...], int]] = []
        chosen[c.id] = picked

        def widths(j: int, left: int, cost_acc: int) -> None:
            nonlocal expansions
            if cost_acc + suffix_lb[pos + 1] + left * lb_unit[com_order[pos]] >= best_cost:
                return
            if left == 0:
                assign(pos + 1, cost_acc)
                return
            if j == len(plist):
                return
            expansions += 1
            if expansions > node_budget:
                raise BudgetExceeded(f"exact solver exceeded node budget {node_budget}")
            _, link_ids, node_ids, elig = plist[j]
            hi = min(left, max_addable(link_ids, elig))
            for w in range(hi, -1, -1):
                if w:
                    delta = add(link_ids, elig, w)
                    picked.append((link_ids, node_ids, w))
                    widths(j + 1, left - w, cost_acc + delta)
                    picked.pop()
                    remove(link_ids, elig, w)
                else:
                    widths(j + 1, left, cost_acc)

        widths(0, c.units, cost_so_far)
        del chosen[c.id]

    assign(0, 0)
    if best_paths is None:
        raise RoutingInfeasible("exact search exhausted without a feasible allocation")
    return make_allocation(net, {cid: ps for cid, ps in best_paths.items()})


# ---------------------------------------------------------------------------
# cheap necessary conditions, used to reject hopeless instances fast

def quick_infeasibility_reason(net: FlowNetwork) -> Optional[str]:
    """None if the instance passes the cheap necessary conditions.

    All are relaxations, so a non-None answer proves infeasibility; None
    proves nothing. Checked: per-source injection (first links only draw on
    the regular pool), and total unit-hops against total installed capacity.
    """
    platform = net.platform
    out_units: Dict[int, int] = {}
    total_unit_hops = 0
    for c in net.commodities:
        out_units[c.src] = out_units.get(c.src, 0) + c.units
        (x0, y0) = platform.node_coord(c.src)
        (x1, y1) = platform.node_coord(c.dst)
        total_unit_hops += c.units * (abs(x1 - x0) + abs(y1 - y0))
    for node in sorted(out_units):
        cap = 0
        for d in "EWNS":
            link = platform.link_of.get((node, d))
            if link is not None:
                cap += net.reg_cap[link.id]
        if out_units[node] > cap:
            return (
                f"node {node} sources {out_units[node]} units but its links "
                f"have {cap} regular units"
            )
    total_cap = sum(net.hw_cap) + sum(net.reg_cap)
    if total_unit_hops > total_cap:
        return f"{total_unit_hops} unit-hops demanded, {total_cap} installed"
    return None


# ---------------------------------------------------------------------------
# greedy single-path baseline

def route_greedy_baseline(net: FlowNetwork) -> Allocation:
    """No splitting: each flow's whole unit demand goes on one minimal path.

    Flows are served in decreasing demand_units / path_count order (scarce
    routing options first); each takes the cheapest minimal path with enough
    free capacity, ties to the x-moves-first enumeration order. Infeasible as
    soon as one flow has no single path that fits.
    """
    platform = net.platform
    cfg = net.cfg
    reason = quick_infeasibility_reason(net)
    if reason is not None:
        raise RoutingInfeasible(reason)
    n_links = len(platform.links)
    load_t = [0] * n_links
    load_e = [0] * n_links

    def key(c: Commodity):
        return (-Fraction(c.units, minimal_path_count(platform, c.src, c.dst)), c.id)

    def cheapest_path(c: Commodity):
        # Dijkstra over (node, arrival direction) with whole-demand marginal
        # costs; the tie key reproduces x-before-y enumeration order
        w = c.units
        (x1, y1) = platform.node_coord(c.dst)
        start = (c.src, None)
        dist: Dict[Tuple[int, Optional[str]], Tuple[int, Tuple[int, ...]]] = {start: (0, ())}
        prev: Dict[Tuple[int, Optional[str]], Tuple[Tuple[int, Optional[str]], int]] = {}
        heap: List[Tuple[int, Tuple[int, ...], int, Optional[str]]] = [(0, (), c.src, None)]
        while heap:
            d, code, node, pd = heappop(heap)
            if (d, code) > dist.get((node, pd), (1 << 60, ())):
                continue
            if node == c.dst:
                path = []
                st = (node, pd)
                while st != start:
                    st, l = prev[st]
                    path.append(l)
                path.reverse()
                return tuple(path)
            x, y = node % cfg.cols, node // cfg.cols
            moves = []
            if x != x1:
                moves.append((0, "E" if x1 > x else "W"))
            if y != y1:
                moves.append((1, "S" if y1 > y else "N"))
            for mcode, mv in moves:
                link = platform.link_of[(node, mv)]
                l = link.id
                elig = (
                    pd is not None
                    and bool(platform.pattern.io_entries(node, OPPOSITE[pd], mv))
                )
                if elig:
                    room = net.hw_cap[l] + net.reg_cap[l] - load_t[l]
                    gain = min(load_e[l] + w, net.hw_cap[l]) - min(load_e[l], net.hw_cap[l])
                else:
                    room = net.reg_cap[l] + min(load_e[l], net.hw_cap[l]) - load_t[l]
                    gain = 0
                if room < w:
                    continue
                step = cfg.c_hardwired * gain + cfg.c_regular * (w - gain)
                state = (link.dst, mv)
                nd, ncode = d + step, code + (mcode,)
                if (nd, ncode) < dist.get(state, (1 << 60, ())):
                    dist[state] = (nd, ncode)
                    prev[state] = ((node, pd), l)
                    heappush(heap, (nd, ncode, link.dst, mv))
        return None

    paths: Dict[int, List[Tuple[Tuple[int, ...], Tuple[int, ...], int]]] = {}
    for c in sorted(net.commodities, key=key):
        link_ids = cheapest_path(c)
        if link_ids is None:
            raise RoutingInfeasible(
                f"flow {c.id}: no single minimal path has {c.units} free units",
                flow_id=c.id,
            )
        elig = _path_eligibility(platform, link_ids)
        for l, e in zip(link_ids, elig):
            load_t[l] += c.units
            if e:
                load_e[l] += c.units
        node_ids = (c.src,) + tuple(platform.links[l].dst for l in link_ids)
        paths[c.id] = [(link_ids, node_ids, c.units)]
    return make_allocation(net, paths)


SOLVERS = {
    "exact": solve_mcnf_exact,
    "heuristic": solve_mcnf_heuristic,
    "greedy": route_greedy_baseline,
}


# ---------------------------------------------------------------------------
# circuit realization

@dataclass(frozen=True)
class Crosspoint:
    node: int
    in_port: str
    in_unit: int
    out_port: str
    out_unit: int
    tag: str  # "hardwired" | "configurable"


@dataclass
class RealizedBranch:
    nodes: Tuple[int, ...]
    links: Tuple[int, ...]
    width: int
    unit_indices: Tuple[Tuple[int, ...], ...]  # [unit][position] -> wire unit index


@dataclass
class FlowCircuit:
    flow_id: int
    units: int
    branches: List[RealizedBranch]
    crosspoints: List[Crosspoint]

    def width_bits(self, unit_width: int) -> int:
        return self.units * unit_width

    def hop_count(self) -> int:
        return len(self.branches[0].links)


class CircuitPlan:
    def __init__(self, platform: Platform, circuits: Dict[int, FlowCircuit], demotions: int):
        self.platform = platform
        self.circuits = circuits
        self.demotions = demotions

    def crosspoint_counts(self) -> Tuple[int, int]:
        hw = cfgble = 0
        for c in self.circuits.values():
            for xp in c.crosspoints:
                if xp.tag == "hardwired":
                    hw += 1
                else:
                    cfgble += 1
        return hw, cfgble

    def to_json_dict(self) -> dict:
        coord = self.platform.node_coord
        flows = []
        for fid in sorted(self.circuits):
            c = self.circuits[fid]
            flows.append({
                "flow_id": fid,
                "units": c.units,
                "branches": [
                    {
                        "nodes": [list(coord(n)) for n in b.nodes],
                        "width": b.width,
                        "unit_indices": [list(u) for u in b.unit_indices],
                    }
                    for b in c.branches
                ],
                "crosspoints": [
                    {
                        "node": list(coord(xp.node)),
                        "in_port": xp.in_port,
                        "in_unit": xp.in_unit,
                        "out_port": xp.out_port,
                        "out_unit": xp.out_unit,
                        "tag": xp.tag,
                    }
                    for xp in c.crosspoints
                ],
            })
        return {"demotions": self.demotions, "flows": flows}


def realize_circuits(platform: Platform, alloc: Allocation) -> CircuitPlan:
    """Assign concrete wire-unit indices and crosspoint settings.

    Indices are one fungible pool per link; the assignment greedily keeps the
    unit index constant across straight hops so pattern positions are hit. A
    unit charged to the hardwired pool whose driving crosspoint realizes as
    configurable counts as one demotion event.
    """
    pattern = platform.pattern
    cfg = platform.cfg
    links = platform.links
    circuits: Dict[int, FlowCircuit] = {}
    demotions = 0

    com_by_id = {c.id: c for c in alloc.net.commodities}
    for cid in sorted(alloc.branches):
        rbranches = []
        crosspoints: List[Crosspoint] = []
        for b in alloc.branches[cid]:
            unit_rows: List[Tuple[int, ...]] = []
            for w in range(b.width):
                hw_promised = [w < b.hw_at[i] for i in range(len(b.links))]
                row: List[int] = []
                prev_idx: Optional[int] = None
                for i, lid in enumerate(b.links):
                    link = links[lid]
                    taken = platform.taken[lid]
                    in_port = LOCAL if i == 0 else OPPOSITE[links[b.links[i - 1]].direction]
                    idx = None
                    tag = "configurable"
                    if i > 0 and prev_idx is not None:
                        for in_u, out_u in pattern.io_entries(link.src, in_port, link.direction):
                            if in_u == prev_idx and out_u not in taken:
                                idx = out_u
                                tag = "hardwired"
                                break
                    if idx is None:
                        idx = _pick_index(platform, b, i, lid, taken)
                        if i > 0 and pattern.is_hardwired(
                            link.src, in_port, prev_idx, link.direction, idx
                        ):
                            tag = "hardwired"
                    if idx in taken:
                        raise RealizationError(f"link {lid}: unit {idx} double-assigned")
                    taken[idx] = cid
                    if hw_promised[i]:
                        platform.hw_used[lid] += 1
                        if tag != "hardwired":
                            demotions += 1
                    else:
                        platform.reg_used[lid] += 1
                    # crosspoint at the driving router
                    crosspoints.append(Crosspoint(
                        node=link.src,
                        in_port=in_port,
                        in_unit=idx if i == 0 else prev_idx,
                        out_port=link.direction,
                        out_unit=idx,
                        tag=tag,
                    ))
                    row.append(idx)
                    prev_idx = idx
                # ejection crosspoint at the destination router
                last = links[b.links[-1]]
                crosspoints.append(Crosspoint(
                    node=last.dst,
                    in_port=OPPOSITE[last.direction],
                    in_unit=row[-1],
                    out_port=LOCAL,
                    out_unit=row[-1],
                    tag="configurable",
                ))
                unit_rows.append(tuple(row))
            rbranches.append(RealizedBranch(
                nodes=b.nodes, links=b.links, width=b.width, unit_indices=tuple(unit_rows)
            ))
        circuits[cid] = FlowCircuit(
            flow_id=cid,
            units=com_by_id[cid].units,
            branches=rbranches,
            crosspoints=crosspoints,
        )
    plan = CircuitPlan(platform, circuits, demotions)
    audit_plan(plan, alloc)
    return plan


def _pick_index(platform: Platform, b: Branch, i: int, lid: int, taken: Dict[int, int]) -> int:
    """Free-index choice when no pattern continuation applies.

    If the path continues straight after this link, prefer the lowest free
    index that is a pattern input at the next router (sets up a hardwired
    chain); otherwise prefer indices outside the pattern range to keep them
    free for chains.
    """
    cfg = platform.cfg
    links = platform.links
    link = links[lid]
    if i + 1 < len(b.links):
        nxt = links[b.links[i + 1]]
        in_port_next = OPPOSITE[link.direction]
        candidates = [
            in_u
            for in_u, out_u in platform.pattern.io_entries(nxt.src, in_port_next, nxt.direction)
            if in_u not in taken and out_u not in platform.taken[b.links[i + 1]]
        ]
        if candidates:
            return candidates[0]
    h = cfg.hardwired_units
    for idx in list(range(h, cfg.units)) + list(range(h)):
        if idx not in taken:
            return idx
    raise RealizationError(f"link {lid}: no free unit index (capacity audit should prevent this)")


def audit_plan(plan: CircuitPlan, alloc: Allocation) -> None:
    platform = plan.platform
    pattern = platform.pattern
    for cid, circuit in plan.circuits.items():
        if sum(b.width for b in circuit.branches) != circuit.units:
            raise RealizationError(f"flow {cid}: realized widths do not sum to unit demand")
        hops = {len(b.links) for b in circuit.branches}
        if len(hops) != 1:
            raise RealizationError(f"flow {cid}: branches have unequal lengths")
        for xp in circuit.crosspoints:
            if xp.tag == "hardwired" and not pattern.is_hardwired(
                xp.node, xp.in_port, xp.in_unit, xp.out_port, xp.out_unit
            ):
                raise RealizationError(f"flow {cid}: hardwired tag without a pattern entry")
    for lid, taken in enumerate(platform.taken):
        if len(taken) > platform.cfg.units:
            raise RealizationError(f"link {lid}: more units assigned than exist")


# ---------------------------------------------------------------------------
# minimum feasible frequency on the geometric grid

@dataclass
class FrequencyResult:
    frequency_hz: int
    k: int
    allocation: Allocation
    probes: List[Tuple[int, int, bool]]  # (k, frequency, feasible)


def find_min_feasible_frequency(
    g: TaskGraph,
    cfg: MeshConfig,
    m: Mapping,
    solver: str = "heuristic",
    f0: int = 125_000,
    growth: float = 1.05,
    max_k: int = 400,
) -> FrequencyResult:
    """Smallest f0 * growth^k at which routing succeeds.

    Raising the frequency raises unit bandwidth, so unit demands fall and
    feasibility is monotone in k; an exponential probe finds a feasible upper
    bound, then binary search pins the smallest feasible k.
    """
    solve = SOLVERS[solver]
    probes: List[Tuple[int, int, bool]] = []
    cache: Dict[int, Optional[Allocation]] = {}

    def attempt(k: int) -> Optional[Allocation]:
        if k in cache:
            return cache[k]
        f = round(f0 * growth ** k)
        trial = replace(cfg, frequency_hz=f)
        platform = build_mesh(trial)
        net = build_flow_network(platform, m, g)
        try:
            alloc = solve(net)
        except RoutingInfeasible:
            alloc = None
        probes.append((k, f, alloc is not None))
        cache[k] = alloc
        return alloc

    if attempt(0) is not None:
        return FrequencyResult(round(f0), 0, cache[0], probes)
    lo, k = 0, 1
    while attempt(k) is None:
        lo, k = k, k * 2
        if k > max_k:
            raise RoutingInfeasible(
                f"no feasible frequency up to f0*{growth}^{max_k}"
            )
    hi = k  # feasible; lo infeasible
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if attempt(mid) is None:
            lo = mid
        else:
            hi = mid
    return FrequencyResult(round(f0 * growth ** hi), hi, cache[hi], probes)
