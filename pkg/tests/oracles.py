"""Independent reference implementations used by the test suite.

Everything here is deliberately written in the most literal style available
(plain enumeration, explicit replay) so it shares no code or algorithmic
shortcuts with the package under test. Frozen: changes here invalidate the
oracle-vs-implementation comparisons, so extend rather than rewrite.
"""
import itertools
from typing import Dict, List, Optional, Sequence, Tuple


def unit_demand_reference(demand_bps: int, m: int, frequency_hz: int) -> int:
    """Smallest u with u * m * f >= demand, by counting."""
    u = 0
    cap = 0
    while cap < demand_bps:
        u += 1
        cap += m * frequency_hz
    return u


def manhattan(a: Tuple[int, int], b: Tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def enumerate_minimal_paths(cols: int, src: int, dst: int) -> List[List[str]]:
    """All x-then-interleaved monotone move sequences, x-move-first order."""
    x0, y0 = src % cols, src // cols
    x1, y1 = dst % cols, dst // cols
    xm = ("E" if x1 > x0 else "W") if x1 != x0 else None
    ym = ("S" if y1 > y0 else "N") if y1 != y0 else None
    nx, ny = abs(x1 - x0), abs(y1 - y0)
    out: List[List[str]] = []

    def rec(prefix, rx, ry):
        if rx == 0 and ry == 0:
            out.append(prefix)
            return
        if rx:
            rec(prefix + [xm], rx - 1, ry)
        if ry:
            rec(prefix + [ym], rx, ry - 1)

    rec([], nx, ny)
    return out


def path_links(platform, src: int, moves: Sequence[str]) -> List[int]:
    cur = src
    out = []
    for mv in moves:
        link = platform.link_of[(cur, mv)]
        out.append(link.id)
        cur = link.dst
    return out


def path_eligibility(platform, src: int, moves: Sequence[str]) -> List[bool]:
    """Which positions may draw on the hardwired pool: a straight pattern
    entry must exist for (arrival port -> outgoing direction); the first hop
    arrives from the local port and never qualifies."""
    from sdmnoc.platform import OPPOSITE

    cur = platform.link_of[(src, moves[0])]
    elig = [False]
    for i in range(1, len(moves)):
        node = cur.dst
        nxt = platform.link_of[(node, moves[i])]
        entries = platform.pattern.io_entries(node, OPPOSITE[moves[i - 1]], moves[i])
        elig.append(bool(entries))
        cur = nxt
    return elig


def brute_force_mcnf(net) -> Optional[Tuple[int, Dict[int, Dict[Tuple[int, ...], int]]]]:
    """Minimum-cost unit assignment by full enumeration, or None if infeasible.

    Splits every commodity's units over its minimal paths in all possible
    ways (weak compositions), takes the cartesian product over commodities,
    and prices each feasible combination from scratch. Exponential; only for
    micro instances.
    """
    platform = net.platform
    cfg = net.cfg
    cols = cfg.cols
    choices = []  # per commodity: list of {path_links_tuple: width}
    elig_cache: Dict[Tuple[int, ...], List[bool]] = {}
    for c in net.commodities:
        paths = []
        for moves in enumerate_minimal_paths(cols, c.src, c.dst):
            links = tuple(path_links(platform, c.src, moves))
            paths.append(links)
            elig_cache[links] = path_eligibility(platform, c.src, moves)
        splits = []
        for comp in weak_compositions(c.units, len(paths)):
            splits.append({p: w for p, w in zip(paths, comp) if w})
        choices.append(splits)

    best_cost = None
    best_assign = None
    for combo in itertools.product(*choices):
        total = [0] * len(platform.links)
        straight = [0] * len(platform.links)
        for split in combo:
            for links, w in split.items():
                for lid, e in zip(links, elig_cache[links]):
                    total[lid] += w
                    if e:
                        straight[lid] += w
        ok = True
        cost = 0
        for lid in range(len(platform.links)):
            if total[lid] == 0:
                continue
            hw_used = min(straight[lid], net.hw_cap[lid])
            if total[lid] - hw_used > net.reg_cap[lid]:
                ok = False
                break
            cost += cfg.c_hardwired * hw_used + cfg.c_regular * (total[lid] - hw_used)
        if ok and (best_cost is None or cost < best_cost):
            best_cost = cost
            best_assign = {
                c.id: dict(split) for c, split in zip(net.commodities, combo)
            }
    if best_cost is None:
        return None
    return best_cost, best_assign


def weak_compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in weak_compositions(total - first, parts - 1):
            yield (first,) + rest


def sdm_schedule_reference(births: Sequence[int], chunks: int, hops: int,
                           horizon: int) -> List[Tuple[int, int, int]]:
    """Replay of the per-flow source queue: (birth, start, arrival) for every
    packet that begins service before the horizon."""
    free = 0
    out = []
    for b in births:
        start = b if b > free else free
        if start >= horizon:
            break
        free = start + chunks
        out.append((b, start, start + chunks + hops - 1))
    return out


def wormhole_zero_load_latency(hops: int, flits: int) -> int:
    return 3 * hops + flits - 1


def exhaustive_mapping_cost(g, rows: int, cols: int) -> int:
    """Best demand-weighted hop cost over every injective placement."""
    nodes = [(x, y) for y in range(rows) for x in range(cols)]
    best = None
    for perm in itertools.permutations(nodes, g.n_tasks):
        cost = 0
        for f in g.flows:
            cost += f.demand_bps * manhattan(perm[f.src], perm[f.dst])
        if best is None or cost < best:
            best = cost
    return best
