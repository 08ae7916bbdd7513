"""Cycle-level evaluation of a synthesized SDM network and a wormhole reference.

Both simulators consume the same workload (per-flow packet birth cycles) and
report the same result shape, so latency and event counts are directly
comparable. The SDM side is a closed-form pipeline recurrence per flow; the
wormhole side is a cycle-accurate router model with credit flow control.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .ctg import TaskGraph
from .mapping import Mapping
from .platform import DELTA, MeshConfig, OPPOSITE
from .routing import CircuitPlan

DEFAULT_PACKET_BITS = 1024
DEFAULT_HORIZON = 10_000

# wormhole microarchitecture constants
FIFO_DEPTH = 8
HOP_CYCLES = 3  # switch allocation, switch traversal, link traversal


@dataclass
class Workload:
    """Per-flow packet birth cycles, identical input for both simulators."""

    packet_bits: int
    horizon: int
    births: Dict[int, Tuple[int, ...]]  # flow id -> sorted birth cycles
    model: str = "periodic"

    def total_packets(self) -> int:
        return sum(len(b) for b in self.births.values())


def generate_workload(
    g: TaskGraph,
    cfg: MeshConfig,
    horizon: int = DEFAULT_HORIZON,
    seed: int = 0,
    packet_bits: int = DEFAULT_PACKET_BITS,
    model: str = "periodic",
) -> Workload:
    """Packetize each flow's bit rate at the platform clock.

    A flow of d bit/s emits a packet every packet_bits * f / d cycles.
    "periodic" keeps that spacing exactly (random initial phase); "bernoulli"
    draws geometric gaps with the same mean. Flows whose demand exceeds the
    link bandwidth would need a period under one cycle; they are clamped to
    one packet per cycle.
    """
    if model not in ("periodic", "bernoulli"):
        raise ValueError(f"unknown workload model {model!r}")
    rng = random.Random(seed)
    births: Dict[int, Tuple[int, ...]] = {}
    f = cfg.frequency_hz
    for flow in g.flows:
        period = packet_bits * f / flow.demand_bps  # cycles, real-valued
        if period < 1.0:
            period = 1.0
        out: List[int] = []
        if model == "periodic":
            phase = rng.random() * period
            k = 0
            while True:
                t = int(phase + k * period)
                if t >= horizon:
                    break
                out.append(t)
                k += 1
        else:
            t = rng.expovariate(1.0 / period)
            while t < horizon:
                out.append(int(t))
                t += max(1.0, rng.expovariate(1.0 / period))
        births[flow.id] = tuple(out)
    return Workload(packet_bits=packet_bits, horizon=horizon, births=births, model=model)


@dataclass
class FlowStats:
    offered: int = 0
    delivered: int = 0
    latency_sum: int = 0
    latency_max: int = 0

    def mean_latency(self) -> Optional[float]:
        if self.delivered == 0:
            return None
        return self.latency_sum / self.delivered


@dataclass
class SimResult:
    kind: str
    cycles: int
    frequency_hz: int
    packet_bits: int
    flow_stats: Dict[int, FlowStats]
    events: Dict[str, int]
    link_busy: Dict[int, int] = field(default_factory=dict)  # unit-cycles or flit-cycles

    @property
    def offered(self) -> int:
        return sum(s.offered for s in self.flow_stats.values())

    @property
    def delivered(self) -> int:
        return sum(s.delivered for s in self.flow_stats.values())

    def mean_latency(self) -> Optional[float]:
        n = self.delivered
        if n == 0:
            return None
        return sum(s.latency_sum for s in self.flow_stats.values()) / n

    @property
    def saturated(self) -> bool:
        off = self.offered
        return off > 0 and (off - self.delivered) / off > 0.05

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "cycles": self.cycles,
            "frequency_hz": self.frequency_hz,
            "packet_bits": self.packet_bits,
            "packets_offered": self.offered,
            "packets_delivered": self.delivered,
            "saturated": self.saturated,
            "mean_latency_cycles": self.mean_latency(),
            "events": {k: self.events[k] for k in sorted(self.events)},
            "flows": {
                str(fid): {
                    "offered": s.offered,
                    "delivered": s.delivered,
                    "mean_latency_cycles": s.mean_latency(),
                    "max_latency_cycles": s.latency_max,
                }
                for fid, s in sorted(self.flow_stats.items())
            },
        }


# ---------------------------------------------------------------------------
# SDM circuit simulator

def simulate_sdm(plan: CircuitPlan, workload: Workload) -> SimResult:
    """Chunk-pipelined transmission over the realized circuits.

    A packet is cut into ceil(packet_bits / (units * m)) chunks; one chunk
    enters the circuit per cycle and crosses one register per hop, so a packet
    that starts service at t0 fully arrives at t0 + chunks + hops - 1. The
    only contention is with earlier packets of the same flow at the source.
    """
    cfg = plan.platform.cfg
    m = cfg.unit_width
    horizon = workload.horizon
    b_bits = workload.packet_bits
    events = {
        "register_write": 0,
        "register_read": 0,
        "crosspoint_hardwired": 0,
        "crosspoint_configurable": 0,
        "link_bit_hops": 0,
    }
    link_busy: Dict[int, int] = {}
    stats: Dict[int, FlowStats] = {}
    for fid in sorted(plan.circuits):
        circuit = plan.circuits[fid]
        births = workload.births.get(fid, ())
        st = FlowStats(offered=len(births))
        stats[fid] = st
        w = circuit.units
        hops = circuit.hop_count()
        chunks = -(-b_bits // (w * m))
        hw_stages = sum(1 for xp in circuit.crosspoints if xp.tag == "hardwired")
        cfg_stages = len(circuit.crosspoints) - hw_stages
        # crosspoints are recorded per unit, so stage totals already sum units
        t_free = 0
        served = 0
        for b in births:
            t0 = max(b, t_free)
            if t0 >= horizon:
                break
            t_free = t0 + chunks
            served += 1
            arrival = t0 + chunks + hops - 1
            if arrival < horizon:
                st.delivered += 1
                lat = arrival - b
                st.latency_sum += lat
                if lat > st.latency_max:
                    st.latency_max = lat
        events["register_write"] += served * chunks * w * hops
        events["register_read"] += served * chunks * w * hops
        events["crosspoint_hardwired"] += served * chunks * hw_stages
        events["crosspoint_configurable"] += served * chunks * cfg_stages
        events["link_bit_hops"] += served * b_bits * hops
        for br in circuit.branches:
            for lid in br.links:
                link_busy[lid] = link_busy.get(lid, 0) + served * chunks * br.width
    return SimResult(
        kind="sdm",
        cycles=horizon,
        frequency_hz=cfg.frequency_hz,
        packet_bits=b_bits,
        flow_stats=stats,
        events=events,
        link_busy=link_busy,
    )


# ---------------------------------------------------------------------------
# wormhole reference simulator

PORT_INDEX = {"E": 0, "W": 1, "N": 2, "S": 3, "L": 4}
_IDX_DIR = ("E", "W", "N", "S")


def simulate_wormhole(
    cfg: MeshConfig,
    m: Mapping,
    g: TaskGraph,
    workload: Workload,
) -> SimResult:
    """Cycle-accurate XY wormhole mesh with credit-based flow control.

    Router pipeline: switch allocation and traversal plus one link cycle per
    hop (3 cycles), input FIFOs of 8 flits on every port including local,
    atomic per-packet output holding, round-robin arbitration per output,
    one ejected flit per router per cycle. Packets are 8 flits at the default
    sizes (packet_bits / link_width).
    """
    rows, cols = cfg.rows, cfg.cols
    n = rows * cols
    horizon = workload.horizon
    flits_per_pkt = -(-workload.packet_bits // cfg.link_width)
    node_of_task = [y * cols + x for (x, y) in m.placement]
    dst_of_flow = {f.id: node_of_task[f.dst] for f in g.flows}

    # flat port indexing: r*5 + {E,W,N,S,L}
    def port(r: int, p: int) -> int:
        return r * 5 + p

    # downstream input port fed by output (r, d); -1 at mesh edge
    down = [-1] * (n * 5)
    up_out = [-1] * (n * 5)  # output feeding input port (r, p)
    for r in range(n):
        x, y = r % cols, r // cols
        for di, d in enumerate(_IDX_DIR):
            dx, dy = DELTA[d]
            nx, ny = x + dx, y + dy
            if 0 <= nx < cols and 0 <= ny < rows:
                nr = ny * cols + nx
                down[port(r, di)] = port(nr, PORT_INDEX[OPPOSITE[d]])
                up_out[port(nr, PORT_INDEX[OPPOSITE[d]])] = port(r, di)

    fifo: List[deque] = [deque() for _ in range(n * 5)]
    credit = [FIFO_DEPTH] * (n * 5)  # free slots of the fifo fed by this OUTPUT
    local_free = [FIFO_DEPTH] * n
    locked = [-1] * (n * 5)
    rr = [0] * (n * 5)

    # flit: (avail_cycle, fid, seq, flit_no, dst)
    births = workload.births
    stats = {f.id: FlowStats(offered=len(births.get(f.id, ()))) for f in g.flows}
    src_events: List[Tuple[int, int, int]] = []  # (birth, fid, seq)
    for f in g.flows:
        for seq, b in enumerate(births.get(f.id, ())):
            src_events.append((b, f.id, seq))
    src_events.sort()
    by_node: Dict[int, deque] = {r: deque() for r in range(n)}
    for b, fid, seq in src_events:
        by_node[node_of_task[g.flows[fid].src]].append((b, fid, seq, 0))

    events = {
        "buffer_write": 0,
        "buffer_read": 0,
        "crossbar_unit": 0,
        "arbiter_decision": 0,
        "route_compute": 0,
        "link_bit_hops": 0,
    }
    link_busy: Dict[int, int] = {}
    unit_equiv = cfg.link_width // cfg.unit_width

    def xy_out(r: int, dst: int) -> int:
        x, y = r % cols, r // cols
        dx_, dy_ = dst % cols, dst // cols
        if x < dx_:
            return 0
        if x > dx_:
            return 1
        if y < dy_:
            return 3
        if y > dy_:
            return 2
        return 4

    active = 0  # flits anywhere in the network
    for t in range(horizon):
        # injection: one flit per router per cycle into the local fifo;
        # packets enter atomically in birth order
        for r in range(n):
            q = by_node[r]
            if not q:
                continue
            b, fid, seq, flit_no = q[0]
            if b <= t and local_free[r] > 0:
                q.popleft()
                fifo[port(r, 4)].append((t, fid, seq, flit_no, dst_of_flow[fid]))
                local_free[r] -= 1
                events["buffer_write"] += 1
                active += 1
                if flit_no + 1 < flits_per_pkt:
                    q.appendleft((b, fid, seq, flit_no + 1))
        if active == 0:
            continue
        grants: List[Tuple[int, int, tuple]] = []  # (out_pidx, in_pidx, flit)
        for r in range(n):
            base = r * 5
            want: Dict[int, List[int]] = {}
            for p in range(5):
                fq = fifo[base + p]
                if not fq or fq[0][0] > t:
                    continue
                fl = fq[0]
                if fl[3] == 0:
                    o = xy_out(r, fl[4])
                else:
                    # body flits follow the output their packet holds
                    o = -1
                    for cand in range(5):
                        if locked[base + cand] == p:
                            o = cand
                            break
                    if o == -1:
                        continue
                want.setdefault(o, []).append(p)
            for o in sorted(want):
                reqs = want[o]
                opidx = base + o
                # arbiter switching tracks the populated request lines, so a
                # blocked head burns a decision every cycle it keeps asking
                events["arbiter_decision"] += len(reqs)
                if locked[opidx] != -1:
                    if locked[opidx] not in reqs:
                        continue
                    p = locked[opidx]
                else:
                    start = rr[opidx]
                    p = min(reqs, key=lambda q_: ((q_ - start) % 5))
                if o != 4 and credit[opidx] <= 0:
                    continue
                grants.append((opidx, base + p, fifo[base + p][0]))
        # apply grants
        for opidx, ipidx, fl in grants:
            r = opidx // 5
            o = opidx % 5
            fifo[ipidx].popleft()
            events["buffer_read"] += 1
            events["crossbar_unit"] += unit_equiv
            avail, fid, seq, flit_no, dst = fl
            if flit_no == 0:
                events["route_compute"] += 1
                locked[opidx] = ipidx % 5
                rr[opidx] = (ipidx % 5 + 1) % 5
            if ipidx % 5 == 4:
                local_free[r] += 1
            else:
                credit[up_out[ipidx]] += 1
            if o == 4:
                active -= 1
                if flit_no == flits_per_pkt - 1:
                    locked[opidx] = -1
                    st = stats[fid]
                    st.delivered += 1
                    lat = t - births[fid][seq]
                    st.latency_sum += lat
                    if lat > st.latency_max:
                        st.latency_max = lat
            else:
                credit[opidx] -= 1
                events["link_bit_hops"] += cfg.link_width
                link_busy[opidx] = link_busy.get(opidx, 0) + 1
                fifo[down[opidx]].append((t + HOP_CYCLES, fid, seq, flit_no, dst))
                events["buffer_write"] += 1
                if flit_no == flits_per_pkt - 1:
                    locked[opidx] = -1
    return SimResult(
        kind="wormhole",
        cycles=horizon,
        frequency_hz=cfg.frequency_hz,
        packet_bits=workload.packet_bits,
        flow_stats=stats,
        events=events,
        link_busy=link_busy,
    )
