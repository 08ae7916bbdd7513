"""Command line front end for the design flow.

Subcommands:
  flow             synthesize one instance end to end and write artifacts
  sweep-hardwired  evaluate a range of hardwired-wire budgets
  min-frequency    minimum feasible clock per routing solver
  mapping-study    evaluation outcomes across mapping strategies

Exit codes: 0 success, 2 bad input, 3 mapping failed, 4 routing infeasible,
5 solver budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import replace
from multiprocessing import Pool
from typing import Dict, List, Optional, Tuple

from .ctg import CtgError, TaskGraph, load_ctg, render_ctg
from .mapping import (
    Mapping,
    MappingError,
    map_tasks_heuristic,
    map_tasks_random,
    mapping_cost,
)
from .metrics import (
    CostModel,
    CostModelError,
    estimate_area,
    estimate_power,
    compare_networks,
    load_cost_model,
    sdm_structure,
    wormhole_structure,
)
from .platform import MeshConfig, PlatformError, build_mesh
from .presets import (
    DEFAULT_HARDWIRED,
    DEFAULT_LINK_WIDTH,
    DEFAULT_UNIT_WIDTH,
    PRESETS,
    get_preset,
)
from .routing import (
    BudgetExceeded,
    RoutingInfeasible,
    SOLVERS,
    build_flow_network,
    find_min_feasible_frequency,
    realize_circuits,
)
from .sim import (
    DEFAULT_HORIZON,
    DEFAULT_PACKET_BITS,
    PORT_INDEX,
    generate_workload,
    simulate_sdm,
    simulate_wormhole,
)

DEFAULT_SWEEP_LEVELS = "0,16,32,48,64,80,96,112,128"


# ---------------------------------------------------------------------------
# small shared plumbing

def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True))
        fh.write("\n")


def _write_csv(path: str, header_comment: str, fieldnames: List[str], rows: List[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header_comment + "\n")
        w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def _hash_dict(d: dict) -> str:
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _resolve_instance(args) -> Tuple[TaskGraph, MeshConfig, Optional[str]]:
    """Task graph and platform config from either a preset or explicit files."""
    if args.preset:
        preset = get_preset(args.preset)
        g = preset.task_graph()
        cfg = preset.mesh_config(
            hardwired_per_port=args.hardwired if args.hardwired is not None else DEFAULT_HARDWIRED,
            frequency_hz=args.frequency,
        )
        return g, cfg, preset.name
    if not args.ctg:
        raise CtgError("either --preset or --ctg is required")
    if args.rows is None or args.cols is None:
        raise CtgError("--rows and --cols are required with --ctg")
    if args.frequency is None:
        raise CtgError("--frequency is required with --ctg")
    g = load_ctg(args.ctg)
    cfg = MeshConfig(
        rows=args.rows,
        cols=args.cols,
        link_width=args.link_width,
        unit_width=args.unit_width,
        hardwired_per_port=args.hardwired if args.hardwired is not None else DEFAULT_HARDWIRED,
        frequency_hz=args.frequency,
    )
    return g, cfg, None


def _cost_model(args) -> CostModel:
    if getattr(args, "cost_model", None):
        return load_cost_model(args.cost_model)
    return CostModel()


def _make_mapping(g: TaskGraph, cfg: MeshConfig, mapper: str, seed: int) -> Mapping:
    if mapper == "heuristic":
        return map_tasks_heuristic(g, cfg, seed=seed)
    if mapper == "random":
        return map_tasks_random(g, cfg, seed=seed)
    raise MappingError(f"unknown mapper {mapper!r}")


def _run_config(g: TaskGraph, cfg: MeshConfig, args, extra: dict) -> dict:
    d = {
        "ctg": {"name": g.name, "sha": _hash_dict(json.loads(render_ctg(g)))},
        "platform": cfg.to_json_dict(),
        **extra,
    }
    d["config_hash"] = _hash_dict({k: v for k, v in d.items() if k != "config_hash"})
    return d


def _evaluate(
    g: TaskGraph,
    cfg: MeshConfig,
    m: Mapping,
    solver: str,
    model: CostModel,
    horizon: int,
    packet_bits: int,
    workload_model: str,
    workload_seed: int,
):
    """Route, realize, simulate both networks, and price them."""
    platform = build_mesh(cfg)
    net = build_flow_network(platform, m, g)
    alloc = SOLVERS[solver](net)
    plan = realize_circuits(platform, alloc)
    wl = generate_workload(
        g, cfg, horizon=horizon, seed=workload_seed, packet_bits=packet_bits, model=workload_model
    )
    sdm = simulate_sdm(plan, wl)
    worm = simulate_wormhole(cfg, m, g, wl)
    s_struct = sdm_structure(platform)
    w_struct = wormhole_structure(cfg)
    sdm_pow = estimate_power(sdm, model, s_struct, cfg)
    worm_pow = estimate_power(worm, model, w_struct, cfg)
    sdm_area = estimate_area(model, s_struct)
    worm_area = estimate_area(model, w_struct)
    report = compare_networks(sdm, worm, sdm_pow, worm_pow, sdm_area, worm_area)
    return {
        "platform": platform,
        "alloc": alloc,
        "plan": plan,
        "workload": wl,
        "sdm": sdm,
        "worm": worm,
        "sdm_power": sdm_pow,
        "worm_power": worm_pow,
        "sdm_area": sdm_area,
        "worm_area": worm_area,
        "structures": {"sdm": s_struct, "wormhole": w_struct},
        "report": report,
    }


# ---------------------------------------------------------------------------
# flow

def cmd_flow(args) -> int:
    g, cfg, preset_name = _resolve_instance(args)
    model = _cost_model(args)
    m = _make_mapping(g, cfg, args.mapper, args.map_seed)
    ev = _evaluate(
        g, cfg, m, args.solver, model,
        args.horizon, args.packet_bits, args.workload, args.workload_seed,
    )
    os.makedirs(args.out, exist_ok=True)
    run_cfg = _run_config(g, cfg, args, {
        "command": "flow",
        "preset": preset_name,
        "mapper": args.mapper,
        "map_seed": args.map_seed,
        "solver": args.solver,
        "horizon": args.horizon,
        "packet_bits": args.packet_bits,
        "workload": args.workload,
        "workload_seed": args.workload_seed,
        "coefficient_hash": model.coefficient_hash(),
    })
    ch = run_cfg["config_hash"]
    coeff = model.coefficient_hash()
    comment = f"# config={ch} coefficients={coeff}"

    _write_json(os.path.join(args.out, "run_config.json"), run_cfg)
    _write_json(os.path.join(args.out, "mapping.json"), {
        **m.to_json_dict(), "cost": mapping_cost(g, m),
    })
    plan = ev["plan"]
    _write_json(os.path.join(args.out, "circuits.json"), {
        **plan.to_json_dict(),
        "allocation_cost": ev["alloc"].cost,
        "frequency_hz": cfg.frequency_hz,
    })
    _write_json(os.path.join(args.out, "sim_sdm.json"), ev["sdm"].to_json_dict())
    _write_json(os.path.join(args.out, "sim_wormhole.json"), ev["worm"].to_json_dict())
    _write_json(os.path.join(args.out, "report.json"), {
        "config_hash": ch,
        "comparison": ev["report"],
        "power": {
            "sdm": ev["sdm_power"].to_json_dict(),
            "wormhole": ev["worm_power"].to_json_dict(),
        },
        "area": {"sdm": ev["sdm_area"], "wormhole": ev["worm_area"]},
        "structures": {
            "sdm": ev["structures"]["sdm"].to_json_dict(),
            "wormhole": ev["structures"]["wormhole"].to_json_dict(),
        },
        "demotions": plan.demotions,
    })

    sdm, worm = ev["sdm"], ev["worm"]
    frows = []
    for f in g.flows:
        ss, ws = sdm.flow_stats[f.id], worm.flow_stats[f.id]
        circuit = plan.circuits[f.id]
        frows.append({
            "flow": f.id,
            "src_task": f.src,
            "dst_task": f.dst,
            "demand_bps": f.demand_bps,
            "units": circuit.units,
            "hops": circuit.hop_count(),
            "offered": ss.offered,
            "sdm_delivered": ss.delivered,
            "sdm_mean_latency": _fmt(ss.mean_latency()),
            "wormhole_delivered": ws.delivered,
            "wormhole_mean_latency": _fmt(ws.mean_latency()),
        })
    _write_csv(
        os.path.join(args.out, "flows.csv"), comment,
        list(frows[0].keys()) if frows else ["flow"], frows,
    )

    platform = ev["platform"]
    hw_loads, reg_loads = ev["alloc"].link_loads()
    lrows = []
    for link in platform.links:
        sx, sy = platform.node_coord(link.src)
        dx, dy = platform.node_coord(link.dst)
        opidx = link.src * 5 + PORT_INDEX[link.direction]
        lrows.append({
            "link": link.id,
            "src": f"{sx},{sy}",
            "dst": f"{dx},{dy}",
            "dir": link.direction,
            "sdm_units_hardwired": hw_loads[link.id],
            "sdm_units_regular": reg_loads[link.id],
            "sdm_busy_unit_cycles": sdm.link_busy.get(link.id, 0),
            "wormhole_flit_cycles": worm.link_busy.get(opidx, 0),
        })
    _write_csv(
        os.path.join(args.out, "links.csv"), comment, list(lrows[0].keys()), lrows,
    )

    lat = ev["report"]["latency"]
    pw = ev["report"]["power"]
    print(
        f"flow: {len(g.flows)} flows routed (cost {ev['alloc'].cost}), "
        f"latency sdm/wormhole = {_fmt(lat['sdm_mean_cycles'])}/{_fmt(lat['wormhole_mean_cycles'])} cycles, "
        f"power saving = {_fmt(pw['saving'])}"
    )
    print(f"artifacts written to {args.out}")
    return 0


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


# ---------------------------------------------------------------------------
# sweep-hardwired

def _sweep_eval(payload) -> dict:
    (g, cfg, m, level, solver, model, horizon, packet_bits, wl_model, wl_seed) = payload
    cfg_l = replace(cfg, hardwired_per_port=level)
    try:
        ev = _evaluate(g, cfg_l, m, solver, model, horizon, packet_bits, wl_model, wl_seed)
    except RoutingInfeasible as e:
        return {"level": level, "feasible": False, "reason": e.reason}
    plan = ev["plan"]
    hw_x, cfg_x = plan.crosspoint_counts()
    return {
        "level": level,
        "feasible": True,
        "allocation_cost": ev["alloc"].cost,
        "demotions": plan.demotions,
        "crosspoints_hardwired": hw_x,
        "crosspoints_configurable": cfg_x,
        "sdm_dynamic": ev["sdm_power"].dynamic,
        "sdm_leakage": ev["sdm_power"].leakage,
        "sdm_total": ev["sdm_power"].total,
        "sdm_area": ev["sdm_area"],
        "sdm_mean_latency": ev["sdm"].mean_latency(),
    }


def cmd_sweep_hardwired(args) -> int:
    g, cfg, preset_name = _resolve_instance(args)
    model = _cost_model(args)
    m = _make_mapping(g, cfg, args.mapper, args.map_seed)
    levels = []
    for tok in args.levels.split(","):
        tok = tok.strip()
        if tok:
            levels.append(int(tok))
    if not levels:
        raise PlatformError("no sweep levels given")
    for lv in levels:
        if lv % cfg.unit_width or not (0 <= lv <= cfg.link_width):
            raise PlatformError(
                f"sweep level {lv} is not a multiple of unit width in [0, link width]"
            )
    payloads = [
        (g, cfg, m, lv, args.solver, model, args.horizon, args.packet_bits,
         args.workload, args.workload_seed)
        for lv in levels
    ]
    if args.workers > 1:
        with Pool(args.workers) as pool:
            rows = pool.map(_sweep_eval, payloads)
    else:
        rows = [_sweep_eval(p) for p in payloads]

    base = next((r for r in rows if r["level"] == 0 and r["feasible"]), None)
    for r in rows:
        if r["feasible"] and base is not None:
            r["power_ratio_vs_level0"] = r["sdm_total"] / base["sdm_total"]
        else:
            r["power_ratio_vs_level0"] = None

    os.makedirs(args.out, exist_ok=True)
    run_cfg = _run_config(g, cfg, args, {
        "command": "sweep-hardwired",
        "preset": preset_name,
        "levels": levels,
        "mapper": args.mapper,
        "map_seed": args.map_seed,
        "solver": args.solver,
        "horizon": args.horizon,
        "coefficient_hash": model.coefficient_hash(),
    })
    comment = f"# config={run_cfg['config_hash']} coefficients={model.coefficient_hash()}"
    fields = [
        "level", "feasible", "allocation_cost", "demotions",
        "crosspoints_hardwired", "crosspoints_configurable",
        "sdm_dynamic", "sdm_leakage", "sdm_total", "sdm_area",
        "sdm_mean_latency", "power_ratio_vs_level0", "reason",
    ]
    csv_rows = [{k: _fmt(r.get(k)) for k in fields} for r in rows]
    _write_csv(os.path.join(args.out, "sweep.csv"), comment, fields, csv_rows)
    _write_json(os.path.join(args.out, "sweep.json"), {
        "config": run_cfg,
        "rows": [{k: r.get(k) for k in fields} for r in rows],
    })
    feas = sum(1 for r in rows if r["feasible"])
    print(f"sweep-hardwired: {feas}/{len(rows)} levels feasible; artifacts in {args.out}")
    return 0


# ---------------------------------------------------------------------------
# min-frequency

def cmd_min_frequency(args) -> int:
    g, cfg, preset_name = _resolve_instance(args)
    m = _make_mapping(g, cfg, args.mapper, args.map_seed)
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    for s in solvers:
        if s not in SOLVERS:
            raise CtgError(f"unknown solver {s!r}; choose from {sorted(SOLVERS)}")
    rows = []
    for s in solvers:
        try:
            res = find_min_feasible_frequency(
                g, cfg, m, solver=s, f0=args.f0, growth=args.growth
            )
            rows.append({
                "solver": s,
                "feasible": True,
                "min_frequency_hz": res.frequency_hz,
                "grid_k": res.k,
                "probes": len(res.probes),
                "allocation_cost": res.allocation.cost,
            })
        except RoutingInfeasible as e:
            rows.append({
                "solver": s,
                "feasible": False,
                "min_frequency_hz": None,
                "grid_k": None,
                "probes": None,
                "allocation_cost": None,
            })
    os.makedirs(args.out, exist_ok=True)
    run_cfg = _run_config(g, cfg, args, {
        "command": "min-frequency",
        "preset": preset_name,
        "solvers": solvers,
        "f0": args.f0,
        "growth": args.growth,
        "mapper": args.mapper,
        "map_seed": args.map_seed,
    })
    comment = f"# config={run_cfg['config_hash']}"
    fields = ["solver", "feasible", "min_frequency_hz", "grid_k", "probes", "allocation_cost"]
    _write_csv(
        os.path.join(args.out, "min_frequency.csv"), comment, fields,
        [{k: _fmt(r[k]) for k in fields} for r in rows],
    )
    _write_json(os.path.join(args.out, "min_frequency.json"), {"config": run_cfg, "rows": rows})
    for r in rows:
        f = r["min_frequency_hz"]
        print(f"min-frequency[{r['solver']}]: {f if f else 'infeasible'}")
    print(f"artifacts written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# mapping-study

def cmd_mapping_study(args) -> int:
    g, cfg, preset_name = _resolve_instance(args)
    model = _cost_model(args)
    variants: List[Tuple[str, Mapping]] = [
        ("heuristic", map_tasks_heuristic(g, cfg, seed=args.map_seed))
    ]
    for s in range(args.random_seeds):
        variants.append((f"random-{s}", map_tasks_random(g, cfg, seed=s)))
    rows = []
    for label, m in variants:
        fres = find_min_feasible_frequency(g, cfg, m, solver="heuristic", f0=args.f0)
        k_op = fres.k + args.margin_steps
        f_op = round(args.f0 * 1.05 ** k_op)
        cfg_op = replace(cfg, frequency_hz=f_op)
        ev = _evaluate(
            g, cfg_op, m, "heuristic", model,
            args.horizon, args.packet_bits, args.workload, args.workload_seed,
        )
        rep = ev["report"]
        rows.append({
            "mapping": label,
            "mapping_cost": mapping_cost(g, m),
            "min_frequency_hz": fres.frequency_hz,
            "operating_frequency_hz": f_op,
            "sdm_mean_latency": rep["latency"]["sdm_mean_cycles"],
            "wormhole_mean_latency": rep["latency"]["wormhole_mean_cycles"],
            "latency_saving": rep["latency"]["saving"],
            "sdm_power": rep["power"]["sdm_total"],
            "wormhole_power": rep["power"]["wormhole_total"],
            "power_saving": rep["power"]["saving"],
            "wormhole_saturated": rep["delivery"]["wormhole_saturated"],
        })
    heur = rows[0]
    rand = rows[1:]
    summary = {}
    if rand:
        mean_lat = sum(r["latency_saving"] for r in rand) / len(rand)
        mean_pow = sum(r["power_saving"] for r in rand) / len(rand)
        summary = {
            "heuristic_latency_saving": heur["latency_saving"],
            "random_latency_saving_mean": mean_lat,
            "heuristic_power_saving": heur["power_saving"],
            "random_power_saving_mean": mean_pow,
            "random_latency_saving_ge_heuristic": mean_lat >= heur["latency_saving"],
            "random_power_saving_ge_heuristic": mean_pow >= heur["power_saving"],
        }
    os.makedirs(args.out, exist_ok=True)
    run_cfg = _run_config(g, cfg, args, {
        "command": "mapping-study",
        "preset": preset_name,
        "random_seeds": args.random_seeds,
        "map_seed": args.map_seed,
        "margin_steps": args.margin_steps,
        "f0": args.f0,
        "horizon": args.horizon,
        "coefficient_hash": model.coefficient_hash(),
    })
    comment = f"# config={run_cfg['config_hash']} coefficients={model.coefficient_hash()}"
    fields = list(rows[0].keys())
    _write_csv(
        os.path.join(args.out, "mapping_study.csv"), comment, fields,
        [{k: _fmt(r[k]) for k in fields} for r in rows],
    )
    _write_json(os.path.join(args.out, "mapping_study.json"), {
        "config": run_cfg, "rows": rows, "summary": summary,
    })
    print(f"mapping-study: {len(rows)} mappings evaluated; artifacts in {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), help="built-in workload")
    p.add_argument("--ctg", help="task graph JSON file (alternative to --preset)")
    p.add_argument("--rows", type=int, help="mesh rows (with --ctg)")
    p.add_argument("--cols", type=int, help="mesh columns (with --ctg)")
    p.add_argument("--link-width", type=int, default=DEFAULT_LINK_WIDTH)
    p.add_argument("--unit-width", type=int, default=DEFAULT_UNIT_WIDTH)
    p.add_argument("--hardwired", type=int, default=None,
                   help=f"hardwired wires per port (default {DEFAULT_HARDWIRED})")
    p.add_argument("--frequency", type=int, default=None,
                   help="clock in Hz (defaults to the preset's calibrated value)")
    p.add_argument("--mapper", choices=["heuristic", "random"], default="heuristic")
    p.add_argument("--map-seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.add_argument("--packet-bits", type=int, default=DEFAULT_PACKET_BITS)
    p.add_argument("--workload", choices=["periodic", "bernoulli"], default="periodic")
    p.add_argument("--workload-seed", type=int, default=0)
    p.add_argument("--cost-model", help="cost model JSON (defaults built in)")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sdmnoc",
        description="SDM circuit-switched NoC synthesis and evaluation",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flow", help="full design flow on one instance")
    _add_instance_args(p)
    _add_sim_args(p)
    p.add_argument("--solver", choices=sorted(SOLVERS), default="heuristic")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("sweep-hardwired", help="evaluate hardwired budgets")
    _add_instance_args(p)
    _add_sim_args(p)
    p.add_argument("--solver", choices=sorted(SOLVERS), default="heuristic")
    p.add_argument("--levels", default=DEFAULT_SWEEP_LEVELS,
                   help="comma-separated hardwired levels")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep_hardwired)

    p = sub.add_parser("min-frequency", help="minimum feasible clock per solver")
    _add_instance_args(p)
    p.add_argument("--solvers", default="heuristic,greedy")
    p.add_argument("--f0", type=int, default=125_000, help="grid origin in Hz")
    p.add_argument("--growth", type=float, default=1.05)
    p.set_defaults(func=cmd_min_frequency)

    p = sub.add_parser("mapping-study", help="compare mapping strategies")
    _add_instance_args(p)
    _add_sim_args(p)
    p.add_argument("--random-seeds", type=int, default=10)
    p.add_argument("--margin-steps", type=int, default=2,
                   help="grid steps above the minimum frequency to operate at")
    p.add_argument("--f0", type=int, default=125_000)
    p.set_defaults(func=cmd_mapping_study)
    return ap


def main(argv=None) -> int:
    ap = build_arg_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except MappingError as e:
        print(f"error: mapping failed: {e}", file=sys.stderr)
        return 3
    except RoutingInfeasible as e:
        print(f"error: routing infeasible: {e.reason}", file=sys.stderr)
        return 4
    except BudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return 5
    except (CtgError, PlatformError, CostModelError, KeyError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
