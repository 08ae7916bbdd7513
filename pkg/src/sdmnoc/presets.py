"""Built-in benchmark-shaped workloads.

Task and flow counts follow the usual embedded traffic suites; demands are
drawn per preset from a fixed seed so every run sees the same graph. The
stored frequency is the calibrated operating point for the default platform
(128-bit links, 4-bit units, 48 hardwired wires per port), found by running
the minimum-frequency search and backing off a third or so above it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .ctg import TaskGraph, generate_synthetic_ctg
from .platform import MeshConfig

DEMAND_LO = 8_000_000
DEMAND_HI = 64_000_000

DEFAULT_LINK_WIDTH = 128
DEFAULT_UNIT_WIDTH = 4
DEFAULT_HARDWIRED = 48


@dataclass(frozen=True)
class Preset:
    name: str
    n_tasks: int
    n_flows: int
    rows: int
    cols: int
    ctg_seed: int
    frequency_hz: int

    def task_graph(self) -> TaskGraph:
        return generate_synthetic_ctg(
            self.n_tasks,
            self.n_flows,
            DEMAND_LO,
            DEMAND_HI,
            seed=self.ctg_seed,
            name=self.name,
        )

    def mesh_config(
        self,
        hardwired_per_port: int = DEFAULT_HARDWIRED,
        frequency_hz: Optional[int] = None,
    ) -> MeshConfig:
        return MeshConfig(
            rows=self.rows,
            cols=self.cols,
            link_width=DEFAULT_LINK_WIDTH,
            unit_width=DEFAULT_UNIT_WIDTH,
            hardwired_per_port=hardwired_per_port,
            frequency_hz=self.frequency_hz if frequency_hz is None else frequency_hz,
        )


PRESETS: Dict[str, Preset] = {
    p.name: p
    for p in (
        Preset("mwd", 13, 15, 4, 4, ctg_seed=101, frequency_hz=1_320_000),
        Preset("vopd", 16, 21, 4, 4, ctg_seed=210, frequency_hz=1_550_000),
        Preset("mms", 27, 36, 5, 6, ctg_seed=127, frequency_hz=1_580_000),
        Preset("gsm-dec", 48, 73, 7, 7, ctg_seed=104, frequency_hz=1_580_000),
        Preset("gsm-enc", 36, 56, 6, 6, ctg_seed=105, frequency_hz=1_150_000),
        Preset("robot", 81, 118, 9, 9, ctg_seed=106, frequency_hz=1_570_000),
        Preset("telecom", 24, 25, 4, 6, ctg_seed=214, frequency_hz=1_600_000),
        Preset("auto", 22, 25, 4, 6, ctg_seed=209, frequency_hz=1_100_000),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None
