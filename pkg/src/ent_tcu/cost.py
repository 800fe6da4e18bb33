"""Structural counting and coefficient-driven area/power estimates for TCUs.

Units: area in um^2, power in uW, delay in ns for per-component entries;
SoC entries (buffers, SIMD) use um^2 and W as measured. Reports convert to
mm^2 and W.

Only structural effects are modeled. Layout and wiring gains from a smaller
array after place-and-route are not, so reports carry ``provenance="modeled"``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from statistics import mean
from typing import Dict, Iterable, List, Optional

from .encoding import Scheme, encoded_width
from .simulator import OPERAND_WIDTH, ArchConfig, Kind, Mode, scale_config


class TableError(KeyError):
    pass


def _encoder_rows(scheme: str, rows) -> Dict[str, dict]:
    out = {}
    for width, area, delay, power in rows:
        number, en_width = encoded_width(width, scheme)
        out[str(width)] = {
            "Area": area, "Delay": delay, "Power": power,
            "Number": number, "En-Width": en_width,
        }
    return out


_MBE_ENCODERS = [
    (8, 28.22, 0.23, 24.06), (10, 35.28, 0.23, 30.07), (12, 42.34, 0.23, 36.03),
    (14, 49.39, 0.23, 42.03), (16, 56.45, 0.23, 48.05), (18, 63.50, 0.23, 54.01),
    (20, 70.56, 0.23, 60.00), (24, 84.67, 0.23, 71.96), (32, 112.90, 0.23, 95.89),
]
_OURS_ENCODERS = [
    (8, 25.93, 0.36, 21.47), (10, 34.57, 0.45, 28.47), (12, 42.22, 0.54, 35.49),
    (14, 50.86, 0.63, 42.45), (16, 60.51, 0.71, 49.40), (18, 69.15, 0.80, 56.36),
    (20, 77.79, 0.89, 63.38), (24, 95.08, 1.06, 77.23), (32, 129.65, 1.41, 105.14),
]


@dataclass
class CostTable:
    single_encoder: Dict[str, dict] = field(default_factory=dict)
    encoders: Dict[str, Dict[str, dict]] = field(default_factory=dict)
    multipliers: Dict[str, dict] = field(default_factory=dict)
    register: Dict[str, float] = field(default_factory=dict)
    wire: Dict[str, float] = field(default_factory=dict)
    accumulator: Dict[str, float] = field(default_factory=dict)
    global_buffer: Dict[str, float] = field(default_factory=dict)
    act_weight_buffer: Dict[str, float] = field(default_factory=dict)
    simd: Dict[str, object] = field(default_factory=dict)

    def to_json(self, **kwargs) -> str:
        return json.dumps(asdict(self), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "CostTable":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise TableError(f"unknown cost-table sections: {sorted(unknown)}")
        return cls(**data)

    def dump(self, path) -> None:
        Path(path).write_text(self.to_json(indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "CostTable":
        return cls.from_json(Path(path).read_text())

    def lookup(self, section: str, *keys: str) -> float:
        node = getattr(self, section)
        try:
            for key in keys:
                node = node[key]
        except (KeyError, TypeError):
            raise TableError(f"missing coefficient {section}/{'/'.join(keys)}") from None
        if isinstance(node, (int, float)) and node < 0:
            raise TableError(f"negative coefficient {section}/{'/'.join(keys)}")
        return node

    def encoder(self, scheme: Scheme, width: int, metric: str) -> float:
        return self.lookup("encoders", "MBE" if scheme is Scheme.MBE else "Ours", str(width), metric)


def default_cost_table() -> CostTable:
    """Measured coefficients plus documented defaults for the unmeasured ones.

    ``register.bit_power_uw`` is 15.13 uW spread over 4 bits. Register,
    wire and accumulator areas have no measured value and default to 0.
    ``wire.bit_power_uw`` (multiplicand delivery per bit per multiplier) and
    ``accumulator.bit_power_uw`` are model defaults, not measurements.
    """
    return CostTable(
        single_encoder={
            "MBE": {"AND": 2, "NAND": 2, "NOR": 1, "XNOR": 1, "Area": 7.06},
            "Ours": {"AND": 1, "NAND": 3, "NOR": 0, "XNOR": 2, "Area": 8.64},
        },
        encoders={
            "MBE": _encoder_rows("mbe", _MBE_ENCODERS),
            "Ours": _encoder_rows("ours", _OURS_ENCODERS),
        },
        multipliers={
            "DW IP": {"Area": 291.6, "Delay": 1.87, "Power": 211.4},
            "MBE": {"Area": 292.7, "Delay": 1.86, "Power": 212.2},
            "Ours": {"Area": 290.4, "Delay": 1.99, "Power": 210.3},
            "RME_Ours": {"Area": 264.4, "Delay": 1.63, "Power": 188.9},
        },
        register={"bit_power_uw": 15.13 / 4, "bit_area_um2": 0.0},
        wire={"bit_power_uw": 0.5, "bit_area_um2": 0.0},
        accumulator={"bit_power_uw": 15.13 / 4, "bit_area_um2": 0.0},
        global_buffer={"Size_KB": 256, "Area": 614400, "Read Power": 0.0205, "Write Power": 0.04515},
        act_weight_buffer={"Size_KB": 64, "Area": 153600, "Read Power": 0.0146, "Write Power": 0.0322},
        simd={"ALU": 32, "Precision": "TF32", "Area": 126481, "Power": 0.0951},
    )


@dataclass(frozen=True)
class StructuralCounts:
    multipliers: int
    internal_encoders: int
    boundary_encoders: int
    operand_register_bits: int
    accumulators: int
    accumulator_bits: int
    bus_width_per_lane: int
    operand_wire_bits: int
    boundary_register_bits: int

    @property
    def encoders_saved(self) -> int:
        if self.boundary_encoders == 0:
            return 0
        return self.multipliers - self.boundary_encoders


def count_structure(config: ArchConfig) -> StructuralCounts:
    bus = config.bus_width
    return StructuralCounts(
        multipliers=config.multipliers,
        # baseline multipliers carry their own encoding logic
        internal_encoders=0 if config.mode.is_ent else config.multipliers,
        boundary_encoders=config.boundary_encoders,
        operand_register_bits=config.operand_register_bits,
        accumulators=config.accumulators,
        accumulator_bits=config.accumulators * config.accumulator_width,
        bus_width_per_lane=bus,
        operand_wire_bits=config.multipliers * bus,
        boundary_register_bits=config.boundary_encoders * bus,
    )


@dataclass
class EfficiencyReport:
    kind: str
    size: int
    arrays: int
    mode: str
    gops: float
    area_mm2: float
    power_w: float
    area_eff: float
    energy_eff: float
    up_ratio_area: float = 0.0
    up_ratio_energy: float = 0.0
    provenance: str = "modeled"
    scale: Optional[int] = None  # 2D-equivalent edge, set by sweeps


def _unit_multiplier(mode: Mode, table: CostTable, metric: str) -> float:
    if mode is Mode.BASELINE:
        return table.lookup("multipliers", "DW IP", metric)
    if mode is Mode.ENT_OURS:
        return table.lookup("multipliers", "RME_Ours", metric)
    # no measured "MBE without encoder" row: strip the 8-bit encoder block
    return table.lookup("multipliers", "MBE", metric) - table.encoder(Scheme.MBE, OPERAND_WIDTH, metric)


def _totals(config: ArchConfig, table: CostTable):
    counts = count_structure(config)
    scheme = Scheme.MBE if config.mode is Mode.ENT_MBE else Scheme.OURS
    out = {}
    for metric, suffix in (("Area", "area_um2"), ("Power", "power_uw")):
        total = counts.multipliers * _unit_multiplier(config.mode, table, metric)
        if counts.boundary_encoders:
            total += counts.boundary_encoders * table.encoder(scheme, OPERAND_WIDTH, metric)
        reg = table.lookup("register", "bit_" + suffix)
        total += (counts.operand_register_bits + counts.boundary_register_bits) * reg
        total += counts.operand_wire_bits * table.lookup("wire", "bit_" + suffix)
        total += counts.accumulator_bits * table.lookup("accumulator", "bit_" + suffix)
        out[metric] = total
    return out["Area"], out["Power"]


def estimate(config: ArchConfig, table: Optional[CostTable] = None) -> EfficiencyReport:
    table = table or default_cost_table()

    def raw(cfg):
        area_um2, power_uw = _totals(cfg, table)
        area_mm2, power_w = area_um2 / 1e6, power_uw / 1e6
        return area_mm2, power_w, cfg.gops / area_mm2, cfg.gops / power_w

    area_mm2, power_w, area_eff, energy_eff = raw(config)
    base = ArchConfig(config.kind, config.size, Mode.BASELINE, config.clock_mhz, config.arrays)
    _, _, base_area_eff, base_energy_eff = raw(base)
    return EfficiencyReport(
        kind=config.kind.value,
        size=config.size,
        arrays=config.arrays,
        mode=config.mode.value,
        gops=config.gops,
        area_mm2=area_mm2,
        power_w=power_w,
        area_eff=area_eff,
        energy_eff=energy_eff,
        up_ratio_area=area_eff / base_area_eff - 1.0,
        up_ratio_energy=energy_eff / base_energy_eff - 1.0,
    )


@dataclass
class SweepResult:
    reports: List[EfficiencyReport]
    # (scale, mode) -> (mean area up-ratio, mean energy up-ratio) across kinds
    averages: Dict[tuple, tuple]


def up_ratio_sweep(
    kinds: Iterable,
    sizes: Iterable[int],
    table: Optional[CostTable] = None,
    modes: Iterable = (Mode.BASELINE, Mode.ENT_MBE, Mode.ENT_OURS),
    clock_mhz: float = 500.0,
) -> SweepResult:
    """Estimate every (kind, scale, mode) cell; cube kinds are matched by MAC count."""
    kinds, sizes, modes = [Kind(k) for k in kinds], list(sizes), [Mode(m) for m in modes]
    if not kinds or not sizes or not modes:
        raise ValueError("sweep needs at least one kind, size and mode")
    table = table or default_cost_table()
    reports, averages = [], {}
    for scale in sizes:
        for mode in modes:
            cell = [
                replace(estimate(scale_config(k, scale, mode, clock_mhz), table), scale=scale)
                for k in kinds
            ]
            reports.extend(cell)
            averages[(scale, mode.value)] = (
                mean(r.up_ratio_area for r in cell),
                mean(r.up_ratio_energy for r in cell),
            )
    return SweepResult(reports, averages)
