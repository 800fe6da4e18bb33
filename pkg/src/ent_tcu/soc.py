"""img2col workloads on the benchmark SoC: access counting and energy breakdown.

Tiling policy, identical for every TCU kind:

* weights (the multiplicand, M x K) and the raw input map are read once from
  the global buffer; weights land in the weight buffer, img2col writes the
  K x N activation matrix into the activation buffer;
* output tiles of S x S are outermost and K is innermost; each tile touch
  reads its A panel from the weight buffer and its B panel from the
  activation buffer once;
* outputs pass through the SIMD engine (``simd_ops_per_output`` ops each)
  and are written back to the global buffer.

Buffers move ``word_bytes`` INT8 elements per active cycle. An active cycle
of any unit costs ``power / frequency``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .cost import CostTable, default_cost_table, estimate
from .simulator import ArchConfig, Kind, Mode, boundary_encodes, cycle_count, scale_config

SHIPPED_NETWORKS = ("resnet34", "resnet50")


class LayerError(ValueError):
    pass


@dataclass(frozen=True)
class LayerDescriptor:
    kind: str
    name: str = ""
    c_in: int = 0
    c_out: int = 0
    h: int = 0
    w: int = 0
    kernel: int = 1
    stride: int = 1
    pad: int = 0
    in_dim: int = 0
    out_dim: int = 0

    @classmethod
    def from_dict(cls, record: dict) -> "LayerDescriptor":
        known = {f.name for f in fields(cls)}
        extra = set(record) - known
        if extra:
            raise LayerError(f"unknown layer fields {sorted(extra)}")
        if record.get("kind") not in ("conv", "fc"):
            raise LayerError(f"layer kind must be 'conv' or 'fc', got {record.get('kind')!r}")
        return cls(**record)

    @property
    def out_hw(self) -> Tuple[int, int]:
        h = (self.h + 2 * self.pad - self.kernel) // self.stride + 1
        w = (self.w + 2 * self.pad - self.kernel) // self.stride + 1
        return h, w

    @property
    def input_elements(self) -> int:
        return self.in_dim if self.kind == "fc" else self.c_in * self.h * self.w


def img2col_dims(layer: LayerDescriptor) -> Tuple[int, int, int]:
    """GEMM shape (M, K, N) of a layer lowered with img2col; M indexes output channels."""
    if layer.kind == "fc":
        if layer.in_dim <= 0 or layer.out_dim <= 0:
            raise LayerError(f"fc layer {layer.name!r} needs positive dims")
        return layer.out_dim, layer.in_dim, 1
    if min(layer.c_in, layer.c_out, layer.kernel, layer.stride) <= 0 or layer.pad < 0:
        raise LayerError(f"conv layer {layer.name!r} has non-positive parameters")
    h_out, w_out = layer.out_hw
    if h_out <= 0 or w_out <= 0:
        raise LayerError(f"conv layer {layer.name!r} has empty output")
    return layer.c_out, layer.c_in * layer.kernel**2, h_out * w_out


def load_network(source) -> List[LayerDescriptor]:
    """Read a layer-list JSON file, or a shipped network by name.

    A bare ``resnet34.json`` that does not exist locally falls back to the
    bundled copy.
    """
    path = Path(source)
    name = path.stem if path.suffix == ".json" and not path.exists() else str(source)
    if name in SHIPPED_NETWORKS:
        text = resources.files("ent_tcu").joinpath("data", f"{name}.json").read_text()
    else:
        text = path.read_text()
    records = json.loads(text)
    if not isinstance(records, list):
        raise LayerError("network file must hold a JSON array of layer records")
    return [LayerDescriptor.from_dict(r) for r in records]


@dataclass(frozen=True)
class SocConfig:
    tcu: ArchConfig = field(default_factory=lambda: ArchConfig(Kind.MATRIX_2D, 32, Mode.ENT_OURS))
    global_buffer_kb: int = 256
    act_weight_buffer_kb: int = 64
    simd_alus: int = 32
    word_bytes: int = 32
    simd_ops_per_output: int = 2

    def __post_init__(self):
        if min(self.global_buffer_kb, self.act_weight_buffer_kb, self.simd_alus, self.word_bytes) <= 0:
            raise ValueError("buffer sizes, ALU count and word size must be positive")

    @property
    def clock_mhz(self) -> float:
        return self.tcu.clock_mhz

    @classmethod
    def for_kind(cls, kind, mode, scale: int = 32, **kwargs) -> "SocConfig":
        """The benchmark SoC: a 32x32 array, or two 8^3 cubes at the same MAC count."""
        return cls(tcu=scale_config(kind, scale, mode), **kwargs)


@dataclass
class AccessCounts:
    gb_reads: int = 0
    gb_writes: int = 0
    act_reads: int = 0
    act_writes: int = 0
    weight_reads: int = 0
    weight_writes: int = 0
    encoder_activations: int = 0
    tcu_cycles: int = 0
    simd_ops: int = 0
    simd_cycles: int = 0

    def __add__(self, other: "AccessCounts") -> "AccessCounts":
        return AccessCounts(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))


def _words(elements: int, word: int) -> int:
    return -(-elements // word)


def count_accesses(layer: LayerDescriptor, soc: SocConfig) -> AccessCounts:
    m, k, n = img2col_dims(layer)
    s, word = soc.tcu.size, soc.word_bytes
    out_tiles_m, out_tiles_n = -(-m // s), -(-n // s)
    simd_ops = soc.simd_ops_per_output * m * n
    return AccessCounts(
        gb_reads=_words(m * k, word) + _words(layer.input_elements, word),
        gb_writes=_words(m * n, word),
        act_reads=_words(k * n * out_tiles_m, word),
        act_writes=_words(k * n, word),
        weight_reads=_words(m * k * out_tiles_n, word),
        weight_writes=_words(m * k, word),
        encoder_activations=boundary_encodes(soc.tcu, m, k, n),
        tcu_cycles=cycle_count(soc.tcu, m, k, n),
        simd_ops=simd_ops,
        simd_cycles=-(-simd_ops // soc.simd_alus),
    )


def count_network(network: Iterable[LayerDescriptor], soc: SocConfig) -> AccessCounts:
    total = AccessCounts()
    for layer in network:
        total = total + count_accesses(layer, soc)
    return total


CATEGORIES = (
    "global_buffer_read", "global_buffer_write",
    "act_buffer_read", "act_buffer_write",
    "weight_buffer_read", "weight_buffer_write",
    "tcu", "simd",
)


@dataclass
class EnergyReport:
    kind: str
    mode: str
    energy_j: Dict[str, float]
    counts: AccessCounts
    tcu_power_w: float
    baseline_total_j: Optional[float] = None

    @property
    def total_j(self) -> float:
        return sum(self.energy_j.values())

    @property
    def compute_fraction(self) -> float:
        total = self.total_j
        if total == 0:
            return 0.0
        return (self.energy_j["tcu"] + self.energy_j["simd"]) / total

    @property
    def reduction_ratio(self) -> float:
        """Fractional energy saved against the baseline TCU in the same SoC."""
        if not self.baseline_total_j:
            return 0.0
        return 1.0 - self.total_j / self.baseline_total_j


def _energy(counts: AccessCounts, soc: SocConfig, table: CostTable, tcu_power_w: float) -> Dict[str, float]:
    period = 1.0 / (soc.clock_mhz * 1e6)
    gb, ab = "global_buffer", "act_weight_buffer"
    per_cycle = {
        "global_buffer_read": (counts.gb_reads, table.lookup(gb, "Read Power")),
        "global_buffer_write": (counts.gb_writes, table.lookup(gb, "Write Power")),
        "act_buffer_read": (counts.act_reads, table.lookup(ab, "Read Power")),
        "act_buffer_write": (counts.act_writes, table.lookup(ab, "Write Power")),
        "weight_buffer_read": (counts.weight_reads, table.lookup(ab, "Read Power")),
        "weight_buffer_write": (counts.weight_writes, table.lookup(ab, "Write Power")),
        "tcu": (counts.tcu_cycles, tcu_power_w),
        "simd": (counts.simd_cycles, table.lookup("simd", "Power")),
    }
    return {cat: cycles * power * period for cat, (cycles, power) in per_cycle.items()}


def estimate_inference_energy(
    network: Sequence[LayerDescriptor],
    soc: Optional[SocConfig] = None,
    table: Optional[CostTable] = None,
) -> EnergyReport:
    soc = soc or SocConfig()
    table = table or default_cost_table()
    counts = count_network(network, soc)

    tcu_power = estimate(soc.tcu, table).power_w
    report = EnergyReport(
        kind=soc.tcu.kind.value,
        mode=soc.tcu.mode.value,
        energy_j=_energy(counts, soc, table, tcu_power),
        counts=counts,
        tcu_power_w=tcu_power,
    )
    base_tcu = replace(soc.tcu, mode=Mode.BASELINE)
    base_counts = replace(counts, encoder_activations=0)
    base_energy = _energy(base_counts, replace(soc, tcu=base_tcu), table, estimate(base_tcu, table).power_w)
    report.baseline_total_j = sum(base_energy.values())
    return report
