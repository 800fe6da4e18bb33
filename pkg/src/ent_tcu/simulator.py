"""Cycle-stepped functional models of five TCU microarchitectures.

Every kind computes ``C = A @ B`` for INT8 ``A`` (M x K) and ``B`` (K x N).
``A`` is the multiplicand: in EN-T modes it is encoded once at the array
boundary and only bus words travel inside; PEs run encoder-removed
multipliers on them.

Dataflows (register-level detail is this model's own definition):

* ``matrix-2d``   one A column and one B row broadcast per cycle into an
  S x S grid (outer product), K cycles per output tile.
* ``array-1d2d``  S lanes of S multipliers and an adder tree, no operand
  pipelining; each cycle one A row chunk is broadcast to all lanes.
* ``systolic-os`` A enters skewed from the west, B from the north, outputs
  stay in place.  K + mt + nt - 2 cycles per output tile.
* ``systolic-ws`` an A tile is preloaded (kt cycles), B streams from the
  west and partial sums flow south.  2*kt + N + mt - 2 cycles per tile.
* ``cube-3d``     S^3 MACs finish an S x S x S tile per cycle; ``arrays``
  cubes work on consecutive tiles in lockstep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .encoding import (
    Scheme,
    encoded_width,
    ent_bus_word,
    ent_encode_signed,
    mbe_bus_word,
    mbe_recode,
)
from .multiplier import rme_mbe_multiply, rme_ours_multiply

OPERAND_WIDTH = 8
MIN_SIZE, MAX_SIZE = 4, 128


class ConfigError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class Kind(str, Enum):
    MATRIX_2D = "matrix-2d"
    ARRAY_1D2D = "array-1d2d"
    SYSTOLIC_OS = "systolic-os"
    SYSTOLIC_WS = "systolic-ws"
    CUBE_3D = "cube-3d"


class Mode(str, Enum):
    BASELINE = "baseline"
    ENT_MBE = "ent-mbe"
    ENT_OURS = "ent-ours"

    @property
    def is_ent(self) -> bool:
        return self is not Mode.BASELINE


KINDS = tuple(Kind)
MODES = tuple(Mode)
PIPELINED = (Kind.SYSTOLIC_OS, Kind.SYSTOLIC_WS, Kind.CUBE_3D)


@dataclass(frozen=True)
class ArchConfig:
    kind: Kind
    size: int
    mode: Mode = Mode.BASELINE
    clock_mhz: float = 500.0
    arrays: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "mode", Mode(self.mode))
        if not isinstance(self.size, (int, np.integer)) or not MIN_SIZE <= self.size <= MAX_SIZE:
            raise ConfigError(f"size must be an integer in [{MIN_SIZE}, {MAX_SIZE}], got {self.size!r}")
        if self.arrays < 1 or (self.arrays > 1 and self.kind is not Kind.CUBE_3D):
            raise ConfigError("multiple arrays are only supported for cube-3d")
        if self.clock_mhz <= 0:
            raise ConfigError("clock must be positive")

    @property
    def bus_width(self) -> int:
        """Bits per multiplicand lane inside the array."""
        if self.mode is Mode.BASELINE:
            return OPERAND_WIDTH
        scheme = Scheme.MBE if self.mode is Mode.ENT_MBE else Scheme.OURS
        return encoded_width(OPERAND_WIDTH, scheme)[1]

    @property
    def multipliers(self) -> int:
        if self.kind is Kind.CUBE_3D:
            return self.arrays * self.size**3
        return self.size**2

    @property
    def lanes(self) -> int:
        """Multiplicand lanes entering the array (one boundary encoder each in EN-T)."""
        if self.kind is Kind.CUBE_3D:
            return self.arrays * self.size**2
        return self.size

    @property
    def boundary_encoders(self) -> int:
        return self.lanes if self.mode.is_ent else 0

    @property
    def accumulator_width(self) -> int:
        return 16 + math.ceil(math.log2(self.size))

    @property
    def accumulators(self) -> int:
        if self.kind is Kind.ARRAY_1D2D:
            return self.size
        if self.kind is Kind.CUBE_3D:
            return self.arrays * self.size**2
        return self.size**2

    @property
    def operand_register_bits(self) -> int:
        """Pipeline registers for both operand lanes; broadcast kinds have none."""
        if self.kind not in PIPELINED:
            return 0
        return self.arrays * self.size**2 * (self.bus_width + OPERAND_WIDTH)

    @property
    def gops(self) -> float:
        return 2 * self.multipliers * self.clock_mhz / 1000.0


def scale_config(kind, scale: int, mode=Mode.BASELINE, clock_mhz: float = 500.0) -> ArchConfig:
    """Config with the MAC count of an ``scale x scale`` array.

    Cube kinds use the largest power-of-two edge c with c^3 <= scale^2 and
    replicate it: 16 -> four 4^3 cubes, 32 -> two 8^3, 64 -> one 16^3.
    """
    kind = Kind(kind)
    if kind is not Kind.CUBE_3D:
        return ArchConfig(kind, scale, mode, clock_mhz)
    macs = scale * scale
    edge = 1
    while (edge * 2) ** 3 <= macs:
        edge *= 2
    if macs % edge**3:
        raise ConfigError(f"scale {scale} has no whole number of power-of-two cubes")
    return ArchConfig(kind, edge, mode, clock_mhz, arrays=macs // edge**3)


def _ceil(a: int, b: int) -> int:
    return -(-a // b)


def _tiles(total: int, s: int):
    return [(o, min(s, total - o)) for o in range(0, total, s)]


def cycle_count(config: ArchConfig, m: int, k: int, n: int) -> int:
    """Closed-form cycles for an M x K x N GEMM, matching :meth:`Simulator.run_gemm`."""
    if min(m, k, n) <= 0:
        raise ShapeError("GEMM dimensions must be positive")
    s = config.size
    tm, tk, tn = _ceil(m, s), _ceil(k, s), _ceil(n, s)
    kind = config.kind
    if kind is Kind.MATRIX_2D:
        return tm * tn * k
    if kind is Kind.ARRAY_1D2D:
        return m * tk * tn
    if kind is Kind.SYSTOLIC_OS:
        return tm * tn * (k - 2) + tn * m + tm * n
    if kind is Kind.SYSTOLIC_WS:
        return tk * tm * (n - 2) + 2 * k * tm + m * tk
    return _ceil(tm * tk * tn, config.arrays)


def boundary_encodes(config: ArchConfig, m: int, k: int, n: int) -> int:
    """Multiplicand elements entering the array for one GEMM (EN-T encoder activations)."""
    if not config.mode.is_ent:
        return 0
    if config.kind is Kind.SYSTOLIC_WS:
        return m * k
    return m * k * _ceil(n, config.size)


@dataclass
class SimStats:
    cycles: int = 0
    mac_ops: int = 0
    encoder_invocations: int = 0
    operand_register_bits: int = 0
    accumulator_width: int = 0
    multipliers: int = 0
    boundary_encoders: int = 0


def _encoder_lut(mode: Mode) -> np.ndarray:
    values = range(-(1 << (OPERAND_WIDTH - 1)), 1 << (OPERAND_WIDTH - 1))
    if mode is Mode.ENT_OURS:
        words = [ent_bus_word(ent_encode_signed(v, OPERAND_WIDTH)) for v in values]
    elif mode is Mode.ENT_MBE:
        words = [mbe_bus_word(mbe_recode(v, OPERAND_WIDTH)) for v in values]
    else:
        words = list(values)
    return np.array(words, dtype=np.int64)


_LUTS = {mode: _encoder_lut(mode) for mode in MODES}


class Simulator:
    """One TCU instance. Not thread-safe; build one per worker."""

    def __init__(self, config: ArchConfig):
        self.config = config
        self.multipliers = config.multipliers
        self.boundary_encoders = config.boundary_encoders
        self._lut = _LUTS[config.mode]
        self._stats = SimStats()

    def _encode(self, a: np.ndarray, valid=None) -> np.ndarray:
        if valid is None:
            self._entries += a.size
        else:
            self._entries += int(np.count_nonzero(valid))
            a = np.where(valid, a, 0)
        return self._lut[a + (1 << (OPERAND_WIDTH - 1))]

    def _mul(self, words: np.ndarray, b: np.ndarray) -> np.ndarray:
        mode = self.config.mode
        if mode is Mode.ENT_OURS:
            return rme_ours_multiply(words, b, OPERAND_WIDTH)
        if mode is Mode.ENT_MBE:
            return rme_mbe_multiply(words, b, OPERAND_WIDTH)
        return words * b

    def run_gemm(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
        for mat in (a, b):
            if mat.size and (mat.min() < -128 or mat.max() > 127):
                raise ShapeError("operands must be INT8")
        m, k = a.shape
        n = b.shape[1]
        c = np.zeros((m, n), dtype=np.int64)
        self._entries = 0
        if min(m, k, n) == 0:
            cycles = 0
        else:
            step = getattr(self, "_run_" + self.config.kind.name.lower())
            cycles = step(a, b, c)
        cfg = self.config
        macs = m * k * n
        stats = SimStats(
            cycles=cycles,
            mac_ops=macs,
            encoder_invocations=self._entries if cfg.mode.is_ent else macs,
            operand_register_bits=cfg.operand_register_bits,
            accumulator_width=cfg.accumulator_width,
            multipliers=self.multipliers,
            boundary_encoders=self.boundary_encoders,
        )
        return c, stats

    def _run_matrix_2d(self, a, b, c) -> int:
        s, cycles = self.config.size, 0
        m, k = a.shape
        for m0, mt in _tiles(m, s):
            for n0, nt in _tiles(b.shape[1], s):
                acc = np.zeros((mt, nt), dtype=np.int64)
                for kk in range(k):
                    words = self._encode(a[m0:m0 + mt, kk])
                    acc += self._mul(words[:, None], b[kk, n0:n0 + nt][None, :])
                    cycles += 1
                c[m0:m0 + mt, n0:n0 + nt] = acc
        return cycles

    def _run_array_1d2d(self, a, b, c) -> int:
        s, cycles = self.config.size, 0
        m, k = a.shape
        for n0, nt in _tiles(b.shape[1], s):
            for k0, kt in _tiles(k, s):
                weights = b[k0:k0 + kt, n0:n0 + nt]
                for row in range(m):
                    words = self._encode(a[row, k0:k0 + kt])
                    # adder tree: exact single-cycle reduction over the lane
                    c[row, n0:n0 + nt] += self._mul(words[:, None], weights).sum(axis=0)
                    cycles += 1
        return cycles

    def _run_systolic_os(self, a, b, c) -> int:
        s, cycles = self.config.size, 0
        m, k = a.shape
        n = b.shape[1]
        for m0, mt in _tiles(m, s):
            for n0, nt in _tiles(n, s):
                a_reg = np.zeros((mt, nt), dtype=np.int64)
                b_reg = np.zeros((mt, nt), dtype=np.int64)
                acc = np.zeros((mt, nt), dtype=np.int64)
                rows, cols = np.arange(mt), np.arange(nt)
                for t in range(k + mt + nt - 2):
                    a_reg[:, 1:] = a_reg[:, :-1]
                    b_reg[1:, :] = b_reg[:-1, :]
                    ka, kb = t - rows, t - cols
                    va, vb = (ka >= 0) & (ka < k), (kb >= 0) & (kb < k)
                    a_reg[:, 0] = self._encode(a[m0 + rows, np.clip(ka, 0, k - 1)], va)
                    b_reg[0, :] = np.where(vb, b[np.clip(kb, 0, k - 1), n0 + cols], 0)
                    acc += self._mul(a_reg, b_reg)
                    cycles += 1
                c[m0:m0 + mt, n0:n0 + nt] = acc
        return cycles

    def _run_systolic_ws(self, a, b, c) -> int:
        s, cycles = self.config.size, 0
        m, k = a.shape
        n = b.shape[1]
        for k0, kt in _tiles(k, s):
            for m0, mt in _tiles(m, s):
                # preload: PE(r, col) ends up holding A[m0 + col, k0 + r]
                w = np.zeros((kt, mt), dtype=np.int64)
                for p in range(kt):
                    w[1:, :] = w[:-1, :]
                    w[0, :] = self._encode(a[m0:m0 + mt, k0 + kt - 1 - p])
                    cycles += 1
                h = np.zeros((kt, mt), dtype=np.int64)
                psum = np.zeros((kt, mt), dtype=np.int64)
                rows, cols = np.arange(kt), np.arange(mt)
                for t in range(n + kt + mt - 2):
                    h[:, 1:] = h[:, :-1]
                    nb = t - rows
                    vb = (nb >= 0) & (nb < n)
                    h[:, 0] = np.where(vb, b[k0 + rows, np.clip(nb, 0, n - 1)], 0)
                    nxt = self._mul(w, h)
                    nxt[1:] += psum[:-1]
                    psum = nxt
                    out_n = t - (kt - 1) - cols
                    done = (out_n >= 0) & (out_n < n)
                    c[m0 + cols[done], out_n[done]] += psum[kt - 1, done]
                    cycles += 1
        return cycles

    def _run_cube_3d(self, a, b, c) -> int:
        s, cfg = self.config.size, self.config
        m, k = a.shape
        tiles = [
            (mi, ki, ni)
            for mi in _tiles(m, s)
            for ki in _tiles(k, s)
            for ni in _tiles(b.shape[1], s)
        ]
        cycles = 0
        for start in range(0, len(tiles), cfg.arrays):
            for (m0, mt), (k0, kt), (n0, nt) in tiles[start:start + cfg.arrays]:
                words = self._encode(a[m0:m0 + mt, k0:k0 + kt])
                prods = self._mul(words[:, :, None], b[k0:k0 + kt, n0:n0 + nt][None, :, :])
                c[m0:m0 + mt, n0:n0 + nt] += prods.sum(axis=1)
            cycles += 1
        return cycles


def build(config: ArchConfig) -> Simulator:
    return Simulator(config)


def run_gemm(sim: Simulator, a, b):
    return sim.run_gemm(a, b)


def reference_gemm(a, b) -> np.ndarray:
    """Triple-loop integer GEMM, kept independent of numpy's matmul."""
    a = [[int(x) for x in row] for row in np.asarray(a)]
    b = [[int(x) for x in row] for row in np.asarray(b)]
    m, k, n = len(a), len(b), len(b[0]) if b else 0
    out = [[0] * n for _ in range(m)]
    for i in range(m):
        for j in range(n):
            total = 0
            for p in range(k):
                total += a[i][p] * b[p][j]
            out[i][j] = total
    return np.array(out, dtype=np.int64).reshape(m, n)
