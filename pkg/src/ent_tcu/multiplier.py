"""Behavioral radix-4 multipliers.

Partial-product compression and the final carry-propagate add are modeled as
exact integer summation; only row generation and selection are structural.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .encoding import (
    EncodedOperand,
    SignedWord,
    ent_encode_signed,
    mbe_recode,
)


@dataclass(frozen=True)
class PartialProductRow:
    value: int
    source_digit_index: int
    digit: int
    carry_row: bool = False


@dataclass(frozen=True)
class MultiplyTrace:
    rows: tuple
    product: int

    @property
    def row_count(self) -> int:
        return len(self.rows)


def _as_word(x, width: int) -> SignedWord:
    return x if isinstance(x, SignedWord) else SignedWord(x, width)


def mbe_multiply(a, b, width: int = 8) -> MultiplyTrace:
    a, b = _as_word(a, width), _as_word(b, width)
    recoded = mbe_recode(a)
    rows = tuple(
        PartialProductRow(m * b.value * 4**i, i, m) for i, m in enumerate(recoded.digits)
    )
    return MultiplyTrace(rows, sum(r.value for r in rows))


def ent_multiply_encoded(enc_a: EncodedOperand, b, width: Optional[int] = None) -> MultiplyTrace:
    """Multiply a pre-encoded multiplicand by ``b`` without touching an encoder.

    A signed operand flips ``b`` once up front. Unsigned operands always emit a
    dedicated carry row (zero when the carry bit is clear) so the row count
    does not depend on the operand value.
    """
    b = _as_word(b, width or enc_a.width)
    bb = -b.value if enc_a.sign else b.value
    rows: List[PartialProductRow] = [
        PartialProductRow(w * bb * 4**i, i, w) for i, w in enumerate(enc_a.digits)
    ]
    if not enc_a.signed:
        top = len(enc_a.digits)
        rows.append(PartialProductRow(enc_a.carry_out * bb * 4**top, top, enc_a.carry_out, True))
    return MultiplyTrace(tuple(rows), sum(r.value for r in rows))


def ent_multiply(a, b, width: int = 8) -> MultiplyTrace:
    a = _as_word(a, width)
    return ent_multiply_encoded(ent_encode_signed(a), _as_word(b, a.width))


# Vectorized in-array datapaths. They consume bus words (see encoding.*_bus_word)
# and never reconstruct the multiplicand.


def rme_ours_multiply(words: np.ndarray, b: np.ndarray, width: int = 8) -> np.ndarray:
    """Encoder-removed multiplier fed by signed carry-chain bus words."""
    words = np.asarray(words, dtype=np.int64)
    bb = np.where((words >> width) & 1, -np.asarray(b, dtype=np.int64), b)
    acc = np.zeros(np.broadcast(words, bb).shape, dtype=np.int64)
    for i in range(width // 2):
        code = (words >> (2 * i)) & 0b11
        w = np.where(code == 0b11, -1, code)
        acc += (w * bb) << (2 * i)
    return acc


def rme_mbe_multiply(words: np.ndarray, b: np.ndarray, width: int = 8) -> np.ndarray:
    """Encoder-removed Booth multiplier fed by (NEG, ONE, TWO) bus words."""
    words = np.asarray(words, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    acc = np.zeros(np.broadcast(words, b).shape, dtype=np.int64)
    for i in range((width + 1) // 2):
        triple = (words >> (3 * i)) & 0b111
        mag = ((triple >> 1) & 1) + 2 * (triple & 1)
        m = np.where(triple & 0b100, -mag, mag)
        acc += (m * b) << (2 * i)
    return acc
