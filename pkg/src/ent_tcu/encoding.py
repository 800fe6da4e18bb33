"""Radix-4 operand encodings: Modified Booth (MBE) and the carry-chain encoder.

Both encodings rewrite an n-bit operand as n/2 radix-4 digits. MBE uses the
digit set {-2..2} and needs three control lines per digit. The carry-chain
encoder uses {-1, 0, 1, 2}, which fits in a 2-bit code, plus
one extra bit, so an n-bit operand travels on an (n+1)-bit bus.

Digit lists are LSB-first everywhere unless a name says otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

MIN_WIDTH = 4
MAX_WIDTH = 32

# EnDigit code -> digit value; only 11 reads as negative, so 10 is +2
CODE_TO_DIGIT = (0, 1, 2, -1)
DIGIT_TO_CODE = {0: 0b00, 1: 0b01, 2: 0b10, -1: 0b11}
_DIGIT_SET = frozenset(CODE_TO_DIGIT)


class EncodingError(ValueError):
    """Raised for unsupported widths or out-of-range operands."""


class Scheme(str, Enum):
    MBE = "mbe"
    OURS = "ours"


def check_width(n: int) -> int:
    if not isinstance(n, int) or n % 2 or not MIN_WIDTH <= n <= MAX_WIDTH:
        raise EncodingError(f"width must be even and in [{MIN_WIDTH}, {MAX_WIDTH}], got {n!r}")
    return n


def check_signed(x: int, n: int) -> int:
    check_width(n)
    lo, hi = -(1 << (n - 1)), (1 << (n - 1)) - 1
    if not lo <= x <= hi:
        raise EncodingError(f"{x} outside {n}-bit two's-complement range [{lo}, {hi}]")
    return x


@dataclass(frozen=True)
class SignedWord:
    value: int
    width: int = 8

    def __post_init__(self):
        check_signed(self.value, self.width)

    def bit(self, i: int) -> int:
        """Two's-complement bit i; bit -1 reads as 0."""
        if i < 0:
            return 0
        return (self.value >> i) & 1


@dataclass(frozen=True)
class MbeDigits:
    digits: Tuple[int, ...]
    controls: Tuple[Tuple[int, int, int], ...]  # (NEG, SE, CE) per digit
    width: int

    def value(self) -> int:
        return sum(m * 4**i for i, m in enumerate(self.digits))


@dataclass(frozen=True)
class EncodedOperand:
    """Carry-chain encoded operand.

    ``digits`` holds the digit values w_i (LSB-first). ``carry_out`` is the
    carry leaving the top digit and ``sign`` is the sign of the source in
    signed-magnitude mode. Both share the single extra bus bit, so at most one
    of them is ever set.
    """

    digits: Tuple[int, ...]
    carry_out: int
    sign: int
    width: int
    signed: bool = False

    def __post_init__(self):
        if len(self.digits) != self.width // 2:
            raise EncodingError("digit count must equal width / 2")
        if not _DIGIT_SET.issuperset(self.digits):
            raise EncodingError(f"digit outside {{-1, 0, 1, 2}}: {self.digits}")
        if self.carry_out and self.sign:
            raise EncodingError("sign and carry_out share one bit")

    @property
    def codes(self) -> Tuple[int, ...]:
        return tuple(DIGIT_TO_CODE[w] for w in self.digits)

    @property
    def bit_width(self) -> int:
        return 2 * len(self.digits) + 1

    def msb_first(self) -> Tuple[int, ...]:
        """The leading bit followed by the digits MSB-first, e.g. ``(0, 1, 1, -1, 2)`` for 78."""
        lead = self.sign if self.signed else self.carry_out
        return (lead,) + tuple(reversed(self.digits))


def mbe_controls(window: Tuple[int, int, int]) -> Tuple[int, int, int]:
    """Booth control lines for the bit window (a_{2i+1}, a_{2i}, a_{2i-1})."""
    hi, mid, lo = (int(bool(b)) for b in window)
    neg = hi & ((1 - mid) | (1 - lo))
    se = 1 - (((1 - hi) & mid & lo) | (hi & (1 - mid) & (1 - lo)))
    ce = 1 - ((mid ^ lo) | se)
    return neg, se, ce


def mbe_digit(window: Tuple[int, int, int]) -> int:
    hi, mid, lo = window
    return -2 * hi + mid + lo


def mbe_recode(x: SignedWord | int, width: int = 8) -> MbeDigits:
    if not isinstance(x, SignedWord):
        x = SignedWord(x, width)
    n = check_width(x.width)
    digits, controls = [], []
    for i in range((n + 1) // 2):
        window = (x.bit(2 * i + 1), x.bit(2 * i), x.bit(2 * i - 1))
        digits.append(mbe_digit(window))
        controls.append(mbe_controls(window))
    return MbeDigits(tuple(digits), tuple(controls), n)


def _cell(a: int, cin: int) -> Tuple[int, int]:
    a1 = a >> 1
    return (a + cin) & 0b11, (a1 & a & 1) | (a1 & cin)


def ent_encoder_cell(a: int, cin: int) -> Tuple[int, int]:
    """One carry-chain encoder cell: 2-bit digit plus carry in -> (code, carry out)."""
    if not 0 <= a <= 3 or cin not in (0, 1):
        raise EncodingError(f"bad encoder cell input a={a}, cin={cin}")
    return _cell(a, cin)


def _encode_digits(v: int, n: int) -> Tuple[Tuple[int, ...], int]:
    # lowest digit is passed through raw; only its carry needs a gate
    a0 = v & 0b11
    digits = [CODE_TO_DIGIT[a0]]
    carry = (a0 >> 1) & a0
    for i in range(2, n, 2):
        code, carry = _cell((v >> i) & 0b11, carry)
        digits.append(CODE_TO_DIGIT[code])
    return tuple(digits), carry


def ent_encode_unsigned(v: int, n: int = 8) -> EncodedOperand:
    check_width(n)
    if not 0 <= v < (1 << n):
        raise EncodingError(f"{v} outside unsigned {n}-bit range")
    digits, carry = _encode_digits(v, n)
    return EncodedOperand(digits, carry, 0, n, signed=False)


def ent_encode_signed(x: SignedWord | int, width: int = 8) -> EncodedOperand:
    if isinstance(x, SignedWord):
        value, width = x.value, x.width
    else:
        value = check_signed(x, width)
    digits, carry = _encode_digits(abs(value), width)
    # |x| <= 2**(n-1) keeps the top digit at most 2, so no carry can leave it
    assert carry == 0
    return EncodedOperand(digits, 0, int(value < 0), width, signed=True)


def ent_decode(e: EncodedOperand) -> int:
    mag = e.carry_out * 4 ** len(e.digits) + sum(w * 4**i for i, w in enumerate(e.digits))
    return -mag if e.sign else mag


def encoded_width(n: int, scheme: Scheme | str) -> Tuple[int, int]:
    """(encoder count, encoded bit-width) for an n-bit operand."""
    check_width(n)
    digits = (n + 1) // 2
    if Scheme(scheme) is Scheme.MBE:
        return digits, 3 * digits
    return digits - 1, n + 1


# Bus words: the bit patterns that travel through the array in EN-T modes.


def mbe_bus_word(d: MbeDigits) -> int:
    """Pack MBE digits as (NEG, ONE, TWO) selector triples, 3 bits per digit.

    The (NEG, SE, CE) lines alone cannot tell m=0 from m=+1, so the bus
    carries one-hot magnitude selects instead.
    """
    word = 0
    for i, m in enumerate(d.digits):
        triple = (int(m < 0) << 2) | (int(abs(m) == 1) << 1) | int(abs(m) == 2)
        word |= triple << (3 * i)
    return word


def ent_bus_word(e: EncodedOperand) -> int:
    """Pack digit codes at bits [2i, 2i+1] and the lead bit at bit n."""
    word = 0
    for i, c in enumerate(e.codes):
        word |= c << (2 * i)
    lead = e.sign if e.signed else e.carry_out
    return word | (lead << (2 * len(e.digits)))


def ent_from_bus_word(word: int, n: int = 8, signed: bool = True) -> EncodedOperand:
    digits = tuple(CODE_TO_DIGIT[(word >> (2 * i)) & 0b11] for i in range(n // 2))
    lead = (word >> n) & 1
    if signed:
        return EncodedOperand(digits, 0, lead, n, signed=True)
    return EncodedOperand(digits, lead, 0, n, signed=False)
