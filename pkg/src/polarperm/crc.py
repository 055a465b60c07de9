"""CRC attachment and checking for early termination and codeword selection.

Semantics are plain GF(2) polynomial division: zero initial register, no
input/output reflection, no final XOR. Remainders are evaluated through
cached power-of-x tables, which makes batched checks a single matmul; the
result is identical to bit-serial long division.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CrcSpec:
    """A CRC generator polynomial, coefficients highest degree first."""

    degree: int
    poly: tuple

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        if len(self.poly) != self.degree + 1:
            raise ValueError(
                f"poly needs {self.degree + 1} coefficients, got {len(self.poly)}"
            )
        if self.poly[0] != 1:
            raise ValueError("leading coefficient must be 1")
        if any(c not in (0, 1) for c in self.poly):
            raise ValueError("poly coefficients must be 0/1")

    @classmethod
    def from_int(cls, value: int) -> "CrcSpec":
        """Build a spec from an integer polynomial including the leading term."""
        if value < 2:
            raise ValueError(f"polynomial integer must be >= 2, got {value}")
        degree = value.bit_length() - 1
        poly = tuple((value >> (degree - i)) & 1 for i in range(degree + 1))
        return cls(degree=degree, poly=poly)

    @classmethod
    def from_hex(cls, text: str) -> "CrcSpec":
        return cls.from_int(int(text, 16))


# x^24+x^23+x^21+x^20+x^17+x^15+x^13+x^12+x^8+x^4+x^2+x+1 (the 5G CRC24
# used with polar codes)
CRC24_5G = CrcSpec.from_int(0x1B2B117)

# x^8+x^7+x^6+x^4+x^2+1, a convenient short CRC for small-code experiments
CRC8_DEFAULT = CrcSpec.from_int(0x1D5)

_POW_CACHE: dict = {}


def _powers_mod(spec: CrcSpec, count: int) -> np.ndarray:
    """Table of x^e mod g for e = 0..count-1, rows highest power first."""
    rows = _POW_CACHE.setdefault(spec.poly, [])
    if not rows:
        first = np.zeros(spec.degree, dtype=np.uint8)
        first[-1] = 1  # x^0
        rows.append(first)
    g_low = np.asarray(spec.poly[1:], dtype=np.uint8)
    while len(rows) < count:
        prev = rows[-1]
        nxt = np.empty(spec.degree, dtype=np.uint8)
        nxt[:-1] = prev[1:]
        nxt[-1] = 0
        if prev[0]:
            nxt ^= g_low
        rows.append(nxt)
    return np.stack(rows[:count])


def _remainder_table(length: int, spec: CrcSpec, shift: int) -> np.ndarray:
    """(length, degree) table with row j = x^(length-1-j+shift) mod g."""
    powers = _powers_mod(spec, length + shift)
    return powers[np.arange(length - 1, -1, -1) + shift].astype(np.int64)


def remainder(bits, spec: CrcSpec, shift: int = 0) -> np.ndarray:
    """GF(2) remainder of bits (times x^shift), batched over leading axes."""
    arr = np.asarray(bits, dtype=np.int64)
    table = _remainder_table(arr.shape[-1], spec, shift)
    return ((arr @ table) & 1).astype(np.uint8)


def crc_attach(payload, spec: CrcSpec) -> np.ndarray:
    """Append `degree` parity bits so the result divides the generator."""
    arr = np.asarray(payload, dtype=np.uint8)
    if arr.shape[-1] == 0:
        raise ValueError("payload must be non-empty")
    rem = remainder(arr, spec, shift=spec.degree)
    return np.concatenate([arr, rem], axis=-1)


def crc_check(bits, spec: CrcSpec):
    """True iff the polynomial division remainder is zero (batched OK)."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.shape[-1] <= spec.degree:
        raise ValueError(
            f"need more than degree={spec.degree} bits, got {arr.shape[-1]}"
        )
    ok = ~remainder(arr, spec).any(axis=-1)
    return bool(ok) if arr.ndim == 1 else ok
