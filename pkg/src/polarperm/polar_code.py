"""Polar code construction, message placement, and the Kronecker-power transform."""

from dataclasses import dataclass, field

import numpy as np


def _as_bits(bits, length=None):
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D bit vector, got shape {arr.shape}")
    if length is not None and arr.shape[-1] != length:
        raise ValueError(f"expected length {length}, got {arr.shape[-1]}")
    return arr


@dataclass(frozen=True)
class PolarCode:
    """A polar code P(N, K) defined by its frozen-position mask.

    ``K`` counts every non-frozen position; when a CRC is concatenated, the
    CRC bits live inside the K information positions. Frozen bits are fixed
    to 0. Instances are immutable and safe to share across decoders.
    """

    n: int
    N: int
    K: int
    frozen_mask: np.ndarray
    info_positions: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.N != 1 << self.n or self.N < 1:
            raise ValueError(f"N={self.N} is not 2**n for n={self.n}")
        if not 0 < self.K <= self.N:
            raise ValueError(f"K={self.K} out of range for N={self.N}")
        mask = _as_bits(self.frozen_mask, self.N).copy()
        if int(mask.sum()) != self.N - self.K:
            raise ValueError(
                f"frozen_mask has {int(mask.sum())} ones, expected N-K={self.N - self.K}"
            )
        mask.setflags(write=False)
        info = np.flatnonzero(mask == 0)
        info.setflags(write=False)
        object.__setattr__(self, "frozen_mask", mask)
        object.__setattr__(self, "info_positions", info)

    @property
    def frozen_positions(self) -> np.ndarray:
        return np.flatnonzero(self.frozen_mask)


def construct_frozen_set(N: int, K: int, design_ebno_db: float) -> PolarCode:
    """Build P(N, K) by freezing the N-K worst synthetic channels.

    Channel quality is ranked with the Bhattacharyya recursion
    z- = 2z - z^2 (upper branch), z+ = z^2 (lower branch), started from
    z = exp(-R * 10^(design_ebno_db/10)) with R = K/N. Ties freeze the
    lower index, so the construction is deterministic.
    """
    if N < 1 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    if not 0 < K <= N:
        raise ValueError(f"K must be in (0, {N}], got {K}")
    n = N.bit_length() - 1
    rate = K / N
    z = np.array([np.exp(-rate * 10.0 ** (design_ebno_db / 10.0))])
    for _ in range(n):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    # descending z, stable so equal-z ties freeze the lower index
    order = np.argsort(-z, kind="stable")
    mask = np.zeros(N, dtype=np.uint8)
    mask[order[: N - K]] = 1
    return PolarCode(n=n, N=N, K=K, frozen_mask=mask)


def load_frozen_set(N: int, path) -> PolarCode:
    """Load a frozen set from a text file with one frozen index per line."""
    if N < 1 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    indices = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                idx = int(text)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not an integer: {text!r}") from None
            if not 0 <= idx < N:
                raise ValueError(f"{path}:{lineno}: index {idx} out of range [0, {N})")
            indices.append(idx)
    if len(set(indices)) != len(indices):
        raise ValueError(f"{path}: duplicate frozen indices")
    mask = np.zeros(N, dtype=np.uint8)
    mask[indices] = 1
    return PolarCode(n=N.bit_length() - 1, N=N, K=N - len(indices), frozen_mask=mask)


def insert_message(code: PolarCode, payload) -> np.ndarray:
    """Place K payload bits at the information positions; frozen bits are 0."""
    payload = _as_bits(payload, code.K)
    u = np.zeros(code.N, dtype=np.uint8)
    u[code.info_positions] = payload
    return u


def extract_message(code: PolarCode, u) -> np.ndarray:
    """Read the K information bits back out of a message word."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != code.N:
        raise ValueError(f"expected length {code.N}, got {u.shape[-1]}")
    return u[..., code.info_positions]


def polar_transform(bits) -> np.ndarray:
    """Apply the n-stage butterfly transform x = u G^(x)n over GF(2).

    Accepts a single vector or a batch with the code dimension last. The
    transform is its own inverse, so this both encodes and re-encodes.
    """
    x = np.ascontiguousarray(np.asarray(bits, dtype=np.uint8)).copy()
    N = x.shape[-1]
    if N < 1 or N & (N - 1):
        raise ValueError(f"length must be a power of two, got {N}")
    half = 1
    while half < N:
        step = 2 * half
        v = x.reshape(x.shape[:-1] + (N // step, 2, half))
        v[..., 0, :] ^= v[..., 1, :]
        half = step
    return x
