"""Successive-cancellation decoding with a last-bit reliability metric.

The check update is hardware-style min-sum, f(a, b) = sign(a) sign(b)
min(|a|, |b|), which keeps hard decisions invariant to positive scaling of
the channel LLRs; the exact boxplus is available for cross-checks against
the BP decoder. The variable update is g(a, b, u) = b + (1 - 2u) a.
"""

from dataclasses import dataclass

import numpy as np

from .bp_decoder import boxplus
from .polar_code import PolarCode


def _f_minsum(a, b):
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


_F_RULES = {"minsum": _f_minsum, "exact": boxplus}


@dataclass
class ScResult:
    u_hat: np.ndarray
    last_bit_abs_llr: float


@dataclass
class ScBatchResult:
    u_hat: np.ndarray  # (B, N)
    last_bit_abs_llr: np.ndarray  # (B,)


def _decode_segment(seg, base, frozen_mask, u_hat, dec_llrs, f_rule):
    """Depth-first SC over one subtree; returns the re-encoded bits (B, W)."""
    width = seg.shape[1]
    if width == 1:
        col = seg[:, 0]
        dec_llrs[:, base] = col
        if frozen_mask[base]:
            bits = np.zeros(seg.shape[0], dtype=np.uint8)
        else:
            bits = (col < 0).astype(np.uint8)
        u_hat[:, base] = bits
        return bits[:, np.newaxis]
    half = width // 2
    a = seg[:, :half]
    b = seg[:, half:]
    left = _decode_segment(f_rule(a, b), base, frozen_mask, u_hat, dec_llrs, f_rule)
    g = b + (1.0 - 2.0 * left) * a
    right = _decode_segment(g, base + half, frozen_mask, u_hat, dec_llrs, f_rule)
    return np.concatenate([left ^ right, right], axis=1)


def sc_decode_batch(llrs, code: PolarCode, rule: str = "minsum") -> ScBatchResult:
    """Decode a (B, N) batch of LLR frames by successive cancellation."""
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    batch, N = llrs.shape
    if N != code.N:
        raise ValueError(f"expected frames of length {code.N}, got {N}")
    u_hat = np.empty((batch, N), dtype=np.uint8)
    dec_llrs = np.empty((batch, N))
    _decode_segment(llrs, 0, code.frozen_mask, u_hat, dec_llrs, _F_RULES[rule])
    return ScBatchResult(u_hat=u_hat, last_bit_abs_llr=np.abs(dec_llrs[:, N - 1]))


def sc_decode(llrs, code: PolarCode, rule: str = "minsum") -> ScResult:
    """Decode one frame; frozen bits decide 0, info bits by LLR sign (>= 0 -> 0).

    last_bit_abs_llr is |LLR| of bit N-1 at its decision time, the
    reliability measure used to pick among ensemble candidates.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (code.N,):
        raise ValueError(f"expected {code.N} LLRs, got shape {llrs.shape}")
    res = sc_decode_batch(llrs[np.newaxis], code, rule=rule)
    return ScResult(u_hat=res.u_hat[0], last_bit_abs_llr=float(res.last_bit_abs_llr[0]))
