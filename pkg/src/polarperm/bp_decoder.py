"""Flooding belief-propagation decoding over the polar factor graph.

Messages live on n+1 node columns of N rows: column 0 is the message (u)
side, column n the channel (x) side, and the processing elements between
columns l and l+1 connect row pairs (i, i + 2^l). One update iteration is a
right-to-left sweep (layer n-1 down to 0) followed by a left-to-right sweep
(layer 0 up to n-1), with early termination checked after each full
iteration.

All kernels operate on arrays with the (column, row) axes last, so the same
code path serves a single frame and a batch of frames; elementwise numpy
ops make the two bit-identical.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .crc import CrcSpec, remainder
from .polar_code import PolarCode, polar_transform

# message clamp in natural-log LLR units; also the frozen-bit prior
CLIP = 40.0

TERMINATIONS = ("gmatrix", "crc", "none")
RULES = ("exact", "minsum")
MINSUM_SCALE = 0.9375


def boxplus(a, b):
    """Exact LLR-domain check-node combination, clipped to +-CLIP.

    Computed as min-sum plus the Jacobian correction, which equals
    2*atanh(tanh(a/2)*tanh(b/2)) but stays finite for saturated inputs.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    out += np.log1p(np.exp(-np.abs(a + b)))
    out -= np.log1p(np.exp(-np.abs(a - b)))
    return np.clip(out, -CLIP, CLIP)


def minsum(a, b):
    """Scaled min-sum approximation of boxplus (factor 0.9375)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return MINSUM_SCALE * np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


_RULE_FUNCS = {"exact": boxplus, "minsum": minsum}


def _clip(values):
    return np.clip(values, -CLIP, CLIP)


@lru_cache(maxsize=None)
def _upper_rows(n: int):
    """Per layer l, the rows i with bit l clear; partner row is i + 2^l."""
    rows = np.arange(1 << n)
    return tuple(np.flatnonzero(((rows >> l) & 1) == 0) for l in range(n))


def _sweep_right_to_left(L, R, uppers, rule):
    n = len(uppers)
    for l in range(n - 1, -1, -1):
        up = uppers[l]
        lo = up + (1 << l)
        l_up = L[..., l + 1, up]
        l_lo = L[..., l + 1, lo]
        r_up = R[..., l, up]
        r_lo = R[..., l, lo]
        L[..., l, up] = rule(l_up, r_lo + l_lo)
        L[..., l, lo] = _clip(rule(l_up, r_up) + l_lo)


def _sweep_left_to_right(L, R, uppers, rule):
    for l in range(len(uppers)):
        up = uppers[l]
        lo = up + (1 << l)
        l_up = L[..., l + 1, up]
        l_lo = L[..., l + 1, lo]
        r_up = R[..., l, up]
        r_lo = R[..., l, lo]
        R[..., l + 1, up] = rule(r_up, l_lo + r_lo)
        R[..., l + 1, lo] = _clip(rule(r_up, l_up) + r_lo)


@dataclass
class BpState:
    """Left/right message arrays for one frame plus the iteration counter."""

    L: np.ndarray  # (n+1, N) right-to-left messages per node column
    R: np.ndarray  # (n+1, N) left-to-right messages per node column
    iteration: int = 0

    @classmethod
    def for_code(cls, code: PolarCode) -> "BpState":
        shape = (code.n + 1, code.N)
        return cls(L=np.zeros(shape), R=np.zeros(shape))


@dataclass
class BpResult:
    u_hat: np.ndarray
    x_hat: np.ndarray
    iterations_used: int
    terminated_early: bool


def bp_init(state: BpState, llrs, code: PolarCode) -> None:
    """Reset a state: channel LLRs on the right, frozen priors on the left."""
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (code.N,):
        raise ValueError(f"expected {code.N} LLRs, got shape {llrs.shape}")
    state.L[:] = 0.0
    state.R[:] = 0.0
    state.L[code.n] = llrs
    state.R[0, code.frozen_mask == 1] = CLIP
    state.iteration = 0


def bp_iterate(state: BpState, rule: str = "exact") -> None:
    """Run one full flooding iteration (right-to-left, then left-to-right)."""
    uppers = _upper_rows(state.L.shape[0] - 1)
    fn = _RULE_FUNCS[rule]
    _sweep_right_to_left(state.L, state.R, uppers, fn)
    _sweep_left_to_right(state.L, state.R, uppers, fn)
    state.iteration += 1


def hard_decision_u(state: BpState) -> np.ndarray:
    """Message-side hard decision: bit 0 iff R + L >= 0 at column 0."""
    return ((state.R[0] + state.L[0]) < 0).astype(np.uint8)


def hard_decision_x(state: BpState) -> np.ndarray:
    """Channel-side hard decision at column n, used by the G-matrix check."""
    n = state.L.shape[0] - 1
    return ((state.L[n] + state.R[n]) < 0).astype(np.uint8)


def gmatrix_check(u_hat, x_hat) -> bool:
    """True iff the decided message re-encodes to the decided codeword."""
    return bool(np.array_equal(polar_transform(u_hat), np.asarray(x_hat, dtype=np.uint8)))


def _check_termination(u, x, term, crc, crc_positions):
    if term == "gmatrix":
        return (polar_transform(u) == x).all(axis=-1)
    bits = u[..., crc_positions]
    return ~remainder(bits, crc).any(axis=-1)


@dataclass
class BpBatchResult:
    """Per-frame decode outcomes for a batch, aligned with the input order."""

    u_hat: np.ndarray  # (B, N)
    x_hat: np.ndarray  # (B, N)
    iterations_used: np.ndarray  # (B,)
    terminated_early: np.ndarray  # (B,) bool


def bp_decode_batch(
    llrs,
    code: PolarCode,
    i_max: int = 200,
    term: str = "gmatrix",
    crc: CrcSpec | None = None,
    rule: str = "exact",
    crc_positions=None,
) -> BpBatchResult:
    """Decode a (B, N) batch of LLR frames; each frame behaves exactly like
    a standalone `bp_decode` call.

    `crc_positions` overrides the positions (and order) of the bits fed to
    the CRC termination check; ensemble decoding on permuted bit indices
    passes the permuted image of the original information positions so the
    payload is checked in its original order.
    """
    if i_max < 1:
        raise ValueError(f"i_max must be >= 1, got {i_max}")
    if term not in TERMINATIONS:
        raise ValueError(f"unknown termination {term!r}")
    if rule not in RULES:
        raise ValueError(f"unknown update rule {rule!r}")
    if (crc is None) == (term == "crc"):
        raise ValueError("crc spec must be given exactly when term='crc'")

    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    batch, N = llrs.shape
    if N != code.N:
        raise ValueError(f"expected frames of length {code.N}, got {N}")
    if term == "crc" and crc_positions is None:
        crc_positions = code.info_positions

    uppers = _upper_rows(code.n)
    fn = _RULE_FUNCS[rule]

    L = np.zeros((batch, code.n + 1, code.N))
    R = np.zeros_like(L)
    L[:, code.n, :] = llrs
    R[:, 0, code.frozen_mask == 1] = CLIP

    out_u = np.zeros((batch, code.N), dtype=np.uint8)
    out_x = np.zeros((batch, code.N), dtype=np.uint8)
    iterations = np.full(batch, i_max, dtype=np.int64)
    early = np.zeros(batch, dtype=bool)

    active = np.arange(batch)
    for it in range(1, i_max + 1):
        _sweep_right_to_left(L, R, uppers, fn)
        _sweep_left_to_right(L, R, uppers, fn)
        u = ((R[:, 0] + L[:, 0]) < 0).astype(np.uint8)
        x = ((L[:, code.n] + R[:, code.n]) < 0).astype(np.uint8)
        if term == "none":
            if it == i_max:
                out_u[active] = u
                out_x[active] = x
            continue
        done = _check_termination(u, x, term, crc, crc_positions)
        if done.any():
            hit = active[done]
            out_u[hit] = u[done]
            out_x[hit] = x[done]
            iterations[hit] = it
            early[hit] = True
            keep = ~done
            active = active[keep]
            if active.size == 0:
                break
            L = L[keep]
            R = R[keep]
            u = u[keep]
            x = x[keep]
        if it == i_max:
            out_u[active] = u
            out_x[active] = x
    return BpBatchResult(out_u, out_x, iterations, early)


def bp_decode(
    llrs,
    code: PolarCode,
    i_max: int = 200,
    term: str = "gmatrix",
    crc: CrcSpec | None = None,
    rule: str = "exact",
    crc_positions=None,
) -> BpResult:
    """Decode one LLR frame with up to i_max flooding iterations.

    The selected termination condition is evaluated after every iteration;
    the first passing iteration is returned with terminated_early set,
    otherwise the result after i_max iterations.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (code.N,):
        raise ValueError(f"expected {code.N} LLRs, got shape {llrs.shape}")
    res = bp_decode_batch(
        llrs[np.newaxis], code, i_max=i_max, term=term, crc=crc, rule=rule,
        crc_positions=crc_positions,
    )
    return BpResult(
        u_hat=res.u_hat[0],
        x_hat=res.x_hat[0],
        iterations_used=int(res.iterations_used[0]),
        terminated_early=bool(res.terminated_early[0]),
    )
