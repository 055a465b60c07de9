"""Ensemble decoding over predetermined bit-index permutations.

Each candidate permutation relabels the channel frame and the frozen set,
runs the standard decoder, and maps decisions back. BP members stop at the
first permutation (in priority order) whose per-iteration termination
condition fires; if none does, the identity permutation's final result is
returned. SC members all run and a single candidate is selected by CRC or
by the last-bit reliability metric.

Iteration counts are tracked two ways: total_iterations sums over attempted
permutations (sequential hardware), parallel_iterations takes the max over
the attempted prefix (concurrent member decoders).
"""

from dataclasses import dataclass

import numpy as np

from .bp_decoder import bp_decode_batch
from .crc import CrcSpec, crc_check
from .perm_selection import RankedPermSet
from .permutations import index_map, permute_code, permute_llrs, unpermute_bits
from .polar_code import PolarCode, extract_message
from .sc_decoder import sc_decode_batch


@dataclass
class EnsembleResult:
    u_hat: np.ndarray
    winning_perm: int | None
    total_iterations: int
    terminated_early: bool
    parallel_iterations: int
    perms_attempted: int


@dataclass
class EnsembleBatchResult:
    """Per-frame ensemble outcomes; winning_perm is -1 when no member won."""

    u_hat: np.ndarray  # (B, N)
    winning_perm: np.ndarray  # (B,)
    total_iterations: np.ndarray  # (B,)
    terminated_early: np.ndarray  # (B,) bool
    parallel_iterations: np.ndarray  # (B,)
    perms_attempted: np.ndarray  # (B,)


def _check_pset(pset: RankedPermSet):
    if pset.M < 1 or not pset.perms[0].is_identity():
        raise ValueError("permutation set must be non-empty with identity first")


def pbp_decode_batch(
    llrs,
    code: PolarCode,
    pset: RankedPermSet,
    i_max: int = 200,
    crc: CrcSpec | None = None,
    rule: str = "exact",
) -> EnsembleBatchResult:
    """Batched ensemble BP; per frame identical to sequential `pbp_decode`.

    Stage j decodes, under permutation j, only the frames no earlier
    permutation terminated; this mirrors the sequential loop exactly
    because frames are independent.
    """
    _check_pset(pset)
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    batch = llrs.shape[0]
    term = "crc" if crc is not None else "gmatrix"

    u_hat = np.zeros((batch, code.N), dtype=np.uint8)
    winning = np.full(batch, -1, dtype=np.int64)
    total = np.zeros(batch, dtype=np.int64)
    parallel = np.zeros(batch, dtype=np.int64)
    early = np.zeros(batch, dtype=bool)
    attempted = np.zeros(batch, dtype=np.int64)
    fallback = np.zeros((batch, code.N), dtype=np.uint8)

    active = np.arange(batch)
    work = llrs
    for j, perm in enumerate(pset.perms):
        mapping = index_map(perm)
        crc_pos = mapping.forward[code.info_positions] if crc is not None else None
        res = bp_decode_batch(
            permute_llrs(work, mapping), permute_code(code, mapping),
            i_max=i_max, term=term, crc=crc, rule=rule, crc_positions=crc_pos,
        )
        total[active] += res.iterations_used
        parallel[active] = np.maximum(parallel[active], res.iterations_used)
        attempted[active] = j + 1
        if j == 0:
            fallback[active] = unpermute_bits(res.u_hat, mapping)
        done = res.terminated_early
        hit = active[done]
        u_hat[hit] = unpermute_bits(res.u_hat[done], mapping)
        winning[hit] = j
        early[hit] = True
        active = active[~done]
        if active.size == 0:
            break
        work = work[~done]
    u_hat[active] = fallback[active]
    return EnsembleBatchResult(u_hat, winning, total, early, parallel, attempted)


def pbp_decode(
    llrs,
    code: PolarCode,
    pset: RankedPermSet,
    i_max: int = 200,
    crc: CrcSpec | None = None,
    rule: str = "exact",
) -> EnsembleResult:
    """Try BP under each permutation in priority order, stop on termination.

    Falls back to the identity permutation's final-iteration message when no
    member terminates (the identity attempt is cached, not re-run).
    """
    res = pbp_decode_batch(
        np.asarray(llrs, dtype=np.float64)[np.newaxis], code, pset,
        i_max=i_max, crc=crc, rule=rule,
    )
    win = int(res.winning_perm[0])
    return EnsembleResult(
        u_hat=res.u_hat[0],
        winning_perm=None if win < 0 else win,
        total_iterations=int(res.total_iterations[0]),
        terminated_early=bool(res.terminated_early[0]),
        parallel_iterations=int(res.parallel_iterations[0]),
        perms_attempted=int(res.perms_attempted[0]),
    )


def psc_decode_batch(
    llrs,
    code: PolarCode,
    pset: RankedPermSet,
    crc: CrcSpec | None = None,
    rule: str = "minsum",
) -> EnsembleBatchResult:
    """SC on every permutation; select by CRC, else by last-bit reliability."""
    _check_pset(pset)
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    batch = llrs.shape[0]

    candidates = np.empty((pset.M, batch, code.N), dtype=np.uint8)
    metrics = np.empty((pset.M, batch))
    passes = np.zeros((pset.M, batch), dtype=bool)
    for j, perm in enumerate(pset.perms):
        mapping = index_map(perm)
        res = sc_decode_batch(
            permute_llrs(llrs, mapping), permute_code(code, mapping), rule=rule
        )
        candidates[j] = unpermute_bits(res.u_hat, mapping)
        metrics[j] = res.last_bit_abs_llr
        if crc is not None:
            passes[j] = crc_check(extract_message(code, candidates[j]), crc)

    # argmax picks the first maximum, i.e. the lowest permutation index
    by_metric = np.argmax(metrics, axis=0)
    if crc is not None:
        has_pass = passes.any(axis=0)
        by_crc = np.argmax(passes, axis=0)
        winning = np.where(has_pass, by_crc, by_metric)
        early = has_pass
    else:
        winning = by_metric
        early = np.zeros(batch, dtype=bool)
    u_hat = candidates[winning, np.arange(batch)]
    zero = np.zeros(batch, dtype=np.int64)
    return EnsembleBatchResult(
        u_hat=u_hat,
        winning_perm=winning.astype(np.int64),
        total_iterations=zero,
        terminated_early=early,
        parallel_iterations=zero.copy(),
        perms_attempted=np.full(batch, pset.M, dtype=np.int64),
    )


def psc_decode(
    llrs,
    code: PolarCode,
    pset: RankedPermSet,
    crc: CrcSpec | None = None,
    rule: str = "minsum",
) -> EnsembleResult:
    """Single-frame SC ensemble: first CRC-passing candidate in priority
    order, otherwise the candidate with the largest last-bit |LLR|."""
    res = psc_decode_batch(
        np.asarray(llrs, dtype=np.float64)[np.newaxis], code, pset, crc=crc, rule=rule
    )
    return EnsembleResult(
        u_hat=res.u_hat[0],
        winning_perm=int(res.winning_perm[0]),
        total_iterations=0,
        terminated_early=bool(res.terminated_early[0]),
        parallel_iterations=0,
        perms_attempted=pset.M,
    )
