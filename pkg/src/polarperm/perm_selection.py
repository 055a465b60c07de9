"""Offline empirical scoring and selection of decoding permutations.

The search space from `form_permutation_set` is scored against frames that
the original-graph decoder failed on: a permutation's score is the fraction
of those frames it decodes to the true payload. The best M (identity always
first, counted toward M) become the predetermined set used at decode time.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .bp_decoder import bp_decode_batch
from .channel import ChannelParams, frame_rng, transmit
from .crc import CrcSpec, crc_attach, crc_check
from .permutations import (
    LayerPermutation,
    index_map,
    permute_code,
    permute_llrs,
    read_perm_file,
    unpermute_bits,
    write_perm_file,
)
from .polar_code import PolarCode, extract_message, insert_message, polar_transform

logger = logging.getLogger(__name__)

_COLLECT_CHUNK = 256


@dataclass(frozen=True)
class FailureFrame:
    """A channel frame the identity-graph decoder got wrong, plus the truth."""

    llrs: np.ndarray
    payload: np.ndarray


@dataclass
class RankedPermSet:
    """Priority-ordered permutations with their conditional-success scores."""

    perms: list
    scores: np.ndarray
    M: int
    n: int
    k: int
    scoring_ebno_db: float | None = None
    frames_scored: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if len(self.perms) != self.M:
            raise ValueError(f"expected {self.M} permutations, got {len(self.perms)}")
        if not self.perms[0].is_identity():
            raise ValueError("the identity permutation must come first")
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.shape != (self.M,):
            raise ValueError("scores must have one entry per permutation")
        if self.M > 1 and np.any(np.diff(scores[1:]) > 0):
            raise ValueError("scores after the identity must be non-increasing")
        self.scores = scores

    @classmethod
    def from_perms(cls, perms, k: int | None = None, **meta) -> "RankedPermSet":
        """Wrap an unscored permutation list (identity first) as a set."""
        n = perms[0].n
        return cls(
            perms=list(perms), scores=np.zeros(len(perms)), M=len(perms),
            n=n, k=n if k is None else k, **meta,
        )

    def truncated(self, M: int) -> "RankedPermSet":
        """Keep only the first M permutations (priority order)."""
        if not 1 <= M <= self.M:
            raise ValueError(f"M must be in [1, {self.M}], got {M}")
        return RankedPermSet(
            perms=self.perms[:M], scores=self.scores[:M], M=M, n=self.n, k=self.k,
            scoring_ebno_db=self.scoring_ebno_db, frames_scored=self.frames_scored,
            seed=self.seed,
        )

    def save(self, path) -> None:
        write_perm_file(path, self.perms, self.k, self.scores)

    @classmethod
    def load(cls, path) -> "RankedPermSet":
        perms, scores, n, k = read_perm_file(path)
        if scores is None:
            scores = np.zeros(len(perms))
        return cls(perms=perms, scores=np.asarray(scores), M=len(perms), n=n, k=k)


def collect_failure_frames(
    code: PolarCode,
    ebno_db: float,
    count: int,
    seed: int,
    i_max: int = 200,
    crc: CrcSpec | None = None,
    rule: str = "exact",
    max_attempts: int | None = None,
) -> list:
    """Gather `count` random frames that identity-graph BP decodes wrongly.

    Frame t is generated from counter stream (seed, t), so the corpus is
    reproducible and independent of chunking. A frame counts as a failure
    when the decoded payload differs from the truth, or (with a CRC) when
    the decoded information bits fail the CRC. Raises RuntimeError after
    max_attempts frames without reaching `count` (e.g. noiseless channels,
    where BP never fails).
    """
    if count == 0:
        return []
    if max_attempts is None:
        max_attempts = 20_000 * count
    params = ChannelParams(ebno_db=ebno_db, rate=code.K / code.N)
    payload_len = code.K - (crc.degree if crc else 0)
    term = "crc" if crc else "gmatrix"

    failures: list[FailureFrame] = []
    attempt = 0
    while len(failures) < count:
        if attempt >= max_attempts:
            raise RuntimeError(
                f"only {len(failures)}/{count} failures in {attempt} frames at "
                f"{ebno_db} dB; raise max_attempts or lower the SNR"
            )
        chunk = min(_COLLECT_CHUNK, max_attempts - attempt)
        payloads = np.empty((chunk, payload_len), dtype=np.uint8)
        llrs = np.empty((chunk, code.N))
        for row in range(chunk):
            rng = frame_rng(seed, attempt + row)
            payloads[row] = rng.integers(0, 2, payload_len, dtype=np.uint8)
            info = crc_attach(payloads[row], crc) if crc else payloads[row]
            x = polar_transform(insert_message(code, info))
            llrs[row] = transmit(x, params, rng)
        res = bp_decode_batch(llrs, code, i_max=i_max, term=term, crc=crc, rule=rule)
        info_hat = extract_message(code, res.u_hat)
        wrong = (info_hat[:, :payload_len] != payloads).any(axis=1)
        if crc:
            wrong |= ~crc_check(info_hat, crc)
        for row in np.flatnonzero(wrong):
            failures.append(FailureFrame(llrs=llrs[row].copy(), payload=payloads[row].copy()))
            if len(failures) == count:
                break
        attempt += chunk
        logger.info(
            "failure collection: %d/%d after %d frames", len(failures), count, attempt
        )
    return failures


def score_permutations(
    perm_set,
    failures,
    code: PolarCode,
    i_max: int = 200,
    crc: CrcSpec | None = None,
    rule: str = "exact",
) -> np.ndarray:
    """Fraction of failure frames each permutation decodes to the truth."""
    if not failures:
        raise ValueError("cannot score against an empty failure set")
    llrs = np.stack([f.llrs for f in failures])
    payloads = np.stack([f.payload for f in failures])
    payload_len = payloads.shape[1]
    term = "crc" if crc else "gmatrix"

    scores = np.zeros(len(perm_set))
    for j, perm in enumerate(perm_set):
        mapping = index_map(perm)
        crc_pos = mapping.forward[code.info_positions] if crc else None
        res = bp_decode_batch(
            permute_llrs(llrs, mapping), permute_code(code, mapping),
            i_max=i_max, term=term, crc=crc, rule=rule, crc_positions=crc_pos,
        )
        u_hat = unpermute_bits(res.u_hat, mapping)
        ok = (extract_message(code, u_hat)[:, :payload_len] == payloads).all(axis=1)
        scores[j] = ok.sum() / len(failures)
        logger.info("scored permutation %d/%d: %.4f", j + 1, len(perm_set), scores[j])
    return scores


def select_top(perm_set, scores, M: int, k: int | None = None, **meta) -> RankedPermSet:
    """Identity plus the M-1 best non-identity permutations, score order.

    Ties keep the enumeration order of the search space (earlier wins).
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    scores = np.asarray(scores, dtype=np.float64)
    n = perm_set[0].n
    if k is None:
        k = n
    ranked = sorted(
        (j for j, p in enumerate(perm_set) if not p.is_identity()),
        key=lambda j: (-scores[j], j),
    )
    if M - 1 > len(ranked):
        raise ValueError(
            f"M={M} needs {M - 1} non-identity permutations, only {len(ranked)} available"
        )
    chosen = ranked[: M - 1]
    identity_score = 0.0
    for j, p in enumerate(perm_set):
        if p.is_identity():
            identity_score = float(scores[j])
            break
    return RankedPermSet(
        perms=[LayerPermutation.identity(n)] + [perm_set[j] for j in chosen],
        scores=np.concatenate([[identity_score], scores[chosen]]),
        M=M, n=n, k=k, **meta,
    )


def search_permutations(
    code: PolarCode,
    k: int,
    M: int,
    ebno_db: float,
    frames: int,
    seed: int,
    i_max: int = 200,
    crc: CrcSpec | None = None,
    rule: str = "exact",
) -> RankedPermSet:
    """End-to-end offline search: enumerate, collect failures, score, select."""
    from .permutations import form_permutation_set

    search_space = form_permutation_set(code.n, k)
    failures = collect_failure_frames(
        code, ebno_db, frames, seed, i_max=i_max, crc=crc, rule=rule
    )
    scores = score_permutations(search_space, failures, code, i_max=i_max, crc=crc, rule=rule)
    pset = select_top(search_space, scores, M, k=k)
    pset.scoring_ebno_db = ebno_db
    pset.frames_scored = frames
    pset.seed = seed
    return pset
