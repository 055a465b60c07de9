"""Monte-Carlo FER/BER sweeps with reproducible parallel execution.

Frame t of sweep point p draws payload and noise from counter stream
(seed, p, t), and the stopping rule (min_frame_errors reached, scanning
outcomes in frame order, capped at max_frames) is a pure function of
per-frame results. Worker count and chunking therefore never change the
emitted records, only how much speculative work gets discarded.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bp_decoder import RULES, TERMINATIONS, bp_decode_batch
from .channel import ChannelParams, frame_rng, transmit
from .crc import CrcSpec, crc_attach
from .ensemble_decoder import pbp_decode_batch, psc_decode_batch
from .perm_selection import RankedPermSet
from .permutations import cyclic_shift_set, random_perm_set
from .polar_code import (
    PolarCode,
    construct_frozen_set,
    extract_message,
    insert_message,
    load_frozen_set,
    polar_transform,
)
from .sc_decoder import sc_decode_batch

DECODERS = ("bp", "sc", "pbp-b", "pbp-r", "pbp-cs", "psc-b")

_CHUNK_FRAMES = 256
# stream label reserving seed-space for the pbp-r permutation draw
_PBP_R_STREAM = 0x5045524D


@dataclass
class SimConfig:
    N: int
    K: int
    frozen_file: str | None = None
    design_ebno_db: float = 0.0
    crc: CrcSpec | None = None
    decoder: str = "bp"
    perms_file: str | None = None
    M: int | None = None
    ebno_start: float = 1.0
    ebno_stop: float = 3.0
    ebno_step: float = 0.5
    i_max: int = 200
    term: str | None = None  # bp only; ensembles use crc when present, else gmatrix
    rule: str = "exact"
    min_frame_errors: int = 100
    max_frames: int = 1_000_000
    seed: int = 0
    noiseless: bool = False

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.ebno_step <= 0:
            raise ValueError("ebno_step must be > 0")
        if self.ebno_stop < self.ebno_start:
            raise ValueError("ebno_stop must be >= ebno_start")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.term is not None and self.term not in TERMINATIONS:
            raise ValueError(f"unknown termination {self.term!r}")
        if self.rule not in RULES:
            raise ValueError(f"unknown update rule {self.rule!r}")
        if self.term == "crc" and self.crc is None:
            raise ValueError("term='crc' requires a CRC spec")


@dataclass
class FerRecord:
    ebno_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    avg_iterations: float
    avg_latency_timesteps: float
    avg_perms_attempted: float


def ebno_grid(config: SimConfig) -> np.ndarray:
    count = int(math.floor((config.ebno_stop - config.ebno_start) / config.ebno_step + 1e-9)) + 1
    return config.ebno_start + config.ebno_step * np.arange(count)


def build_code(config: SimConfig) -> PolarCode:
    if config.frozen_file is not None:
        code = load_frozen_set(config.N, config.frozen_file)
        if code.K != config.K:
            raise ValueError(
                f"frozen file gives K={code.K}, config says K={config.K}"
            )
        return code
    return construct_frozen_set(config.N, config.K, config.design_ebno_db)


def build_pset(config: SimConfig, code: PolarCode) -> RankedPermSet | None:
    """Materialize the permutation set the configured decoder needs."""
    if config.decoder in ("bp", "sc"):
        return None
    if config.decoder in ("pbp-b", "psc-b"):
        if config.perms_file is None:
            raise ValueError(f"decoder {config.decoder!r} needs --perms-file")
        pset = RankedPermSet.load(config.perms_file)
        if pset.n != code.n:
            raise ValueError(f"perms file is for n={pset.n}, code has n={code.n}")
        return pset.truncated(config.M) if config.M is not None else pset
    if config.decoder == "pbp-cs":
        perms = cyclic_shift_set(code.n)
        if config.M is not None:
            perms = perms[: config.M]
        return RankedPermSet.from_perms(perms)
    # pbp-r: identity plus random draws from a dedicated seed stream
    if config.M is None:
        raise ValueError("decoder 'pbp-r' needs --M")
    rng = frame_rng(config.seed, _PBP_R_STREAM)
    return RankedPermSet.from_perms(random_perm_set(code.n, config.M, rng))


def _resolve_term(config: SimConfig) -> str:
    if config.decoder == "bp" and config.term is not None:
        return config.term
    return "crc" if config.crc is not None else "gmatrix"


def _payload_len(config: SimConfig) -> int:
    return config.K - (config.crc.degree if config.crc is not None else 0)


def _run_frames(task):
    """Generate, transmit, and decode frames [lo, hi); used by worker pools."""
    (code, pset, config, ebno_db, point_idx, lo, hi) = task
    crc = config.crc
    payload_len = _payload_len(config)
    params = ChannelParams(
        ebno_db=ebno_db, rate=config.K / config.N, noiseless=config.noiseless
    )
    count = hi - lo
    payloads = np.empty((count, payload_len), dtype=np.uint8)
    llrs = np.empty((count, code.N))
    for row in range(count):
        rng = frame_rng(config.seed, point_idx, lo + row)
        payloads[row] = rng.integers(0, 2, payload_len, dtype=np.uint8)
        info = crc_attach(payloads[row], crc) if crc is not None else payloads[row]
        x = polar_transform(insert_message(code, info))
        llrs[row] = transmit(x, params, rng)

    term = _resolve_term(config)
    if config.decoder == "bp":
        res = bp_decode_batch(
            llrs, code, i_max=config.i_max, term=term,
            crc=crc if term == "crc" else None, rule=config.rule,
        )
        u_hat, iters, attempted = res.u_hat, res.iterations_used, np.ones(count, dtype=np.int64)
    elif config.decoder == "sc":
        res = sc_decode_batch(llrs, code, rule="minsum")
        u_hat = res.u_hat
        iters = np.zeros(count, dtype=np.int64)
        attempted = np.ones(count, dtype=np.int64)
    elif config.decoder == "psc-b":
        res = psc_decode_batch(llrs, code, pset, crc=crc)
        u_hat, iters, attempted = res.u_hat, res.parallel_iterations, res.perms_attempted
    else:
        res = pbp_decode_batch(
            llrs, code, pset, i_max=config.i_max, crc=crc, rule=config.rule
        )
        u_hat, iters, attempted = res.u_hat, res.parallel_iterations, res.perms_attempted

    payload_hat = extract_message(code, u_hat)[:, :payload_len]
    wrong = (payload_hat != payloads).any(axis=1)
    bit_errors = np.count_nonzero(payload_hat != payloads, axis=1)
    return wrong, bit_errors.astype(np.int64), iters, attempted


def _make_record(code, config, ebno_db, wrong, bit_errors, iters, attempted) -> FerRecord:
    frames = wrong.size
    avg_iters = float(iters.sum() / frames)
    return FerRecord(
        ebno_db=float(ebno_db),
        frames=int(frames),
        frame_errors=int(wrong.sum()),
        bit_errors=int(bit_errors.sum()),
        fer=float(wrong.sum() / frames),
        ber=float(bit_errors.sum() / (frames * _payload_len(config))),
        avg_iterations=avg_iters,
        avg_latency_timesteps=2.0 * code.n * avg_iters,
        avg_perms_attempted=float(attempted.sum() / frames),
    )


def _run_point(code, pset, config, ebno_db, point_idx, workers) -> FerRecord:
    bounds = []
    lo = 0
    while lo < config.max_frames:
        hi = min(lo + _CHUNK_FRAMES, config.max_frames)
        bounds.append((lo, hi))
        lo = hi

    outs = []
    errors_so_far = 0
    if workers <= 1:
        for lo, hi in bounds:
            out = _run_frames((code, pset, config, ebno_db, point_idx, lo, hi))
            outs.append(out)
            errors_so_far += int(out[0].sum())
            if errors_so_far >= config.min_frame_errors:
                break
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            next_chunk = 0
            while next_chunk < len(bounds):
                wave = bounds[next_chunk : next_chunk + workers]
                futures = [
                    pool.submit(_run_frames, (code, pset, config, ebno_db, point_idx, lo, hi))
                    for lo, hi in wave
                ]
                for fut in futures:
                    out = fut.result()
                    outs.append(out)
                    errors_so_far += int(out[0].sum())
                next_chunk += len(wave)
                if errors_so_far >= config.min_frame_errors:
                    break

    wrong, bit_errors, iters, attempted = (
        np.concatenate([o[i] for o in outs]) for i in range(4)
    )
    # truncate at the exact frame where the error budget was met, so the
    # record does not depend on chunking or worker count
    cum = np.cumsum(wrong)
    if cum[-1] >= config.min_frame_errors:
        stop = int(np.argmax(cum >= config.min_frame_errors)) + 1
        wrong, bit_errors, iters, attempted = (
            a[:stop] for a in (wrong, bit_errors, iters, attempted)
        )
    return _make_record(code, config, ebno_db, wrong, bit_errors, iters, attempted)


def run_point(config: SimConfig, ebno_db: float, point_index: int = 0, workers: int = 1) -> FerRecord:
    """Simulate one Eb/N0 point until min_frame_errors or max_frames."""
    code = build_code(config)
    pset = build_pset(config, code)
    return _run_point(code, pset, config, ebno_db, point_index, workers)


def run_sweep(config: SimConfig, workers: int = 1) -> list:
    """One FerRecord per grid point, ascending Eb/N0; deterministic in seed."""
    code = build_code(config)
    pset = build_pset(config, code)
    return [
        _run_point(code, pset, config, ebno, idx, workers)
        for idx, ebno in enumerate(ebno_grid(config))
    ]


CSV_HEADER = (
    "ebno_db,frames,frame_errors,bit_errors,fer,ber,"
    "avg_iterations,avg_latency_timesteps,avg_perms_attempted"
)


def format_csv(records) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.ebno_db!r},{r.frames},{r.frame_errors},{r.bit_errors},"
            f"{r.fer!r},{r.ber!r},{r.avg_iterations!r},"
            f"{r.avg_latency_timesteps!r},{r.avg_perms_attempted!r}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(records))
