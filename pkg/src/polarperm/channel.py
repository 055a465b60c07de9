"""BPSK modulation, AWGN sampling, and channel LLR computation."""

from dataclasses import dataclass, field

import numpy as np


def ebno_to_sigma(ebno_db: float, rate: float) -> float:
    """Noise standard deviation for a given Eb/N0 (dB) and code rate K/N."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    return float(np.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebno_db / 10.0))))


@dataclass(frozen=True)
class ChannelParams:
    """BPSK/AWGN operating point. sigma is derived from ebno_db and rate.

    With ``noiseless`` set the noise vector is identically zero; LLRs are
    still scaled by 2/sigma^2 so signs carry the transmitted bits.
    """

    ebno_db: float
    rate: float
    seed: int = 0
    noiseless: bool = False
    sigma: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sigma", ebno_to_sigma(self.ebno_db, self.rate))


def frame_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based per-frame generator for stream (seed, *stream).

    Frames drawn from disjoint stream indices are statistically independent
    and reproducible regardless of scheduling, so sweeps can run frames in
    any order or in parallel without changing results.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, *stream))))


def transmit(x, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Modulate s = 1 - 2x, add AWGN, and return channel LLRs 2y/sigma^2.

    Accepts a single codeword or a batch with the code dimension last.
    """
    bits = np.asarray(x, dtype=np.uint8)
    symbols = 1.0 - 2.0 * bits.astype(np.float64)
    if params.noiseless:
        y = symbols
    else:
        y = symbols + rng.normal(0.0, params.sigma, size=bits.shape)
    return 2.0 * y / (params.sigma * params.sigma)
