import numpy as np

import polarperm as pp


def make_frames(code, ebno_db, count, seed, crc=None, noiseless=False):
    """Random (payloads, u, llrs) for `count` frames of `code`."""
    rng = np.random.default_rng(seed)
    payload_len = code.K - (crc.degree if crc else 0)
    payloads = rng.integers(0, 2, (count, payload_len), dtype=np.uint8)
    info = pp.crc_attach(payloads, crc) if crc else payloads
    u = np.zeros((count, code.N), dtype=np.uint8)
    u[:, code.info_positions] = info
    x = pp.polar_transform(u)
    params = pp.ChannelParams(ebno_db=ebno_db, rate=code.K / code.N, noiseless=noiseless)
    llrs = pp.transmit(x, params, rng)
    return payloads, u, llrs
