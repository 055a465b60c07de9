"""Polar-code BP/SC decoding on permuted factor graphs.

Layer permutations of the polar factor graph are realized as bit-index
permutations, so one decoder structure serves every permutation; a small
predetermined set of empirically selected permutations recovers frames the
original graph fails on.
"""

from .bp_decoder import (
    CLIP,
    BpResult,
    BpState,
    boxplus,
    bp_decode,
    bp_decode_batch,
    bp_init,
    bp_iterate,
    gmatrix_check,
    hard_decision_u,
    hard_decision_x,
    minsum,
)
from .channel import ChannelParams, ebno_to_sigma, frame_rng, transmit
from .crc import CRC8_DEFAULT, CRC24_5G, CrcSpec, crc_attach, crc_check
from .ensemble_decoder import (
    EnsembleResult,
    pbp_decode,
    pbp_decode_batch,
    psc_decode,
    psc_decode_batch,
)
from .perm_selection import (
    FailureFrame,
    RankedPermSet,
    collect_failure_frames,
    score_permutations,
    search_permutations,
    select_top,
)
from .permutations import (
    IndexMap,
    LayerPermutation,
    compose,
    cyclic_shift_set,
    form_permutation_set,
    index_map,
    permute_code,
    permute_llrs,
    random_perm_set,
    read_perm_file,
    unpermute_bits,
    write_perm_file,
)
from .polar_code import (
    PolarCode,
    construct_frozen_set,
    extract_message,
    insert_message,
    load_frozen_set,
    polar_transform,
)
from .sc_decoder import ScResult, sc_decode, sc_decode_batch
from .sim_harness import (
    FerRecord,
    SimConfig,
    build_code,
    build_pset,
    ebno_grid,
    emit_csv,
    format_csv,
    run_point,
    run_sweep,
)

__version__ = "0.1.0"
