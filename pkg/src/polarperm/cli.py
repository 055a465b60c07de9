"""Command-line interface: FER sweeps, permutation search, frame utilities."""

import argparse
import logging
import sys

import numpy as np

from .bp_decoder import RULES, TERMINATIONS, bp_decode
from .crc import CRC24_5G, CrcSpec, crc_attach, crc_check
from .ensemble_decoder import pbp_decode, psc_decode
from .perm_selection import search_permutations
from .polar_code import extract_message, insert_message, polar_transform
from .sc_decoder import sc_decode
from .sim_harness import (
    DECODERS,
    SimConfig,
    build_code,
    build_pset,
    emit_csv,
    format_csv,
    run_sweep,
)


def _add_code_args(parser):
    parser.add_argument("--N", type=int, required=True, help="block length (power of two)")
    parser.add_argument("--K", type=int, required=True, help="information bits incl. CRC")
    parser.add_argument("--frozen-file", help="text file with one frozen index per line")
    parser.add_argument(
        "--design-ebno", type=float, default=0.0,
        help="design Eb/N0 (dB) for the default frozen-set construction",
    )


def _add_crc_args(parser):
    parser.add_argument("--crc", choices=["none", "crc24-5g"], default="none")
    parser.add_argument(
        "--crc-poly", metavar="HEX",
        help="custom generator polynomial incl. leading term (overrides --crc)",
    )


def _crc_from_args(args) -> CrcSpec | None:
    if args.crc_poly is not None:
        return CrcSpec.from_hex(args.crc_poly)
    if args.crc == "crc24-5g":
        return CRC24_5G
    return None


def _config_from_args(args) -> SimConfig:
    return SimConfig(
        N=args.N, K=args.K, frozen_file=args.frozen_file,
        design_ebno_db=args.design_ebno, crc=_crc_from_args(args),
        decoder=args.decoder, perms_file=args.perms_file, M=args.M,
        ebno_start=args.ebno_start, ebno_stop=args.ebno_stop, ebno_step=args.ebno_step,
        i_max=args.imax, term=args.term, rule=args.bp_rule,
        min_frame_errors=args.min_frame_errors, max_frames=args.max_frames,
        seed=args.seed, noiseless=args.noiseless,
    )


def _read_bits(path) -> np.ndarray:
    values = [int(line) for line in open(path, encoding="utf-8") if line.strip()]
    if any(v not in (0, 1) for v in values):
        raise ValueError(f"{path}: bits must be 0 or 1")
    return np.array(values, dtype=np.uint8)


def _write_bits(path, bits) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{int(b)}\n" for b in bits)


def _read_llrs(path) -> np.ndarray:
    return np.array(
        [float(line) for line in open(path, encoding="utf-8") if line.strip()]
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarperm",
        description="Polar-code BP/SC decoding on permuted factor graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo FER/BER sweep")
    _add_code_args(sim)
    _add_crc_args(sim)
    sim.add_argument("--decoder", choices=DECODERS, default="bp")
    sim.add_argument("--perms-file", help="permutation set for pbp-b / psc-b")
    sim.add_argument("--M", type=int, help="number of permutations to use")
    sim.add_argument("--ebno-start", type=float, required=True)
    sim.add_argument("--ebno-stop", type=float, required=True)
    sim.add_argument("--ebno-step", type=float, default=0.5)
    sim.add_argument("--imax", type=int, default=200)
    sim.add_argument("--term", choices=TERMINATIONS, default=None,
                     help="bp termination; default crc if configured, else gmatrix")
    sim.add_argument("--bp-rule", choices=RULES, default="exact")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--min-frame-errors", type=int, default=100)
    sim.add_argument("--max-frames", type=int, default=1_000_000)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--noiseless", action="store_true")
    sim.add_argument("--out", help="CSV output path (default: stdout)")

    search = sub.add_parser("search-perms", help="score and select permutations offline")
    _add_code_args(search)
    _add_crc_args(search)
    search.add_argument("--k", type=int, required=True, help="rightmost layers to permute")
    search.add_argument("--M", type=int, required=True, help="set size incl. identity")
    search.add_argument("--ebno", type=float, required=True, help="scoring Eb/N0 (dB)")
    search.add_argument("--frames", type=int, default=500, help="failure frames to score on")
    search.add_argument("--seed", type=int, default=0)
    search.add_argument("--imax", type=int, default=200)
    search.add_argument("--bp-rule", choices=RULES, default="exact")
    search.add_argument("--out", required=True, help="permutation file to write")

    enc = sub.add_parser("encode", help="encode one payload file to a codeword file")
    _add_code_args(enc)
    _add_crc_args(enc)
    enc.add_argument("--in", dest="infile", required=True, help="payload bits, one per line")
    enc.add_argument("--out", required=True, help="codeword bits, one per line")

    dec = sub.add_parser("decode", help="decode one LLR file to a payload file")
    _add_code_args(dec)
    _add_crc_args(dec)
    dec.add_argument("--decoder", choices=DECODERS, default="bp")
    dec.add_argument("--perms-file")
    dec.add_argument("--M", type=int)
    dec.add_argument("--imax", type=int, default=200)
    dec.add_argument("--term", choices=TERMINATIONS, default=None)
    dec.add_argument("--bp-rule", choices=RULES, default="exact")
    dec.add_argument("--seed", type=int, default=0)
    dec.add_argument("--in", dest="infile", required=True, help="LLRs, one decimal per line")
    dec.add_argument("--out", required=True, help="decoded payload bits, one per line")
    return parser


def _cmd_simulate(args) -> int:
    config = _config_from_args(args)
    records = run_sweep(config, workers=args.workers)
    if args.out:
        emit_csv(records, args.out)
    else:
        sys.stdout.write(format_csv(records))
    return 0


def _cmd_search_perms(args) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    crc = _crc_from_args(args)
    config = SimConfig(
        N=args.N, K=args.K, frozen_file=args.frozen_file,
        design_ebno_db=args.design_ebno, crc=crc,
    )
    code = build_code(config)
    pset = search_permutations(
        code, k=args.k, M=args.M, ebno_db=args.ebno, frames=args.frames,
        seed=args.seed, i_max=args.imax, crc=crc, rule=args.bp_rule,
    )
    pset.save(args.out)
    print(f"wrote {pset.M} permutations to {args.out}")
    return 0


def _cmd_encode(args) -> int:
    crc = _crc_from_args(args)
    config = SimConfig(
        N=args.N, K=args.K, frozen_file=args.frozen_file,
        design_ebno_db=args.design_ebno, crc=crc,
    )
    code = build_code(config)
    payload = _read_bits(args.infile)
    info = crc_attach(payload, crc) if crc is not None else payload
    if info.size != code.K:
        raise ValueError(
            f"payload gives {info.size} information bits, code carries {code.K}"
        )
    _write_bits(args.out, polar_transform(insert_message(code, info)))
    return 0


def _cmd_decode(args) -> int:
    crc = _crc_from_args(args)
    config = SimConfig(
        N=args.N, K=args.K, frozen_file=args.frozen_file,
        design_ebno_db=args.design_ebno, crc=crc, decoder=args.decoder,
        perms_file=args.perms_file, M=args.M, i_max=args.imax, term=args.term,
        rule=args.bp_rule, seed=args.seed,
    )
    code = build_code(config)
    pset = build_pset(config, code)
    llrs = _read_llrs(args.infile)

    if args.decoder == "bp":
        term = args.term or ("crc" if crc is not None else "gmatrix")
        res = bp_decode(llrs, code, i_max=args.imax, term=term,
                        crc=crc if term == "crc" else None, rule=args.bp_rule)
        u_hat = res.u_hat
    elif args.decoder == "sc":
        u_hat = sc_decode(llrs, code).u_hat
    elif args.decoder == "psc-b":
        u_hat = psc_decode(llrs, code, pset, crc=crc).u_hat
    else:
        u_hat = pbp_decode(llrs, code, pset, i_max=args.imax, crc=crc,
                           rule=args.bp_rule).u_hat

    info = extract_message(code, u_hat)
    if crc is not None:
        if not crc_check(info, crc):
            print("warning: decoded information bits fail the CRC", file=sys.stderr)
        info = info[: code.K - crc.degree]
    _write_bits(args.out, info)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "search-perms": _cmd_search_perms,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
