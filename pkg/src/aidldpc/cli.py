"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or malformed
input), 3 target BER unreachable (calibrate).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .aid import calibrate, format_profile
from .channel import ChannelConfig
from .code import code_from_spec, encode, write_alist
from .config import ConfigError, format_real, read_kv_file
from .decoder import FLOODING, LAYERED, DecoderConfig, decode
from .energy import energy_report, params_from_mapping
from .montecarlo import StopRule
from .sweep import MODES, SweepSpec, format_csv, run_sweep, write_sweep

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_UNREACHABLE = 0, 1, 2, 3

# all library input errors derive from ValueError
DATA_ERRORS = (ValueError, OSError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, help="master seed (default 1)")
    p.add_argument("--threads", type=int, help="worker threads (default 1)")
    p.add_argument("--out", type=Path, help="output path (default stdout)")
    p.add_argument("--config", type=Path, action="append", default=[],
                   help="key = value file; repeatable, later files win")
    p.add_argument("--code", help="example_h | gallager:N,wc,wr,seed | alist:PATH")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="aidldpc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"aidldpc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sweep", parents=[common], help="Monte-Carlo BER / energy sweep")
    s.add_argument("--mode", choices=MODES)
    s.add_argument("--snr_db", help="comma list or start:stop:step (stop inclusive)")
    s.add_argument("--l_values", help="comma list or start:stop (inclusive)")
    s.add_argument("--energy", type=Path, help="energy parameter file")
    s.add_argument("--min_errors", type=int)
    s.add_argument("--max_bits", type=int)
    s.add_argument("--schedule", choices=(LAYERED, FLOODING))
    s.add_argument("--noiseless", action="store_true", default=None)

    c = sub.add_parser("calibrate", parents=[common], help="find the AID iteration cap")
    c.add_argument("--snr_db", type=float)
    c.add_argument("--target_ber", type=float)
    c.add_argument("--l_max", type=int)
    c.add_argument("--min_errors", type=int)
    c.add_argument("--max_bits", type=int)

    e = sub.add_parser("energy", parents=[common], help="evaluate the energy model")
    e.add_argument("--energy", type=Path, help="energy parameter file")
    e.add_argument("--l", type=int, help="decoding iterations (default 50)")
    e.add_argument("--rc", type=float, help="code rate used by the power formulas")
    e.add_argument("--snr_db", type=float, help="operating Eb/N0 for the received power (default 3.5)")
    e.add_argument("--nf_db", type=float, help="noise figure")
    e.add_argument("--m_nodes", type=int, help="computational nodes (default: code length N)")

    d = sub.add_parser("decode", parents=[common], help="decode an LLR file")
    d.add_argument("llr_file", type=Path)
    d.add_argument("--max_iter", type=int)
    d.add_argument("--schedule", choices=(LAYERED, FLOODING))
    d.add_argument("--trace", type=Path, help="write per-iteration S values as CSV")

    n = sub.add_parser("encode", parents=[common], help="encode a message bit string")
    n.add_argument("message", help="bit string of length k, e.g. 10110")

    sub.add_parser("make-code", parents=[common], help="write a code as alist")
    return parser


def _settings(args) -> dict:
    merged: dict[str, str] = {}
    for path in args.config:
        merged.update(read_kv_file(path))
    if getattr(args, "energy", None) is not None:
        merged.update(read_kv_file(args.energy))
    for key, value in vars(args).items():
        if key in ("config", "energy", "command", "out", "llr_file", "trace", "message") or value is None:
            continue
        merged[key] = str(value)
    return merged


def _int(cfg, key, default):
    try:
        return int(cfg.get(key, default))
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {cfg[key]!r}") from exc


def _float(cfg, key, default):
    try:
        return float(cfg.get(key, default))
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {cfg[key]!r}") from exc


def parse_float_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ConfigError("range step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    return tuple(float(x) for x in text.split(",") if x.strip())


def parse_int_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ":" in text:
        start, stop = (int(x) for x in text.split(":"))
        return tuple(range(start, stop + 1))
    return tuple(int(x) for x in text.split(",") if x.strip())


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _energy_params(cfg):
    return params_from_mapping(cfg)


def cmd_sweep(args) -> int:
    cfg = _settings(args)
    mode = cfg.get("mode", "ber_vs_snr")
    try:
        snrs = parse_float_list(cfg.get("snr_db", "0:5:0.5"))
        default_l = "5" if mode == "ber_vs_snr" else "1:50"
        ls = parse_int_list(cfg.get("l_values", default_l))
    except ValueError as exc:
        raise ConfigError(f"bad point list: {exc}") from exc
    spec = SweepSpec(
        mode=mode,
        snr_points=snrs,
        l_values=ls,
        code=cfg.get("code", "example_h"),
        energy=_energy_params(cfg),
        seed=_int(cfg, "seed", 1),
        stop=StopRule(_int(cfg, "min_errors", 100), _int(cfg, "max_bits", 2_000_000)),
        threads=_int(cfg, "threads", 1),
        noiseless=cfg.get("noiseless", "false").lower() in ("1", "true", "yes"),
        schedule=cfg.get("schedule", LAYERED),
    )
    rows = run_sweep(spec)
    if args.out is None:
        sys.stdout.write(format_csv(spec, rows))
    else:
        write_sweep(spec, rows, args.out)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _settings(args)
    code = code_from_spec(cfg.get("code", "example_h"))
    profile = calibrate(
        code,
        ChannelConfig(_float(cfg, "snr_db", 1.5), code.rate, _int(cfg, "seed", 1)),
        target_ber=_float(cfg, "target_ber", 1e-4),
        l_max=_int(cfg, "l_max", 50),
        stop_rule=StopRule(_int(cfg, "min_errors", 100), _int(cfg, "max_bits", 10_000_000)),
        threads=_int(cfg, "threads", 1),
    )
    _emit(format_profile(profile), args.out)
    if profile.l_star is None:
        print(f"aidldpc: target BER {profile.target_ber:g} not reached within {profile.l_max} "
              f"iterations at {profile.snr_db:g} dB", file=sys.stderr)
        return EXIT_UNREACHABLE
    return EXIT_OK


def cmd_energy(args) -> int:
    cfg = _settings(args)
    p = _energy_params(cfg)
    l_iters = _int(cfg, "l", 50)
    m_nodes = _int(cfg, "m_nodes", 0) or code_from_spec(cfg.get("code", "example_h")).n
    snr_db = _float(cfg, "snr_db", 3.5)
    rep = energy_report(p, 10.0 ** (snr_db / 10.0), l_iters, m_nodes)
    values = {
        "l": l_iters,
        "rc": p.r_c,
        "snr_db": snr_db,
        "m_nodes": m_nodes,
        "e_radio_per_bit_j": rep.e_radio_per_bit,
        "p_received_w": rep.p_received,
        "p_transmit_w": rep.p_transmit,
        "radio_power_w": rep.radio_power,
        "decode_power_w": rep.decode_power,
        "p_total_w": rep.p_total,
        "e_decode_frame_j": rep.e_decode_frame,
        "e_decode_lower_bound_j": rep.e_decode_lower_bound,
    }
    text = "".join(f"{k} = {format_real(v) if isinstance(v, float) else v}\n" for k, v in values.items())
    _emit(text, args.out)
    return EXIT_OK


def read_llr_file(path: Path) -> np.ndarray:
    values = []
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        for tok in line.replace(",", " ").split():
            try:
                values.append(float(tok))
            except ValueError:
                raise ConfigError(f"not a number: {tok!r}", path, no) from None
    return np.array(values)


def cmd_decode(args) -> int:
    cfg = _settings(args)
    code = code_from_spec(cfg.get("code", "example_h"))
    llrs = read_llr_file(args.llr_file)
    if llrs.size != code.n:
        raise ConfigError(f"{args.llr_file}: expected {code.n} LLRs, found {llrs.size}")
    dcfg = DecoderConfig(_int(cfg, "max_iter", 50), cfg.get("schedule", LAYERED))
    res = decode(code.h, llrs, dcfg, trace_path=args.trace)
    text = (f"bits = {''.join(map(str, res.bits))}\n"
            f"iterations_used = {res.iterations_used}\n"
            f"converged = {'true' if res.converged else 'false'}\n")
    _emit(text, args.out)
    return EXIT_OK


def cmd_encode(args) -> int:
    cfg = _settings(args)
    code = code_from_spec(cfg.get("code", "example_h"))
    if set(args.message) - {"0", "1"}:
        raise UsageError("message must be a string of 0s and 1s")
    cw = encode(code.encoder, [int(c) for c in args.message])
    _emit("".join(map(str, cw)) + "\n", args.out)
    return EXIT_OK


def cmd_make_code(args) -> int:
    cfg = _settings(args)
    code = code_from_spec(cfg.get("code", "example_h"))
    _emit(write_alist(code.h), args.out)
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
    "energy": cmd_energy,
    "decode": cmd_decode,
    "encode": cmd_encode,
    "make-code": cmd_make_code,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"aidldpc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"aidldpc: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
