"""Seeded Monte-Carlo sweeps written as CSV with a reproducible header.

Output layout::

    #@ key = value        (one line per setting; feed the file back via --config)
    snr_db,es_n0_db,l_cap,frames,bits,bit_errors,frame_errors,ber,fer,avg_iterations_used,p_total_w
    ...

``bits`` counts information bits. ``p_total_w`` is the total-power formula
evaluated at ``l = l_cap`` with the radio term from the link budget at the
row's Eb/N0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .code import code_from_spec
from .config import format_header, format_real
from .decoder import DecoderConfig, LAYERED
from .energy import EnergyParams, params_to_mapping, path_loss, required_received_power, total_power
from .montecarlo import StopRule, simulate_point

MODES = ("ber_vs_snr", "ber_vs_iterations", "energy_vs_iterations")

COLUMNS = ("snr_db", "es_n0_db", "l_cap", "frames", "bits", "bit_errors", "frame_errors",
           "ber", "fer", "avg_iterations_used", "p_total_w")


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    mode: str
    snr_points: tuple[float, ...]
    l_values: tuple[int, ...]
    code: str = "example_h"
    energy: EnergyParams = field(default_factory=EnergyParams)
    seed: int = 1
    stop: StopRule = StopRule(100, 2_000_000)
    threads: int = 1
    noiseless: bool = False
    schedule: str = LAYERED

    def __post_init__(self):
        if self.mode not in MODES:
            raise SweepError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if not self.snr_points or not self.l_values:
            raise SweepError("snr_points and l_values must be non-empty")
        if min(self.l_values) < 1:
            raise SweepError("iteration caps must be >= 1")
        if self.mode != "ber_vs_snr" and len(self.snr_points) != 1:
            raise SweepError(f"mode {self.mode} takes a single SNR point")


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    es_n0_db: float
    l_cap: int
    frames: int
    bits: int
    bit_errors: int
    frame_errors: int
    avg_iterations_used: float
    p_total_w: float

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    def values(self) -> tuple:
        return (self.snr_db, self.es_n0_db, self.l_cap, self.frames, self.bits, self.bit_errors,
                self.frame_errors, self.ber, self.fer, self.avg_iterations_used, self.p_total_w)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """One row per (SNR, cap). Each SNR point is a single pass at the largest cap."""
    code = code_from_spec(spec.code)
    l_top = max(spec.l_values)
    cfg = DecoderConfig(l_top, spec.schedule)
    loss = path_loss(spec.energy)
    rows = []
    for snr in spec.snr_points:
        tally = simulate_point(code, snr, cfg, spec.stop, spec.seed, spec.threads, spec.noiseless)
        p_r = required_received_power(spec.energy, 10.0 ** (snr / 10.0))
        for l in spec.l_values:
            rows.append(SweepRow(
                snr_db=snr,
                es_n0_db=snr + 10.0 * math.log10(code.rate),
                l_cap=l,
                frames=tally.frames,
                bits=tally.bits(code.k),
                bit_errors=int(tally.bit_errors[l - 1]),
                frame_errors=int(tally.frame_errors[l - 1]),
                avg_iterations_used=int(tally.iterations[l - 1]) / tally.frames,
                p_total_w=total_power(spec.energy, loss, p_r, l),
            ))
    return rows


def header_fields(spec: SweepSpec) -> dict:
    code = code_from_spec(spec.code)
    out = {
        "tool": "aidldpc",
        "version": __version__,
        "command": "sweep",
        "mode": spec.mode,
        "code": spec.code,
        "code_n": code.n,
        "code_k": code.k,
        "snr_db": ",".join(format_real(s) for s in spec.snr_points),
        "l_values": ",".join(str(l) for l in spec.l_values),
        "seed": spec.seed,
        "threads": spec.threads,
        "min_errors": spec.stop.min_errors,
        "max_bits": spec.stop.max_bits,
        "noiseless": "true" if spec.noiseless else "false",
        "schedule": spec.schedule,
    }
    for key, value in params_to_mapping(spec.energy).items():
        out[key] = format_real(value) if isinstance(value, float) else value
    return out


def _cell(v) -> str:
    return format_real(v) if isinstance(v, float) else str(v)


def format_csv(spec: SweepSpec, rows: list[SweepRow]) -> str:
    lines = [",".join(COLUMNS)]
    lines += [",".join(_cell(v) for v in row.values()) for row in rows]
    return format_header(header_fields(spec)) + "\n".join(lines) + "\n"


def gnuplot_stub(csv_path: Path, spec: SweepSpec) -> str:
    """Data-only plotting script for gnuplot (columns as in :data:`COLUMNS`)."""
    name = csv_path.name
    if spec.mode == "ber_vs_snr":
        body = (
            "set xlabel 'Eb/N0 (dB)'\nset ylabel 'BER'\nset logscale y\n"
            f"plot for [l in '{' '.join(map(str, spec.l_values))}'] '{name}' "
            "using 1:(column(3)==l+0 ? column(8) : 1/0) with linespoints title 'l='.l, \\\n"
            "     0.5*erfc(sqrt(10**(x/10))) title 'uncoded BPSK'\n"
        )
    elif spec.mode == "ber_vs_iterations":
        body = (
            "set xlabel 'iterations'\nset ylabel 'BER'\nset logscale y\n"
            f"plot '{name}' using 3:8 with linespoints title 'BER'\n"
        )
    else:
        body = (
            "set xlabel 'iterations'\nset ylabel 'total power (W)'\n"
            f"plot '{name}' using 3:11 with linespoints title 'p_total'\n"
        )
    return "set datafile separator ','\nset datafile commentschars '#'\n" + body


def write_sweep(spec: SweepSpec, rows: list[SweepRow], path) -> None:
    path = Path(path)
    path.write_text(format_csv(spec, rows))
    path.with_suffix(".gp").write_text(gnuplot_stub(path, spec))


def read_sweep_csv(path) -> list[dict]:
    """Rows of a sweep CSV as dicts of typed values (header block skipped)."""
    import csv

    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    ints = {"l_cap", "frames", "bits", "bit_errors", "frame_errors"}
    for rec in csv.DictReader(lines):
        out.append({k: (int(v) if k in ints else float(v)) for k, v in rec.items()})
    return out
