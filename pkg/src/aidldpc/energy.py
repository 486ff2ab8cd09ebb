"""Radio and decoding energy model for a short-range sensor link.

Powers are in watts, energies in joules, durations in seconds. The default
:class:`EnergyParams` carry the reference simulation setup: 144 mW transmit
power, 3 m link at 60 GHz, 3 GHz bandwidth, 3 dB noise figure, 300 K,
1.5 Gb/s data and decoding rates and 1 pJ per node-iteration.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

SPEED_OF_LIGHT = 299_792_458.0


class EnergyParamError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyParams:
    p_tr: float = 0.144
    p_ckt: float = 0.0
    p_sleep: float = 0.0
    p_tran: float = 0.0
    t_sleep: float = 0.0
    t_tr: float = 0.0
    t_on: float = 1e-6
    g_t: float = 1.0
    g_r: float = 1.0
    frequency: float = 60e9
    d: float = 3.0
    n: float = 3.0
    b: float = 1.0
    bandwidth: float = 3e9
    temperature: float = 300.0
    nf: float = 10.0 ** 0.3
    e_node: float = 1e-12
    r_data: float = 1.5e9
    r_dec: float = 1.5e9
    r_c: float = 0.5
    frame_size: int = 1500
    boltzmann: float = 1.38065e-23
    # listed with the reference parameters but used by no formula
    w: float = 1.0
    degree: int = 2

    def __post_init__(self):
        positive = ("g_t", "g_r", "frequency", "d", "b", "bandwidth", "temperature", "nf",
                    "e_node", "r_data", "r_dec", "frame_size", "boltzmann")
        for name in positive:
            if not getattr(self, name) > 0:
                raise EnergyParamError(f"{name} must be positive")
        for name in ("p_tr", "p_ckt", "p_sleep", "p_tran", "t_sleep", "t_tr", "t_on"):
            if getattr(self, name) < 0:
                raise EnergyParamError(f"{name} must be non-negative")
        if self.n < 1:
            raise EnergyParamError("path-loss exponent must be >= 1")
        if not 0 < self.r_c <= 1:
            raise EnergyParamError("code rate must lie in (0, 1]")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def n0(self) -> float:
        return self.boltzmann * self.temperature

    def replace(self, **changes) -> "EnergyParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class EnergyReport:
    e_radio_per_bit: float
    p_transmit: float
    p_received: float
    e_decode_frame: float
    e_decode_lower_bound: float
    p_total: float
    decode_power: float
    radio_power: float


def radio_energy_per_bit(p: EnergyParams, n_bits: int) -> float:
    """Sleep + transient + ON-mode energy spread over ``n_bits``; ON power is ``p_tr + p_ckt``."""
    if n_bits < 1:
        raise EnergyParamError("n_bits must be >= 1")
    return (p.p_sleep * p.t_sleep + p.p_tran * p.t_tr + (p.p_tr + p.p_ckt) * p.t_on) / n_bits


def path_loss(p: EnergyParams) -> float:
    """Friis loss factor ``(4 pi / lambda)^2 d^n / (G_t G_r)``."""
    return (4.0 * math.pi / p.wavelength) ** 2 * p.d ** p.n / (p.g_t * p.g_r)


def friis_transmit_power(p: EnergyParams, p_r: float) -> float:
    if not p_r > 0:
        raise EnergyParamError("received power must be positive")
    return p_r * path_loss(p)


def required_received_power(p: EnergyParams, snr_linear: float) -> float:
    """``SNR * b * B * N0/2 * NF``."""
    if not snr_linear > 0:
        raise EnergyParamError("SNR must be positive")
    return snr_linear * p.b * p.bandwidth * (p.n0 / 2.0) * p.nf


def decode_energy_frame(p: EnergyParams, e_dec_bit: float) -> float:
    if e_dec_bit < 0:
        raise EnergyParamError("per-bit decoding energy must be non-negative")
    return e_dec_bit * p.frame_size * p.r_c


def transmit_energy_frame(p: EnergyParams) -> float:
    return radio_energy_per_bit(p, p.frame_size) * p.frame_size


def decode_energy_lower_bound(p: EnergyParams, m_nodes: int, l_iters: int) -> float:
    """``E_node * m * l``: every node spends ``E_node`` per iteration."""
    if m_nodes < 0 or l_iters < 0:
        raise EnergyParamError("counts must be non-negative")
    return p.e_node * m_nodes * l_iters


def decode_power(p: EnergyParams, l_iters: float) -> float:
    return p.e_node * l_iters * p.r_dec / p.r_c


def total_power(p: EnergyParams, p_loss: float, p_recv: float, l_iters: float) -> float:
    """Radio term ``P_L * P_R`` plus decoding term ``E_node * l * R_dec / R_c``."""
    if l_iters < 0:
        raise EnergyParamError("iteration count must be non-negative")
    return p_loss * p_recv + decode_power(p, l_iters)


def shannon_min_eb_n0(spectral_efficiency: float) -> float:
    """Smallest Eb/N0 in dB that supports ``spectral_efficiency`` bit/s/Hz."""
    eta = spectral_efficiency
    if not eta > 0:
        raise EnergyParamError("spectral efficiency must be positive")
    return 10.0 * math.log10(math.expm1(eta * math.log(2.0)) / eta)


def energy_report(p: EnergyParams, snr_linear: float, l_iters: int, m_nodes: int,
                  e_dec_bit: float | None = None) -> EnergyReport:
    """Evaluate every formula of the model at one operating point.

    ``e_dec_bit`` defaults to the lower-bound decoding energy spread over the
    frame's information bits.
    """
    p_r = required_received_power(p, snr_linear)
    p_t = friis_transmit_power(p, p_r)
    bound = decode_energy_lower_bound(p, m_nodes, l_iters)
    if e_dec_bit is None:
        e_dec_bit = bound / (p.frame_size * p.r_c)
    radio = path_loss(p) * p_r
    return EnergyReport(
        e_radio_per_bit=radio_energy_per_bit(p, p.frame_size),
        p_transmit=p_t,
        p_received=p_r,
        e_decode_frame=decode_energy_frame(p, e_dec_bit),
        e_decode_lower_bound=bound,
        p_total=total_power(p, path_loss(p), p_r, l_iters),
        decode_power=decode_power(p, l_iters),
        radio_power=radio,
    )


# ---------------------------------------------------------------------------
# parameter files

# file key -> (field, converter from file units)
PARAM_KEYS = {
    "ptr_mw": ("p_tr", lambda v: v * 1e-3),
    "ptr_w": ("p_tr", float),
    "pckt_w": ("p_ckt", float),
    "psleep_w": ("p_sleep", float),
    "ptran_w": ("p_tran", float),
    "tsleep_s": ("t_sleep", float),
    "ttr_s": ("t_tr", float),
    "ton_s": ("t_on", float),
    "gt": ("g_t", float),
    "gr": ("g_r", float),
    "freq_hz": ("frequency", float),
    "d_m": ("d", float),
    "pathloss_exp": ("n", float),
    "b_bits_per_symbol": ("b", float),
    "bandwidth_hz": ("bandwidth", float),
    "temp_k": ("temperature", float),
    "nf_db": ("nf", lambda v: 10.0 ** (v / 10.0)),
    "nf_linear": ("nf", float),
    "enode_j": ("e_node", float),
    "rdata_bps": ("r_data", float),
    "rdec_bps": ("r_dec", float),
    "rc": ("r_c", float),
    "frame_size_bits": ("frame_size", int),
    "boltzmann": ("boltzmann", float),
    "w": ("w", float),
    "degree": ("degree", int),
}


def params_from_mapping(values: dict, base: EnergyParams | None = None) -> EnergyParams:
    """Apply file-style keys (unknown keys ignored) on top of ``base``."""
    changes = {}
    for key, raw in values.items():
        if key in PARAM_KEYS:
            name, conv = PARAM_KEYS[key]
            try:
                changes[name] = conv(float(raw))
            except ValueError as exc:
                raise EnergyParamError(f"{key}: not a number: {raw!r}") from exc
    return dataclasses.replace(base or EnergyParams(), **changes)


def params_to_mapping(p: EnergyParams) -> dict:
    """SI-unit keys only, so that writing and re-reading is exact."""
    return {key: getattr(p, name) for key, (name, conv) in PARAM_KEYS.items()
            if conv is float or conv is int}


def load_params(path) -> EnergyParams:
    from .config import read_kv_file

    return params_from_mapping(read_kv_file(Path(path)))
