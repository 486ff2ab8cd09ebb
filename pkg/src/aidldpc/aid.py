"""Adaptive iterative decoding: calibrate an iteration cap, decode with it, price the savings.

Calibration decodes frames once with ``l_max`` iterations and records the
error count each cap ``l <= l_max`` would have produced, so one Monte-Carlo
pass yields the whole BER-vs-iterations curve. ``l_star`` is the smallest cap
whose measured BER meets the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelConfig
from .code import LdpcCode
from .config import format_real
from .decoder import DecodeResult, DecoderConfig, decode
from .energy import EnergyParams, decode_power, path_loss, required_received_power, total_power
from .montecarlo import StopRule, simulate_point


class AidError(ValueError):
    pass


@dataclass(frozen=True)
class CurvePoint:
    l: int
    errors: int
    bits: int

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else math.nan


@dataclass(frozen=True)
class AidProfile:
    target_ber: float
    snr_db: float
    code_id: str
    ber_by_iteration: tuple[CurvePoint, ...]
    l_star: int | None
    low_confidence: bool = False
    frames: int = 0
    # paired statistics kept from calibration; not persisted
    diff_sq: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def l_max(self) -> int:
        return len(self.ber_by_iteration)

    @property
    def bits_simulated(self) -> int:
        return self.ber_by_iteration[-1].bits if self.ber_by_iteration else 0

    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.ber_by_iteration])

    def errors(self) -> np.ndarray:
        return np.array([p.errors for p in self.ber_by_iteration], dtype=np.int64)


def find_l_star(errors, bits: int, target_ber: float) -> int | None:
    """Smallest cap ``l`` (1-based) with ``errors[l-1] / bits <= target_ber``."""
    for i, e in enumerate(errors):
        if e <= target_ber * bits:
            return i + 1
    return None


def calibrate(code: LdpcCode, channel_cfg: ChannelConfig, target_ber: float = 1e-4, l_max: int = 50,
              stop_rule: StopRule = StopRule(), threads: int = 1,
              decoder_cfg: DecoderConfig = DecoderConfig()) -> AidProfile:
    """Measure BER after every iteration up to ``l_max`` and pick the smallest sufficient cap.

    The channel config supplies the operating Eb/N0 and the master seed; the
    noise scaling always uses the code's actual rate ``k / N``. An
    unreachable target gives ``l_star = None`` rather than an error.
    ``low_confidence`` is set when the bit budget ran out before
    ``stop_rule.min_errors`` errors were observed at ``l_max``.
    """
    if l_max < 1:
        raise AidError("l_max must be >= 1")
    if not 0.0 < target_ber < 0.5:
        raise AidError("target_ber must lie in (0, 0.5)")
    cfg = DecoderConfig(l_max, decoder_cfg.schedule, decoder_cfg.llr_clamp, decoder_cfg.psi_floor)
    tally = simulate_point(code, channel_cfg.eb_n0_db, cfg, stop_rule, channel_cfg.rng_seed, threads)
    bits = tally.bits(code.k)
    curve = tuple(CurvePoint(l + 1, int(e), bits) for l, e in enumerate(tally.bit_errors))
    return AidProfile(
        target_ber=target_ber,
        snr_db=channel_cfg.eb_n0_db,
        code_id=code.code_id,
        ber_by_iteration=curve,
        l_star=find_l_star(tally.bit_errors, bits, target_ber),
        low_confidence=bool(tally.bit_errors[-1] < stop_rule.min_errors),
        frames=tally.frames,
        diff_sq=tally.diff_sq.copy(),
    )


def paired_increase_z(profile: AidProfile) -> np.ndarray:
    """z-scores of the paired per-frame change in errors from cap ``l`` to ``l + 1``.

    Entry ``l - 1`` is ``D / sqrt(sum_f d_f**2 - D**2 / F)`` with ``d_f`` the
    change for frame ``f`` and ``D`` its sum. A positive z flags an increase
    in BER; zero variance with ``D <= 0`` gives ``-inf``.
    """
    if profile.diff_sq is None:
        raise AidError("profile carries no paired statistics (loaded from file?)")
    e = profile.errors()
    d = np.diff(e).astype(np.float64)
    var = profile.diff_sq - d ** 2 / max(profile.frames, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(var > 0, d / np.sqrt(np.maximum(var, 0.0)), np.where(d > 0, np.inf, -np.inf))
    return z


def decode_with_profile(code: LdpcCode, llrs, profile: AidProfile,
                        decoder_cfg: DecoderConfig = DecoderConfig()) -> DecodeResult:
    """Decode with the iteration cap fixed at ``profile.l_star`` (early exit still applies)."""
    if profile.l_star is None:
        raise AidError("profile has no l_star: target BER unreachable at this SNR")
    cfg = DecoderConfig(profile.l_star, decoder_cfg.schedule, decoder_cfg.llr_clamp, decoder_cfg.psi_floor)
    return decode(code.h, llrs, cfg)


@dataclass(frozen=True)
class AidSavingsReport:
    l_baseline: int
    l_star: int
    decode_power_baseline: float
    decode_power_aid: float
    total_power_baseline: float
    total_power_aid: float
    saving_fraction: float
    radio_power: float

    @property
    def iterations_saved(self) -> int:
        return self.l_baseline - self.l_star

    @property
    def radio_share(self) -> float:
        """Radio fraction of the baseline total power."""
        return self.radio_power / self.total_power_baseline


def physical_radio_power(p: EnergyParams, eb_n0_db: float) -> float:
    """``P_L * P_R`` with ``P_R`` the received power needed at ``eb_n0_db``."""
    return path_loss(p) * required_received_power(p, 10.0 ** (eb_n0_db / 10.0))


def radio_power_for_saving(p: EnergyParams, l_baseline: int, l_ref: int, saving: float) -> float:
    """Radio term that makes moving from ``l_baseline`` to ``l_ref`` save ``saving`` of total power.

    Solves ``slope * (l_baseline - l_ref) = saving * (radio + slope * l_baseline)``
    with ``slope = E_node * R_dec / R_c``.
    """
    if not 0.0 < saving < 1.0 or l_ref >= l_baseline:
        raise AidError("need 0 < saving < 1 and l_ref < l_baseline")
    slope = decode_power(p, 1)
    radio = slope * ((l_baseline - l_ref) / saving - l_baseline)
    if radio < 0:
        raise AidError("requested saving exceeds the decode share of the baseline")
    return radio


def savings_report(profile: AidProfile, energy_params: EnergyParams, l_baseline: int = 50,
                   radio_power: float | None = None) -> AidSavingsReport:
    """Total power at ``l_baseline`` versus at ``l_star``.

    ``radio_power`` is the ``P_L * P_R`` term; by default it is computed from
    the link budget at the profile's SNR.
    """
    if profile.l_star is None:
        raise AidError("profile has no l_star")
    if l_baseline < profile.l_star:
        raise AidError("l_baseline must be >= l_star")
    if radio_power is None:
        radio_power = physical_radio_power(energy_params, profile.snr_db)
    base = total_power(energy_params, 1.0, radio_power, l_baseline)
    aid = total_power(energy_params, 1.0, radio_power, profile.l_star)
    return AidSavingsReport(
        l_baseline=l_baseline,
        l_star=profile.l_star,
        decode_power_baseline=decode_power(energy_params, l_baseline),
        decode_power_aid=decode_power(energy_params, profile.l_star),
        total_power_baseline=base,
        total_power_aid=aid,
        saving_fraction=1.0 - aid / base,
        radio_power=radio_power,
    )


# ---------------------------------------------------------------------------
# persistence

def format_profile(profile: AidProfile) -> str:
    head = [
        f"code_id = {profile.code_id}",
        f"snr_db = {format_real(profile.snr_db)}",
        f"target_ber = {format_real(profile.target_ber)}",
        f"l_max = {profile.l_max}",
        f"l_star = {profile.l_star if profile.l_star is not None else 'none'}",
        f"bits_simulated = {profile.bits_simulated}",
        f"frames = {profile.frames}",
        f"low_confidence = {'true' if profile.low_confidence else 'false'}",
        "l,errors,bits,ber",
    ]
    rows = [f"{p.l},{p.errors},{p.bits},{format_real(p.ber)}" for p in profile.ber_by_iteration]
    return "\n".join(head + rows) + "\n"


def write_profile(profile: AidProfile, path) -> None:
    Path(path).write_text(format_profile(profile))


def parse_profile(text: str, source="<profile>") -> AidProfile:
    head: dict[str, str] = {}
    curve = []
    in_rows = False
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not in_rows:
            if line == "l,errors,bits,ber":
                in_rows = True
                continue
            if "=" not in line:
                raise AidError(f"{source}:{no}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            head[key] = value
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise AidError(f"{source}:{no}: expected 4 columns")
        try:
            curve.append(CurvePoint(int(parts[0]), int(parts[1]), int(parts[2])))
        except ValueError as exc:
            raise AidError(f"{source}:{no}: bad integer") from exc
    try:
        l_star = None if head["l_star"] == "none" else int(head["l_star"])
        profile = AidProfile(
            target_ber=float(head["target_ber"]),
            snr_db=float(head["snr_db"]),
            code_id=head["code_id"],
            ber_by_iteration=tuple(curve),
            l_star=l_star,
            low_confidence=head.get("low_confidence", "false") == "true",
            frames=int(head.get("frames", 0)),
        )
    except KeyError as exc:
        raise AidError(f"{source}: missing header key {exc.args[0]}") from exc
    if profile.l_max != int(head.get("l_max", profile.l_max)):
        raise AidError(f"{source}: l_max does not match the number of rows")
    return profile


def read_profile(path) -> AidProfile:
    return parse_profile(Path(path).read_text(), source=str(path))
