"""BPSK over AWGN: noise scaling, channel LLRs and the uncoded BER curve.

Bit 0 maps to +1 and bit 1 to -1. ``eb_n0_db`` is per information bit, so
the symbol SNR is ``code_rate * Eb/N0`` and the per-dimension noise variance
is ``1 / (2 * code_rate * Eb/N0)``.

Noise is drawn with a fixed, portable recipe: a PCG64 stream seeded with the
integer seed yields raw 64-bit words ``x``; each becomes a uniform
``u = ((x >> 11) + 0.5) * 2**-53`` in (0, 1) and then a standard normal via
the inverse Gaussian CDF. Per-frame seeds come from :func:`derive_seed`,
a SplitMix64 chain, so frame ``i`` depends only on ``(master_seed, i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, ndtri

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *keys: int) -> int:
    """Fold integer keys into a 64-bit seed: ``h = mix(master); h = mix(h ^ mix(key))`` per key."""
    h = _splitmix64(master & _MASK64)
    for key in keys:
        h = _splitmix64(h ^ _splitmix64(key & _MASK64))
    return h


# stream tags for derive_seed(master, frame_index, stream)
MESSAGE_STREAM = 0
NOISE_STREAM = 1


def raw_words(seed: int, n: int) -> np.ndarray:
    return np.random.PCG64(seed).random_raw(n)


def uniforms(seed: int, n: int) -> np.ndarray:
    return ((raw_words(seed, n) >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def gaussian(seed: int, n: int) -> np.ndarray:
    """``n`` standard normal draws by inverse CDF; bit-reproducible for a seed."""
    return ndtri(uniforms(seed, n))


def random_bits(seed: int, n: int) -> np.ndarray:
    return (raw_words(seed, n) >> np.uint64(63)).astype(np.uint8)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ChannelConfig:
    eb_n0_db: float
    code_rate: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.code_rate <= 1.0:
            raise ValueError("code_rate must lie in (0, 1]")

    @property
    def es_n0_db(self) -> float:
        return self.eb_n0_db + 10.0 * math.log10(self.code_rate)

    @property
    def noise_variance(self) -> float:
        return noise_variance(self.eb_n0_db, self.code_rate)


def noise_variance(eb_n0_db: float, code_rate: float = 1.0) -> float:
    return 1.0 / (2.0 * code_rate * db_to_linear(eb_n0_db))


@dataclass(frozen=True)
class ReceivedFrame:
    samples: np.ndarray
    llrs: np.ndarray


def q_function(x):
    """Gaussian tail probability ``Q(x) = 0.5 * erfc(x / sqrt(2))``."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def uncoded_ber(eb_n0_db):
    """BPSK bit error probability ``Q(sqrt(2 Eb/N0))``."""
    ebn0 = 10.0 ** (np.asarray(eb_n0_db, dtype=np.float64) / 10.0)
    return q_function(np.sqrt(2.0 * ebn0))


def modulate(bits) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def transmit(codeword, cfg: ChannelConfig) -> ReceivedFrame:
    """BPSK-modulate ``codeword`` and add AWGN drawn from ``cfg.rng_seed``."""
    x = modulate(codeword)
    var = cfg.noise_variance
    y = x + math.sqrt(var) * gaussian(cfg.rng_seed, x.size).reshape(x.shape)
    return ReceivedFrame(y, 2.0 * y / var)
