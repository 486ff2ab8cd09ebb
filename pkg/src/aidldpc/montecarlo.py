"""Frame-level Monte-Carlo engine with per-iteration error capture.

Frame ``i`` of a run draws its message from ``derive_seed(seed, i, 0)`` and
its noise from ``derive_seed(seed, i, 1)``; noise for a frame is the same
standard-normal vector at every SNR, scaled by that SNR's sigma, so curves at
different SNRs (and different caps) are paired. Frames are processed in
fixed-size chunks; the stop rule is checked after each chunk in frame order,
so totals never depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import MESSAGE_STREAM, NOISE_STREAM, derive_seed, gaussian, noise_variance, random_bits
from .code import LdpcCode, encode
from .decoder import DecoderConfig, decode_batch

CHUNK_FRAMES = 64


@dataclass
class IterationTally:
    """Integer counters for every cap ``l = 1..l_max``; index ``l - 1``."""

    l_max: int
    frames: int = 0
    bit_errors: np.ndarray = field(default=None)
    frame_errors: np.ndarray = field(default=None)
    iterations: np.ndarray = field(default=None)
    # sum over frames of (e_f(l+1) - e_f(l))**2, index l - 1, for paired tests
    diff_sq: np.ndarray = field(default=None)
    converged: int = 0

    def __post_init__(self):
        for name in ("bit_errors", "frame_errors", "iterations"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(self.l_max, dtype=np.int64))
        if self.diff_sq is None:
            self.diff_sq = np.zeros(max(self.l_max - 1, 0), dtype=np.int64)

    def merge(self, other: "IterationTally") -> None:
        self.frames += other.frames
        self.bit_errors += other.bit_errors
        self.frame_errors += other.frame_errors
        self.iterations += other.iterations
        self.diff_sq += other.diff_sq
        self.converged += other.converged

    def bits(self, k: int) -> int:
        return self.frames * k


@dataclass(frozen=True)
class StopRule:
    """Stop once ``min_errors`` bit errors are seen at the largest cap, or ``max_bits`` bits."""

    min_errors: int = 100
    max_bits: int = 10_000_000
    min_frames: int = 0

    def done(self, tally: IterationTally, k: int) -> bool:
        if tally.frames < self.min_frames:
            return False
        return tally.bit_errors[-1] >= self.min_errors or tally.bits(k) >= self.max_bits


def simulate_chunk(code: LdpcCode, eb_n0_db: float, frame_ids, seed: int, cfg: DecoderConfig,
                   noiseless: bool = False) -> IterationTally:
    """Encode, transmit and decode the listed frames; tally errors on information bits."""
    frame_ids = list(frame_ids)
    n, k = code.n, code.k
    msgs = np.stack([random_bits(derive_seed(seed, i, MESSAGE_STREAM), k) for i in frame_ids])
    cw = encode(code.encoder, msgs)
    var = noise_variance(eb_n0_db, code.rate)
    y = 1.0 - 2.0 * cw.astype(np.float64)
    if not noiseless:
        z = np.stack([gaussian(derive_seed(seed, i, NOISE_STREAM), n) for i in frame_ids])
        y = y + math.sqrt(var) * z
    llrs = 2.0 * y / var
    info_mask = np.zeros(n, dtype=np.bool_)
    info_mask[code.encoder.info_positions] = True
    _, _, iters, conv, errs = decode_batch(code.h, llrs, cfg, ref=cw, info_mask=info_mask)

    tally = IterationTally(cfg.max_iterations, frames=len(frame_ids))
    tally.bit_errors[:] = errs.sum(axis=0)
    tally.frame_errors[:] = (errs > 0).sum(axis=0)
    caps = np.arange(1, cfg.max_iterations + 1)
    tally.iterations[:] = np.minimum(iters[:, None], caps[None, :]).sum(axis=0)
    tally.diff_sq[:] = (np.diff(errs, axis=1) ** 2).sum(axis=0)
    tally.converged = int(conv.sum())
    return tally


def simulate_point(code: LdpcCode, eb_n0_db: float, cfg: DecoderConfig, stop: StopRule, seed: int,
                   threads: int = 1, noiseless: bool = False, chunk: int = CHUNK_FRAMES) -> IterationTally:
    """Run chunks of frames until ``stop`` is satisfied."""
    total = IterationTally(cfg.max_iterations)
    next_chunk = 0

    def run(c):
        return simulate_chunk(code, eb_n0_db, range(c * chunk, (c + 1) * chunk), seed, cfg, noiseless)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        while True:
            wave = range(next_chunk, next_chunk + max(1, threads))
            next_chunk = wave.stop
            for tally in pool.map(run, wave):
                total.merge(tally)
                if stop.done(total, code.k):
                    return total
