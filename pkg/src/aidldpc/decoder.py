"""Log-domain belief-propagation decoding (layered and flooding schedules).

Sign convention: an LLR is ``ln(P(bit=0) / P(bit=1))``; the hard decision is
bit 0 iff the LLR is ``>= 0``. Layers are single check rows processed in row
order. Check-to-variable messages are stored per edge in the row-major edge
order of :class:`~aidldpc.code.ParityCheckMatrix`.

``llr_clamp`` bounds channel LLRs and check-to-variable messages. Beliefs S
are left unclamped: layered updates recover extrinsic values as
``S - R_old``, which is only exact if S holds the true sum. S is therefore
bounded by ``llr_clamp * (1 + column weight)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .code import CodeError, ParityCheckMatrix

LAYERED = "layered"
FLOODING = "flooding"


@dataclass(frozen=True)
class DecoderConfig:
    max_iterations: int = 50
    schedule: str = LAYERED
    llr_clamp: float = 25.0
    psi_floor: float = 1e-9

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.schedule not in (LAYERED, FLOODING):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if not self.llr_clamp > 0 or not self.psi_floor > 0:
            raise ValueError("llr_clamp and psi_floor must be positive")


@dataclass
class LlrState:
    """Per-variable beliefs ``s`` and per-edge check messages ``r``."""

    s: np.ndarray
    r: np.ndarray

    @classmethod
    def initial(cls, h: ParityCheckMatrix, channel_llrs, llr_clamp: float = 25.0) -> "LlrState":
        llr = np.clip(np.asarray(channel_llrs, dtype=np.float64), -llr_clamp, llr_clamp)
        if llr.shape != (h.n_vars,):
            raise CodeError(f"expected {h.n_vars} channel LLRs, got shape {llr.shape}")
        return cls(llr.copy(), np.zeros(h.n_edges))

    def copy(self) -> "LlrState":
        return LlrState(self.s.copy(), self.r.copy())


@dataclass(frozen=True)
class DecodeResult:
    bits: np.ndarray
    iterations_used: int
    converged: bool
    final_llrs: np.ndarray


@njit(cache=True, nogil=True)
def _psi(x):
    # -ln(tanh(x/2)) written to stay accurate at both ends of (0, inf)
    return math.log1p(2.0 / math.expm1(x))


def psi(x):
    """``-ln(tanh(x/2))`` for ``x > 0``; decreasing and its own inverse."""
    if np.ndim(x):
        return np.log1p(2.0 / np.expm1(np.asarray(x, dtype=np.float64)))
    return _psi(float(x))


@njit(cache=True, nogil=True)
def _check_update(start, end, edge_var, s_in, r, q, mags, pre, suf, clamp, floor):
    """Eqs. 2-5 for one check; leaves new messages in ``r`` and Q values in ``q``."""
    d = end - start
    neg = 0
    for k in range(d):
        e = start + k
        qk = s_in[edge_var[e]] - r[e]
        q[k] = qk
        if qk < 0.0:
            neg += 1
        a = abs(qk)
        if a < floor:
            a = floor
        mags[k] = _psi(a)
    # exclusive sums via prefix/suffix so no term is subtracted back out
    pre[0] = 0.0
    for k in range(d):
        pre[k + 1] = pre[k] + mags[k]
    suf[d] = 0.0
    for k in range(d - 1, -1, -1):
        suf[k] = suf[k + 1] + mags[k]
    for k in range(d):
        a = pre[k] + suf[k + 1]
        if a < floor:
            a = floor
        own_neg = 1 if q[k] < 0.0 else 0
        sign = -1.0 if (neg - own_neg) % 2 else 1.0
        rk = sign * _psi(a)
        if rk > clamp:
            rk = clamp
        elif rk < -clamp:
            rk = -clamp
        r[start + k] = rk


@njit(cache=True, nogil=True)
def _layered_pass(row_ptr, edge_var, s, r, q, mags, pre, suf, clamp, floor):
    n_checks = row_ptr.shape[0] - 1
    for m in range(n_checks):
        start = row_ptr[m]
        end = row_ptr[m + 1]
        _check_update(start, end, edge_var, s, r, q, mags, pre, suf, clamp, floor)
        for k in range(end - start):
            s[edge_var[start + k]] = q[k] + r[start + k]


@njit(cache=True, nogil=True)
def _flooding_pass(row_ptr, edge_var, llr, s, r, q, mags, pre, suf, clamp, floor):
    n_checks = row_ptr.shape[0] - 1
    s_old = s.copy()
    for m in range(n_checks):
        _check_update(row_ptr[m], row_ptr[m + 1], edge_var, s_old, r, q, mags, pre, suf, clamp, floor)
    for j in range(s.shape[0]):
        s[j] = llr[j]
    for e in range(edge_var.shape[0]):
        s[edge_var[e]] += r[e]


@njit(cache=True, nogil=True)
def _syndrome_zero(row_ptr, edge_var, bits):
    for m in range(row_ptr.shape[0] - 1):
        acc = 0
        for e in range(row_ptr[m], row_ptr[m + 1]):
            acc ^= bits[edge_var[e]]
        if acc:
            return False
    return True


@njit(cache=True, nogil=True)
def _decode_frames(row_ptr, edge_var, llrs, max_iter, flooding, clamp, floor,
                   ref, info_mask, bits_out, s_out, iters_out, conv_out, errs_out, trace):
    """Decode each row of ``llrs``.

    When ``ref`` has rows, ``errs_out[f, l-1]`` receives the number of
    information-bit errors of the hard decision that a decoder capped at
    ``l`` iterations would return (frozen after early exit). When ``trace``
    has rows (single frame only), ``trace[l-1]`` receives S after iteration l.
    """
    n_frames, n = llrs.shape
    max_deg = 0
    for m in range(row_ptr.shape[0] - 1):
        if row_ptr[m + 1] - row_ptr[m] > max_deg:
            max_deg = row_ptr[m + 1] - row_ptr[m]
    q = np.empty(max_deg)
    mags = np.empty(max_deg)
    pre = np.empty(max_deg + 1)
    suf = np.empty(max_deg + 1)
    r = np.empty(edge_var.shape[0])
    s = np.empty(n)
    llr = np.empty(n)
    bits = np.empty(n, dtype=np.uint8)
    track = ref.shape[0] > 0
    tracing = trace.shape[0] > 0

    for f in range(n_frames):
        for j in range(n):
            v = llrs[f, j]
            if v > clamp:
                v = clamp
            elif v < -clamp:
                v = -clamp
            llr[j] = v
            s[j] = v
        r[:] = 0.0
        used = max_iter
        converged = False
        for it in range(max_iter):
            if flooding:
                _flooding_pass(row_ptr, edge_var, llr, s, r, q, mags, pre, suf, clamp, floor)
            else:
                _layered_pass(row_ptr, edge_var, s, r, q, mags, pre, suf, clamp, floor)
            for j in range(n):
                bits[j] = 1 if s[j] < 0.0 else 0
            if tracing:
                trace[it, :] = s
            if track:
                errs = 0
                for j in range(n):
                    if info_mask[j] and bits[j] != ref[f, j]:
                        errs += 1
                errs_out[f, it] = errs
            if _syndrome_zero(row_ptr, edge_var, bits):
                used = it + 1
                converged = True
                break
        if track:
            for it in range(used, max_iter):
                errs_out[f, it] = errs_out[f, used - 1]
        bits_out[f, :] = bits
        s_out[f, :] = s
        iters_out[f] = used
        conv_out[f] = converged


_EMPTY_U8 = np.zeros((0, 0), dtype=np.uint8)
_EMPTY_MASK = np.zeros(0, dtype=np.bool_)
_EMPTY_F = np.zeros((0, 0))
_EMPTY_I = np.zeros((0, 0), dtype=np.int64)


def decode_batch(h: ParityCheckMatrix, llrs, cfg: DecoderConfig, ref=None, info_mask=None):
    """Decode a ``(F, N)`` batch of channel LLRs.

    Returns ``(bits, final_llrs, iterations_used, converged, errors)`` where
    ``errors`` is the ``(F, max_iterations)`` per-cap error table (only when
    ``ref`` is given, else ``None``). Errors are counted on ``info_mask``
    positions (all positions by default).
    """
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[1] != h.n_vars:
        raise CodeError(f"expected LLR batch of shape (F, {h.n_vars}), got {llrs.shape}")
    n_frames = llrs.shape[0]
    bits = np.empty((n_frames, h.n_vars), dtype=np.uint8)
    s_out = np.empty((n_frames, h.n_vars))
    iters = np.empty(n_frames, dtype=np.int64)
    conv = np.empty(n_frames, dtype=np.bool_)
    if ref is not None:
        ref = np.ascontiguousarray(ref, dtype=np.uint8)
        if ref.shape != llrs.shape:
            raise CodeError("reference codewords must match the LLR batch shape")
        mask = np.ones(h.n_vars, dtype=np.bool_) if info_mask is None else np.asarray(info_mask, dtype=np.bool_)
        errs = np.zeros((n_frames, cfg.max_iterations), dtype=np.int64)
    else:
        ref, mask, errs = _EMPTY_U8, _EMPTY_MASK, _EMPTY_I
    _decode_frames(h.row_ptr, h.edge_var, llrs, cfg.max_iterations, cfg.schedule == FLOODING,
                   cfg.llr_clamp, cfg.psi_floor, ref, mask, bits, s_out, iters, conv, errs, _EMPTY_F)
    return bits, s_out, iters, conv, (errs if ref.shape[0] else None)


def _decode_one(h, channel_llrs, cfg, trace_path=None):
    llr = np.asarray(channel_llrs, dtype=np.float64)
    if llr.shape != (h.n_vars,):
        raise CodeError(f"expected {h.n_vars} channel LLRs, got shape {llr.shape}")
    trace = np.zeros((cfg.max_iterations, h.n_vars)) if trace_path is not None else _EMPTY_F
    bits = np.empty((1, h.n_vars), dtype=np.uint8)
    s_out = np.empty((1, h.n_vars))
    iters = np.empty(1, dtype=np.int64)
    conv = np.empty(1, dtype=np.bool_)
    _decode_frames(h.row_ptr, h.edge_var, llr[None, :], cfg.max_iterations, cfg.schedule == FLOODING,
                   cfg.llr_clamp, cfg.psi_floor, _EMPTY_U8, _EMPTY_MASK, bits, s_out, iters, conv,
                   _EMPTY_I, trace)
    used = int(iters[0])
    if trace_path is not None:
        write_trace(trace[:used], trace_path)
    return DecodeResult(bits[0], used, bool(conv[0]), s_out[0])


def decode(h: ParityCheckMatrix, channel_llrs, cfg: DecoderConfig = DecoderConfig(),
           trace_path=None) -> DecodeResult:
    """Decode one frame with the schedule named in ``cfg`` (layered by default).

    Stops after the first iteration whose hard decision has a zero syndrome.
    If ``trace_path`` is given, S after each iteration is written there as
    CSV rows ``iteration,j,S_j``.
    """
    return _decode_one(h, channel_llrs, cfg, trace_path)


def decode_flooding(h: ParityCheckMatrix, channel_llrs, cfg: DecoderConfig = DecoderConfig(),
                    trace_path=None) -> DecodeResult:
    """Two-phase schedule: every check reads the previous iteration's beliefs."""
    cfg = DecoderConfig(cfg.max_iterations, FLOODING, cfg.llr_clamp, cfg.psi_floor)
    return _decode_one(h, channel_llrs, cfg, trace_path)


def _scratch(h):
    d = max(h.row_weights())
    return np.empty(d), np.empty(d), np.empty(d + 1), np.empty(d + 1)


def layered_iteration(h: ParityCheckMatrix, state: LlrState, llr_clamp: float = 25.0,
                      psi_floor: float = 1e-9) -> LlrState:
    """One full layered pass over all checks; returns a new state."""
    if state.s.shape != (h.n_vars,) or state.r.shape != (h.n_edges,):
        raise CodeError("LLR state is not aligned with the parity-check matrix")
    out = state.copy()
    _layered_pass(h.row_ptr, h.edge_var, out.s, out.r, *_scratch(h), llr_clamp, psi_floor)
    return out


def flooding_iteration(h: ParityCheckMatrix, state: LlrState, channel_llrs, llr_clamp: float = 25.0,
                       psi_floor: float = 1e-9) -> LlrState:
    if state.s.shape != (h.n_vars,) or state.r.shape != (h.n_edges,):
        raise CodeError("LLR state is not aligned with the parity-check matrix")
    out = state.copy()
    llr = np.clip(np.asarray(channel_llrs, dtype=np.float64), -llr_clamp, llr_clamp)
    _flooding_pass(h.row_ptr, h.edge_var, llr, out.s, out.r, *_scratch(h), llr_clamp, psi_floor)
    return out


def write_trace(trace: np.ndarray, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "j", "S_j"])
        for it, row in enumerate(trace, start=1):
            for j, v in enumerate(row):
                w.writerow([it, j, format(float(v), ".17g")])
