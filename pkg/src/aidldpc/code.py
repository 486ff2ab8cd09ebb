"""Sparse parity-check matrices, code construction and systematic encoding.

A code is held as a :class:`ParityCheckMatrix` (row and column adjacency
lists plus flat CSR arrays for the decoders). :func:`build_encoder` derives a
systematic encoder from any matrix, including rank-deficient ones, so the
message length is always ``N - rank(H)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class CodeError(ValueError):
    """Invalid code definition or an input that does not fit the code."""


@dataclass(frozen=True)
class ParityCheckMatrix:
    """Sparse binary M x N matrix stored as sorted adjacency lists.

    ``rows[m]`` lists the variables checked by check ``m`` and ``cols[j]`` the
    checks touching variable ``j``. Edges are numbered row-major, which is the
    storage order of the decoders' check-to-variable messages.
    """

    n_checks: int
    n_vars: int
    rows: tuple[tuple[int, ...], ...]
    cols: tuple[tuple[int, ...], ...]
    row_ptr: np.ndarray = field(init=False, repr=False, compare=False)
    edge_var: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.rows) != self.n_checks or len(self.cols) != self.n_vars:
            raise CodeError("adjacency list lengths do not match the matrix shape")
        for kind, lists, bound in (("row", self.rows, self.n_vars), ("column", self.cols, self.n_checks)):
            for i, idx in enumerate(lists):
                if not idx:
                    raise CodeError(f"{kind} {i} is empty")
                if any(a >= b for a, b in zip(idx, idx[1:])):
                    raise CodeError(f"{kind} {i} is not strictly increasing")
                if idx[0] < 0 or idx[-1] >= bound:
                    raise CodeError(f"{kind} {i} has an index out of range")
        if sorted(self._edges_from_rows()) != sorted((m, j) for j, c in enumerate(self.cols) for m in c):
            raise CodeError("rows and cols describe different edge sets")

        degrees = np.fromiter((len(r) for r in self.rows), dtype=np.int64, count=self.n_checks)
        row_ptr = np.zeros(self.n_checks + 1, dtype=np.int64)
        np.cumsum(degrees, out=row_ptr[1:])
        edge_var = np.fromiter((j for r in self.rows for j in r), dtype=np.int64, count=int(row_ptr[-1]))
        row_ptr.flags.writeable = False
        edge_var.flags.writeable = False
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "edge_var", edge_var)

    def _edges_from_rows(self):
        return [(m, j) for m, r in enumerate(self.rows) for j in r]

    @classmethod
    def from_rows(cls, n_vars: int, rows) -> "ParityCheckMatrix":
        rows = tuple(tuple(sorted(r)) for r in rows)
        cols: list[list[int]] = [[] for _ in range(n_vars)]
        for m, r in enumerate(rows):
            for j in r:
                if not 0 <= j < n_vars:
                    raise CodeError(f"row {m} has variable index {j} out of range")
                cols[j].append(m)
        return cls(len(rows), n_vars, rows, tuple(tuple(c) for c in cols))

    @classmethod
    def from_dense(cls, dense) -> "ParityCheckMatrix":
        a = np.asarray(dense)
        if a.ndim != 2:
            raise CodeError("dense matrix must be two-dimensional")
        return cls.from_rows(a.shape[1], [np.flatnonzero(row).tolist() for row in a])

    @property
    def n_edges(self) -> int:
        return int(self.row_ptr[-1])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        for m, r in enumerate(self.rows):
            out[m, list(r)] = 1
        return out

    def row_weights(self) -> list[int]:
        return [len(r) for r in self.rows]

    def col_weights(self) -> list[int]:
        return [len(c) for c in self.cols]


@dataclass(frozen=True)
class Encoder:
    """Systematic encoder derived from a parity-check matrix.

    ``column_permutation[:k]`` are the message (free) positions of a codeword,
    ``column_permutation[k:]`` the parity (pivot) positions.
    """

    h: ParityCheckMatrix
    rank: int
    k: int
    column_permutation: np.ndarray
    generator_rows: np.ndarray

    @property
    def n(self) -> int:
        return self.h.n_vars

    @property
    def info_positions(self) -> np.ndarray:
        return self.column_permutation[: self.k]

    @property
    def rate(self) -> float:
        return self.k / self.h.n_vars


# 4x8 example matrix used throughout the decoder walkthrough.
_EXAMPLE_H = (
    (0, 1, 0, 1, 1, 0, 0, 1),
    (1, 1, 1, 0, 0, 1, 0, 0),
    (0, 0, 1, 0, 0, 1, 1, 1),
    (1, 0, 0, 1, 1, 0, 1, 0),
)


def example_h() -> ParityCheckMatrix:
    """The fixed 4x8 example code (row weight 4, column weight 2, rank 3)."""
    return ParityCheckMatrix.from_dense(np.array(_EXAMPLE_H, dtype=np.uint8))


def gallager_regular(n_vars: int, col_weight: int, row_weight: int, seed: int,
                     max_repairs: int = 10_000) -> ParityCheckMatrix:
    """Seeded (col_weight, row_weight)-regular code from stacked column permutations.

    The socket sequence is ``col_weight`` permutations of ``range(n_vars)``
    (the first one the identity), cut into consecutive groups of
    ``row_weight``; each group is a check. A variable that lands twice in
    the same check is swapped with a socket of another check that accepts it.

    Parameters
    ----------
    n_vars : int
        Code length N.
    col_weight, row_weight : int
        Variable and check degrees.
    seed : int
        Seed for the permutations and the repair choices.
    max_repairs : int
        Bound on repair attempts before the seed is declared unusable.

    Returns
    -------
    ParityCheckMatrix
        ``M = n_vars * col_weight / row_weight`` checks, all of weight
        ``row_weight``; every column of weight ``col_weight``.
    """
    if min(n_vars, col_weight, row_weight) < 1:
        raise CodeError("n_vars, col_weight and row_weight must be positive")
    if (n_vars * col_weight) % row_weight:
        raise CodeError("n_vars * col_weight must be divisible by row_weight")
    if row_weight > n_vars:
        raise CodeError("row_weight cannot exceed n_vars")
    n_checks = n_vars * col_weight // row_weight

    rng = np.random.Generator(np.random.PCG64(seed))
    blocks = [np.arange(n_vars)] + [rng.permutation(n_vars) for _ in range(col_weight - 1)]
    sockets = np.concatenate(blocks).reshape(n_checks, row_weight)

    repairs = 0
    while True:
        bad = _first_duplicate(sockets)
        if bad is None:
            break
        if repairs >= max_repairs:
            raise CodeError(f"seed {seed} unusable: duplicate edges remain after {max_repairs} repairs")
        repairs += 1
        m, pos = bad
        v = sockets[m, pos]
        other = int(rng.integers(n_checks))
        opos = int(rng.integers(row_weight))
        w = sockets[other, opos]
        if other == m or v in sockets[other] or w in sockets[m]:
            continue
        sockets[m, pos], sockets[other, opos] = w, v

    return ParityCheckMatrix.from_rows(n_vars, [r.tolist() for r in sockets])


def _first_duplicate(sockets: np.ndarray):
    srt = np.sort(sockets, axis=1)
    dup = np.flatnonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1))
    if dup.size == 0:
        return None
    m = int(dup[0])
    seen = set()
    for pos, v in enumerate(sockets[m]):
        if v in seen:
            return m, pos
        seen.add(v)
    raise AssertionError("unreachable")


def _rref(a: np.ndarray):
    """Reduced row echelon form over GF(2); returns (matrix, pivot columns)."""
    a = a.copy()
    m, n = a.shape
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        hits = np.flatnonzero(a[row:, col]) + row
        if hits.size == 0:
            continue
        p = hits[0]
        if p != row:
            a[[row, p]] = a[[p, row]]
        mask = a[:, col].astype(bool)
        mask[row] = False
        a[mask] ^= a[row]
        pivots.append(col)
        row += 1
    return a[:row], pivots


def gf2_rank(h: ParityCheckMatrix) -> int:
    """Row rank of ``h`` over GF(2)."""
    return len(_rref(h.to_dense())[1])


def build_encoder(h: ParityCheckMatrix) -> Encoder:
    """Gauss-Jordan reduce H to ``[I | P]`` (with column pivoting) and take its null space."""
    reduced, pivots = _rref(h.to_dense())
    rank = len(pivots)
    n = h.n_vars
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    k = len(free)

    gen = np.zeros((k, n), dtype=np.uint8)
    for i, f in enumerate(free):
        gen[i, f] = 1
        gen[i, pivots] = reduced[:, f]
    perm = np.array(free + pivots, dtype=np.int64)
    gen.flags.writeable = False
    perm.flags.writeable = False
    return Encoder(h=h, rank=rank, k=k, column_permutation=perm, generator_rows=gen)


def encode(enc: Encoder, msg) -> np.ndarray:
    """Encode a length-k message (or a batch of shape ``(F, k)``) into codewords."""
    u = np.asarray(msg, dtype=np.uint8)
    if u.shape[-1] != enc.k:
        raise CodeError(f"message length {u.shape[-1]} does not match k = {enc.k}")
    # float32 matmul is exact here (sums stay below 2**24) and goes through BLAS
    prod = u.astype(np.float32) @ enc.generator_rows.astype(np.float32)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def syndrome(h: ParityCheckMatrix, word) -> np.ndarray:
    """``H . word`` over GF(2); accepts a single word or a batch of shape ``(F, N)``."""
    w = np.asarray(word, dtype=np.uint8)
    if w.shape[-1] != h.n_vars:
        raise CodeError(f"word length {w.shape[-1]} does not match N = {h.n_vars}")
    gathered = w[..., h.edge_var].astype(np.int64)
    return (np.add.reduceat(gathered, h.row_ptr[:-1], axis=-1) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# alist I/O

def write_alist(h: ParityCheckMatrix, path=None) -> str:
    """Serialise to alist text (1-indexed, no zero padding). Writes ``path`` if given."""
    cw, rw = h.col_weights(), h.row_weights()
    lines = [
        f"{h.n_vars} {h.n_checks}",
        f"{max(cw)} {max(rw)}",
        " ".join(map(str, cw)),
        " ".join(map(str, rw)),
    ]
    lines += [" ".join(str(m + 1) for m in c) for c in h.cols]
    lines += [" ".join(str(j + 1) for j in r) for r in h.rows]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_alist(source) -> ParityCheckMatrix:
    """Parse alist text or a path to an alist file. Zero entries (padding) are ignored."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    else:
        text = source
    lines = [ln for ln in text.splitlines() if ln.strip()]

    def ints(i):
        try:
            return [int(t) for t in lines[i].split()]
        except (IndexError, ValueError) as exc:
            raise CodeError(f"alist line {i + 1}: expected integers") from exc

    n, m = ints(0)[:2]
    if len(lines) < 4 + n + m:
        raise CodeError(f"alist truncated: expected {4 + n + m} lines, got {len(lines)}")
    col_w = ints(2)
    row_w = ints(3)
    cols = [tuple(x - 1 for x in ints(4 + j) if x) for j in range(n)]
    rows = [tuple(x - 1 for x in ints(4 + n + i) if x) for i in range(m)]
    if [len(c) for c in cols] != col_w or [len(r) for r in rows] != row_w:
        raise CodeError("alist weight lines disagree with the index lists")
    return ParityCheckMatrix(m, n, tuple(rows), tuple(cols))


# ---------------------------------------------------------------------------
# named codes

@dataclass(frozen=True)
class LdpcCode:
    """A parity-check matrix bundled with its encoder and a reproducible identifier."""

    code_id: str
    h: ParityCheckMatrix
    encoder: Encoder

    @property
    def n(self) -> int:
        return self.h.n_vars

    @property
    def k(self) -> int:
        return self.encoder.k

    @property
    def rate(self) -> float:
        return self.encoder.rate


_GALLAGER_RE = re.compile(r"^gallager:(\d+),(\d+),(\d+),(-?\d+)$")


def code_from_spec(spec: str) -> LdpcCode:
    """Build a code from ``example_h``, ``gallager:N,wc,wr,seed`` or ``alist:PATH``."""
    spec = spec.strip()
    if spec == "example_h":
        h = example_h()
    elif (mt := _GALLAGER_RE.match(spec)) is not None:
        n, wc, wr, seed = (int(g) for g in mt.groups())
        h = gallager_regular(n, wc, wr, seed)
    elif spec.startswith("alist:"):
        try:
            h = read_alist(Path(spec[len("alist:"):]))
        except OSError as exc:
            raise CodeError(f"cannot read alist file: {exc}") from exc
    else:
        raise CodeError(f"unknown code spec {spec!r}")
    return LdpcCode(spec, h, build_encoder(h))
