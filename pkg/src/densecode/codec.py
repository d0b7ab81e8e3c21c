"""Borrowing block code: the encoder family, code indices, distance, height and decoder.

A word ``sigma`` of arity ``n`` over the naturals is encoded by one ``n``-bit vector per
code index ``s = <tau, q> = code_tuple(tau) * n**n + rank(q)``.  Bit ``x`` of the vector
for ``(tau, q)`` is set when ``sigma[x] > tau[x]`` and ``max(tau)`` is below the largest
value lent to ``x`` by the idempotent map ``q``.

Bit vectors are stored as int bitmasks (bit ``x`` <-> position ``x``) inside
:class:`Theta`; the public helpers accept and return bit tuples as well.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .density import Bits, code_tuple, decode_tuple

Word = Tuple[int, ...]


# ---------------------------------------------------------------- maps

def is_idempotent(q: Sequence[int]) -> bool:
    n = len(q)
    return all(0 <= v < n for v in q) and all(q[q[x]] == q[x] for x in range(n))


def map_rank(q: Sequence[int]) -> int:
    """Base-``n`` value of ``q`` read with ``q[0]`` as the low digit."""
    n = len(q)
    return sum(v * n ** i for i, v in enumerate(q))


def map_unrank(rank: int, n: int) -> Tuple[int, ...]:
    if not 0 <= rank < n ** n:
        raise ValueError(f"rank {rank} is outside [0, {n}**{n})")
    return tuple((rank // n ** i) % n for i in range(n))


@dataclass(frozen=True)
class IdempotentMap:
    q: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not is_idempotent(self.q):
            raise ValueError(f"{self.q} is not an idempotent map on {len(self.q)} points")

    @property
    def rank(self) -> int:
        return map_rank(self.q)


@functools.lru_cache(maxsize=None)
def idempotent_maps(n: int) -> Tuple[Tuple[int, ...], ...]:
    """All idempotent maps on ``n`` points, sorted by rank."""
    found = [q for q in itertools.product(range(n), repeat=n) if is_idempotent(q)]
    return tuple(sorted(found, key=map_rank))


# ---------------------------------------------------------------- one encoder

def bnd_b(q: Sequence[int], sigma: Sequence[int], x: int) -> int:
    """Largest value lent to ``x`` under ``q``, or -1 when nothing maps to ``x``."""
    return max([-1] + [sigma[y] for y in range(len(q)) if q[y] == x])


def encode_one(tau: Sequence[int], q: Sequence[int], sigma: Sequence[int]) -> Bits:
    n = len(sigma)
    if len(tau) != n or len(q) != n:
        raise ValueError("tau, q and sigma must share one arity")
    if n == 0:
        raise ValueError("arity must be positive")
    if not is_idempotent(q):
        return (0,) * n
    top = max(tau)
    return tuple(int(sigma[x] > tau[x] and top < bnd_b(q, sigma, x)) for x in range(n))


def code_index(tau: Sequence[int], q: Sequence[int]) -> int:
    n = len(tau)
    if len(q) != n:
        raise ValueError("tau and q must share one arity")
    return code_tuple(tau) * n ** n + map_rank(q)


def split_code(s: int, n: int) -> Tuple[Word, Tuple[int, ...]]:
    return decode_tuple(s // n ** n, n), map_unrank(s % n ** n, n)


def mask_of(v: Sequence[int]) -> int:
    return sum(1 << x for x, b in enumerate(v) if b)


def bits_of(mask: int, n: int) -> Bits:
    return tuple((mask >> x) & 1 for x in range(n))


# ---------------------------------------------------------------- theta

class Theta:
    """Finitely supported map from code indices to ``n``-bit vectors.

    Unlisted indices hold the empty vector.  Entries are kept as two sorted numpy
    arrays so that codes of large words stay cheap.
    """

    __slots__ = ("arity", "codes", "masks")

    def __init__(self, arity: int, codes: np.ndarray, masks: np.ndarray) -> None:
        if arity <= 0:
            raise ValueError("arity must be positive")
        codes = np.asarray(codes, dtype=np.int64)
        masks = np.asarray(masks, dtype=np.int64)
        keep = masks != 0
        codes, masks = codes[keep], masks[keep]
        order = np.argsort(codes, kind="stable")
        codes, masks = codes[order], masks[order]
        if len(codes) > 1 and np.any(codes[1:] == codes[:-1]):
            raise ValueError("duplicate code index")
        if np.any(masks >> arity):
            raise ValueError(f"vector wider than arity {arity}")
        self.arity = arity
        self.codes = codes
        self.masks = masks

    @classmethod
    def from_mapping(cls, arity: int, support: Mapping[int, object]) -> "Theta":
        """Build from ``{s: bits}`` where ``bits`` is a bit tuple, a bit string or a mask."""
        codes, masks = [], []
        for s, v in support.items():
            if isinstance(v, str):
                if len(v) != arity:
                    raise ValueError(f"entry {s} has length {len(v)}, arity is {arity}")
                v = mask_of([int(c) for c in v])
            elif not isinstance(v, (int, np.integer)):
                if len(v) != arity:
                    raise ValueError(f"entry {s} has length {len(v)}, arity is {arity}")
                v = mask_of(v)
            if int(s) < 0:
                raise ValueError("code indices are naturals")
            codes.append(int(s))
            masks.append(int(v))
        return cls(arity, np.array(codes, dtype=np.int64), np.array(masks, dtype=np.int64))

    @classmethod
    def empty(cls, arity: int) -> "Theta":
        return cls(arity, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.codes)

    def __getitem__(self, s: int) -> Bits:
        return bits_of(self.mask(s), self.arity)

    def mask(self, s: int) -> int:
        k = int(np.searchsorted(self.codes, s))
        if k < len(self.codes) and self.codes[k] == s:
            return int(self.masks[k])
        return 0

    def items(self) -> Iterator[Tuple[int, Bits]]:
        for s, m in zip(self.codes.tolist(), self.masks.tolist()):
            yield s, bits_of(m, self.arity)

    def as_dict(self) -> Dict[int, int]:
        return dict(zip(self.codes.tolist(), self.masks.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Theta):
            return NotImplemented
        return (
            self.arity == other.arity
            and np.array_equal(self.codes, other.codes)
            and np.array_equal(self.masks, other.masks)
        )

    def __repr__(self) -> str:
        body = ", ".join(f"{s}: {m:0{self.arity}b}"[::-1] for s, m in list(self.as_dict().items())[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"Theta(arity={self.arity}, {{{body}{more}}})"


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.uint64)
    out = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        out += (a & np.uint64(1)).astype(np.int64)
        a = a >> np.uint64(1)
    return out


def ddist(theta: Theta, other: Theta) -> int:
    if theta.arity != other.arity:
        raise ValueError("arity mismatch")
    codes = np.union1d(theta.codes, other.codes)
    if len(codes) == 0:
        return 0
    a = _lookup(theta, codes)
    b = _lookup(other, codes)
    return int(_popcount(a ^ b).max())


def _lookup(theta: Theta, codes: np.ndarray) -> np.ndarray:
    if len(theta.codes) == 0:
        return np.zeros(len(codes), dtype=np.int64)
    k = np.searchsorted(theta.codes, codes)
    k = np.minimum(k, len(theta.codes) - 1)
    hit = theta.codes[k] == codes
    return np.where(hit, theta.masks[k], 0)


# ---------------------------------------------------------------- height

def block_of(s: int, n: int) -> int:
    """The ``m`` with ``n**n * m**n <= s < n**n * (m+1)**n``."""
    u = s // n ** n
    m = 0
    while (m + 1) ** n <= u:
        m += 1
    return m


def height(theta: Theta) -> int:
    """Least ``m`` whose block ``[n**n m**n, n**n (m+1)**n)`` holds no nonempty entry."""
    n = theta.arity
    if len(theta.codes) == 0:
        return 0
    u = theta.codes // n ** n
    top = block_of(int(u.max()) * n ** n, n)
    edges = np.array([m ** n for m in range(top + 2)], dtype=np.int64)
    used = set(np.unique(np.searchsorted(edges, u, side="right") - 1).tolist())
    m = 0
    while m in used:
        m += 1
    return m


def truncate(theta: Theta) -> Theta:
    n = theta.arity
    bound = n ** n * (height(theta) + 1) ** n
    keep = theta.codes < bound
    return Theta(n, theta.codes[keep], theta.masks[keep])


# ---------------------------------------------------------------- vectorized tables

@dataclass(frozen=True)
class _MapTable:
    n: int
    maps: np.ndarray        # (Q, n) idempotent maps, rank order
    ranks: np.ndarray       # (Q,)
    preimage: np.ndarray    # (Q, n, n) preimage[k, x, y] = maps[k][y] == x
    rank_to_idx: np.ndarray  # (n**n,) index into maps or -1
    identity: int           # index of the identity map


@functools.lru_cache(maxsize=None)
def _map_table(n: int) -> _MapTable:
    maps = np.array(idempotent_maps(n), dtype=np.int64).reshape(-1, n)
    ranks = np.array([map_rank(q) for q in idempotent_maps(n)], dtype=np.int64)
    preimage = maps[:, None, :] == np.arange(n)[None, :, None]
    rank_to_idx = np.full(n ** n, -1, dtype=np.int64)
    rank_to_idx[ranks] = np.arange(len(ranks))
    identity = int(rank_to_idx[map_rank(tuple(range(n)))])
    return _MapTable(n, maps, ranks, preimage, rank_to_idx, identity)


@functools.lru_cache(maxsize=64)
def _tau_table(n: int, top: int) -> Tuple[np.ndarray, np.ndarray]:
    """All tuples with maximum below ``top`` in code order, with their maxima."""
    count = top ** n
    taus = np.array([decode_tuple(c, n) for c in range(count)], dtype=np.int64).reshape(count, n)
    return taus, taus.max(axis=1) if count else np.zeros(0, dtype=np.int64)


def _encode_grid(sigma: np.ndarray, taus: np.ndarray, tau_max: np.ndarray, mt: _MapTable) -> np.ndarray:
    """Masks of every encoder ``(tau, q)`` on ``sigma``: shape ``(len(taus), Q)``."""
    lent = np.where(mt.preimage, sigma[None, None, :], -1).max(axis=2)      # (Q, n)
    grid = np.zeros((len(taus), len(mt.ranks)), dtype=np.int64)
    for x in range(mt.n):
        above = taus[:, x] < sigma[x]
        room = tau_max[:, None] < lent[None, :, x]
        grid |= (above[:, None] & room).astype(np.int64) << x
    return grid


def encode(sigma: Sequence[int]) -> Theta:
    """The whole code family of ``sigma``; entries with ``max(tau) >= max(sigma)`` are empty."""
    n = len(sigma)
    if n == 0:
        raise ValueError("arity must be positive")
    if any(v < 0 for v in sigma):
        raise ValueError("words are over the naturals")
    top = max(sigma)
    if top == 0:
        return Theta.empty(n)
    mt = _map_table(n)
    taus, tau_max = _tau_table(n, top)
    grid = _encode_grid(np.asarray(sigma, dtype=np.int64), taus, tau_max, mt)
    rows, cols = np.nonzero(grid)
    codes = rows.astype(np.int64) * n ** n + mt.ranks[cols]
    return Theta(n, codes, grid[rows, cols])


def cwise_min(sigma: Sequence[int], tau: Sequence[int]) -> Word:
    if len(sigma) != len(tau):
        raise ValueError("arity mismatch")
    return tuple(min(a, b) for a, b in zip(sigma, tau))


# ---------------------------------------------------------------- decoder

def _dense_target(theta: Theta, h: int, mt: _MapTable) -> Tuple[np.ndarray, int]:
    """Truncated ``theta`` as a ``(h**n, Q)`` grid plus the largest weight parked on non-idempotent maps."""
    n = theta.arity
    grid = np.zeros((h ** n, len(mt.ranks)), dtype=np.int64)
    bound = n ** n * h ** n
    keep = theta.codes < bound
    codes, masks = theta.codes[keep], theta.masks[keep]
    rows = codes // n ** n
    idx = mt.rank_to_idx[codes % n ** n]
    idem = idx >= 0
    grid[rows[idem], idx[idem]] = masks[idem]
    stray = _popcount(masks[~idem])
    return grid, int(stray.max()) if len(stray) else 0


def decode(theta: Theta) -> Word:
    """Word whose encoding is nearest to the truncated ``theta``; ties go to the least code.

    Every word with maximum at most the height is a candidate.  Candidates are
    visited in order of a lower bound read from the diagonal encoders
    ``((m,..,m), id)``, which alone determine the word, and the scan stops once
    the bound exceeds the best distance found.  The result equals the plain
    exhaustive minimization.
    """
    n = theta.arity
    h = height(theta)
    if h == 0:
        return (0,) * n
    mt = _map_table(n)
    taus, tau_max = _tau_table(n, h)
    target, stray = _dense_target(theta, h, mt)

    cands, _ = _tau_table(n, h + 1)
    count = len(cands)
    weights = 1 << np.arange(n, dtype=np.int64)
    bound = np.full(count, stray, dtype=np.int64)
    for level in range(h):
        row = code_tuple((level,) * n)
        diag = ((cands > level) * weights).sum(axis=1)
        bound = np.maximum(bound, _popcount(diag ^ target[row, mt.identity]))
    order = np.lexsort((np.arange(count), bound))

    best: Optional[Tuple[int, int]] = None
    for c in order.tolist():
        lb = int(bound[c])
        if best is not None and (lb, c) > best:
            break
        grid = _encode_grid(cands[c], taus, tau_max, mt)
        d = max(stray, int(_popcount(grid ^ target).max()))
        if best is None or (d, c) < best:
            best = (d, c)
    return tuple(int(v) for v in cands[best[1]])
