"""Exact density calculus, codings of pairs and strings, and finite partial sequences.

Bit strings are tuples of 0/1 ints and double as finite sets: ``S[x] == 1``
means ``x`` is in the set.  Partial sequences are tuples whose undefined slots
hold ``None``.  Masked sequences hold the :data:`BOX` sentinel instead.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

Bits = Tuple[int, ...]
PartialSeq = Tuple[Optional[int], ...]


class _Box(enum.Enum):
    BOX = "BOX"

    def __repr__(self) -> str:
        return "BOX"


BOX = _Box.BOX
"""Wildcard value of a masked sequence.  Never equal to any natural number."""

BoxValue = Union[int, _Box]
BoxSeq = Tuple[Optional[BoxValue], ...]


# ---------------------------------------------------------------- pairing

def pair(i: int, n: int) -> int:
    """``<i, n> = 2**i * (2n + 1) - 1``, the closed form of the doubling recurrence."""
    if i < 0 or n < 0:
        raise ValueError("pair is defined on naturals only")
    return ((2 * n + 1) << i) - 1


def unpair(z: int) -> Tuple[int, int]:
    if z < 0:
        raise ValueError("unpair is defined on naturals only")
    w = z + 1
    i = (w & -w).bit_length() - 1
    return i, ((w >> i) - 1) // 2


# ---------------------------------------------------------------- strings

def bits(text: str) -> Bits:
    """Parse ``"0101"`` into a bit tuple.  The empty string gives the empty tuple."""
    if any(c not in "01" for c in text):
        raise ValueError(f"not a bit string: {text!r}")
    return tuple(int(c) for c in text)


def bitstr(sigma: Sequence[int]) -> str:
    return "".join(str(b) for b in sigma)


def code_bits(sigma: Sequence[int]) -> int:
    # 1 followed by sigma read as a base-2 numeral, least significant digit first, minus 1
    value = 1 << len(sigma)
    for n, b in enumerate(sigma):
        if b:
            value |= 1 << n
    return value - 1


def decode_bits(x: int) -> Bits:
    if x < 0:
        raise ValueError("codes are naturals")
    w = x + 1
    length = w.bit_length() - 1
    return tuple((w >> n) & 1 for n in range(length))


def code_length(x: int) -> int:
    """Length of the string coded by ``x`` without decoding it."""
    return (x + 1).bit_length() - 1


def is_prefix(sigma: Sequence[int], tau: Sequence[int]) -> bool:
    return len(sigma) <= len(tau) and tuple(tau[: len(sigma)]) == tuple(sigma)


# ---------------------------------------------------------------- tuple codes

def _block_count(m: int, n: int) -> int:
    """Number of arity-n tuples with maximum exactly m."""
    return (m + 1) ** n - m ** n


def code_tuple(tau: Sequence[int]) -> int:
    """Max-monotone bijection from arity-n tuples onto the naturals.

    Tuples with maximum m fill the block ``[m**n, (m+1)**n)`` in lexicographic order,
    so ``code < (m+1)**n`` exactly when ``max(tau) <= m``.
    """
    n = len(tau)
    if n == 0:
        raise ValueError("arity must be positive")
    if any(v < 0 for v in tau):
        raise ValueError("tuple entries are naturals")
    m = max(tau)
    rank = 0
    seen_max = False
    for pos, v in enumerate(tau):
        rest = n - pos - 1
        for w in range(v):
            if seen_max:
                rank += (m + 1) ** rest
            else:
                rank += (m + 1) ** rest - m ** rest
        if v == m:
            seen_max = True
    # w == m never occurs inside the loop since v <= m, so the count above is exact
    return m ** n + rank


def decode_tuple(x: int, n: int) -> Tuple[int, ...]:
    if n <= 0:
        raise ValueError("arity must be positive")
    if x < 0:
        raise ValueError("codes are naturals")
    m = 0
    while (m + 1) ** n <= x:
        m += 1
    rank = x - m ** n
    out = []
    seen_max = False
    for pos in range(n):
        rest = n - pos - 1
        for v in range(m + 1):
            if seen_max or v == m:
                count = (m + 1) ** rest
            else:
                count = (m + 1) ** rest - m ** rest
            if rank < count:
                out.append(v)
                seen_max = seen_max or v == m
                break
            rank -= count
    return tuple(out)


# ---------------------------------------------------------------- densities

def window_density(S: Sequence[int], a: int, b: int) -> Fraction:
    """Largest value of ``|S & [0, l)| / l`` over lengths ``a <= l <= b``."""
    if not 0 < a <= b:
        raise ValueError(f"need 0 < a <= b, got a={a}, b={b}")
    if b > len(S):
        raise ValueError(f"window [{a}, {b}] exceeds the known prefix of length {len(S)}")
    count = sum(S[:a])
    best_num, best_den = count, a
    for l in range(a + 1, b + 1):
        count += S[l - 1]
        if count * best_den > best_num * l:
            best_num, best_den = count, l
    return Fraction(best_num, best_den)


def interval_I(n: int) -> Tuple[int, int]:
    return 1 << n, 1 << (n + 1)


def slice_interval(f: Sequence[Optional[int]], interval: Tuple[int, int]) -> Tuple[int, ...]:
    """``f/I``: the restriction of ``f`` to ``I`` shifted to start at 0."""
    lo, hi = interval
    if hi > len(f):
        raise ValueError(f"f is only known below {len(f)}, interval ends at {hi}")
    out = tuple(f[lo:hi])
    if any(v is None for v in out):
        raise ValueError(f"f is undefined inside [{lo}, {hi})")
    return out


def symdiff(f: Sequence[Optional[int]], g: Sequence[Optional[int]]) -> Bits:
    """Positions where both are defined and disagree, over the common length."""
    n = min(len(f), len(g))
    return tuple(int(f[x] is not None and g[x] is not None and f[x] != g[x]) for x in range(n))


def card(S: Iterable[int]) -> int:
    return sum(1 for b in S if b)


# ---------------------------------------------------------------- masking

def box_mask(f: Sequence[Optional[BoxValue]], S: Sequence[int]) -> BoxSeq:
    """``f`` with every position of ``S`` replaced by BOX."""
    return tuple(BOX if x < len(S) and S[x] else v for x, v in enumerate(f))


def box_equal(x: Optional[BoxValue], y: Optional[BoxValue]) -> bool:
    return x is BOX or y is BOX or x == y


def sagree(f: Sequence[Optional[BoxValue]], g: Sequence[Optional[BoxValue]]) -> bool:
    if len(f) != len(g):
        raise ValueError("box agreement compares sequences of equal length")
    return all(box_equal(x, y) for x, y in zip(f, g))


def strong_dom(f: Sequence[Optional[BoxValue]]) -> Bits:
    return tuple(int(v is not None and v is not BOX) for v in f)


def overlay(sigma: Sequence[Optional[int]], f: Sequence[Optional[int]]) -> PartialSeq:
    """Take ``sigma`` where it is defined and ``f`` elsewhere."""
    n = max(len(sigma), len(f))
    out = []
    for x in range(n):
        v = sigma[x] if x < len(sigma) else None
        if v is None:
            v = f[x] if x < len(f) else None
        out.append(v)
    return tuple(out)
