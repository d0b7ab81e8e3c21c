"""Repetition code and the row layout of a coded set.

Row ``i`` occupies ``[l_{i-1}, l_i)``.  Its lower part ``[l_{i-1}, lm_i)`` is empty and its
upper part ``L_i = [lm_i, l_i)`` holds ``2**r_i`` back-to-back copies of a payload of
length ``2**n_i``, where

    r_i  = 2 b_i + n_i + l_{i-1}
    lm_i = 2 ** (r_i - b_i)
    l_i  = lm_i + 2 ** (n_i + r_i)

Row bounds grow as a tower, so rows are described by a :class:`LayoutRow` whose
numeric fields are ``None`` once they no longer fit in memory.  A
:class:`SymbolicSet` stores payloads only and answers queries arithmetically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .density import Bits, card, pair, unpair

# Integers above this many bits are not materialized.  Row 2 of the default
# schedule needs about 2**16.1 bits and row 3 would need 2**67590.
MATERIAL_BITS = 1 << 22


# ---------------------------------------------------------------- repetition code

def mod_rep(sigma: Sequence[int], r: int) -> Bits:
    """``2**r`` concatenated copies of ``sigma``."""
    if len(sigma) == 0:
        raise ValueError("cannot repeat the empty string")
    return tuple(sigma) * (1 << r)


def mod_rep_inv(tau: Sequence[int], r: int) -> Bits:
    """Strict-majority decoding: bit x is 1 iff more than ``2**(r-1)`` copies say 1."""
    copies = 1 << r
    if len(tau) % copies:
        raise ValueError(f"length {len(tau)} is not divisible by 2**{r}")
    width = len(tau) // copies
    out = []
    for x in range(width):
        votes = sum(tau[x + k * width] for k in range(copies))
        out.append(int(2 * votes > copies))
    return tuple(out)


# ---------------------------------------------------------------- schedules

class LayoutSchedule:
    """Assigns each row its interval index ``n_i``, slack ``b_i`` and code index ``s_i``."""

    name = "schedule"

    def row(self, i: int) -> Tuple[int, int]:
        raise NotImplementedError

    def code_index(self, i: int) -> int:
        raise NotImplementedError

    def row_for(self, n: int, s: int) -> int:
        """The row holding code index ``s`` of interval ``n``."""
        raise NotImplementedError

    def __len__(self) -> int:
        raise NotImplementedError


class PaperSchedule(LayoutSchedule):
    """Row ``i = <n, s>`` carries code ``s`` of interval ``n`` with ``b_i = 2n + i + 1``."""

    name = "paper"

    def row(self, i: int) -> Tuple[int, int]:
        n, _ = unpair(i)
        return n, 2 * n + i + 1

    def code_index(self, i: int) -> int:
        return unpair(i)[1]

    def row_for(self, n: int, s: int) -> int:
        return pair(n, s)

    def __len__(self) -> int:
        raise TypeError("the paper schedule is infinite")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PaperSchedule)

    def __hash__(self) -> int:
        return hash("paper")


@dataclass(frozen=True)
class DeskSchedule(LayoutSchedule):
    """A finite user schedule.  ``s_i`` counts earlier rows with the same ``n``."""

    rows: Tuple[Tuple[int, int], ...]
    name: str = field(default="desk", compare=False)

    def __post_init__(self) -> None:
        for i, (n, b) in enumerate(self.rows):
            if n < 0:
                raise ValueError(f"row {i}: n must be a natural")
            if b <= 0:
                raise ValueError(f"row {i}: b must be positive")

    def row(self, i: int) -> Tuple[int, int]:
        if not 0 <= i < len(self.rows):
            raise IndexError(f"row {i} is not in this schedule of {len(self.rows)} rows")
        return self.rows[i]

    def code_index(self, i: int) -> int:
        n = self.row(i)[0]
        return sum(1 for m, _ in self.rows[:i] if m == n)

    def row_for(self, n: int, s: int) -> int:
        seen = 0
        for i, (m, _) in enumerate(self.rows):
            if m == n:
                if seen == s:
                    return i
                seen += 1
        raise IndexError(f"schedule has no row for interval {n}, code index {s}")

    def __len__(self) -> int:
        return len(self.rows)


def load_schedule(source: Union[str, Path]) -> LayoutSchedule:
    """``"paper"`` or a JSON file holding an array of ``{"n": .., "b": ..}`` records."""
    if str(source) == "paper":
        return PaperSchedule()
    data = json.loads(Path(source).read_text())
    if data == "paper":
        return PaperSchedule()
    return DeskSchedule(tuple((int(rec["n"]), int(rec["b"])) for rec in data))


# ---------------------------------------------------------------- rows

@dataclass(frozen=True)
class LayoutRow:
    """One row of the layout.  Numeric fields are None when too large to hold."""

    i: int
    n: int
    s: int
    b: int
    r: Optional[int]
    l_minus: Optional[int]
    l: Optional[int]
    l_prev: Optional[int]

    @property
    def concrete(self) -> bool:
        return self.l is not None

    @property
    def copies(self) -> Optional[int]:
        return None if self.r is None else 1 << self.r


def layout_row(schedule: LayoutSchedule, i: int, l_prev: Optional[int]) -> LayoutRow:
    """Row ``i`` given the end ``l_prev`` of the previous row (None if unknown)."""
    n, b = schedule.row(i)
    if b <= 0:
        raise ValueError(f"row {i}: b must be positive")
    s = schedule.code_index(i)
    if l_prev is None:
        return LayoutRow(i, n, s, b, None, None, None, None)
    r = 2 * b + n + l_prev
    if r.bit_length() > MATERIAL_BITS:
        return LayoutRow(i, n, s, b, None, None, None, l_prev)
    if n + r > MATERIAL_BITS:
        return LayoutRow(i, n, s, b, r, None, None, l_prev)
    l_minus = 1 << (r - b)
    return LayoutRow(i, n, s, b, r, l_minus, l_minus + (1 << (n + r)), l_prev)


_ROW_CACHE: Dict[Tuple[LayoutSchedule, int], LayoutRow] = {}


def row_info(schedule: LayoutSchedule, i: int) -> LayoutRow:
    """Row ``i`` computed along the chain from row 0, memoized per schedule."""
    key = (schedule, i)
    if key in _ROW_CACHE:
        return _ROW_CACHE[key]
    start = i
    while start > 0 and (schedule, start - 1) not in _ROW_CACHE:
        start -= 1
    l_prev = 0 if start == 0 else _ROW_CACHE[(schedule, start - 1)].l
    for j in range(start, i + 1):
        info = layout_row(schedule, j, l_prev)
        _ROW_CACHE[(schedule, j)] = info
        l_prev = info.l
    return _ROW_CACHE[key]


def layout_rows(schedule: LayoutSchedule, upto: int) -> List[LayoutRow]:
    """Rows ``0 .. upto-1``; every one of them must be concrete."""
    rows = [row_info(schedule, i) for i in range(upto)]
    for info in rows:
        if not info.concrete:
            raise OverflowError(f"row {info.i} has bounds too large to represent")
    return rows


# ---------------------------------------------------------------- symbolic sets

@dataclass
class SymbolicSet:
    """A set that is empty below each ``L_i`` and ``Mod_{r_i}(payload_i)`` on it.

    ``flips[i]`` lists offsets inside ``L_i`` whose bit is inverted, which is how
    corrupted copies are represented.  Offset ``t`` belongs to copy ``t >> n_i``
    and coded position ``t mod 2**n_i``.
    """

    schedule: LayoutSchedule
    payloads: Dict[int, Bits]
    flips: Dict[int, Set[int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for i, xi in self.payloads.items():
            n, _ = self.schedule.row(i)
            if len(xi) != 1 << n:
                raise ValueError(f"row {i}: payload length {len(xi)} != 2**{n}")

    def payload(self, i: int) -> Bits:
        if i not in self.payloads:
            raise KeyError(f"row {i} is not laid out")
        return self.payloads[i]

    def flip(self, i: int, offset: int) -> None:
        info = row_info(self.schedule, i)
        if offset < 0 or (info.r is not None and info.r < 64 and offset >= 1 << (info.n + info.r)):
            raise ValueError(f"offset {offset} is outside row {i}")
        self.flips.setdefault(i, set()).symmetric_difference_update({offset})

    def copy(self) -> "SymbolicSet":
        return SymbolicSet(self.schedule, dict(self.payloads), {i: set(v) for i, v in self.flips.items()})

    def row_votes(self, i: int) -> List[int]:
        """Per coded position, how many copies deviate from the payload bit."""
        xi = self.payload(i)
        width = len(xi)
        deviations = [0] * width
        for t in self.flips.get(i, ()):
            deviations[t % width] += 1
        return deviations

    def decoded_row(self, i: int) -> Bits:
        """Majority decoding of ``X / L_i`` without reading the copies one by one."""
        info = row_info(self.schedule, i)
        xi = self.payload(i)
        out = []
        for x, dev in enumerate(self.row_votes(i)):
            if info.r is None or info.r > 62:
                # 2**(r-1) exceeds every materialized count of flips
                out.append(xi[x])
                continue
            copies = 1 << info.r
            ones = copies - dev if xi[x] else dev
            out.append(int(2 * ones > copies))
        return tuple(out)

    def row_count(self, i: int) -> int:
        """Exact ``|X & L_i|``."""
        info = row_info(self.schedule, i)
        if info.r is None or info.n + info.r > MATERIAL_BITS:
            raise OverflowError(f"row {i} has a count too large to represent")
        xi = self.payload(i)
        total = card(xi) << info.r
        width = len(xi)
        for t in self.flips.get(i, ()):
            total += -1 if xi[t % width] else 1
        return total

    def count_below_row(self, i: int) -> int:
        """Exact ``|X & [0, l_{i-1})|``."""
        return sum(self.row_count(j) for j in range(i))


def assemble(payloads: Sequence[Bits], schedule: LayoutSchedule) -> SymbolicSet:
    return SymbolicSet(schedule, {i: tuple(xi) for i, xi in enumerate(payloads)})


def query_bit(X: SymbolicSet, x: int) -> int:
    if x < 0:
        raise ValueError("positions are naturals")
    i = 0
    while True:
        info = row_info(X.schedule, i)
        if not info.concrete:
            raise IndexError(f"position {x} lies beyond the last laid-out interval")
        if x < info.l_minus:
            return 0
        if x < info.l:
            xi = X.payload(i)
            t = x - info.l_minus
            return xi[t % len(xi)] ^ int(t in X.flips.get(i, ()))
        i += 1


def materialize(X: SymbolicSet, upto: int) -> Bits:
    """Naive bit vector of ``X`` below ``upto``, read through :func:`query_bit`."""
    return tuple(query_bit(X, x) for x in range(upto))


# ---------------------------------------------------------------- row densities

def row_window_density(
    n: int, b: int, xi: Sequence[int], l_prev: int, prev_count: int
) -> Fraction:
    """Exact max of ``|X & [0, l)| / l`` over ``lm <= l < l_end`` for one clean row.

    ``prev_count`` is the number of elements below ``l_prev``.  With ``t = l - lm``
    split as ``t = k 2**n + j``, the ratio is a Moebius function of ``k`` for fixed
    ``j`` and decreases through runs of zeros, so only ``k`` in ``{0, 2**r - 1}``
    and ``j`` in ``{0} | {p + 1 : xi[p] = 1}`` can attain the maximum.
    """
    if len(xi) != 1 << n:
        raise ValueError("payload length must be 2**n")
    if not 0 <= prev_count <= l_prev:
        raise ValueError("prev_count must lie in [0, l_prev]")
    r = 2 * b + n + l_prev
    if r - b > MATERIAL_BITS or n + r > MATERIAL_BITS:
        raise OverflowError(f"row with l_prev of {l_prev.bit_length()} bits is too large")
    l_minus = 1 << (r - b)
    width = len(xi)
    weight = card(xi)
    starts = [0]
    running = 0
    prefix = [0]
    for p, bit in enumerate(xi):
        running += bit
        prefix.append(running)
        if bit and p + 1 < width:
            starts.append(p + 1)
    best_num, best_den = None, None
    for k in (0, (1 << r) - 1):
        for j in starts:
            num = prev_count + k * weight + prefix[j]
            den = l_minus + k * width + j
            if best_num is None or num * best_den > best_num * den:
                best_num, best_den = num, den
    return Fraction(best_num, best_den)


def window_density_row(X: SymbolicSet, i: int) -> Fraction:
    """Exact max of ``|X & [0, l)| / l`` over lengths ``l`` in ``L_i``.

    Rows with corrupted copies are handled by streaming when small enough.
    """
    info = row_info(X.schedule, i)
    if info.l_prev is None or info.r is None or info.l_minus is None:
        raise OverflowError(f"row {i} is too large for an exact window density")
    prev = X.count_below_row(i)
    if not X.flips.get(i):
        return row_window_density(info.n, info.b, X.payload(i), info.l_prev, prev)
    span = 1 << (info.n + info.r)
    if span > 1 << 24:
        raise OverflowError(f"row {i} is corrupted and too long to stream")
    xi = X.payload(i)
    flips = X.flips[i]
    count = prev
    best_num, best_den = count, info.l_minus
    for t in range(span - 1):
        count += xi[t % len(xi)] ^ int(t in flips)
        l = info.l_minus + t + 1
        if count * best_den > best_num * l:
            best_num, best_den = count, l
    return Fraction(best_num, best_den)
