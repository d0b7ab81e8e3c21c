"""The functional sending ``f`` to a coded set and its decoder, on finite data.

Row ``i`` of the image carries the encoder with code index ``s_i`` applied to
``f`` on the interval ``I_{n_i}``.  Decoding interval ``n`` reads the rows of
that interval in code order, stops at the first fully empty block, and runs
the block decoder.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .codec import Theta, Word, encode_one, split_code
from .density import Bits, PartialSeq, card, interval_I, slice_interval, symdiff
from .layout import (
    LayoutSchedule,
    SymbolicSet,
    mod_rep_inv,
    row_info,
    window_density_row,
)


class InsufficientRows(LookupError):
    """No fully empty block of rows was found among the rows available."""


def row_payload(values: Sequence[int], s: int) -> Bits:
    """The encoder with code index ``s`` applied to the word ``values``."""
    tau, q = split_code(s, len(values))
    return encode_one(tau, q, values)


@dataclass
class GammaImage:
    """A coded set together with the prefix of ``f`` it was built from."""

    X: SymbolicSet
    source: PartialSeq

    @property
    def schedule(self) -> LayoutSchedule:
        return self.X.schedule

    def decoded_row(self, i: int) -> Bits:
        return self.X.decoded_row(i)


def _row_list(rows: Union[int, Iterable[int]]) -> List[int]:
    return list(range(rows)) if isinstance(rows, int) else sorted(set(rows))


def gamma_prefix(
    f: Sequence[Optional[int]], schedule: LayoutSchedule, rows: Union[int, Iterable[int]]
) -> GammaImage:
    """Lay out the payload of every requested row (``rows`` is a count or an index list)."""
    payloads: Dict[int, Bits] = {}
    for i in _row_list(rows):
        n, _ = schedule.row(i)
        word = slice_interval(f, interval_I(n))
        payloads[i] = row_payload(word, schedule.code_index(i))
    return GammaImage(SymbolicSet(schedule, payloads), tuple(f))


def rows_for_intervals(schedule: LayoutSchedule, ns: Iterable[int], values: int) -> List[int]:
    """Rows needed to decode intervals ``ns`` when every value is below ``values``.

    A word with maximum ``m`` has height ``m``, so the rows of blocks ``0..m`` suffice.
    """
    out = []
    for n in ns:
        arity = 1 << n
        top = arity ** arity * values ** arity
        out.extend(schedule.row_for(n, s) for s in range(top))
    return sorted(set(out))


class OracleSet:
    """A set given only by a bit query, read row by row over concrete rows."""

    def __init__(self, schedule: LayoutSchedule, query) -> None:
        self.schedule = schedule
        self.query = query

    def decoded_row(self, i: int) -> Bits:
        info = row_info(self.schedule, i)
        if not info.concrete:
            raise InsufficientRows(f"row {i} cannot be read bit by bit")
        width = 1 << info.n
        bits = tuple(self.query(x) for x in range(info.l_minus, info.l))
        assert len(bits) == width << info.r
        return mod_rep_inv(bits, info.r)


def theta_view(X, n: int, schedule: LayoutSchedule) -> Theta:
    """Rows of interval ``n`` up to and including the first fully empty block."""
    arity = 1 << n
    span = arity ** arity
    support: Dict[int, Bits] = {}
    m = 0
    while True:
        empty = True
        for s in range(span * m ** arity, span * (m + 1) ** arity):
            try:
                i = schedule.row_for(n, s)
                word = X.decoded_row(i)
            except (KeyError, IndexError) as exc:
                raise InsufficientRows(
                    f"interval {n}: row for code {s} is unavailable before an empty block was seen"
                ) from exc
            if any(word):
                support[s] = word
                empty = False
        if empty:
            return Theta.from_mapping(arity, support)
        m += 1


def gamma_hat_interval(X, n: int, schedule: LayoutSchedule) -> Word:
    from .codec import decode

    return decode(theta_view(X, n, schedule))


def gamma_hat(X, upto: int, schedule: LayoutSchedule) -> Tuple[int, ...]:
    """Decoded prefix of length ``2**(upto+1)``: 0 at position 0, then intervals ``0..upto``."""
    out: List[int] = [0]
    for n in range(upto + 1):
        out.extend(gamma_hat_interval(X, n, schedule))
    return tuple(out)


# ---------------------------------------------------------------- perturbations

@dataclass(frozen=True)
class RowReport:
    row: int
    n: int
    s: int
    interval_fraction: Fraction
    code_fraction: Fraction
    window_density: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.window_density < self.bound

    def csv_fields(self) -> List[str]:
        d = self.window_density
        return [
            str(self.row),
            str(self.n),
            str(self.s),
            _ratio(self.interval_fraction),
            _ratio(self.code_fraction),
            str(d.numerator),
            str(d.denominator),
            "true" if self.holds else "false",
        ]


CSV_HEADER = [
    "row",
    "n_i",
    "s_i",
    "interval_fraction",
    "code_fraction",
    "window_density_num",
    "window_density_den",
    "bound_holds",
]


def _ratio(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def perturb_values(
    f: Sequence[int], S: Sequence[int], rng: random.Random, values: int = 8
) -> Tuple[int, ...]:
    """``f`` with every position of ``S`` redrawn uniformly from ``[0, values)``."""
    return tuple(
        rng.randrange(values) if x < len(S) and S[x] else v for x, v in enumerate(f)
    )


def perturb_experiment(
    f: Sequence[int],
    S: Sequence[int],
    schedule: LayoutSchedule,
    rows: int,
    *,
    f_prime: Optional[Sequence[int]] = None,
    rng: Optional[random.Random] = None,
    values: int = 8,
) -> List[RowReport]:
    """Compare the images of ``f`` and a copy changed on ``S`` row by row.

    Each report carries the exact density of the symmetric difference over the
    lengths of ``L_i`` and the bound ``code_fraction + 2**-b_i`` it must stay under.
    """
    if f_prime is None:
        f_prime = perturb_values(f, S, rng or random.Random(0), values)
    if len(f_prime) != len(f):
        raise ValueError("f and its perturbation must have equal length")
    changed = symdiff(f, f_prime)
    if any(changed[x] and not (x < len(S) and S[x]) for x in range(len(changed))):
        raise ValueError("the perturbation changes f outside S")
    left = gamma_prefix(f, schedule, rows).X
    right = gamma_prefix(f_prime, schedule, rows).X
    diff = SymbolicSet(
        schedule, {i: symdiff(left.payload(i), right.payload(i)) for i in left.payloads}
    )
    reports = []
    for i in range(rows):
        info = row_info(schedule, i)
        lo, hi = interval_I(info.n)
        width = hi - lo
        moved = sum(1 for x in range(lo, hi) if x < len(S) and S[x])
        code_frac = Fraction(card(diff.payload(i)), width)
        reports.append(
            RowReport(
                row=i,
                n=info.n,
                s=info.s,
                interval_fraction=Fraction(moved, width),
                code_fraction=code_frac,
                window_density=window_density_row(diff, i),
                bound=code_frac + Fraction(1, 1 << info.b),
            )
        )
    return reports


def corrupt_minority(
    X: SymbolicSet, i: int, rng: random.Random, per_position: Optional[Sequence[int]] = None
) -> SymbolicSet:
    """Copy of ``X`` with fewer than half of the copies of each coded position of row ``i`` inverted.

    Rows too long to hold ``r_i`` get at most 64 flips per position at random copies
    among the first ``2**30``, far below any majority.
    """
    info = row_info(X.schedule, i)
    width = 1 << info.n
    if info.r is None:
        copies, limit = 1 << 30, 64
    else:
        copies = 1 << info.r
        limit = (copies >> 1) - 1 if copies > 1 else 0
    out = X.copy()
    for x in range(width):
        k = per_position[x] if per_position is not None else rng.randint(0, min(limit, 64))
        if k > limit:
            raise ValueError(f"{k} flips at position {x} is not a strict minority of {copies} copies")
        chosen = set()
        while len(chosen) < k:
            chosen.add(rng.randrange(copies))
        for c in chosen:
            out.flip(i, c * width + x)
    return out
