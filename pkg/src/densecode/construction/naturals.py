"""Naturals too large to write down, and bit strings over them.

Three kinds of value appear in a run:

* plain ``int`` when the number has at most :data:`CONCRETE_BITS` bits;
* :class:`Big`, an exact value ``odd * 2**c + d`` whose exponent is a
  concrete but large int (codes of long strings paired with small numbers);
* :class:`Far`, a stage quantity whose only known facts are its identity, its
  order relative to other stage quantities, and a lower bound on its logarithm.

Comparisons are exact where the facts decide them and raise
:class:`Undecidable` otherwise.  A run never needs an undecided comparison;
hitting one is a bug, not a result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional, Tuple, Union

CONCRETE_BITS = 4096


class Undecidable(ArithmeticError):
    """The known facts do not fix the order of two symbolic naturals."""


@dataclass(frozen=True)
class Big:
    """The exact natural ``odd * 2**exp + delta``, kept unevaluated."""

    exp: int
    odd: int
    delta: int = 0

    def __str__(self) -> str:
        d = f"{self.delta:+d}" if self.delta else ""
        return f"{self.odd}*2^{self.exp}{d}"


# rank of the stage quantity: the l value, the padded-code length, an inserted position
RANK_L, RANK_LHAT, RANK_POS = 0, 1, 2


@dataclass(frozen=True)
class Far:
    """A stage quantity of stage ``stage`` plus a small offset.

    Stage quantities are ordered by ``(stage, rank)``: ``l_s < lhat_s < x_i(s) < l_{s+1}``.
    Inserted positions of one stage in different columns are not ordered.
    ``floor_log`` is a lower bound on the base-2 logarithm.
    """

    stage: int
    rank: int
    column: int = 0
    plus: int = 0
    floor_log: "Nat" = field(default=0, compare=False, hash=False)

    def __str__(self) -> str:
        name = {RANK_L: f"l({self.stage})", RANK_LHAT: f"lhat({self.stage})"}.get(
            self.rank, f"x({self.stage},{self.column})"
        )
        return name + (f"{self.plus:+d}" if self.plus else "")

    def shifted(self, k: int) -> "Far":
        return Far(self.stage, self.rank, self.column, self.plus + k, self.floor_log)


Nat = Union[int, Big, Far]


def canon(exp: int, odd: int, delta: int = 0) -> Union[int, Big]:
    """``odd * 2**exp + delta`` as an int when it is small enough, else as :class:`Big`."""
    while odd and odd % 2 == 0:
        odd //= 2
        exp += 1
    if exp + odd.bit_length() <= CONCRETE_BITS:
        return (odd << exp) + delta
    return Big(exp, odd, delta)


def nat_pair(i: Union[int, Big], n: Union[int, Big]) -> Union[int, Big]:
    """``2**i * (2n + 1) - 1`` for a concrete exponent ``i``."""
    if isinstance(i, Big) or isinstance(n, Big):
        raise Undecidable("pairs with a symbolic argument are not formed")
    return canon(i, 2 * n + 1, -1)


def add(a: Nat, k: int) -> Nat:
    if isinstance(a, int):
        return a + k
    if isinstance(a, Big):
        return Big(a.exp, a.odd, a.delta + k)
    return a.shifted(k)


def _as_big(a: Union[int, Big]) -> Tuple[int, int, int]:
    if isinstance(a, Big):
        return a.exp, a.odd, a.delta
    return 0, a, 0


def _cmp_exact(a: Union[int, Big], b: Union[int, Big]) -> int:
    if isinstance(a, int) and isinstance(b, int):
        return (a > b) - (a < b)
    c1, o1, d1 = _as_big(a)
    c2, o2, d2 = _as_big(b)
    m = min(c1, c2)
    e1, e2 = c1 - m, c2 - m
    w1, w2 = e1 + o1.bit_length(), e2 + o2.bit_length()
    slack = max(abs(d1), abs(d2)).bit_length() + 2
    if abs(w1 - w2) >= 2 and m > slack:
        return 1 if w1 > w2 else -1
    if max(e1, e2) > 4 * CONCRETE_BITS:
        # the main parts differ by a factor 2**(4*CONCRETE_BITS); deltas are tiny
        return 1 if w1 > w2 else -1
    M1, M2 = o1 << e1, o2 << e2
    if M1 != M2:
        if m > (abs(d1 - d2)).bit_length() + 1:
            return 1 if M1 > M2 else -1
        v1, v2 = (M1 << m) + d1, (M2 << m) + d2
        return (v1 > v2) - (v1 < v2)
    return (d1 > d2) - (d1 < d2)


def ceil_log(a: Union[int, Big]) -> int:
    """An ``L`` with ``a < 2**L``."""
    if isinstance(a, int):
        return max(a, 0).bit_length()
    return a.exp + a.odd.bit_length() + (1 if a.delta > 0 else 0)


def floor_log(a: Nat) -> Nat:
    """An ``L`` with ``a >= 2**L`` (for ``a >= 1``)."""
    if isinstance(a, int):
        return max(a.bit_length() - 1, 0)
    if isinstance(a, Big):
        return a.exp + a.odd.bit_length() - 2
    return a.floor_log


def compare(a: Nat, b: Nat) -> int:
    """-1, 0 or 1; raises :class:`Undecidable` when the order is not determined."""
    fa, fb = isinstance(a, Far), isinstance(b, Far)
    if not fa and not fb:
        return _cmp_exact(a, b)
    if fa and fb:
        ka, kb = (a.stage, a.rank), (b.stage, b.rank)
        if ka != kb:
            return 1 if ka > kb else -1
        if a.rank == RANK_POS and a.column != b.column:
            raise Undecidable(f"{a} and {b} are inserted positions of one stage")
        return (a.plus > b.plus) - (a.plus < b.plus)
    if fa:
        return -compare(b, a)
    # a concrete, b far: a < b once a < 2**ceil_log(a) <= 2**floor_log(b) <= b
    if compare(ceil_log(a), b.floor_log) <= 0:
        return -1
    raise Undecidable(f"{a} is not provably below {b}")


def lt(a: Nat, b: Nat) -> bool:
    return compare(a, b) < 0


def le(a: Nat, b: Nat) -> bool:
    return compare(a, b) <= 0


def nat_max(values: Iterable[Nat], default: Nat = 0) -> Nat:
    best = default
    for v in values:
        try:
            if compare(v, best) > 0:
                best = v
        except Undecidable:
            # same-stage positions share their stage bounds, so either one serves
            continue
    return best


def sort_key(a: Nat) -> Tuple:
    """A total order for reports; agrees with :func:`compare` wherever that decides."""
    if isinstance(a, int):
        return (0, 0, 0, a.bit_length(), a, 0)
    if isinstance(a, Big):
        return (0, 1, a.exp + a.odd.bit_length(), a.exp, a.odd, a.delta)
    return (1, a.stage, a.rank, a.column, a.plus, 0)


def to_json(a: Nat) -> Union[int, str]:
    if isinstance(a, int):
        return a if a < (1 << 53) else str(a)
    return str(a)


# ---------------------------------------------------------------- long bit strings

@dataclass(frozen=True)
class LongBits:
    """A bit string given by its length and the positions holding 1."""

    length: Nat
    ones: FrozenSet[Nat] = frozenset()

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "LongBits":
        b = tuple(bits)
        return cls(len(b), frozenset(x for x, v in enumerate(b) if v))

    def bit(self, p: Nat) -> Optional[int]:
        if not lt(p, self.length):
            return None
        return 1 if p in self.ones else 0

    def flip(self, p: Nat) -> "LongBits":
        if not lt(p, self.length):
            raise IndexError(f"position {p} is past the end of the string")
        return LongBits(self.length, self.ones ^ {p})

    def extends(self, other: "LongBits") -> bool:
        """``other`` is a prefix of ``self``."""
        if not le(other.length, self.length):
            return False
        if not other.ones <= self.ones:
            return False
        return all(not lt(p, other.length) for p in self.ones - other.ones)

    def consistent(self, other: "LongBits") -> bool:
        """Neither string has a 1 where the other, defined there, has a 0."""
        return all(
            p in other.ones or not lt(p, other.length) for p in self.ones
        ) and all(p in self.ones or not lt(p, self.length) for p in other.ones)

    def merge(self, other: "LongBits") -> "LongBits":
        length = self.length if compare(self.length, other.length) >= 0 else other.length
        return LongBits(length, self.ones | other.ones)

    def padded(self, length: Nat) -> "LongBits":
        if lt(length, self.length):
            raise ValueError("padding cannot shorten a string")
        return LongBits(length, self.ones)

    def concrete(self) -> Optional[Tuple[int, ...]]:
        if not isinstance(self.length, int) or self.length > CONCRETE_BITS:
            return None
        return tuple(1 if x in self.ones else 0 for x in range(self.length))

    def code(self) -> Optional[int]:
        b = self.concrete()
        if b is None:
            return None
        value = 1 << len(b)
        for x in self.ones:
            value |= 1 << x
        return value - 1

    def to_json(self):
        b = self.concrete()
        if b is not None and len(b) <= 256:
            return "".join(map(str, b))
        return {
            "length": to_json(self.length),
            "ones": [to_json(p) for p in sorted(self.ones, key=sort_key)],
        }
