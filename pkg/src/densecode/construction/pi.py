"""Sequences of strings with nondecreasing lengths, and their normal form."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from ..density import Bits, bits, bitstr, is_prefix


def _proper_prefix(a: Bits, b: Bits) -> bool:
    return len(a) < len(b) and b[: len(a)] == a


@dataclass(frozen=True)
class PiSeq:
    """A finite fragment of an injective string sequence with ``|pi(n)| <= n``, lengths nondecreasing."""

    strings: Tuple[Bits, ...]

    def __post_init__(self) -> None:
        if len(set(self.strings)) != len(self.strings):
            raise ValueError("pi must be injective")
        for n, s in enumerate(self.strings):
            if len(s) > n:
                raise ValueError(f"|pi({n})| = {len(s)} exceeds {n}")
            if n and len(s) < len(self.strings[n - 1]):
                raise ValueError(f"lengths decrease at {n}")

    def __len__(self) -> int:
        return len(self.strings)

    def __getitem__(self, n: int) -> Bits:
        return self.strings[n]

    @classmethod
    def parse(cls, items: Iterable[str]) -> "PiSeq":
        return cls(tuple(bits(s) for s in items))

    def to_json(self) -> List[str]:
        return [bitstr(s) for s in self.strings]


def normalize_pi(p: Sequence[Bits]) -> PiSeq:
    """Replace every string that breaks monotone length by all its extensions of a fixed length.

    At step ``s`` let ``t < s`` be the last index with ``p(t)`` a prefix of ``p(s)``
    and pad to length ``max(|last written|, 1 + |first string written for t|, |p(s)|)``.

    ``p`` must be injective with ``|p(n)| <= n`` and no ``p(s)`` a prefix of an
    earlier ``p(u)``; without the last condition padded blocks can collide.
    """
    p = [tuple(x) for x in p]
    if not p:
        return PiSeq(())
    if p[0] != ():
        raise ValueError("p(0) must be the empty string")
    for s, ps in enumerate(p):
        if len(ps) > s:
            raise ValueError(f"|p({s})| = {len(ps)} exceeds {s}")
        for u in range(s):
            if is_prefix(ps, p[u]):
                raise ValueError(f"p({s}) is a prefix of the earlier p({u})")
    out: List[Bits] = [()]
    block_start = [0]
    for s in range(1, len(p)):
        ps = p[s]
        t = max(u for u in range(s) if is_prefix(p[u], ps))
        last = len(out[-1])
        l = max(last - len(ps), 1 + len(out[block_start[t]]) - len(ps), 0)
        block_start.append(len(out))
        for tail in itertools.product((0, 1), repeat=l):
            # binary representation of i, most significant bit first
            out.append(ps + tail)
    return PiSeq(tuple(out))


def i_pi(pi: PiSeq, n: int) -> int:
    """Number of earlier strings that are prefixes of ``pi(n)``."""
    return sum(1 for m in range(n) if is_prefix(pi[m], pi[n]))


def i_pi_proper(pi: PiSeq, n: int) -> int:
    """Number of strings anywhere in the fragment that are proper prefixes of ``pi(n)``."""
    return sum(1 for m in range(len(pi)) if _proper_prefix(pi[m], pi[n]))


def length_lex(count: int) -> PiSeq:
    """The first ``count`` binary strings in length-then-lexicographic order."""
    out: List[Bits] = []
    length = 0
    while len(out) < count:
        for tail in itertools.product((0, 1), repeat=length):
            if len(out) == count:
                break
            out.append(tail)
        length += 1
    return PiSeq(tuple(out))


def longest_chain(strings: Sequence[Bits]) -> int:
    """Height of the longest chain ``s_0 < s_1 < ...`` under proper prefix, in index order."""
    best = [1] * len(strings)
    for b in range(len(strings)):
        for a in range(b):
            if _proper_prefix(strings[a], strings[b]):
                best[b] = max(best[b], best[a] + 1)
    return max(best, default=0)
