"""Properties of the construction checked after every stage, and one checked on the whole run."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Set, Tuple

from ..density import bitstr
from .naturals import Far, Nat, compare, le, lt, sort_key, to_json
from .state import InvariantBreach, StageState, Triple, triple_json

CHECKERS = (
    "finite-injury",
    "fZ-defined",
    "hatU-takes-from-U",
    "Yi-well-defined",
    "U-is-in-I",
    "f-equal-fzero",
    "flip-preserves-length",
)


@dataclass
class Snapshot:
    R: FrozenSet[Triple]
    U_all: FrozenSet[Nat]
    Uhat_all: FrozenSet[Nat]
    entries: Dict[Triple, int]
    leaves: Dict[Triple, int]

    @classmethod
    def take(cls, state: StageState) -> "Snapshot":
        return cls(
            frozenset(state.R),
            frozenset(state.all_U()),
            frozenset(state.all_Uhat()),
            dict(state.entries),
            dict(state.leaves),
        )


def count_bound(n: int) -> int:
    """Elements that can ever sit below ``l_n``: ``s+1`` per earlier stage plus ``2**m (m+1)`` per earlier priority."""
    return sum(s + 1 for s in range(n)) + sum((1 << m) * (m + 1) for m in range(n))


class EverIndex:
    """Counts of elements ever enumerated, answerable below any ``l_n``."""

    def __init__(self) -> None:
        self.ints: List[int] = []
        self.far_reps: Dict[int, Far] = {}
        self.far_counts: Dict[int, int] = {}
        self.other: List[Nat] = []
        self.seen: Set[Nat] = set()
        self._cache: Dict[Tuple[int, int], bool] = {}

    def update(self, ever: Set[Nat]) -> None:
        for z in ever - self.seen:
            self.seen.add(z)
            if isinstance(z, int):
                bisect.insort(self.ints, z)
            elif isinstance(z, Far):
                self.far_reps.setdefault(z.stage, z)
                self.far_counts[z.stage] = self.far_counts.get(z.stage, 0) + 1
            else:
                self.other.append(z)

    def below(self, n: int, bound: Nat) -> int:
        if isinstance(bound, int):
            count = bisect.bisect_left(self.ints, bound)
        else:
            count = len(self.ints)
            if self.ints and not lt(self.ints[-1], bound):
                count = sum(1 for z in self.ints if lt(z, bound))
        for st, rep in self.far_reps.items():
            key = (st, n)
            if key not in self._cache:
                self._cache[key] = lt(rep, bound)
            if self._cache[key]:
                count += self.far_counts[st]
        count += sum(1 for z in self.other if lt(z, bound))
        return count


@dataclass
class Checker:
    index: EverIndex = field(default_factory=EverIndex)
    max_entries: int = 0
    counts: Dict[int, int] = field(default_factory=dict)

    def after_stage(self, state: StageState, snap: Snapshot) -> None:
        s = state.s - 1
        self._finite_injury(state, snap, s)
        self._hat_u(state, snap, s)
        self._y(state, s)
        self._u_in_i(state, s)
        self._f_fzero(state, s)

    # -- each (n, i, sigma) enters and leaves at most 2**n times, every entry justified
    def _finite_injury(self, state: StageState, snap: Snapshot, s: int) -> None:
        entered = [t for t, c in state.entries.items() if c > snap.entries.get(t, 0)]
        left = [t for t, c in state.leaves.items() if c > snap.leaves.get(t, 0)]
        for t in entered:
            if t[0] != s and not any(u[0] < t[0] for u in left):
                raise InvariantBreach(s, "finite-injury", {"entered": triple_json(t)})
        for table in (state.entries, state.leaves):
            for t, c in table.items():
                if c > 1 << t[0]:
                    raise InvariantBreach(
                        s, "finite-injury", {"triple": triple_json(t), "count": c}
                    )
                self.max_entries = max(self.max_entries, c)
        overlap = {t[:3] for t in state.RS.values()} & state.R
        if overlap:
            raise InvariantBreach(s, "finite-injury", {"in R and RS": [triple_json(t) for t in overlap]})

    # -- whatever enters U-hat leaves U at the same stage, from a column at least |sigma|
    def _hat_u(self, state: StageState, snap: Snapshot, s: int) -> None:
        now_u = state.all_U()
        newly = state.all_Uhat() - snap.Uhat_all
        left = snap.U_all - now_u
        bad = newly - left
        if bad:
            raise InvariantBreach(
                s, "hatU-takes-from-U", {"entered without leaving": [to_json(z) for z in sorted(bad, key=sort_key)]}
            )
        for sig, col in state.Uhat.items():
            for z in col:
                if state.left_columns.get(z, -1) < len(sig):
                    raise InvariantBreach(
                        s,
                        "hatU-takes-from-U",
                        {"sigma": bitstr(sig), "element": to_json(z), "left column": state.left_columns.get(z)},
                    )

    # -- Y_i is conflict free (checked on every enumeration) and long enough
    def _y(self, state: StageState, s: int) -> None:
        for i in range(s + 1):
            y = state.Ycache.get(i)
            if y is None or not lt(state.lhat[s], y.length):
                raise InvariantBreach(s, "Yi-well-defined", {"column": i, "reason": "too short"})

    # -- few elements below each l_n
    def _u_in_i(self, state: StageState, s: int) -> None:
        self.index.update(state.ever)
        for n in range(s + 1):
            c = self.index.below(n, state.l[n])
            self.counts[n] = c
            if c > count_bound(n) or not le(c << n, state.l[n]):
                raise InvariantBreach(
                    s, "U-is-in-I", {"n": n, "count": c, "bound": count_bound(n), "l_n": to_json(state.l[n])}
                )

    # -- only positions that were in some U set ever change
    def _f_fzero(self, state: StageState, s: int) -> None:
        stray = [z for z in state.f_overlay if z not in state.ever]
        if stray:
            raise InvariantBreach(s, "f-equal-fzero", {"positions": [to_json(z) for z in stray]})


def check_frozen_prefixes(state: StageState) -> None:
    """After the last stage where a triple of priority at most ``n`` left ``R``,
    nothing changes ``r`` up to ``n`` or ``f``, ``Z`` below ``max r`` up to ``n``."""
    last_leave: Dict[int, int] = {}
    for stage, kind, key in state.events:
        if kind == "leave":
            last_leave[key] = max(last_leave.get(key, -1), stage)
    T = state.s
    for n in range(T):
        after = max((st for m, st in last_leave.items() if m <= n), default=-1)
        bar = state.r_bar(n + 1)
        for stage, kind, key in state.events:
            if stage <= after:
                continue
            bad = (
                (kind == "r" and key <= n)
                or (kind == "Z" and lt(key, bar))
                or (kind == "f" and lt(key, bar))
            )
            if bad:
                raise InvariantBreach(
                    stage, "fZ-defined", {"n": n, "settled after": after, "change": [kind, to_json(key)]}
                )
