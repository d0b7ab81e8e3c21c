"""Objects built by the construction, and the closed-form initial function."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Set, Tuple

from ..density import BOX, BoxValue, Bits, bitstr, code_bits, decode_bits, unpair
from ..programs import Registry
from .naturals import (
    CONCRETE_BITS,
    RANK_L,
    RANK_LHAT,
    Far,
    LongBits,
    Nat,
    Undecidable,
    canon,
    compare,
    floor_log,
    lt,
    nat_max,
    nat_pair,
    to_json,
)
from .pi import PiSeq

Triple = Tuple[int, int, Bits]


class InvariantBreach(AssertionError):
    """A checked property of the construction failed."""

    def __init__(self, stage: int, checker: str, detail: Any) -> None:
        super().__init__(f"stage {stage}: {checker}: {detail}")
        self.stage = stage
        self.checker = checker
        self.detail = detail


class YConflict(InvariantBreach):
    pass


# ---------------------------------------------------------------- the initial function

def f0_at(x: int) -> int:
    """Initial value at ``<i, <l, k>>``: the code of bits ``i(l+1) .. (i+1)(l+1)-1`` of ``k``."""
    i, y = unpair(x)
    l, k = unpair(y)
    width = l + 1
    return ((k >> (i * width)) & ((1 << width) - 1)) + (1 << width) - 1


def f0_string(x: int) -> LongBits:
    return LongBits.from_bits(decode_bits(f0_at(x)))


def position_for(i: int, l: int, k: int) -> int:
    from ..density import pair

    return pair(i, pair(l, k))


# ---------------------------------------------------------------- l schedules

class LSchedule:
    """Chooses ``l_s`` at the start of stage ``s``."""

    def value(self, s: int, state: "StageState") -> Nat:
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__


class DefaultLSchedule(LSchedule):
    """``l_s = 2**(s+3) * (1 + added + largest)``.

    ``added`` counts every element ever put into a U or U-hat set and ``largest``
    is the largest quantity mentioned before stage ``s``.
    """

    def value(self, s: int, state: "StageState") -> Nat:
        big = state.max_mentioned
        if isinstance(big, int):
            v = (1 + state.added_count + big) << (s + 3)
            if v.bit_length() <= CONCRETE_BITS:
                return v
        return Far(s, RANK_L, floor_log=floor_log(big) if not isinstance(big, int) else big.bit_length())

    def describe(self) -> str:
        return "default"


class FunctionLSchedule(LSchedule):
    """``l_s`` from a plain function of ``s``; used to make small hand-checkable runs."""

    def __init__(self, fn: Callable[[int], int], label: str = "custom") -> None:
        self.fn = fn
        self.label = label

    def value(self, s: int, state: "StageState") -> Nat:
        return self.fn(s)

    def describe(self) -> str:
        return self.label


def lhat_for(s: int, l_s: Nat) -> Nat:
    """``<1^s, l_s>``: the pair of the code of ``s`` ones with ``l_s``."""
    c = (1 << (s + 1)) - 2
    if isinstance(l_s, Far):
        return Far(s, RANK_LHAT, floor_log=l_s.floor_log)
    if isinstance(l_s, int):
        return nat_pair(c, l_s)
    return Far(s, RANK_LHAT, floor_log=floor_log(l_s))


# ---------------------------------------------------------------- state

EMPTY = LongBits(0)


@dataclass
class StageState:
    pi: PiSeq
    registry: Registry
    lsched: LSchedule
    s: int = 0
    l: List[Nat] = field(default_factory=list)
    lhat: List[Nat] = field(default_factory=list)
    f_overlay: Dict[Nat, LongBits] = field(default_factory=dict)
    f_far: Dict[Far, LongBits] = field(default_factory=dict)
    Z: Dict[int, int] = field(default_factory=dict)
    U: Dict[int, Set[Nat]] = field(default_factory=dict)
    Uhat: Dict[Bits, Set[Nat]] = field(default_factory=dict)
    R: Set[Triple] = field(default_factory=set)
    RS: Dict[int, Tuple[int, int, Bits, int]] = field(default_factory=dict)
    r: Dict[int, Nat] = field(default_factory=dict)
    ever: Set[Nat] = field(default_factory=set)
    added_count: int = 0
    max_mentioned: Nat = 0
    Ycache: Dict[int, LongBits] = field(default_factory=dict)
    entries: Dict[Triple, int] = field(default_factory=dict)
    leaves: Dict[Triple, int] = field(default_factory=dict)
    left_columns: Dict[Nat, int] = field(default_factory=dict)
    trace: List[Dict[str, Any]] = field(default_factory=list)
    events: List[Tuple[int, str, Any]] = field(default_factory=list)
    step: str = "start"

    # ------------------------------------------------------------ bookkeeping

    def record(self, obj: str, before: Any, after: Any) -> None:
        self.trace.append(
            {"stage": self.s, "step": self.step, "object": obj, "before": before, "after": after}
        )

    def mention(self, *values: Nat) -> None:
        self.max_mentioned = nat_max(values, self.max_mentioned)

    # ------------------------------------------------------------ f, Z, r

    def f_string(self, z: Nat) -> LongBits:
        if z in self.f_overlay:
            return self.f_overlay[z]
        if isinstance(z, Far):
            return self.f_far[z]
        return f0_string(z)

    def f_code(self, y: int) -> int:
        if y in self.f_overlay:
            code = self.f_overlay[y].code()
            assert code is not None
            return code
        return f0_at(y)

    def z_bit(self, x: int) -> int:
        return self.Z.get(x, 0)

    def r_of(self, n: int) -> Nat:
        return self.r.get(n, n)

    def r_bar(self, n: int) -> Nat:
        return nat_max((self.r_of(m) for m in range(n)), 0)

    # ------------------------------------------------------------ U sets

    def column(self, j: int) -> Set[Nat]:
        return self.U.setdefault(j, set())

    def U_of(self, tau: Sequence[int]) -> Set[Nat]:
        out: Set[Nat] = set()
        for j, b in enumerate(tau):
            if b:
                out |= self.U.get(j, set())
        return out

    def Uhat_of(self, tau: Sequence[int]) -> Set[Nat]:
        out: Set[Nat] = set()
        tau = tuple(tau)
        for m in range(len(tau) + 1):
            out |= self.Uhat.get(tau[:m], set())
        return out

    def bbU_of(self, tau: Sequence[int]) -> Set[Nat]:
        return self.U_of(tau) | self.Uhat_of(tau)

    def all_U(self) -> Set[Nat]:
        out: Set[Nat] = set()
        for v in self.U.values():
            out |= v
        return out

    def all_Uhat(self) -> Set[Nat]:
        out: Set[Nat] = set()
        for v in self.Uhat.values():
            out |= v
        return out

    def add_to_column(self, j: int, z: Nat) -> None:
        """Enumerate ``z`` into ``U_j``, keeping ``Y_j`` merged and conflict-free."""
        col = self.column(j)
        if z in col:
            return
        string = self.f_string(z)
        current = self.Ycache.get(j, EMPTY)
        if not current.consistent(string):
            raise YConflict(self.s, "Yi-well-defined", {"column": j, "element": to_json(z)})
        col.add(z)
        self.Ycache[j] = current.merge(string)
        if z not in self.ever:
            self.ever.add(z)
            self.added_count += 1
        self.mention(z)
        self.record(f"U[{j}]", None, {"element": to_json(z), "string": string.to_json()})

    def reset_column(self, j: int) -> None:
        col = self.U.get(j)
        if not col:
            return
        for z in col:
            self.left_columns[z] = max(self.left_columns.get(z, -1), j)
        self.record(f"U[{j}]", {"size": len(col)}, {"size": 0})
        self.U[j] = set()
        self.Ycache[j] = EMPTY

    def recompute_Y(self, j: int) -> LongBits:
        y = EMPTY
        for z in self.U.get(j, ()):
            string = self.f_string(z)
            if not y.consistent(string):
                raise YConflict(self.s, "Yi-well-defined", {"column": j, "element": to_json(z)})
            y = y.merge(string)
        self.Ycache[j] = y
        return y


def y_eval(state: StageState, i: int) -> LongBits:
    """``Y_i`` at the current stage: the merge of the strings coded at elements of ``U_i``."""
    return state.Ycache.get(i, EMPTY)


def yi_compatible(state: StageState, x: int, i: int) -> bool:
    """``x = <i, y>`` and the string coded by ``f(x)`` is a prefix of ``Y_i``."""
    if not isinstance(x, int) or unpair(x)[0] != i:
        return False
    return y_eval(state, i).extends(state.f_string(x))


def theta_sigma_eval(
    state: StageState, sigma: Sequence[int], S: Set[int], x: int
) -> Optional[BoxValue]:
    """Sum mod 2 of the column terms; BOX absorbs, a missing ``Y`` value leaves it undefined."""
    total = 0
    boxed = False
    for i, b in enumerate(sigma):
        if b == 0:
            p = nat_pair(code_bits(tuple(sigma[:i])), x)
            v = y_eval(state, i).bit(p)
            if v is None:
                return None
            total += v
        else:
            from ..density import pair

            if pair(i, x) in S:
                boxed = True
    return BOX if boxed else total % 2


def triple_json(t: Triple) -> List[Any]:
    return [t[0], t[1], bitstr(t[2])]
