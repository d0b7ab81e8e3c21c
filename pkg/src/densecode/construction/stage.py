"""One stage of the construction: act for the first viable triple, grow every column, add a triple."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from ..density import BOX, Bits, bitstr, code_bits, decode_bits, is_prefix, pair
from ..programs import Computation
from .naturals import (
    CONCRETE_BITS,
    RANK_POS,
    Far,
    LongBits,
    add,
    compare,
    le,
    lt,
    nat_pair,
    sort_key,
    to_json,
)
from .pi import i_pi
from .state import (
    InvariantBreach,
    StageState,
    Triple,
    f0_string,
    lhat_for,
    position_for,
    triple_json,
    y_eval,
    yi_compatible,
)

SEARCH_LIMIT = 4096


@dataclass(frozen=True)
class Witness:
    x: int
    tau: Bits
    value: int
    trivial: bool


class StageView:
    """Per-stage caches for step 1: masked oracle answers below ``s`` and program runs."""

    def __init__(self, state: StageState) -> None:
        self.state = state
        s = state.s
        self.taus: List[Bits] = [decode_bits(c) for c in range(s)]
        small_U = {
            j: frozenset(z for z in col if isinstance(z, int) and z < s)
            for j, col in state.U.items()
        }
        small_hat = {
            sig: frozenset(z for z in col if isinstance(z, int) and z < s)
            for sig, col in state.Uhat.items()
        }
        self.keys: List[FrozenSet[int]] = []
        for tau in self.taus:
            key: set = set()
            for j, b in enumerate(tau):
                if b:
                    key |= small_U.get(j, frozenset())
            for m in range(len(tau) + 1):
                key |= small_hat.get(tau[:m], frozenset())
            self.keys.append(frozenset(key))
        self._runs: Dict[Tuple[int, int, FrozenSet[int]], Optional[Computation]] = {}
        self._codes: Dict[int, int] = {}

    def _f(self, y: int) -> int:
        if y not in self._codes:
            self._codes[y] = self.state.f_code(y)
        return self._codes[y]

    def run(self, i: int, x: int, key: FrozenSet[int]) -> Optional[Computation]:
        k = (i, x, key)
        if k not in self._runs:
            s = self.state.s

            def oracle(y: int):
                return BOX if y in key else self._f(y)

            self._runs[k] = self.state.registry.run(i, x, oracle, budget=s, use_limit=s)
        return self._runs[k]

    def groups(self, sigma: Bits) -> List[Tuple[Bits, FrozenSet[int]]]:
        """Extensions of ``sigma`` with code below ``s``, one per distinct mask, least code first."""
        seen = set()
        out = []
        for tau, key in zip(self.taus, self.keys):
            if is_prefix(sigma, tau) and key not in seen:
                seen.add(key)
                out.append((tau, key))
        return out


def _nontrivial_ok(state: StageState, n: int, sigma: Bits, x: int) -> bool:
    if not lt(state.r_bar(n), x):
        return False
    if not le(state.l[n], x):
        return False
    for j, b in enumerate(sigma):
        if b == 0:
            z = pair(j, x)
            if not le(n, state.f_string(z).length):
                return False
            if not yi_compatible(state, z, j):
                return False
    return True


def viability_check(
    state: StageState, triple: Triple, view: Optional[StageView] = None
) -> Optional[Witness]:
    """Least witness ``(x, code tau)`` for the triple at the current stage, if any."""
    n, i, sigma = triple
    s = state.s
    if not n < s or state.registry.get(i) is None:
        return None
    view = view or StageView(state)
    groups = view.groups(sigma)
    if not groups:
        return None
    c_sigma = code_bits(sigma)
    l_prev = state.l[s - 1]
    for x in range(s):
        if not lt(nat_pair(c_sigma, x), l_prev):
            break
        ok = None
        for tau, key in groups:
            comp = view.run(i, x, key)
            if comp is None or comp.value is BOX:
                continue
            if state.z_bit(x) != comp.value:
                return Witness(x, tau, comp.value, True)
            if ok is None:
                ok = _nontrivial_ok(state, n, sigma, x)
            if ok:
                return Witness(x, tau, comp.value, False)
    return None


# ---------------------------------------------------------------- the steps

def _set_of(values) -> List:
    return [to_json(v) for v in sorted(values, key=sort_key)]


def _act(state: StageState, triple: Triple, w: Witness) -> None:
    n, i, sigma = triple
    s = state.s
    state.step = "1a"
    new_hat = state.bbU_of(w.tau) - state.U_of(sigma)
    old_hat = state.Uhat.get(sigma, set())
    if new_hat != old_hat:
        state.record(f"Uhat[{bitstr(sigma)}]", _set_of(old_hat), _set_of(new_hat))
    state.Uhat[sigma] = set(new_hat)
    for z in new_hat:
        if z not in state.ever:
            state.ever.add(z)
            state.added_count += 1

    state.step = "1b"
    for j in sorted(state.U):
        if j >= len(sigma):
            state.reset_column(j)

    state.step = "1c"
    before = state.r_of(n)
    state.r[n] = state.l[s]
    state.record(f"r[{n}]", to_json(before), to_json(state.l[s]))
    state.events.append((s, "r", n))
    state.events.append((s, "leave", n))
    state.R.discard(triple)
    state.leaves[triple] = state.leaves.get(triple, 0) + 1
    state.RS[n] = (n, i, sigma, w.x)
    state.record("R", triple_json(triple), None)
    state.record("RS", None, triple_json(triple) + [w.x])

    state.step = "1d"
    for m in sorted(state.RS):
        if m > n:
            n2, i2, sig2, x2 = state.RS.pop(m)
            t2 = (n2, i2, sig2)
            state.record("RS", triple_json(t2) + [x2], None)
            state.R.add(t2)
            state.entries[t2] = state.entries.get(t2, 0) + 1
            state.record("R", None, triple_json(t2))
            old = state.Uhat.get(sig2)
            if old:
                state.record(f"Uhat[{bitstr(sig2)}]", _set_of(old), [])
            state.Uhat[sig2] = set()

    state.step = "1e"
    if w.trivial:
        return
    before_z = state.z_bit(w.x)
    state.Z[w.x] = 1 - before_z
    state.events.append((s, "Z", w.x))
    state.record(f"Z[{w.x}]", before_z, 1 - before_z)
    state.mention(w.x)

    state.step = "1f"
    for j, b in enumerate(sigma):
        if b == 0:
            state.add_to_column(j, pair(j, w.x))

    state.step = "1g"
    for j, b in enumerate(sigma):
        if b != 1:
            continue
        p = nat_pair(code_bits(sigma[:j]), w.x)
        state.mention(p)
        touched = False
        for z in sorted(state.U.get(j, ()), key=sort_key):
            zeta = state.f_string(z)
            if not lt(p, zeta.length):
                continue
            flipped = zeta.flip(p)
            if compare(flipped.length, zeta.length) != 0:
                raise InvariantBreach(s, "flip-preserves-length", {"position": to_json(z)})
            state.f_overlay[z] = flipped
            state.events.append((s, "f", z))
            state.record(f"f[{to_json(z)}]", zeta.to_json(), flipped.to_json())
            touched = True
        if touched:
            state.recompute_Y(j)


def _choose_position(state: StageState, i: int, target: LongBits, lhat) -> object:
    s = state.s
    l_s = state.l[s]
    if isinstance(lhat, int) and (lhat + 1) * (i + 2) + i + 8 <= CONCRETE_BITS:
        width = lhat + 1
        v = 0
        for p in target.ones:
            v |= 1 << p
        base = v << (i * width)
        period = 1 << (width * (i + 1))
        for m in range(SEARCH_LIMIT):
            x = position_for(i, lhat, base + m * period)
            if x > l_s if isinstance(l_s, int) else lt(l_s, x):
                if x not in state.f_overlay and x not in state.ever:
                    if f0_string(x) != target:
                        raise InvariantBreach(s, "ext-U", {"column": i, "position": x})
                    return x
        raise RuntimeError(f"no fresh position for column {i} within {SEARCH_LIMIT} periods")
    x = Far(s, RANK_POS, i, floor_log=lhat)
    if not lt(l_s, x):
        raise InvariantBreach(s, "ext-U", {"column": i, "position": str(x)})
    state.f_far[x] = target
    return x


def stage_step(state: StageState) -> StageState:
    """Run stage ``state.s`` in place and advance to the next stage."""
    s = state.s
    if s >= len(state.pi):
        raise ValueError(f"pi is only known below {len(state.pi)}; stage {s} needs pi({s})")

    state.step = "start"
    l_s = state.lsched.value(s, state)
    if s and not lt(state.l[s - 1], l_s):
        raise ValueError(f"l schedule is not increasing at stage {s}")
    state.l.append(l_s)
    state.record(f"l[{s}]", None, to_json(l_s))
    state.mention(l_s)

    view = StageView(state)
    for triple in sorted(state.R):
        w = viability_check(state, triple, view)
        if w is not None:
            _act(state, triple, w)
            break

    state.step = "2"
    lhat = lhat_for(s, l_s)
    state.lhat.append(lhat)
    state.mention(lhat)
    length = add(lhat, 1)
    for i in range(s + 1):
        target = y_eval(state, i).padded(length)
        x = _choose_position(state, i, target, lhat)
        state.add_to_column(i, x)

    state.step = "3"
    t = (s, i_pi(state.pi, s), state.pi[s])
    state.R.add(t)
    state.entries[t] = state.entries.get(t, 0) + 1
    state.record("R", None, triple_json(t))

    state.s = s + 1
    return state
