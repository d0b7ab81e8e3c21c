from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest

from densecode.density import BOX, bits, code_bits, decode_bits, pair, unpair
from densecode.programs import DEFAULT_ADVERSARY, Registry
from densecode.construction import (
    Big,
    Far,
    FunctionLSchedule,
    InvariantBreach,
    LongBits,
    PiSeq,
    Undecidable,
    f0_at,
    i_pi,
    i_pi_proper,
    initial_state,
    length_lex,
    longest_chain,
    normalize_pi,
    run,
    stage_step,
    theta_sigma_eval,
    viability_check,
    y_eval,
    yi_compatible,
)
from densecode.construction import stage as stage_mod
from densecode.construction.naturals import RANK_L, RANK_LHAT, RANK_POS, compare, lt, nat_pair
from densecode.construction.state import StageState

from oracles import pair_rec

TIGHT = FunctionLSchedule(lambda s: 2 ** (s + 3), "tight")
FLIP_PI = PiSeq.parse(["", "1", "0"] + length_lex(60).to_json()[3:])


def adversary() -> Registry:
    return Registry.from_json(DEFAULT_ADVERSARY)


# ---------------------------------------------------------------- pi sequences

def test_normalize_base_case():
    assert normalize_pi([()]).to_json() == [""]


def test_normalize_out_of_order_string():
    # "0" is only a prefix-extension of p(0) = empty, whose block started with a string
    # of length 0; the last written string has length 1, so "0" is padded to length 1
    assert normalize_pi([(), (1,), (0,)]).to_json() == ["", "1", "0"]


def test_normalize_pads_when_needed():
    out = normalize_pi([(), (1,), (1, 1), (0,)]).to_json()
    assert out == ["", "1", "11", "00", "01"]


def test_normalize_rejects_prefix_of_earlier():
    with pytest.raises(ValueError):
        normalize_pi([(), (1,), (1, 0), (1, 0, 0), (0,), (0, 0, 1), (1, 0)])
    with pytest.raises(ValueError):
        normalize_pi([(), (1, 1)])


def random_source(rng: random.Random, size: int):
    """Injective, ``|p(n)| <= n``, and no string a prefix of an earlier one."""
    p = [()]
    while len(p) < size:
        n = len(p)
        s = tuple(rng.randint(0, 1) for _ in range(rng.randint(1, min(n, 3))))
        if not any(q[: len(s)] == s for q in p):
            p.append(s)
    return p


def test_normalize_parts_one_to_three_random():
    rng = random.Random(7)
    for _ in range(300):
        p = random_source(rng, 7)
        pi = normalize_pi(p)
        lens = [len(x) for x in pi.strings]
        assert lens == sorted(lens)
        assert len(set(pi.strings)) == len(pi)
        assert all(len(x) <= n for n, x in enumerate(pi.strings))
        assert longest_chain(pi.strings) >= longest_chain(p)


def test_pi_rejects_bad_fragments():
    with pytest.raises(ValueError):
        PiSeq.parse(["", "1", "1"])
    with pytest.raises(ValueError):
        PiSeq.parse(["", "11"])
    with pytest.raises(ValueError):
        PiSeq.parse(["", "0", "01", "1"])


def test_i_pi_examples_and_both_forms_agree():
    pi = length_lex(20)
    assert i_pi(pi, 0) == 0
    assert i_pi(pi, 1) == 1
    rng = random.Random(3)
    for _ in range(50):
        pi = normalize_pi(random_source(rng, 7))
        for n in range(len(pi)):
            assert i_pi(pi, n) == i_pi_proper(pi, n)


# ---------------------------------------------------------------- the initial function

def test_f0_at_zero_codes_single_zero():
    assert f0_at(0) == 1
    assert decode_bits(1) == (0,)


@pytest.mark.parametrize("i,l", [(0, 0), (0, 2), (1, 1), (2, 0)])
def test_f0_periodic_in_k(i, l):
    period = 2 ** ((l + 1) * (i + 1))
    for k in range(2 * period):
        x = pair_rec(i, pair_rec(l, k))
        assert f0_at(x) == f0_at(pair_rec(i, pair_rec(l, k + period)))
        assert len(decode_bits(f0_at(x))) == l + 1


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("l", [0, 1, 2])
def test_simultaneous_strings_density_over_one_period(n, l):
    period = 2 ** ((l + 1) * (n + 1))
    strings = list(itertools.product((0, 1), repeat=l + 1))
    for sigmas in itertools.product(strings, repeat=n):
        codes = [code_bits(s) for s in sigmas]
        count = sum(
            1 for y in range(period) if all(f0_at(pair_rec(j, y)) == codes[j] for j in range(n))
        )
        assert count == 1  # one hit per period: density 2**-((l+1)(n+1))


# ---------------------------------------------------------------- naturals

def test_naturals_order():
    l2 = Far(2, RANK_L, floor_log=30)
    lh2 = Far(2, RANK_LHAT, floor_log=30)
    x20 = Far(2, RANK_POS, 0, floor_log=30)
    x21 = Far(2, RANK_POS, 1, floor_log=30)
    l3 = Far(3, RANK_L, floor_log=40)
    assert lt(l2, lh2) and lt(lh2, x20) and lt(x21, l3)
    assert lt(2**29, l2) and lt(l2.shifted(1), lh2)
    with pytest.raises(Undecidable):
        compare(x20, x21)
    with pytest.raises(Undecidable):
        compare(2**40, l2)


def test_big_naturals_compare_exactly():
    a = nat_pair(5000, 3)
    b = nat_pair(5000, 4)
    assert isinstance(a, Big) and lt(a, b)
    assert lt(2**4000, a)
    assert compare(Big(5000, 7, -1), Big(5000, 7, 0)) == -1
    assert compare(Big(5001, 7, 0), Big(5000, 14, 0)) == 0


def test_long_bits_operations():
    a = LongBits.from_bits(bits("0101"))
    b = LongBits.from_bits(bits("01"))
    assert a.extends(b) and not b.extends(a)
    assert a.consistent(b)
    assert not a.consistent(LongBits.from_bits(bits("00")))
    assert a.flip(0).to_json() == "1101"
    assert a.code() == code_bits(bits("0101"))
    big = LongBits(Far(1, RANK_LHAT, floor_log=100), frozenset({3}))
    assert big.bit(3) == 1 and big.bit(2**90) == 0
    assert big.extends(LongBits.from_bits(bits("0001")))


# ---------------------------------------------------------------- Y and theta

def bare_state(**kw) -> StageState:
    return initial_state(length_lex(4), Registry([]), **kw)


def test_y_eval_and_compatibility():
    st = bare_state()
    assert y_eval(st, 0).length == 0
    z = pair(0, pair(1, 2))  # f0 codes "01"
    assert decode_bits(f0_at(z)) == (0, 1)
    st.add_to_column(0, z)
    assert y_eval(st, 0).to_json() == "01"
    assert yi_compatible(st, z, 0)
    assert not yi_compatible(st, z, 1)
    assert not yi_compatible(st, pair(0, pair(1, 0)), 0)  # codes "00"


def test_y_conflict_raises():
    st = bare_state()
    st.add_to_column(0, pair(0, pair(1, 2)))
    with pytest.raises(InvariantBreach):
        st.add_to_column(0, pair(0, pair(1, 0)))


def test_theta_examples():
    st = bare_state()
    assert theta_sigma_eval(st, (), set(), 5) == 0
    assert theta_sigma_eval(st, (1,), {pair(0, 5)}, 5) is BOX
    assert theta_sigma_eval(st, (1,), set(), 5) == 0
    assert theta_sigma_eval(st, (0,), set(), 5) is None  # Y_0 is empty
    st.add_to_column(0, pair(0, pair(2, 4)))  # f0 codes "001"
    assert y_eval(st, 0).to_json() == "001"
    # <empty, 0> = 0 and <empty, 1> = 2
    assert theta_sigma_eval(st, (0,), set(), 0) == 0
    assert theta_sigma_eval(st, (0,), set(), 1) == 1
    assert theta_sigma_eval(st, (0, 1), {pair(1, 1)}, 1) is BOX
    assert theta_sigma_eval(st, (0, 1), set(), 1) == 1


# ---------------------------------------------------------------- viability

def test_empty_registry_never_viable():
    res = run(length_lex(30), Registry([]), T=30)
    assert res.report["exits"] == 0


def test_trivial_witness_with_poked_z():
    st = initial_state(length_lex(10), Registry.from_json([{"kind": "const", "value": 0}]))
    for _ in range(3):
        stage_step(st)
    st.Z[1] = 1
    st.l.append(st.lsched.value(st.s, st))
    w = viability_check(st, (0, 0, ()))
    assert (w.x, w.tau, w.value, w.trivial) == (1, (), 0, True)


def naive_viability(state, triple):
    n, i, sigma = triple
    s = state.s
    prog = state.registry.get(i)
    if not n < s or prog is None:
        return None
    for x in range(s):
        if not lt(nat_pair(code_bits(sigma), x), state.l[s - 1]):
            continue
        for c in range(s):
            tau = decode_bits(c)
            if tau[: len(sigma)] != tuple(sigma):
                continue
            masked = state.bbU_of(tau)
            comp = prog.run(x, lambda y: BOX if y in masked else state.f_code(y), budget=s, use_limit=s)
            if comp is None or comp.value is BOX:
                continue
            if state.z_bit(x) != comp.value:
                return (x, c)
            ok = lt(state.r_bar(n), x) and not lt(x, state.l[n])
            for j, b in enumerate(sigma):
                if b == 0:
                    z = pair(j, x)
                    ok = ok and not lt(state.f_string(z).length, n) and yi_compatible(state, z, j)
            if ok:
                return (x, c)
    return None


@pytest.mark.parametrize(
    "pi,programs,lsched",
    [
        (length_lex(40), DEFAULT_ADVERSARY, None),
        (length_lex(40), [{"kind": "diverge"}, {"kind": "const", "value": 0}], TIGHT),
        (FLIP_PI, [{"kind": "diverge"}, {"kind": "const", "value": 0}], TIGHT),
        (length_lex(40), [{"kind": "parity"}, {"kind": "echo"}, {"kind": "const", "value": 0}], TIGHT),
    ],
)
def test_viability_is_least_witness(monkeypatch, pi, programs, lsched):
    original = stage_mod.viability_check
    checked = Counter()

    def both(state, triple, view=None):
        got = original(state, triple, view)
        expect = naive_viability(state, triple)
        assert (None if got is None else (got.x, code_bits(got.tau))) == expect
        checked[got is None] += 1
        return got

    monkeypatch.setattr(stage_mod, "viability_check", both)
    run(pi, Registry.from_json(programs), lsched, T=25)
    assert checked[False] > 0


# ---------------------------------------------------------------- stages

def test_stage_zero():
    res = run(length_lex(1), Registry([]), T=1)
    assert [(t["step"], t["object"]) for t in res.trace] == [("start", "l[0]"), ("2", "U[0]"), ("3", "R")]
    st = res.state
    assert st.R == {(0, 0, ())}
    # l_0 = 8, lhat_0 = <0, 8> = 16, and the all-zero string of length 17 sits at <0, <16, 0>>
    assert st.l == [8] and st.lhat == [16]
    assert st.U[0] == {131070}
    assert res.report["exits"] == 0


def nontrivial_run(T=18):
    reg = Registry.from_json([{"kind": "diverge"}, {"kind": "const", "value": 0}])
    return run(length_lex(40), reg, TIGHT, T=T)


def test_nontrivial_witness_flips_z_and_adds_errors():
    st = nontrivial_run().state
    acts = [t for t in st.trace if t["stage"] == 17 and t["step"] in ("1c", "1e", "1f")]
    objs = [(t["object"], t["after"]) for t in acts]
    assert ("RS", [1, 1, "0", 16]) in objs
    assert ("Z[16]", 1) in objs
    assert ("U[0]", {"element": 32, "string": "0"}) in objs
    assert st.Z[16] == 1 and 32 in st.U[0]


def test_reset_columns_after_action():
    st = initial_state(length_lex(40), Registry.from_json([{"kind": "diverge"}, {"kind": "const", "value": 0}]), TIGHT)
    for _ in range(17):
        stage_step(st)
    before = {j: set(c) for j, c in st.U.items()}
    stage_step(st)  # stage 17: the triple (1, 1, "0") acts
    for j in range(1, 18):
        # emptied in step 1, then one fresh element from step 2
        assert len(st.U[j]) == 1 and not (st.U[j] & before.get(j, set()))
    assert before[0] <= st.U[0]


def test_flip_step_preserves_lengths():
    res = run(FLIP_PI, Registry.from_json([{"kind": "diverge"}, {"kind": "const", "value": 0}]), TIGHT, T=40)
    flips = [t for t in res.trace if t["step"] == "1g"]
    assert flips
    for t in flips:
        if isinstance(t["before"], str):
            assert len(t["before"]) == len(t["after"]) and t["before"] != t["after"]


def test_one_stage_empty_registry():
    res = run(length_lex(1), Registry([]), T=1)
    assert sum(1 for t in res.trace if t["object"] == "R") == 1
    assert res.report["breaches"] == 0


def test_fifty_stages_adversary_exits_and_rs():
    res = run(length_lex(50), adversary(), T=50)
    st = res.state
    assert res.report["exits"] >= 1
    for n, (n2, i, sigma, x) in st.RS.items():
        assert n == n2 and (n, i, sigma) not in st.R
        assert st.leaves[(n, i, sigma)] >= 1


def test_injury_bound_over_runs():
    for pi, progs, ls in [
        (length_lex(60), DEFAULT_ADVERSARY, None),
        (FLIP_PI, [{"kind": "diverge"}, {"kind": "const", "value": 0}], TIGHT),
    ]:
        st = run(pi, Registry.from_json(progs), ls, T=60).state
        for t, c in list(st.entries.items()) + list(st.leaves.items()):
            assert c <= 2 ** t[0]


def test_run_rejects_short_pi_and_bad_t():
    with pytest.raises(ValueError):
        run(length_lex(3), Registry([]), T=5)
    with pytest.raises(ValueError):
        run(length_lex(3), Registry([]), T=0)
    with pytest.raises(ValueError):
        run(length_lex(5), Registry([]), FunctionLSchedule(lambda s: 5), T=3)


def test_checker_catches_stray_mutation(monkeypatch):
    original = stage_mod.stage_step

    def corrupt(state):
        original(state)
        if state.s == 3:
            state.f_overlay[7] = LongBits.from_bits(bits("1"))
        return state

    import sys

    monkeypatch.setattr(sys.modules["densecode.construction.run"], "stage_step", corrupt)
    with pytest.raises(InvariantBreach) as err:
        run(length_lex(5), Registry([]), T=5)
    assert err.value.checker == "f-equal-fzero" and err.value.stage == 2


def test_trace_is_json_lines(tmp_path):
    res = run(length_lex(10), adversary(), T=10)
    out = tmp_path / "trace.jsonl"
    res.write_trace(out)
    import json

    lines = out.read_text().splitlines()
    assert len(lines) == len(res.trace)
    assert set(json.loads(lines[0])) == {"stage", "step", "object", "before", "after"}
