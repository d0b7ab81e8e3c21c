from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from densecode.density import BOX, bits
from densecode.forcing import (
    FCond,
    ICond,
    Inconclusive,
    PCond,
    PrefixTooShort,
    apply_overlay,
    check_round_trip,
    fcond_leq,
    fgeq_window,
    fproper,
    goodness_refutation,
    icond_leq,
    icond_valid,
    pcond_leq,
    realizes_window,
    translate,
    translate_extend,
)
from densecode.programs import make_program


def naive_tail(S, start):
    a = max(start, 1)
    return max((Fraction(sum(S[:l]), l) for l in range(a, len(S) + 1)), default=Fraction(0))


def valid_iconds(max_len, max_k):
    for n in range(max_len + 1):
        for sigma in itertools.product((0, 1), repeat=n):
            for k in range(max_k + 1):
                if icond_valid(sigma, k):
                    yield ICond(sigma, k)


def test_icond_rejects_dense_sets():
    with pytest.raises(ValueError):
        ICond(bits("11"), 1)
    assert ICond((), 9).k == 9


def test_icond_leq_reflexive_and_padding():
    p = ICond(bits("0100"), 2)
    assert icond_leq(p, p)
    for m in range(6):
        ext = p.sigma + (0,) * m
        assert icond_leq(p, ICond(ext, 2))
        if icond_valid(ext, 3):
            assert icond_leq(p, ICond(ext, 3))


def test_icond_boundary_equality_passes():
    # window density of "01" over length 1..2 is exactly 1/2
    assert icond_leq(ICond(bits("0"), 1), ICond(bits("01"), 1))


def test_icond_leq_matches_brute_force_and_is_transitive():
    conds = list(valid_iconds(4, 2))
    for p in conds:
        for q in conds:
            expect = (
                q.k >= p.k
                and q.sigma[: len(p.sigma)] == p.sigma
                and naive_tail(q.sigma, len(p.sigma)) <= Fraction(1, 2 ** p.k)
            )
            assert icond_leq(p, q) == expect
    rng = random.Random(3)
    for _ in range(3000):
        a, b, c = rng.sample(conds, 3)
        if icond_leq(a, b) and icond_leq(b, c):
            assert icond_leq(a, c)
        if icond_leq(a, b) and icond_leq(b, a):
            assert a == b


def test_realizes_window():
    p = ICond(bits("01"), 1)
    assert realizes_window(bits("01") + (0,) * 5, p)
    assert not realizes_window(bits("01") + (1,) * 5, p)
    assert realizes_window(bits("0101"), p)
    assert not realizes_window(bits("11"), p)


def test_pcond_order():
    a = PCond((1, 2), ICond(bits("0"), 0))
    b = PCond((1, 2, 3), ICond(bits("01"), 1))
    assert pcond_leq(a, b) and not pcond_leq(b, a)
    with pytest.raises(ValueError):
        PCond((1, None), ICond((), 0))


def test_fcond_json_round_trip_and_domain():
    q = FCond.from_json({"sigma": "0100", "k": 2, "gamma": {"1": 3}})
    assert q.gamma == (None, 3, None, None)
    assert FCond.from_json(q.to_json()) == q
    with pytest.raises(ValueError):
        FCond.from_json({"sigma": "0100", "k": 2, "gamma": {"0": 3}})
    with pytest.raises(ValueError):
        FCond(bits("0100"), 2, (None, None, None, None))


def test_apply_overlay_cases():
    f = (7, 7, 7, 7)
    assert apply_overlay(f, FCond(bits("0000"), 0)) == f
    q = FCond.make("0100", 2, {1: 3})
    assert apply_overlay(f, q) == (7, 3, 7, 7)
    assert len(apply_overlay(f + (1, 1), q)) == 4
    with pytest.raises(ValueError):
        apply_overlay((7,), q)


def test_fproper_and_fgeq_window():
    f = (7, 7, 7, 7)
    q = FCond.make("0100", 2, {1: 3})
    assert fproper(q, f)
    assert not fproper(FCond.make("0100", 2, {1: 7}), f)
    h = apply_overlay(f, q) + (7, 7, 7, 7)
    assert fgeq_window(h, q, f + (7,) * 4)
    assert not fgeq_window(apply_overlay(f, q) + (0, 0, 0, 0), q, f + (7,) * 4)
    assert not fgeq_window((7, 7, 7, 7), q, f)


def test_translate_worked_example():
    p = FCond.make("0100", 1, {1: 3})
    t = translate(p, (7, 7, 7, 7), (8, 3, 7, 7))
    assert t.sigma == bits("1000")
    assert t.gamma == (7, None, None, None)
    assert t.k_literal == 1 and t.k_achieved == 1


def test_translate_identity_keeps_proper_condition():
    f = (1, 2, 0, 1)
    p = FCond.make("0110", 1, {1: 0, 2: 2})
    t = translate(p, f, f)
    assert t.sigma == p.sigma and t.gamma == p.gamma


def test_translate_reports_weaker_k():
    f = (0, 0, 0, 0)
    p = FCond.make("0000", 2, {})
    t = translate(p, f, (1, 1, 0, 0))
    assert t.sigma == bits("1100") and t.k_literal == 2 and t.k_achieved == 1
    assert not t.literal_valid
    with pytest.raises(ValueError):
        t.condition(literal=True)


def all_fconds(n, values, max_k=2):
    for sigma in itertools.product((0, 1), repeat=n):
        ones = [x for x in range(n) if sigma[x]]
        ks = [k for k in range(max_k + 1) if icond_valid(sigma, k)]
        for gvals in itertools.product(range(values), repeat=len(ones)):
            gamma = [None] * n
            for x, v in zip(ones, gvals):
                gamma[x] = v
            for k in ks[-1:]:
                yield FCond(sigma, k, tuple(gamma))


@pytest.mark.parametrize("n", range(0, 5))
def test_translation_coherence_small(n):
    values = 3
    seqs = list(itertools.product(range(values), repeat=n))
    rng = random.Random(n)
    for p in all_fconds(n, values):
        for f in rng.sample(seqs, min(len(seqs), 6)):
            for g in rng.sample(seqs, min(len(seqs), 6)):
                t = translate(p, f, g)
                assert apply_overlay(g, t.condition()) == apply_overlay(f, p)
                assert fproper(t.condition(), g)
                if fproper(p, f):
                    back = translate(t.condition(), g, f)
                    assert back.sigma == p.sigma and back.gamma == p.gamma


def test_translate_extend_identity():
    f = tuple(random.Random(1).randrange(5) for _ in range(200))
    q1 = FCond.make("0100", 2, {1: (f[1] + 1) % 5})
    ext = translate_extend(q1, f, f)
    assert ext.l2 == 33
    assert sum(ext.q2.sigma) == sum(q1.sigma) and ext.q2.k == q1.k
    assert ext.p3.k_achieved >= q1.k and sum(ext.p3.sigma) == sum(q1.sigma)
    assert fcond_leq(q1, ext.q2) and fcond_leq(ext.q2, ext.q4) and ext.q4.k == q1.k + 2


def test_translate_extend_sparse_noise_round_trips():
    rng = random.Random(7)
    k1 = 1
    f = tuple(rng.randrange(8) for _ in range(3000))
    g = list(f)
    # disagreement density 2^-(k1+4) sprinkled above 8*l1
    for x in range(64, 3000, 32):
        g[x] = (g[x] + 1) % 8
    g = tuple(g)
    q1 = FCond.make("00010000", k1, {3: (f[3] + 1) % 8})
    ext = translate_extend(q1, f, g)
    assert ext.l2 > 64
    assert ext.p3.k_achieved >= k1
    assert check_round_trip(ext, q1, f, g, rng, samples=1000) == []


def test_translate_extend_prefix_too_short():
    f = (0,) * 200
    g = tuple(x % 2 for x in range(200))
    with pytest.raises(PrefixTooShort):
        translate_extend(FCond.make("0", 0, {}), f, g)


def test_goodness_never_violated_for_equal_or_constant():
    fp = tuple(range(10))
    p = FCond.make("0", 0, {})
    p1 = FCond.make("01000", 1, {1: 9})
    echo = make_program({"kind": "echo"})
    const = make_program({"kind": "const", "value": 4})
    assert goodness_refutation(p, 0, echo, fp, p1, p1) is None
    p2 = FCond.make("00100", 1, {2: 9})
    assert goodness_refutation(p, 0, const, fp, p1, p2) is None


def test_goodness_echo_adversary_found_at_first_echoed_index():
    fp = tuple(range(12))
    p = FCond.make("", 0, {})
    p1 = FCond.make("0100", 1, {1: 20})
    p2 = FCond.make("0100", 1, {1: 21})
    echo = make_program({"kind": "echo"})
    # the images differ only at index 1, so the worst fraction is 1/2 at length 2
    assert goodness_refutation(p, 1, echo, fp, p1, p2) is None
    assert goodness_refutation(p, 2, echo, fp, p1, p2) == 2


def test_goodness_inconclusive_on_budget():
    p = FCond.make("00", 0, {})
    spin = make_program({"kind": "diverge"})
    with pytest.raises(Inconclusive):
        goodness_refutation(p, 0, spin, (1, 2, 3), p, p)


def test_goodness_requires_extensions():
    p = FCond.make("01", 1, {1: 3})
    q = FCond.make("00", 1, {})
    with pytest.raises(ValueError):
        goodness_refutation(p, 0, make_program({"kind": "echo"}), (0, 0, 0), q, q)


def test_box_outputs_pass_through_images():
    from densecode.forcing import program_image

    prog = make_program({"kind": "const", "value": "BOX"})
    assert program_image(prog, (1, 2), 10) == (BOX, BOX)
