"""Slow, literal reimplementations used as independent references in tests.

Nothing here shares code with the package apart from plain data types.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple


def pair_rec(i: int, n: int) -> int:
    # <0,n> = 2n and <i+1,n> = 2<i,n> + 1
    z = 2 * n
    for _ in range(i):
        z = 2 * z + 1
    return z


def code_bits_str(sigma: Sequence[int]) -> int:
    # base-2 numeral "1 sigma(|sigma|-1) ... sigma(0)", minus one
    return int("1" + "".join(str(b) for b in reversed(sigma)), 2) - 1


def tuple_order(n: int, top: int) -> List[Tuple[int, ...]]:
    """Tuples with max < top sorted by (max, lexicographic)."""
    return sorted(itertools.product(range(top), repeat=n), key=lambda t: (max(t), t))


def density_scan(S: Sequence[int], a: int, b: int) -> Fraction:
    """Running count over every length in ``[a, b]``."""
    prefix = list(itertools.accumulate(S, initial=0))
    num, den = prefix[a], a
    for l in range(a, b + 1):
        if prefix[l] * den > num * l:
            num, den = prefix[l], l
    return Fraction(num, den)


def all_maps(n: int):
    return list(itertools.product(range(n), repeat=n))


def idempotent(q) -> bool:
    return all(q[q[x]] == q[x] for x in range(len(q)))


def enc_bit(tau, q, sigma, x) -> int:
    if not idempotent(q):
        return 0
    lent = [sigma[y] for y in range(len(q)) if q[y] == x]
    b = max(lent) if lent else -1
    return int(sigma[x] > tau[x] and max(tau) < b)


def code_of(tau, q, n: int) -> int:
    order = tuple_order(n, max(tau) + 1)
    rank_q = sum(v * n ** i for i, v in enumerate(q))
    return order.index(tuple(tau)) * n ** n + rank_q


def naive_encode(sigma: Sequence[int]) -> Dict[int, Tuple[int, ...]]:
    """Every nonempty entry, enumerating all tau with max <= max(sigma) + 1."""
    n = len(sigma)
    out = {}
    order = tuple_order(n, max(sigma) + 2)
    for t_idx, tau in enumerate(order):
        for q in all_maps(n):
            v = tuple(enc_bit(tau, q, sigma, x) for x in range(n))
            if any(v):
                out[t_idx * n ** n + sum(c * n ** i for i, c in enumerate(q))] = v
    return out


def naive_height(support: Dict[int, Tuple[int, ...]], n: int) -> int:
    m = 0
    while any(n ** n * m ** n <= s < n ** n * (m + 1) ** n and any(v) for s, v in support.items()):
        m += 1
    return m


def naive_dist(a: Dict[int, Tuple[int, ...]], b: Dict[int, Tuple[int, ...]], n: int) -> int:
    zero = (0,) * n
    best = 0
    for s in set(a) | set(b):
        u, v = a.get(s, zero), b.get(s, zero)
        best = max(best, sum(x != y for x, y in zip(u, v)))
    return best


def naive_decode(support: Dict[int, Tuple[int, ...]], n: int) -> Tuple[int, ...]:
    h = naive_height(support, n)
    cut = {s: v for s, v in support.items() if s < n ** n * (h + 1) ** n}
    best = None
    for idx, sigma in enumerate(tuple_order(n, h + 1)):
        d = naive_dist(naive_encode(sigma), cut, n)
        if best is None or (d, idx) < best[:2]:
            best = (d, idx, sigma)
    return best[2]


def mod_rep_naive(sigma, r):
    out = []
    for _ in range(2 ** r):
        out.extend(sigma)
    return tuple(out)


def layout_naive(rows: Sequence[Tuple[int, int]]) -> List[Tuple[int, int, int, int]]:
    """(r, lm, l, l_prev) per row by the recurrences, for tiny schedules."""
    out = []
    l_prev = 0
    for n, b in rows:
        r = 2 * b + n + l_prev
        lm = 2 ** (r - b)
        l = lm + 2 ** (n + r)
        out.append((r, lm, l, l_prev))
        l_prev = l
    return out


def median_witness(sigma, sigma2):
    """The (tau, q) pair built from the lower median of the pointwise minimum on the
    disagreement set; it separates the two encodings in at least ceil(d/2) places."""
    n = len(sigma)
    S = [x for x in range(n) if sigma[x] != sigma2[x]]
    zeta = [min(a, b) for a, b in zip(sigma, sigma2)]
    values = sorted(zeta[x] for x in S)
    z = values[(len(values) - 1) // 2]
    H = [x for x in S if zeta[x] > z]
    E = [x for x in S if zeta[x] == z]
    L = [x for x in S if zeta[x] < z]
    q = list(range(n))
    if L:
        for k, y in enumerate(H):
            q[y] = L[k % len(L)]
    tau = tuple(zeta[x] if x in L or x in E else 0 for x in range(n))
    return tau, tuple(q), z
