"""Finite forcing conditions: density conditions, pairs, replacement conditions.

Every relation here is a window version of an infinitary one.  A density
bound "over all lengths from ``a`` on" is checked on the lengths the finite
data actually provides, so a positive answer is necessary but not sufficient
for the infinite statement.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .density import (
    BOX,
    Bits,
    BoxValue,
    PartialSeq,
    bits,
    bitstr,
    card,
    is_prefix,
    symdiff,
    window_density,
)
from .programs import Computation, OutOfRange, Program


class Inconclusive(RuntimeError):
    """A program ran out of budget before reaching the end of its oracle."""


class PrefixTooShort(ValueError):
    """The supplied prefixes are too short to choose a padding length."""


def _bound(k: int) -> Fraction:
    return Fraction(1, 1 << k)


def tail_density(S: Sequence[int], start: int) -> Fraction:
    """Window density of ``S`` over lengths ``max(start, 1) .. len(S)``; 0 when that range is empty."""
    a = max(start, 1)
    if a > len(S):
        return Fraction(0)
    return window_density(S, a, len(S))


# ---------------------------------------------------------------- density conditions

@dataclass(frozen=True)
class ICond:
    """A finite set ``sigma`` with the promise that density stays at most ``2**-k``."""

    sigma: Bits
    k: int

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k is a natural")
        if not icond_valid(self.sigma, self.k):
            raise ValueError(
                f"density {card(self.sigma)}/{len(self.sigma)} of {bitstr(self.sigma)!r} exceeds 2^-{self.k}"
            )


def icond_valid(sigma: Sequence[int], k: int) -> bool:
    if not sigma:
        return True
    return Fraction(card(sigma), len(sigma)) <= _bound(k)


def icond_leq(p: ICond, p_hat: ICond) -> bool:
    """``p_hat`` extends ``p``: larger ``k``, longer set, density bound kept on the new lengths."""
    return (
        p_hat.k >= p.k
        and is_prefix(p.sigma, p_hat.sigma)
        and tail_density(p_hat.sigma, len(p.sigma)) <= _bound(p.k)
    )


def realizes_window(S: Sequence[int], p: ICond) -> bool:
    return is_prefix(p.sigma, S) and tail_density(S, len(p.sigma)) <= _bound(p.k)


@dataclass(frozen=True)
class PCond:
    """A total prefix of ``f`` paired with a density condition on the mask."""

    tau: Tuple[int, ...]
    p: ICond

    def __post_init__(self) -> None:
        if any(v is None or v < 0 for v in self.tau):
            raise ValueError("the prefix of a pair condition is total")


def pcond_leq(a: PCond, b: PCond) -> bool:
    return is_prefix(a.tau, b.tau) and icond_leq(a.p, b.p)


@dataclass(frozen=True)
class IStar:
    """A passive record of a finite set, a precision and an exception set."""

    xi: Bits
    w: int
    E: Tuple[int, ...] = ()


# ---------------------------------------------------------------- replacement conditions

@dataclass(frozen=True)
class FCond:
    """A density condition together with replacement values on its members.

    ``gamma`` has the length of ``sigma`` and holds ``None`` exactly off the mask.
    """

    sigma: Bits
    k: int
    gamma: PartialSeq = field(default=())

    def __post_init__(self) -> None:
        if not self.gamma and card(self.sigma) == 0:
            object.__setattr__(self, "gamma", (None,) * len(self.sigma))
        if len(self.gamma) != len(self.sigma):
            raise ValueError("gamma must have the length of sigma")
        for x, (s, g) in enumerate(zip(self.sigma, self.gamma)):
            if (s == 1) != (g is not None):
                raise ValueError(f"gamma is defined exactly on the mask; position {x} disagrees")
            if g is not None and g < 0:
                raise ValueError("replacement values are naturals")
        ICond(self.sigma, self.k)

    @property
    def icond(self) -> ICond:
        return ICond(self.sigma, self.k)

    @classmethod
    def make(cls, sigma: str, k: int, gamma: Mapping[int, int]) -> "FCond":
        s = bits(sigma)
        return cls(s, k, tuple(gamma.get(x) if b else None for x, b in enumerate(s)))

    @classmethod
    def from_json(cls, data: Any) -> "FCond":
        if isinstance(data, str):
            data = json.loads(data)
        gamma = {int(x): int(v) for x, v in data.get("gamma", {}).items()}
        s = bits(data["sigma"])
        extra = [x for x in gamma if x >= len(s) or not s[x]]
        if extra:
            raise ValueError(f"gamma is defined off the mask at {sorted(extra)}")
        return cls.make(data["sigma"], int(data["k"]), gamma)

    def to_json(self) -> Dict[str, Any]:
        return {
            "sigma": bitstr(self.sigma),
            "k": self.k,
            "gamma": {str(x): g for x, g in enumerate(self.gamma) if g is not None},
        }


def fcond_leq(q: FCond, q_hat: FCond) -> bool:
    """``q_hat`` extends ``q``: the replacement map grows and the density condition extends."""
    if not is_prefix(q.gamma, q_hat.gamma):
        return False
    return icond_leq(q.icond, q_hat.icond)


def _need(f: Sequence[Optional[int]], x: int) -> int:
    if x >= len(f) or f[x] is None:
        raise ValueError(f"f is undefined at {x}")
    return f[x]


def apply_overlay(f: Sequence[Optional[int]], q: FCond) -> Tuple[int, ...]:
    """``f[q]``: replacement values on the mask, ``f`` elsewhere, nothing past ``|sigma|``."""
    return tuple(
        q.gamma[x] if q.sigma[x] else _need(f, x) for x in range(len(q.sigma))
    )


def fproper(q: FCond, f: Sequence[Optional[int]]) -> bool:
    return all(q.gamma[x] != _need(f, x) for x in range(len(q.sigma)) if q.sigma[x])


def fgeq_window(h: Sequence[Optional[int]], q: FCond, f: Sequence[Optional[int]]) -> bool:
    """``h`` extends ``f[q]`` and differs from ``f`` sparsely on the lengths available."""
    if not is_prefix(apply_overlay(f, q), h):
        return False
    return tail_density(symdiff(h, f), len(q.sigma)) <= _bound(q.k)


# ---------------------------------------------------------------- translation

@dataclass(frozen=True)
class Translation:
    """Result of moving a condition from ``f`` to ``f'``.

    ``k_literal`` is the original ``k``.  ``k_achieved`` is the largest ``k' <= k``
    the new mask satisfies, which is at least 0 because every ratio is at most 1.
    """

    sigma: Bits
    gamma: PartialSeq
    k_literal: int
    k_achieved: int

    @property
    def literal_valid(self) -> bool:
        return self.k_achieved == self.k_literal

    def condition(self, literal: bool = False) -> FCond:
        return FCond(self.sigma, self.k_literal if literal else self.k_achieved, self.gamma)


def translate(p: FCond, f: Sequence[Optional[int]], f_prime: Sequence[Optional[int]]) -> Translation:
    over = apply_overlay(f, p)
    n = len(p.sigma)
    sigma = tuple(int(over[x] != _need(f_prime, x)) for x in range(n))
    gamma: List[Optional[int]] = []
    for x in range(n):
        if not sigma[x]:
            gamma.append(None)
        elif p.sigma[x]:
            gamma.append(p.gamma[x])
        else:
            gamma.append(_need(f, x))
    k = p.k
    while k > 0 and not icond_valid(sigma, k):
        k -= 1
    return Translation(sigma, tuple(gamma), p.k, k)


@dataclass(frozen=True)
class Extension:
    l2: int
    q2: FCond
    p3: Translation
    q4: FCond


def translate_extend(
    q1: FCond, f: Sequence[Optional[int]], f_prime: Sequence[Optional[int]]
) -> Extension:
    """Pad ``q1`` with zeros far enough out that the translation keeps ``k``.

    The padding length is the least ``l2 > 8 |sigma_1|`` at which the disagreement
    of ``f`` and ``f'`` has window density at most ``2**-(k_1+3)`` over all
    remaining available lengths.
    """
    l1 = len(q1.sigma)
    top = min(len(f), len(f_prime))
    diff = symdiff(f[:top], f_prime[:top])
    bound = _bound(q1.k + 3)
    l2 = None
    # scan from the top down: best[l] is the largest ratio over lengths l..top
    count = [0] * (top + 1)
    for x in range(top):
        count[x + 1] = count[x] + diff[x]
    best_num, best_den = 0, 1
    for l in range(top, 8 * l1, -1):
        if count[l] * best_den > best_num * l:
            best_num, best_den = count[l], l
        if best_num * bound.denominator <= best_den:
            l2 = l
    if l2 is None:
        raise PrefixTooShort(
            f"no length in ({8 * l1}, {top}] keeps the disagreement under 2^-{q1.k + 3}"
        )
    pad = l2 - l1
    q2 = FCond(q1.sigma + (0,) * pad, q1.k, q1.gamma + (None,) * pad)
    p3 = translate(q2, f, f_prime)
    q4 = FCond(q2.sigma, q1.k + 2, q2.gamma)
    return Extension(l2, q2, p3, q4)


def random_extension(
    p: FCond, length: int, f_prime: Sequence[int], rng: random.Random, values: int = 8
) -> FCond:
    """A random condition extending ``p`` to ``length`` that keeps its density promise."""
    sigma = list(p.sigma)
    gamma = list(p.gamma)
    cap = _bound(p.k)
    count = card(sigma)
    for x in range(len(sigma), length):
        take = rng.random() < float(cap) / 2 and Fraction(count + 1, x + 1) <= cap
        if take:
            choices = [v for v in range(values) if v != f_prime[x]]
            sigma.append(1)
            gamma.append(rng.choice(choices))
            count += 1
        else:
            sigma.append(0)
            gamma.append(None)
    return FCond(tuple(sigma), p.k, tuple(gamma))


def check_round_trip(
    ext: Extension,
    q1: FCond,
    f: Sequence[int],
    f_prime: Sequence[int],
    rng: random.Random,
    samples: int,
    values: int = 8,
) -> List[FCond]:
    """Sample extensions of the translated ``q4`` and return those that fail to map back above ``q1``."""
    start = translate(ext.q4, f, f_prime).condition()
    top = min(len(f), len(f_prime))
    bad = []
    for _ in range(samples):
        length = rng.randint(len(start.sigma), top)
        p5 = random_extension(start, length, f_prime, rng, values)
        back = translate(p5, f_prime, f)
        if back.k_achieved < q1.k or not fcond_leq(q1, back.condition()):
            bad.append(p5)
    return bad


# ---------------------------------------------------------------- goodness refutation

def program_image(
    program: Program, oracle_prefix: Sequence[int], budget: int
) -> Tuple[BoxValue, ...]:
    """Outputs at ``0, 1, ...`` until a run asks past the end of the prefix.

    A run that halts on nothing inside its budget makes the result inconclusive.
    """
    n = len(oracle_prefix)

    def oracle(y: int) -> BoxValue:
        if y >= n:
            raise OutOfRange(y)
        return oracle_prefix[y]

    out: List[BoxValue] = []
    for x in range(n):
        comp = _run_strict(program, x, oracle, budget)
        if comp is None:
            break
        out.append(comp.value)
    return tuple(out)


def _run_strict(program: Program, x: int, oracle, budget: int) -> Optional[Computation]:
    from .programs import Context, Diverged

    ctx = Context(oracle, budget)
    try:
        value = program.body(x, ctx)
    except OutOfRange:
        return None
    except Diverged as exc:
        raise Inconclusive(f"program {program.name} on input {x}: {exc}") from exc
    return Computation(value, ctx.steps, tuple(ctx.queries))


def goodness_refutation(
    p: FCond,
    w: int,
    program: Program,
    f_prime: Sequence[int],
    p1: FCond,
    p2: FCond,
    budget: int = 10_000,
) -> Optional[int]:
    """Least length where the two images differ on more than a ``2**-w`` fraction.

    Lengths run from ``max(|theta_0|, 1)`` up to but excluding the shorter of the
    two images.  ``None`` means no violation was found, which proves nothing.
    """
    if not (fcond_leq(p, p1) and fcond_leq(p, p2)):
        raise ValueError("both conditions must extend p")
    theta0 = program_image(program, apply_overlay(f_prime, p), budget)
    theta1 = program_image(program, apply_overlay(f_prime, p1), budget)
    theta2 = program_image(program, apply_overlay(f_prime, p2), budget)
    top = min(len(theta1), len(theta2))
    bound = _bound(w)
    diff = 0
    for l in range(1, top):
        diff += theta1[l - 1] != theta2[l - 1]
        if l >= max(len(theta0), 1) and Fraction(diff, l) > bound:
            return l
    return None


__all__ = [
    "BOX",
    "Extension",
    "FCond",
    "ICond",
    "IStar",
    "Inconclusive",
    "PCond",
    "PrefixTooShort",
    "Translation",
    "apply_overlay",
    "check_round_trip",
    "fcond_leq",
    "fgeq_window",
    "fproper",
    "goodness_refutation",
    "icond_leq",
    "icond_valid",
    "pcond_leq",
    "program_image",
    "random_extension",
    "realizes_window",
    "tail_density",
    "translate",
    "translate_extend",
]
