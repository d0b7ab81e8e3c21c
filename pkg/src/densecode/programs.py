"""Deterministic step-bounded oracle programs and a JSON registry of them.

A program is run on an input ``x`` against an oracle that answers position
queries with a natural number or :data:`BOX`.  Every run carries a step budget.
Running out of budget, or asking the oracle something it refuses to answer,
counts as divergence.  Nothing here simulates a universal machine.  The
registry stands in for an enumeration of oracle functionals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from .density import BOX, BoxValue

Oracle = Callable[[int], BoxValue]


class Diverged(Exception):
    """The run did not halt within its budget or use bound."""


class OutOfRange(Diverged):
    """The oracle was asked about a position it does not know."""


class Context:
    """Budget accounting and query log for one run."""

    def __init__(self, oracle: Oracle, budget: int, use_limit: Optional[int] = None) -> None:
        self._oracle = oracle
        self.budget = budget
        self.use_limit = use_limit
        self.steps = 0
        self.queries: List[int] = []

    def tick(self, n: int = 1) -> None:
        self.steps += n
        if self.steps > self.budget:
            raise Diverged(f"budget of {self.budget} steps exhausted")

    def query(self, y: int) -> BoxValue:
        self.tick()
        if y < 0:
            raise ValueError("oracle positions are naturals")
        if self.use_limit is not None and y >= self.use_limit:
            raise OutOfRange(f"query {y} reaches the use limit {self.use_limit}")
        self.queries.append(y)
        return self._oracle(y)


@dataclass(frozen=True)
class Computation:
    value: BoxValue
    steps: int
    queries: Tuple[int, ...]

    @property
    def use(self) -> int:
        """One more than the largest position queried, 0 when nothing was asked."""
        return max(self.queries) + 1 if self.queries else 0


@dataclass(frozen=True)
class Program:
    """A named program with its JSON description kept for reports."""

    name: str
    body: Callable[[int, Context], BoxValue]
    spec: Dict[str, Any] = field(default_factory=dict, compare=False)

    def run(
        self, x: int, oracle: Oracle, budget: int, use_limit: Optional[int] = None
    ) -> Optional[Computation]:
        """The halting computation, or ``None`` on divergence within the bounds."""
        ctx = Context(oracle, budget, use_limit)
        try:
            value = self.body(x, ctx)
        except Diverged:
            return None
        return Computation(value, ctx.steps, tuple(ctx.queries))


# ---------------------------------------------------------------- program kinds

def _value(raw: Any) -> BoxValue:
    if raw == "BOX":
        return BOX
    if not isinstance(raw, int) or raw < 0:
        raise ValueError(f"program outputs are naturals or BOX, got {raw!r}")
    return raw


def _const(spec: Dict[str, Any]):
    value = _value(spec.get("value", 0))

    def body(x: int, ctx: Context) -> BoxValue:
        ctx.tick()
        return value

    return body


def _echo(spec: Dict[str, Any]):
    offset = int(spec.get("offset", 0))

    def body(x: int, ctx: Context) -> BoxValue:
        return ctx.query(x + offset)

    return body


def _parity(spec: Dict[str, Any]):
    # sum of the oracle below x, mod 2; a single BOX answer makes the output BOX
    def body(x: int, ctx: Context) -> BoxValue:
        total = 0
        for y in range(x):
            v = ctx.query(y)
            if v is BOX:
                return BOX
            total += v
        ctx.tick()
        return total % 2

    return body


def _late(spec: Dict[str, Any]):
    delay = int(spec.get("delay", 0))
    value = _value(spec.get("value", 0))

    def body(x: int, ctx: Context) -> BoxValue:
        ctx.tick(delay + 1)
        return value

    return body


def _sparse(spec: Dict[str, Any]):
    period = int(spec.get("period", 2))
    residue = int(spec.get("residue", 0))
    value = _value(spec.get("value", 0))
    if period <= 0:
        raise ValueError("sparse programs need a positive period")

    def body(x: int, ctx: Context) -> BoxValue:
        if x % period != residue:
            while True:
                ctx.tick()
        ctx.tick()
        return value

    return body


def _diverge(spec: Dict[str, Any]):
    def body(x: int, ctx: Context) -> BoxValue:
        while True:
            ctx.tick()

    return body


KINDS: Dict[str, Callable[[Dict[str, Any]], Callable[[int, Context], BoxValue]]] = {
    "const": _const,
    "echo": _echo,
    "parity": _parity,
    "late": _late,
    "sparse": _sparse,
    "diverge": _diverge,
}


def make_program(spec: Dict[str, Any]) -> Program:
    kind = spec.get("kind")
    if kind not in KINDS:
        raise ValueError(f"unknown program kind {kind!r}; expected one of {sorted(KINDS)}")
    name = spec.get("name", kind)
    return Program(name, KINDS[kind](spec), dict(spec))


class Registry:
    """Programs by index.  Missing indices behave like the diverging program."""

    def __init__(self, programs: Sequence[Program] = ()) -> None:
        self.programs = list(programs)

    def __len__(self) -> int:
        return len(self.programs)

    def get(self, i: int) -> Optional[Program]:
        return self.programs[i] if 0 <= i < len(self.programs) else None

    def run(
        self, i: int, x: int, oracle: Oracle, budget: int, use_limit: Optional[int] = None
    ) -> Optional[Computation]:
        prog = self.get(i)
        if prog is None:
            return None
        return prog.run(x, oracle, budget, use_limit)

    @classmethod
    def from_json(cls, data: Union[str, List[Dict[str, Any]]]) -> "Registry":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, list):
            raise ValueError("a registry is a JSON list of program objects")
        return cls([make_program(spec) for spec in data])

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Registry":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> List[Dict[str, Any]]:
        return [p.spec for p in self.programs]


DEFAULT_ADVERSARY: List[Dict[str, Any]] = [
    {"kind": "const", "value": 1},
    {"kind": "echo"},
    {"kind": "parity"},
    {"kind": "late", "delay": 20, "value": 1},
    {"kind": "sparse", "period": 3, "residue": 1, "value": 1},
]
"""Five programs that between them fire trivial witnesses early and late."""
