"""Driver: run the construction for a number of stages and report on it."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..programs import Registry
from .checks import CHECKERS, Checker, Snapshot, check_frozen_prefixes, count_bound
from .naturals import to_json
from .pi import PiSeq
from .stage import stage_step
from .state import DefaultLSchedule, LSchedule, StageState, triple_json


@dataclass
class RunResult:
    state: StageState
    report: Dict[str, Any]

    @property
    def trace(self) -> List[Dict[str, Any]]:
        return self.state.trace

    def write_trace(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.trace:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def initial_state(pi: PiSeq, registry: Registry, lsched: Optional[LSchedule] = None) -> StageState:
    return StageState(pi=pi, registry=registry, lsched=lsched or DefaultLSchedule())


def run(
    pi: PiSeq,
    registry: Registry,
    lsched: Optional[LSchedule] = None,
    T: int = 1,
    check: bool = True,
) -> RunResult:
    """Run ``T`` stages from the initial state.

    With ``check`` on, every per-stage property is tested after each stage and
    the frozen-prefix property once at the end; a failure raises
    :class:`InvariantBreach` naming the stage, the checker and the objects.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    state = initial_state(pi, registry, lsched)
    checker = Checker()
    for _ in range(T):
        snap = Snapshot.take(state) if check else None
        stage_step(state)
        if check:
            checker.after_stage(state, snap)
    if check:
        check_frozen_prefixes(state)
    return RunResult(state, _report(state, checker if check else None))


def _report(state: StageState, checker: Optional[Checker]) -> Dict[str, Any]:
    exits = sum(state.leaves.values())
    report: Dict[str, Any] = {
        "stages": state.s,
        "schedule": state.lsched.describe(),
        "programs": len(state.registry),
        "trace_records": len(state.trace),
        "exits": exits,
        "max_injuries": max(list(state.entries.values()) + list(state.leaves.values()), default=0),
        "R": sorted(triple_json(t) for t in state.R),
        "RS": [triple_json(q[:3]) + [q[3]] for _, q in sorted(state.RS.items())],
        "elements_added": state.added_count,
        "l": [to_json(v) for v in state.l[:16]],
    }
    if checker is not None:
        report["invariants"] = {name: "ok" for name in CHECKERS}
        report["breaches"] = 0
        # for each n: elements ever enumerated below l_n, the bound, and density at most 2**-n
        report["density_certificate"] = [
            {"n": n, "count": c, "bound": count_bound(n), "l_n": to_json(state.l[n])}
            for n, c in sorted(checker.counts.items())
            if n < 16
        ]
    return report
