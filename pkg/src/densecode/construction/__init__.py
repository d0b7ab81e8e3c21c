"""Stagewise simulation of the finite-injury construction of ``f``, ``Z`` and the ``U`` sets."""

from .naturals import Big, Far, LongBits, Undecidable
from .pi import PiSeq, i_pi, i_pi_proper, length_lex, longest_chain, normalize_pi
from .state import (
    DefaultLSchedule,
    FunctionLSchedule,
    InvariantBreach,
    LSchedule,
    StageState,
    YConflict,
    f0_at,
    f0_string,
    theta_sigma_eval,
    y_eval,
    yi_compatible,
)
from .stage import Witness, stage_step, viability_check
from .checks import CHECKERS
from .run import RunResult, initial_state, run

__all__ = [
    "Big",
    "Far",
    "LongBits",
    "Undecidable",
    "PiSeq",
    "i_pi",
    "i_pi_proper",
    "length_lex",
    "longest_chain",
    "normalize_pi",
    "DefaultLSchedule",
    "FunctionLSchedule",
    "InvariantBreach",
    "LSchedule",
    "StageState",
    "YConflict",
    "f0_at",
    "f0_string",
    "theta_sigma_eval",
    "y_eval",
    "yi_compatible",
    "Witness",
    "stage_step",
    "viability_check",
    "CHECKERS",
    "RunResult",
    "initial_state",
    "run",
]
