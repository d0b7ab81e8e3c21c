"""Density-robust coding toolkit: exact densities, a borrowing block code, the
coarse coding functional and its decoder, a finite-injury construction
simulator, and a calculus of forcing conditions on finite data."""

from .density import BOX, pair, unpair, code_bits, decode_bits, window_density
from .codec import Theta, encode, decode, ddist, height, truncate
from .layout import PaperSchedule, DeskSchedule, SymbolicSet, load_schedule
from .coarse import gamma_prefix, gamma_hat_interval, perturb_experiment

__all__ = [
    "BOX",
    "pair",
    "unpair",
    "code_bits",
    "decode_bits",
    "window_density",
    "Theta",
    "encode",
    "decode",
    "ddist",
    "height",
    "truncate",
    "PaperSchedule",
    "DeskSchedule",
    "SymbolicSet",
    "load_schedule",
    "gamma_prefix",
    "gamma_hat_interval",
    "perturb_experiment",
]
