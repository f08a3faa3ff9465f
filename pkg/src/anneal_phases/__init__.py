"""Finite-time annealing of the generalized Landau-Zener model and the transverse-field Ising chain.

Exact excess work from mode-level RK4 integration, closed-form
approximations (LZF, HLZ, KZM, APT, LRT), crossover durations between
their regimes and (N, tau) regime maps.
"""

__version__ = "0.1.0"

from .errors import (AnnealError, ConfigError, IntegratorError, LambertConvergenceError,
                     NumericError, OutputError, QuadratureError, RootNotFoundError)
from .models import ModelParams, Protocol, Spectrum
from .dynamics import (ChainProbabilities, EvolutionResult, IntegratorSpec, ModeState,
                       chain_probabilities, evolve_lz, evolve_ti_mode, excess_work_lz,
                       excess_work_ti)
from .crossover import CrossoverReport, RegimeLabel

__all__ = [
    "AnnealError", "ConfigError", "IntegratorError", "LambertConvergenceError", "NumericError",
    "OutputError", "QuadratureError", "RootNotFoundError", "ModelParams", "Protocol", "Spectrum",
    "ChainProbabilities", "EvolutionResult", "IntegratorSpec", "ModeState",
    "chain_probabilities", "evolve_lz", "evolve_ti_mode", "excess_work_lz", "excess_work_ti",
    "CrossoverReport", "RegimeLabel",
]
