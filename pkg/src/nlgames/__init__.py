"""Variational quantum strategies for nonlocal games."""

from .estimator import DPOSolver
from .evaluation import (
    EvaluationReport,
    NoiseModel,
    classical_threshold,
    evaluate_exact,
    evaluate_noisy,
    evaluate_sampled,
    inequality_value,
    sweep_noise,
)
from .games import (
    GameSpec,
    Graph,
    chsh_game,
    classical_brute_force,
    coloring_game,
    load_graph,
    nps_game,
    validate_synchronous,
)
from .hamiltonian import build_beta, build_hamiltonian
from .io import load_builtin_strategy, load_strategy, save_strategy
from .measurement import MeasurementLayer
from .optimize import DPOConfig, TrialResult, adapt_vqe, dpo, optimize_phi, prune_gates, run_trials
from .statevector import PauliString
from .strategy import Strategy

__version__ = "0.1.0"

__all__ = [
    "DPOConfig",
    "DPOSolver",
    "EvaluationReport",
    "GameSpec",
    "Graph",
    "MeasurementLayer",
    "NoiseModel",
    "PauliString",
    "Strategy",
    "TrialResult",
    "adapt_vqe",
    "build_beta",
    "build_hamiltonian",
    "chsh_game",
    "classical_brute_force",
    "classical_threshold",
    "coloring_game",
    "dpo",
    "evaluate_exact",
    "evaluate_noisy",
    "evaluate_sampled",
    "inequality_value",
    "load_builtin_strategy",
    "load_graph",
    "load_strategy",
    "nps_game",
    "optimize_phi",
    "prune_gates",
    "run_trials",
    "save_strategy",
    "sweep_noise",
    "validate_synchronous",
]
