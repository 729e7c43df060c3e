"""Scikit-learn style front end: fit a quantum strategy to a game, then query it."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_random_state

from .evaluation import evaluate_exact, question_probabilities
from .games import GameSpec
from .measurement import normalize_kind
from .optimize import DPOConfig, best_trial, prune_gates, refine, run_trials
from .strategy import REFERENCE_STATES

_PRESET_FIELDS = ("eps_theta", "eps_phi", "delta_e", "max_adapt_ops", "reference", "conjugate")


def check_game(game) -> GameSpec:
    if not isinstance(game, GameSpec):
        raise TypeError(f"expected a GameSpec, got {type(game).__name__}")
    return game


def check_questions(questions, game: GameSpec) -> list[tuple]:
    """Validate an iterable of joint questions against ``game``.

    A single joint question is accepted and promoted to a batch of one.
    """
    if isinstance(questions, tuple) and len(questions) == game.n_players and not isinstance(questions[0], tuple):
        questions = [questions]
    rows = [tuple(q) for q in questions]
    if not rows:
        raise ValueError("no questions given")
    known = set(game.questions)
    for q in rows:
        if q not in known:
            raise ValueError(f"{q} is not a question of {game.name}")
    return rows


def _check_positive(name, value, integral=False):
    kind = numbers.Integral if integral else numbers.Real
    if not isinstance(value, kind) or isinstance(value, bool) or not value > 0:
        raise ValueError(f"{name} must be a positive {'integer' if integral else 'number'}, got {value!r}")


class DPOSolver(BaseEstimator):
    """Dual-phase optimizer wrapped as an estimator.

    ``fit`` takes a :class:`GameSpec` in place of a feature matrix. Threshold
    parameters left as ``None`` take the per-game preset.

    Attributes set by ``fit``: ``strategy_``, ``energy_``, ``trials_``,
    ``game_``, ``config_``, ``n_params_``.
    """

    def __init__(
        self,
        layer="ry",
        n_trials=1,
        eps_theta=None,
        eps_phi=None,
        delta_e=None,
        max_outer_iters=100,
        max_adapt_ops=None,
        reference=None,
        conjugate=None,
        frozen_phi=(),
        refine=False,
        prune_threshold=None,
        random_state=None,
        n_jobs=None,
    ):
        self.layer = layer
        self.n_trials = n_trials
        self.eps_theta = eps_theta
        self.eps_phi = eps_phi
        self.delta_e = delta_e
        self.max_outer_iters = max_outer_iters
        self.max_adapt_ops = max_adapt_ops
        self.reference = reference
        self.conjugate = conjugate
        self.frozen_phi = frozen_phi
        self.refine = refine
        self.prune_threshold = prune_threshold
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _validate_params(self):
        normalize_kind(self.layer)
        _check_positive("n_trials", self.n_trials, integral=True)
        _check_positive("max_outer_iters", self.max_outer_iters, integral=True)
        for name in ("eps_theta", "eps_phi", "delta_e", "prune_threshold"):
            if getattr(self, name) is not None:
                _check_positive(name, getattr(self, name))
        if self.reference is not None and self.reference not in REFERENCE_STATES:
            raise ValueError(f"reference must be one of {REFERENCE_STATES}")

    def _config(self, game: GameSpec) -> DPOConfig:
        overrides = {f: getattr(self, f) for f in _PRESET_FIELDS if getattr(self, f) is not None}
        seed = self.random_state
        if seed is not None and not isinstance(seed, numbers.Integral):
            seed = int(check_random_state(seed).randint(2**31 - 1))
        return DPOConfig.preset(
            game.kind,
            max_outer_iters=self.max_outer_iters,
            frozen_phi=tuple(self.frozen_phi),
            rng_seed=seed,
            **overrides,
        )

    def fit(self, game, y=None):
        game = check_game(game)
        self._validate_params()
        config = self._config(game)
        trials = run_trials(game, self.layer, config, self.n_trials, n_jobs=self.n_jobs)
        best = best_trial(trials)
        strategy, energy = best.strategy, best.final_energy
        if self.refine:
            strategy, energy = refine(strategy, game, frozen=config.frozen_phi)
        if self.prune_threshold is not None:
            strategy = prune_gates(strategy, self.prune_threshold, game)
            if self.refine:
                strategy, energy = refine(strategy, game, frozen=config.frozen_phi)
        self.game_ = game
        self.config_ = config
        self.trials_ = trials
        self.strategy_ = strategy
        self.energy_ = float(energy)
        self.n_params_ = int(strategy.layer.phi.size + len(strategy.ansatz))
        return self

    def predict_proba(self, questions) -> np.ndarray:
        """Joint outcome distribution over the players' registers, one row per question."""
        check_is_fitted(self, "strategy_")
        rows = check_questions(questions, self.game_)
        table = question_probabilities(self.strategy_, self.game_)
        return np.stack([table[q] for q in rows])

    def transform(self, questions) -> np.ndarray:
        """Win probability of each joint question under the fitted strategy."""
        check_is_fitted(self, "strategy_")
        rows = check_questions(questions, self.game_)
        probs = self.predict_proba(rows)
        return np.array([p @ self.game_.rule_vector(q) for p, q in zip(probs, rows)])

    def predict(self, questions, random_state=None) -> np.ndarray:
        """Sample one joint answer per question; shape ``(n_questions, n_players)``.

        Register outcomes outside a player's alphabet are reported as ``None``.
        """
        rng = check_random_state(random_state)
        probs = self.predict_proba(questions)
        dims = [2**k for k in self.game_.qubits_per_player]
        out = np.empty((len(probs), self.game_.n_players), dtype=object)
        for row, p in enumerate(probs):
            outcome = rng.choice(len(p), p=p / p.sum())
            for player, idx in enumerate(np.unravel_index(outcome, dims)):
                answers = self.game_.answers_per_player[player]
                out[row, player] = answers[idx] if idx < len(answers) else None
        return out

    def score(self, game=None, y=None) -> float:
        """Exact game value; the inequality value for inequality-only games."""
        check_is_fitted(self, "strategy_")
        game = self.game_ if game is None else check_game(game)
        report = evaluate_exact(self.strategy_, game)
        return report.overall_value if report.overall_value is not None else report.inequality_value
