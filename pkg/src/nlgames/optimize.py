"""Dual-phase optimization: ADAPT-style state preparation alternated with
quasi-Newton descent on the measurement parameters."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .games import GameSpec
from .hamiltonian import MeasuredObjective, objective_for
from .measurement import MeasurementLayer
from .statevector import PauliString, all_pauli_strings, n_qubits_of, reference_state
from .strategy import Strategy

logger = logging.getLogger(__name__)

PRESETS = {
    "chsh": dict(eps_theta=1e-3, eps_phi=1e-5, delta_e=1e-3, reference="all_zero"),
    "nps": dict(eps_theta=1e-3, eps_phi=1e-5, delta_e=1e-3, reference="all_zero", max_adapt_ops=100),
    "coloring": dict(eps_theta=1e-6, eps_phi=1e-5, delta_e=1e-6, reference="all_plus", conjugate=True),
}


@dataclass(frozen=True)
class DPOConfig:
    eps_theta: float = 1e-3
    eps_phi: float = 1e-5
    delta_e: float = 1e-3
    max_outer_iters: int = 100
    max_adapt_ops: int = 20
    reference: str = "all_zero"
    conjugate: bool = False
    form: str = "value"
    frozen_phi: tuple = ()
    max_bfgs_iters: int | None = None
    rng_seed: int | None = None

    def __post_init__(self):
        for name in ("eps_theta", "eps_phi", "delta_e"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer_iters < 1 or self.max_adapt_ops < 0:
            raise ValueError("iteration caps must be positive")
        object.__setattr__(self, "frozen_phi", tuple(int(i) for i in self.frozen_phi))

    @classmethod
    def preset(cls, game_kind: str, **overrides) -> "DPOConfig":
        """Per-game defaults: CHSH and NPS share thresholds, coloring games are tighter."""
        return cls(**{**PRESETS.get(game_kind, {}), **overrides})

    def replace(self, **changes) -> "DPOConfig":
        return replace(self, **changes)


@dataclass
class TrialResult:
    energies: list
    strategy: Strategy
    final_energy: float
    converged: bool
    adapt_ops_used: int
    seed: int | None = None
    history: list = field(default_factory=list)


# --- operator pool ---------------------------------------------------------------------


class PauliPool:
    """Pauli words with their permutation/phase actions precomputed."""

    def __init__(self, paulis):
        self.paulis = [p if isinstance(p, PauliString) else PauliString(p) for p in paulis]
        if not self.paulis:
            raise ValueError("operator pool is empty")
        actions = [p._action for p in self.paulis]
        self.perm = np.stack([a[0] for a in actions])
        self.phase = np.stack([a[1] for a in actions])

    @classmethod
    def all_strings(cls, n_qubits: int) -> "PauliPool":
        return cls(all_pauli_strings(n_qubits))

    def __len__(self):
        return len(self.paulis)

    def apply_all(self, psi) -> np.ndarray:
        return self.phase * psi[self.perm]


def pool_gradients(H, psi, pool) -> np.ndarray:
    """``|<psi|[H, P]|psi>|`` for every pool word (the slope of an appended ``exp(i theta P)``)."""
    H = getattr(H, "matrix", H)
    if not isinstance(pool, PauliPool):
        pool = PauliPool(pool)
    hpsi = H @ psi
    overlaps = pool.apply_all(psi) @ hpsi.conj()
    return 2 * np.abs(overlaps.imag)


def _argmax_lowest(values, rtol=1e-10) -> int:
    top = values.max()
    return int(np.flatnonzero(values >= top - rtol * max(1.0, abs(top)))[0])


# --- state phase -----------------------------------------------------------------------------


def ansatz_state(psi0, paulis, thetas) -> np.ndarray:
    psi = psi0
    for p, t in zip(paulis, thetas):
        psi = np.cos(t) * psi + 1j * np.sin(t) * p.apply(psi)
    return psi


def ansatz_energy_and_grad(H, psi0, paulis, thetas):
    """Energy of the ansatz state and its gradient by a reverse sweep."""
    psi = ansatz_state(psi0, paulis, thetas)
    lam = H @ psi
    energy = float(np.vdot(psi, lam).real)
    grad = np.zeros(len(thetas))
    for k in range(len(thetas) - 1, -1, -1):
        p, t = paulis[k], thetas[k]
        grad[k] = 2 * np.real(np.vdot(lam, 1j * p.apply(psi)))
        c, s = np.cos(t), np.sin(t)
        psi = c * psi - 1j * s * p.apply(psi)
        lam = c * lam - 1j * s * p.apply(lam)
    return energy, grad


def _bfgs(fun_and_grad, x0, gtol, maxiter=None):
    """BFGS to ``max|grad| < gtol``; never returns a point worse than ``x0``."""
    x0 = np.asarray(x0, dtype=float)
    f0, g0 = fun_and_grad(x0)
    if not np.isfinite(f0):
        raise FloatingPointError("non-finite energy at the starting point")
    if x0.size == 0 or np.max(np.abs(g0)) < gtol:
        return x0, f0
    options = {"gtol": gtol, "norm": np.inf}
    if maxiter is not None:
        options["maxiter"] = maxiter
    res = minimize(fun_and_grad, x0, jac=True, method="BFGS", options=options)
    if not np.isfinite(res.fun):
        raise FloatingPointError("non-finite energy during BFGS")
    if res.fun > f0:
        return x0, f0
    return res.x, float(res.fun)


@dataclass
class AdaptResult:
    ansatz: list
    thetas: np.ndarray
    energy: float
    converged: bool
    energies: list
    max_gradients: list


def adapt_vqe(
    H,
    config: DPOConfig,
    reference: str | None = None,
    ansatz=(),
    thetas=(),
    pool: PauliPool | None = None,
) -> AdaptResult:
    """Grow an ansatz by the largest pool gradient until it falls below ``eps_theta``.

    Warm-starts from ``ansatz``/``thetas``; existing angles are re-optimized
    first so the returned energy never exceeds the starting energy.
    """
    H = np.asarray(getattr(H, "matrix", H))
    n = n_qubits_of(H[0])
    psi0 = reference_state(reference or config.reference, n)
    pool = pool or PauliPool.all_strings(n)
    ansatz = list(ansatz)
    thetas = np.asarray(thetas, dtype=float)

    def fg(x):
        return ansatz_energy_and_grad(H, psi0, ansatz, x)

    thetas, energy = _bfgs(fg, thetas, config.eps_phi, config.max_bfgs_iters)
    energies, max_grads = [energy], []
    converged = False
    while True:
        psi = ansatz_state(psi0, ansatz, thetas)
        grads = pool_gradients(H, psi, pool)
        max_grads.append(float(grads.max()))
        if grads.max() < config.eps_theta:
            converged = True
            break
        if len(ansatz) >= config.max_adapt_ops:
            logger.info("ADAPT stopped at the operator cap (%d)", config.max_adapt_ops)
            break
        ansatz.append(pool.paulis[_argmax_lowest(grads)])
        thetas, new_energy = _bfgs(fg, np.append(thetas, 0.0), config.eps_phi, config.max_bfgs_iters)
        energy = min(energy, new_energy)
        energies.append(new_energy)
    return AdaptResult(ansatz, thetas, energy, converged, energies, max_grads)


# --- measurement phase ------------------------------------------------------------------------


def _as_objective(game_or_objective, form="value") -> MeasuredObjective:
    if isinstance(game_or_objective, MeasuredObjective):
        return game_or_objective
    return objective_for(game_or_objective, form)


def optimize_phi(game, layer: MeasurementLayer, psi, eps_phi: float, frozen=(), maxiter=None):
    """Descend ``<psi|H(phi)|psi>`` from ``layer.phi``; returns ``(layer, energy)``.

    ``game`` may be a :class:`GameSpec` or a prebuilt objective. ``frozen``
    lists flat indices of ``phi`` held fixed.
    """
    objective = _as_objective(game)
    x_full = layer.phi.ravel().copy()
    free = np.ones(x_full.size, dtype=bool)
    free[list(frozen)] = False

    def fg(x):
        x_full[free] = x
        energy, grad = objective.energy_and_grad(psi, layer.with_phi(x_full))
        return energy, grad.ravel()[free]

    x, energy = _bfgs(fg, x_full[free].copy(), eps_phi, maxiter)
    x_full[free] = x
    return layer.with_phi(x_full), energy


# --- DPO -------------------------------------------------------------------------------------


def dpo(game: GameSpec, layer_kind: str, config: DPOConfig, seed=None, pool=None) -> TrialResult:
    """One trial of dual-phase optimization from a random measurement layer."""
    seed = config.rng_seed if seed is None else seed
    rng = np.random.default_rng(seed)
    objective = objective_for(game, config.form)
    layer = MeasurementLayer.for_game(layer_kind, game, conjugate=config.conjugate, rng=rng)
    if config.frozen_phi:
        phi = layer.phi.ravel().copy()
        phi[list(config.frozen_phi)] = 0.0
        layer = layer.with_phi(phi)
    n = game.n_qubits
    pool = pool or PauliPool.all_strings(n)
    psi0 = reference_state(config.reference, n)

    ansatz, thetas = [], np.zeros(0)
    energy = objective.energy(psi0, layer)
    energies = [energy]
    history = [{"iteration": 0, "phase": "init", "energy": energy, "n_ops": 0}]
    converged = False
    for k in range(1, config.max_outer_iters + 1):
        H = objective.matrix(layer)
        res = adapt_vqe(H, config, config.reference, ansatz, thetas, pool)
        ansatz, thetas = res.ansatz, res.thetas
        psi = ansatz_state(psi0, ansatz, thetas)
        history.append({"iteration": k, "phase": "state", "energy": res.energy, "n_ops": len(ansatz)})
        layer, new_energy = optimize_phi(
            objective, layer, psi, config.eps_phi, config.frozen_phi, config.max_bfgs_iters
        )
        history.append({"iteration": k, "phase": "measurement", "energy": new_energy, "n_ops": len(ansatz)})
        energies.append(new_energy)
        logger.debug("DPO iteration %d: energy %.10f with %d ops", k, new_energy, len(ansatz))
        if energy - new_energy < config.delta_e:
            converged = True
            energy = new_energy
            break
        energy = new_energy

    strategy = Strategy(config.reference, tuple(zip(ansatz, thetas)), layer, n)
    return TrialResult(energies, strategy, energies[-1], converged, len(ansatz), seed, history)


def refine(strategy: Strategy, game, gtol: float = 1e-10, maxiter: int | None = None, frozen=()):
    """Joint BFGS over ansatz angles and measurement parameters with the ansatz fixed.

    Used to polish a converged trial; returns ``(strategy, energy)``.
    """
    objective = _as_objective(game)
    layer = strategy.layer
    paulis = strategy.paulis
    psi0 = reference_state(strategy.reference, strategy.n_qubits)
    n_theta = len(paulis)
    phi_full = layer.phi.ravel().copy()
    free = np.ones(phi_full.size, dtype=bool)
    free[list(frozen)] = False

    def fg(x):
        phi_full[free] = x[n_theta:]
        trial = layer.with_phi(phi_full)
        _, g_theta = ansatz_energy_and_grad(objective.matrix(trial), psi0, paulis, x[:n_theta])
        energy, g_phi = objective.energy_and_grad(ansatz_state(psi0, paulis, x[:n_theta]), trial)
        return energy, np.concatenate([g_theta, g_phi.ravel()[free]])

    x, energy = _bfgs(fg, np.concatenate([strategy.thetas, phi_full[free]]), gtol, maxiter)
    phi_full[free] = x[n_theta:]
    refined = strategy.replace(ansatz=tuple(zip(paulis, x[:n_theta])), layer=layer.with_phi(phi_full))
    return refined, energy


def trial_seeds(seed, n_trials: int) -> list[int]:
    """Independent per-trial seeds derived from one root seed."""
    children = np.random.SeedSequence(seed).spawn(n_trials)
    return [int(c.generate_state(1)[0]) for c in children]


def run_trials(
    game: GameSpec,
    layer_kind: str,
    config: DPOConfig,
    n_trials: int,
    seeds=None,
    n_jobs: int | None = None,
    stop_below: float | None = None,
) -> list[TrialResult]:
    """Independent DPO trials; deterministic given ``config.rng_seed`` or ``seeds``.

    With ``stop_below`` the trials run in order and stop after the first one
    whose final energy is below that value.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    seeds = list(seeds) if seeds is not None else trial_seeds(config.rng_seed, n_trials)
    pool = PauliPool.all_strings(game.n_qubits)
    if stop_below is not None or not n_jobs or n_jobs == 1:
        results = []
        for s in seeds[:n_trials]:
            results.append(dpo(game, layer_kind, config, seed=s, pool=pool))
            if stop_below is not None and results[-1].final_energy < stop_below:
                break
        return results
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(
        delayed(dpo)(game, layer_kind, config, seed=s) for s in seeds[:n_trials]
    )


def best_trial(results) -> TrialResult:
    return min(results, key=lambda r: r.final_energy)


def prune_gates(strategy: Strategy, threshold: float = 1e-4, game: GameSpec | None = None) -> Strategy:
    """Drop ansatz rotations with ``|theta| < threshold``.

    When ``game`` is given, the value-Hamiltonian energy is checked to move by
    less than ``10 * threshold``.
    """
    kept = tuple((p, t) for p, t in strategy.ansatz if abs(t) >= threshold)
    pruned = strategy.replace(ansatz=kept)
    if game is not None and strategy.layer is not None:
        objective = objective_for(game)
        before = objective.energy(strategy.state(), strategy.layer)
        after = objective.energy(pruned.state(), pruned.layer)
        if abs(after - before) >= 10 * threshold:
            raise RuntimeError(f"pruning moved the energy by {abs(after - before):.3g}")
    return pruned


# --- gradient estimators ------------------------------------------------------------------------


SHIFT = np.pi / 2


def parameter_shift_gradient(objective: MeasuredObjective, layer: MeasurementLayer, psi) -> np.ndarray:
    """Exact gradient from ``[f(x + pi/2) - f(x - pi/2)] / 2`` per gate parameter.

    A parameter shared through the conjugate constraint drives two gates;
    each occurrence is shifted on its own and the results summed.
    """
    full = layer.expanded()
    x = full.phi.ravel()
    grad = np.zeros(x.size)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += SHIFT
        xm[i] -= SHIFT
        grad[i] = (objective.energy(psi, full.with_phi(xp)) - objective.energy(psi, full.with_phi(xm))) / 2
    return layer.fold_gradient(grad.reshape(full.phi.shape))


def shot_gradient(objective, layer: MeasurementLayer, psi, shots: int, rng_seed=None):
    """Parameter-shift gradient with each shifted expectation estimated from ``shots`` rounds.

    Returns ``(gradient, executions)`` where ``executions`` counts circuit runs:
    two shifted settings per gate parameter, ``shots`` runs each.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    objective = _as_objective(objective)
    rng = np.random.default_rng(rng_seed)
    full = layer.expanded()
    x = full.phi.ravel()
    grad = np.zeros(x.size)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += SHIFT
        xm[i] -= SHIFT
        fp = objective.sample_energy(psi, full.with_phi(xp), shots, rng)
        fm = objective.sample_energy(psi, full.with_phi(xm), shots, rng)
        grad[i] = (fp - fm) / 2
    return layer.fold_gradient(grad.reshape(full.phi.shape)), 2 * x.size * shots
