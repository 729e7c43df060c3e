"""Game operators built from rule functions and measurement layers.

Every operator here has the measured form

    H(phi) = c * I + sum_k w_k U_k(phi)^dagger diag(D_k) U_k(phi)

where ``U_k`` is the tensor product of the players' unitaries for joint
setting ``k``. :class:`MeasuredObjective` keeps that form so energies,
gradients and shot estimates never need the dense matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import GameSpec
from .measurement import MeasurementLayer

OPERATOR_KINDS = ("beta", "value_hamiltonian", "violation_hamiltonian", "inequality")


@dataclass(frozen=True, eq=False)
class GameOperator:
    matrix: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be a square matrix")
        if np.max(np.abs(m - m.conj().T), initial=0.0) >= 1e-12:
            raise ValueError("operator is not Hermitian")
        if self.kind == "beta":
            evals = np.linalg.eigvalsh(m)
            if evals[0] < -1e-10 or evals[-1] > 1 + 1e-10:
                raise ValueError("value operator eigenvalues leave [0, 1]")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, psi) -> float:
        from .statevector import expectation

        return expectation(psi, self.matrix)


class MeasuredObjective:
    """``H(phi)`` in measured form over the joint settings of a game."""

    def __init__(self, settings, weights, diags, offset: float, qubits_per_player, kind: str):
        self.settings = np.asarray(settings, dtype=int)
        self.weights = np.asarray(weights, dtype=float)
        self.diags = np.asarray(diags, dtype=float)
        self.offset = float(offset)
        self.qubits_per_player = tuple(qubits_per_player)
        self.kind = kind
        self.dims = tuple(2**k for k in self.qubits_per_player)
        self.dim = int(np.prod(self.dims))
        if self.settings.shape != (len(self.weights), len(self.dims)):
            raise ValueError("settings must be (n_settings, n_players)")
        if self.diags.shape != (len(self.weights), self.dim):
            raise ValueError("diagonals must be (n_settings, 2**n_qubits)")

    @property
    def n_players(self) -> int:
        return len(self.dims)

    def scaled(self, factor: float, offset: float, kind: str) -> "MeasuredObjective":
        return MeasuredObjective(
            self.settings, factor * self.weights, self.diags,
            factor * self.offset + offset, self.qubits_per_player, kind,
        )

    # --- dense -------------------------------------------------------------------

    def matrix(self, layer: MeasurementLayer) -> np.ndarray:
        mats = layer.player_unitaries()
        out = self.offset * np.eye(self.dim, dtype=complex)
        for setting, w, d in zip(self.settings, self.weights, self.diags):
            u = np.array([[1.0 + 0j]])
            for player, qi in enumerate(setting):
                u = np.kron(u, mats[player, qi])
            out += w * (u.conj().T * d) @ u
        return (out + out.conj().T) / 2

    def operator(self, layer: MeasurementLayer) -> GameOperator:
        return GameOperator(self.matrix(layer), self.kind)

    # --- statevector paths ---------------------------------------------------------

    def rotated_states(self, psi, unitaries) -> np.ndarray:
        """``U_k psi`` for every setting, shape ``(n_settings, d_1, ..., d_N)``."""
        k = len(self.weights)
        x = np.broadcast_to(np.asarray(psi, dtype=complex).reshape(self.dims), (k,) + self.dims)
        for player in range(self.n_players):
            u = unitaries[player][self.settings[:, player]]
            x = np.moveaxis(x, player + 1, -1)
            x = np.einsum("kab,k...b->k...a", u, x)
            x = np.moveaxis(x, -1, player + 1)
        return x

    def setting_energies(self, psi, layer: MeasurementLayer) -> np.ndarray:
        chi = self.rotated_states(psi, layer.player_unitaries()).reshape(len(self.weights), -1)
        return np.einsum("kd,kd->k", np.abs(chi) ** 2, self.diags)

    def energy(self, psi, layer: MeasurementLayer) -> float:
        return float(self.offset + self.weights @ self.setting_energies(psi, layer))

    def energy_and_grad(self, psi, layer: MeasurementLayer):
        """Energy and its analytic gradient with respect to ``layer.phi``."""
        src_u = layer.source_unitaries()
        src_jac = layer.source_jacobians()
        unitaries = layer.player_unitaries()
        n_set = len(self.weights)
        chi = self.rotated_states(psi, unitaries)
        flat = chi.reshape(n_set, -1)
        energy = self.offset + self.weights @ np.einsum("kd,kd->k", np.abs(flat) ** 2, self.diags)
        lam = (self.diags * flat).reshape(chi.shape)

        grad = np.zeros(layer.phi.shape)
        for player in range(self.n_players):
            slot, conj = layer.source_slot(player)
            a = np.moveaxis(chi, player + 1, -1).reshape(n_set, -1, self.dims[player])
            b = np.moveaxis(lam, player + 1, -1).reshape(n_set, -1, self.dims[player])
            m = np.einsum("krb,kra->kba", a, b.conj())
            onehot = np.zeros((n_set, layer.n_questions))
            onehot[np.arange(n_set), self.settings[:, player]] = self.weights
            g = np.einsum("kq,kba->qba", onehot, m)
            u = src_u[slot].conj() if conj else src_u[slot]
            jac = src_jac[slot].conj() if conj else src_jac[slot]
            gen = jac @ u.conj().swapaxes(-1, -2)[:, None, None]
            grad[slot] += 2 * np.real(np.einsum("qjpab,qba->qjp", gen, g))
        return float(energy), grad

    # --- sampling --------------------------------------------------------------------

    def sample_energy(self, psi, layer: MeasurementLayer, shots: int, rng) -> float:
        """Unbiased single-round estimator averaged over ``shots`` rounds.

        Each round draws a setting with probability proportional to ``|w_k|``,
        samples an outcome by the Born rule and records ``w_k / pi_k * D_k[a]``.
        """
        if shots < 1:
            raise ValueError("shots must be at least 1")
        rng = np.random.default_rng(rng)
        chi = self.rotated_states(psi, layer.player_unitaries()).reshape(len(self.weights), -1)
        probs = np.abs(chi) ** 2
        probs /= probs.sum(axis=1, keepdims=True)
        pick = np.abs(self.weights) / np.abs(self.weights).sum()
        per_setting = rng.multinomial(shots, pick)
        total = 0.0
        for k, n_k in enumerate(per_setting):
            if n_k:
                counts = rng.multinomial(n_k, probs[k])
                total += self.weights[k] / pick[k] * (counts @ self.diags[k])
        return self.offset + total / shots


# --- builders ----------------------------------------------------------------------------


def _settings_for(game: GameSpec, questions) -> np.ndarray:
    index = [game.question_index(i) for i in range(game.n_players)]
    return np.array([[index[i][q[i]] for i in range(game.n_players)] for q in questions])


def beta_objective(game: GameSpec) -> MeasuredObjective:
    """Value operator in measured form: settings are the joint questions, weights ``p(q)``."""
    if game.inequality_only:
        raise ValueError(f"{game.name} is inequality-only; use its inequality operator")
    diags = np.array([game.rule_vector(q) for q in game.questions])
    return MeasuredObjective(
        _settings_for(game, game.questions), game.q_dist, diags, 0.0, game.qubits_per_player, "beta"
    )


def hamiltonian_objective(game: GameSpec, form: str = "value") -> MeasuredObjective:
    beta = beta_objective(game)
    if form == "value":
        return beta.scaled(-1.0, 0.0, "value_hamiltonian")
    if form == "violation":
        return beta.scaled(-1.0, 1.0, "violation_hamiltonian")
    raise ValueError(f"unknown Hamiltonian form {form!r}")


def _check_layer(game: GameSpec, layer: MeasurementLayer):
    if layer.n_players != game.n_players:
        raise ValueError("layer and game disagree on the number of players")
    if set(game.qubits_per_player) != {layer.qubits}:
        raise ValueError("layer and game disagree on register sizes")
    if layer.n_questions < max(len(game.player_questions(i)) for i in range(game.n_players)):
        raise ValueError("layer has fewer questions than the game")


def build_beta(game: GameSpec, layer: MeasurementLayer) -> GameOperator:
    """Dense value operator whose expectation on any state is the game value."""
    _check_layer(game, layer)
    return beta_objective(game).operator(layer)


def build_hamiltonian(beta: GameOperator, form: str = "value") -> GameOperator:
    """``-beta`` (value form) or ``I - beta`` (violation form)."""
    if beta.kind != "beta":
        raise ValueError(f"expected a beta operator, got {beta.kind!r}")
    if form == "value":
        return GameOperator(-beta.matrix, "value_hamiltonian")
    if form == "violation":
        return GameOperator(np.eye(beta.dim) - beta.matrix, "violation_hamiltonian")
    raise ValueError(f"unknown Hamiltonian form {form!r}")


def _zz_diag(n_qubits: int, i: int, j: int) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    zi = 1 - 2 * ((idx >> (n_qubits - 1 - i)) & 1)
    zj = 1 - 2 * ((idx >> (n_qubits - 1 - j)) & 1)
    return (zi * zj).astype(float)


def _z_diag(n_qubits: int, i: int) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    return (1 - 2 * ((idx >> (n_qubits - 1 - i)) & 1)).astype(float)


def chsh_objective() -> MeasuredObjective:
    """``A0B0 + A1B0 + A0B1 - A1B1`` with ``A_q = U_q^dagger Z U_q``."""
    settings = [(0, 0), (1, 0), (0, 1), (1, 1)]
    weights = [1.0, 1.0, 1.0, -1.0]
    diags = np.tile(_zz_diag(2, 0, 1), (4, 1))
    return MeasuredObjective(settings, weights, diags, 0.0, (1, 1), "inequality")


def nps_objective(n: int) -> MeasuredObjective:
    """``-2 S_0 + S_00/2 - S_01 + S_11/2 + 2N`` over single-qubit dichotomic players."""
    if n < 2:
        raise ValueError("NPS needs at least 2 players")
    pair_sum = sum(_zz_diag(n, i, j) for i in range(n) for j in range(n) if i != j)
    settings = [[0] * n, [1] * n]
    weights = [1.0, 1.0]
    diags = [-2 * sum(_z_diag(n, i) for i in range(n)) + 0.5 * pair_sum, 0.5 * pair_sum]
    for i in range(n):
        for j in range(n):
            if i != j:
                s = [0] * n
                s[j] = 1
                settings.append(s)
                weights.append(-1.0)
                diags.append(_zz_diag(n, i, j))
    return MeasuredObjective(settings, weights, np.array(diags), 2.0 * n, (1,) * n, "inequality")


def chsh_inequality_operator(layer: MeasurementLayer) -> GameOperator:
    if layer.n_players != 2 or layer.qubits != 1 or layer.n_questions < 2:
        raise ValueError("CHSH needs two single-qubit players with two questions each")
    return chsh_objective().operator(layer)


def nps_inequality_operator(n: int, layer: MeasurementLayer) -> GameOperator:
    if layer.n_players != n or layer.qubits != 1 or layer.n_questions < 2:
        raise ValueError(f"NPS-{n} needs {n} single-qubit players with two questions each")
    return nps_objective(n).operator(layer)


def objective_for(game: GameSpec, form: str = "value") -> MeasuredObjective:
    """Default DPO objective: the inequality for NPS, otherwise the value/violation Hamiltonian."""
    if game.kind == "nps":
        return nps_objective(game.n_players)
    return hamiltonian_objective(game, form)


def inequality_objective(game: GameSpec) -> MeasuredObjective:
    if game.kind == "chsh":
        return chsh_objective()
    if game.kind == "nps":
        return nps_objective(game.n_players)
    raise ValueError(f"no inequality defined for game kind {game.kind!r}")
