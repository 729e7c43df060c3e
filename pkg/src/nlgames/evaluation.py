"""Strategy evaluation: exact, sampled and under two-qubit Pauli noise."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circuits import Gate, measurement_gates, pauli_rotation_gates, preparation_gates
from .games import Graph, GameSpec, min_monochromatic_edges
from .hamiltonian import inequality_objective
from .statevector import apply_gate, apply_matrix, apply_pauli_rotation, probabilities, zero_state
from .strategy import Strategy

TWO_QUBIT_PAULIS = tuple(a + b for a in "IXYZ" for b in "IXYZ")[1:]


@dataclass(frozen=True)
class NoiseModel:
    """After every CNOT, with probability ``p_err``, a random non-identity Pauli
    pair drawn uniformly from ``paulis`` hits the gate's two qubits."""

    p_err: float
    paulis: tuple = TWO_QUBIT_PAULIS
    kind: str = "two_qubit_pauli"

    def __post_init__(self):
        if not 0.0 <= self.p_err <= 1.0:
            raise ValueError("p_err must lie in [0, 1]")
        paulis = tuple(p.upper() for p in self.paulis)
        if not paulis or any(len(p) != 2 or set(p) - set("IXYZ") or p == "II" for p in paulis):
            raise ValueError("paulis must be non-identity two-letter words")
        object.__setattr__(self, "paulis", paulis)


@dataclass
class EvaluationReport:
    game: str
    per_question: dict
    overall_value: float | None
    shots_per_question: int | str
    stderr: dict = field(default_factory=dict)
    categories: dict = field(default_factory=dict)
    inequality_value: float | None = None
    vertex_rate: float | None = None
    edge_rate: float | None = None
    noise: dict | None = None

    def category_rate(self, category: str) -> float | None:
        rates = [r for q, r in self.per_question.items() if self.categories.get(q) == category]
        return float(np.mean(rates)) if rates else None

    def category_stderr(self, category: str) -> float | None:
        errs = [self.stderr.get(q, 0.0) for q in self.per_question if self.categories.get(q) == category]
        return float(np.sqrt(np.sum(np.square(errs))) / len(errs)) if errs else None

    def to_dict(self) -> dict:
        return {
            "game": self.game,
            "shots_per_question": self.shots_per_question,
            "overall_value": self.overall_value,
            "inequality_value": self.inequality_value,
            "vertex_rate": self.vertex_rate,
            "edge_rate": self.edge_rate,
            "noise": self.noise,
            "questions": [
                {
                    "question": list(q),
                    "label": question_label(q),
                    "category": self.categories.get(q, "question"),
                    "win_rate": rate,
                    "stderr": self.stderr.get(q, 0.0),
                }
                for q, rate in self.per_question.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["question", "category", "win_rate", "stderr"])
        for row in self.to_dict()["questions"]:
            writer.writerow([row["label"], row["category"], repr(row["win_rate"]), repr(row["stderr"])])
        return buf.getvalue()


def question_label(question) -> str:
    return "-".join(str(x) for x in question)


def parse_question(label: str, game: GameSpec):
    for q in game.questions:
        if question_label(q) == label.strip():
            return q
    raise KeyError(f"{label!r} is not a question of {game.name}")


def _check_shapes(strategy: Strategy, game: GameSpec):
    layer = strategy.layer
    if layer is None:
        raise ValueError("strategy has no measurement layer")
    if strategy.n_qubits != game.n_qubits or layer.n_players != game.n_players:
        raise ValueError("strategy registers do not match the game")
    if set(game.qubits_per_player) != {layer.qubits}:
        raise ValueError("strategy registers do not match the game")


def _measured_state(psi, strategy: Strategy, game: GameSpec, question) -> np.ndarray:
    for player, qubits in enumerate(game.register_slices()):
        idx = game.question_index(player)[question[player]]
        psi = apply_matrix(psi, strategy.layer.unitary(player, idx), qubits)
    return psi


def _category_map(game: GameSpec) -> dict:
    if game.categories is None:
        return {q: "question" for q in game.questions}
    return dict(zip(game.questions, game.categories))


def _finish(game, rates, stderr, shots, inequality=None, noise=None) -> EvaluationReport:
    cats = _category_map(game)
    overall = float(np.clip(sum(p * rates[q] for q, p in zip(game.questions, game.q_dist)), 0.0, 1.0)) if rates else None
    report = EvaluationReport(game.name, rates, overall, shots, stderr, cats, inequality, noise=noise)
    if game.kind == "coloring":
        report.vertex_rate = report.category_rate("vertex")
        report.edge_rate = report.category_rate("edge")
    return report


def _inequality_or_none(strategy, game):
    if game.kind in ("chsh", "nps"):
        return inequality_value(strategy, game.kind)
    return None


def question_probabilities(strategy: Strategy, game: GameSpec) -> dict:
    """Joint answer distribution over register basis states for every question."""
    _check_shapes(strategy, game)
    psi = strategy.state()
    return {q: probabilities(_measured_state(psi, strategy, game, q)) for q in game.questions}


def evaluate_exact(strategy: Strategy, game: GameSpec) -> EvaluationReport:
    """Win rate per question from the Born rule, and the overall game value."""
    _check_shapes(strategy, game)
    rates = {}
    if not game.inequality_only:
        for q, p in question_probabilities(strategy, game).items():
            rates[q] = float(np.clip(p @ game.rule_vector(q), 0.0, 1.0))
    stderr = {q: 0.0 for q in rates}
    return _finish(game, rates, stderr, "exact", _inequality_or_none(strategy, game))


def evaluate_sampled(strategy: Strategy, game: GameSpec, shots: int, rng_seed=None) -> EvaluationReport:
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if game.inequality_only:
        raise ValueError(f"{game.name} has no rule to score samples against")
    rng = np.random.default_rng(rng_seed)
    rates, stderr = {}, {}
    for q, p in question_probabilities(strategy, game).items():
        counts = rng.multinomial(shots, p)
        r = float(counts @ game.rule_vector(q)) / shots
        rates[q] = r
        stderr[q] = float(np.sqrt(r * (1 - r) / shots))
    return _finish(game, rates, stderr, shots, _inequality_or_none(strategy, game))


# --- noise ---------------------------------------------------------------------------------


def _noisy_circuit(strategy: Strategy, game: GameSpec, question, compile_ansatz: bool):
    if compile_ansatz:
        gates = preparation_gates(strategy.reference, strategy.n_qubits)
        for pauli, theta in strategy.ansatz:
            gates += pauli_rotation_gates(pauli, theta)
        start = zero_state(strategy.n_qubits)
    else:
        gates = []
        start = strategy.state()
    gates += measurement_gates(strategy, game, question)
    return start, gates


def _pauli_pair(word: str, qubits, psi):
    for letter, q in zip(word, qubits):
        if letter != "I":
            psi = apply_gate(psi, letter.lower(), (q,))
    return psi


def _run_with_errors(start, gates, errors, paulis):
    psi = start
    site = 0
    for g in gates:
        psi = apply_gate(psi, g.name, g.qubits, g.params)
        if g.name == "cx":
            e = errors[site]
            if e:
                psi = _pauli_pair(paulis[e - 1], g.qubits, psi)
            site += 1
    return psi


def noisy_probabilities(strategy, game, question, noise: NoiseModel, trajectories: int, rng, compile_ansatz=False):
    """Trajectory-averaged outcome distribution for one question."""
    start, gates = _noisy_circuit(strategy, game, question, compile_ansatz)
    n_sites = sum(1 for g in gates if g.name == "cx")
    hit = rng.random((trajectories, n_sites)) < noise.p_err
    which = rng.integers(1, len(noise.paulis) + 1, size=(trajectories, n_sites))
    patterns = np.where(hit, which, 0)
    unique, counts = np.unique(patterns, axis=0, return_counts=True)
    mix = np.zeros(2**strategy.n_qubits)
    for errors, c in zip(unique, counts):
        mix += c * probabilities(_run_with_errors(start, gates, errors, noise.paulis))
    return mix / trajectories


def evaluate_noisy(
    strategy: Strategy,
    game: GameSpec,
    noise: NoiseModel,
    trajectories: int,
    shots: int | None = None,
    rng_seed=None,
    compile_ansatz: bool = False,
) -> EvaluationReport:
    """Monte Carlo Pauli-noise evaluation.

    Each trajectory draws independent errors after every CNOT of the
    measurement layers (and of the compiled ansatz when ``compile_ansatz``).
    With ``shots`` the answers are then sampled from the trajectory mixture;
    without, the mixture itself is scored.
    """
    if trajectories < 1:
        raise ValueError("trajectories must be at least 1")
    if game.inequality_only:
        raise ValueError(f"{game.name} has no rule to score against")
    _check_shapes(strategy, game)
    rng = np.random.default_rng(rng_seed)
    rates, stderr = {}, {}
    for q in game.questions:
        p = noisy_probabilities(strategy, game, q, noise, trajectories, rng, compile_ansatz)
        win = game.rule_vector(q)
        if shots:
            counts = rng.multinomial(shots, p / p.sum())
            r = float(counts @ win) / shots
            n_eff = shots
        else:
            r = float(np.clip(p @ win, 0.0, 1.0))
            n_eff = trajectories
        rates[q] = r
        stderr[q] = float(np.sqrt(r * (1 - r) / n_eff))
    info = {"p_err": noise.p_err, "trajectories": trajectories, "compile_ansatz": compile_ansatz}
    return _finish(game, rates, stderr, shots if shots else "exact", None, info)


def sweep_noise(strategy, game, p_errs, trajectories: int, shots=None, rng_seed=None, compile_ansatz=False):
    """Category win rates across a list of error probabilities."""
    seeds = np.random.SeedSequence(rng_seed).spawn(len(p_errs))
    rows = []
    for p, seed in zip(p_errs, seeds):
        rep = evaluate_noisy(strategy, game, NoiseModel(p), trajectories, shots, seed, compile_ansatz)
        if game.kind == "coloring":
            v, e = rep.vertex_rate, rep.edge_rate
            v_err, e_err = rep.category_stderr("vertex"), rep.category_stderr("edge")
        else:
            v = e = v_err = e_err = None
        mean = float(np.mean(list(rep.per_question.values())))
        err = float(np.sqrt(np.sum(np.square(list(rep.stderr.values())))) / len(rep.stderr))
        rows.append(
            {"p_err": p, "vertex_rate": v, "edge_rate": e, "mean_rate": mean, "stderr": err,
             "vertex_stderr": v_err, "edge_stderr": e_err}
        )
    return rows


# --- inequalities and classical thresholds -------------------------------------------------------


def inequality_value(strategy: Strategy, game_kind) -> float:
    """Expectation of the CHSH or NPS inequality operator on the strategy."""
    kind = getattr(game_kind, "kind", game_kind)
    if kind == "chsh":
        from .games import chsh_game

        game = chsh_game()
    elif kind == "nps":
        from .games import nps_game

        game = nps_game(strategy.layer.n_players)
    else:
        raise ValueError(f"no inequality for game kind {kind!r}")
    _check_shapes(strategy, game)
    return inequality_objective(game).energy(strategy.state(), strategy.layer)


def game_graph(game: GameSpec) -> Graph:
    if game.kind != "coloring":
        raise ValueError("classical thresholds are defined for coloring games")
    return Graph.from_edges(game.params["n_vertices"], game.params["edges"])


def classical_threshold_fraction(game: GameSpec) -> Fraction:
    """Best classical edge win rate among strategies that win every vertex question.

    Winning all vertex questions forces both players onto one coloring, so the
    rate is ``1 - (fewest monochromatic edges) / |E|``, found by exhaustive
    search over colorings.
    """
    graph = game_graph(game)
    if not graph.edges:
        return Fraction(1)
    worst, _ = min_monochromatic_edges(graph, game.params["colors"])
    return 1 - Fraction(worst, len(graph.edges))


def classical_threshold(game: GameSpec) -> float:
    return float(classical_threshold_fraction(game))
