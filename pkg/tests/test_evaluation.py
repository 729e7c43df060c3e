import csv
import io

import numpy as np
import pytest

from oracles import run_dense
from nlgames.circuits import pauli_rotation_gates, measurement_gates
from nlgames.evaluation import (
    NoiseModel,
    classical_threshold,
    classical_threshold_fraction,
    evaluate_exact,
    evaluate_noisy,
    evaluate_sampled,
    inequality_value,
    noisy_probabilities,
    parse_question,
    question_label,
    sweep_noise,
)
from nlgames.games import Graph, chsh_game, coloring_game, nps_game
from nlgames.hamiltonian import build_beta
from nlgames.measurement import MeasurementLayer
from nlgames.statevector import zero_state
from nlgames.strategy import Strategy

PAPER_CHSH_PHI = np.array([0.0, -np.pi / 2, np.pi / 4, -np.pi / 4]).reshape(2, 2, 1, 1)


@pytest.fixture
def chsh_optimal():
    return Strategy("all_zero", (("XY", np.pi / 4),), MeasurementLayer("ry", PAPER_CHSH_PHI, 2))


def test_exact_value_matches_beta(g14, k3):
    for game, kind in ((g14, "u3ry"), (k3, "u3")):
        layer = MeasurementLayer.for_game(kind, game, conjugate=True, rng=3)
        strat = Strategy("all_plus", (("XIYZ", 0.4), ("ZZYI", -1.1))[: 2 if game is g14 else 0], layer)
        report = evaluate_exact(strat, game)
        beta = build_beta(game, layer).expectation(strat.state())
        assert report.overall_value == pytest.approx(beta, abs=1e-10)
        assert report.overall_value == pytest.approx(
            sum(p * report.per_question[q] for q, p in zip(game.questions, game.q_dist)), abs=1e-12
        )


def test_chsh_optimal_value(chsh, chsh_optimal):
    report = evaluate_exact(chsh_optimal, chsh)
    assert report.overall_value == pytest.approx((2 + np.sqrt(2)) / 4, abs=1e-9)
    assert report.inequality_value == pytest.approx(2 * np.sqrt(2), abs=1e-9)
    assert inequality_value(chsh_optimal, "chsh") == pytest.approx(2 * np.sqrt(2), abs=1e-4)


def test_identity_strategy_wins_vertex_questions(g14):
    layer = MeasurementLayer.for_game("u3ry", g14, conjugate=True, init="zeros")
    report = evaluate_exact(Strategy("all_zero", (), layer), g14)
    assert report.vertex_rate == 1.0
    assert all(report.per_question[(v, v)] == 1.0 for v in range(14))
    assert report.edge_rate == 0.0


def test_shipped_strategy_is_perfect(g14_strategy):
    strategy, game = g14_strategy
    report = evaluate_exact(strategy, game)
    assert len(report.per_question) == 88
    assert min(report.per_question.values()) == pytest.approx(1.0, abs=1e-9)


def test_sampled_reports(g14_strategy):
    strategy, game = g14_strategy
    a = evaluate_sampled(strategy, game, 1000, rng_seed=5)
    b = evaluate_sampled(strategy, game, 1000, rng_seed=5)
    assert a.per_question == b.per_question
    assert all(r == 1.0 for r in a.per_question.values())
    assert all(e <= 0.5 / np.sqrt(1000) for e in a.stderr.values())
    with pytest.raises(ValueError):
        evaluate_sampled(strategy, game, 0)


def test_sampled_rates_within_three_sigma(chsh, chsh_optimal):
    exact = evaluate_exact(chsh_optimal, chsh).per_question
    sampled = evaluate_sampled(chsh_optimal, chsh, 20000, rng_seed=1)
    for q, r in exact.items():
        sigma = np.sqrt(r * (1 - r) / 20000)
        assert abs(sampled.per_question[q] - r) <= 3 * sigma


def test_global_phase_invariance(chsh, chsh_optimal):
    base = evaluate_exact(chsh_optimal, chsh).per_question
    shifted = chsh_optimal.replace(ansatz=chsh_optimal.ansatz + (("II", 0.7),))
    assert evaluate_exact(shifted, chsh).per_question == pytest.approx(base)


def test_shape_mismatch(chsh, k3):
    layer = MeasurementLayer.for_game("ry", chsh, rng=0)
    with pytest.raises(ValueError):
        evaluate_exact(Strategy("all_zero", (), layer), k3)
    with pytest.raises(ValueError):
        evaluate_exact(Strategy("all_zero", (), None, 2), chsh)


def test_nps_inequality_at_the_trivial_point():
    game = nps_game(6)
    layer = MeasurementLayer.for_game("ry", game, init="zeros")
    assert inequality_value(Strategy("all_zero", (), layer), "nps") == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        inequality_value(Strategy("all_zero", (), layer), "coloring")
    with pytest.raises(ValueError):
        evaluate_sampled(Strategy("all_zero", (), layer), game, 10)


def test_noise_free_trajectories_match_exact(g14_strategy):
    strategy, game = g14_strategy
    report = evaluate_noisy(strategy, game, NoiseModel(0.0), trajectories=5, rng_seed=0)
    assert report.overall_value == pytest.approx(1.0, abs=1e-9)
    assert report.noise["p_err"] == 0.0


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(1.5)
    with pytest.raises(ValueError):
        NoiseModel(0.1, ("II",))
    with pytest.raises(ValueError):
        NoiseModel(0.1, ("XYZ",))
    assert len(NoiseModel(0.1).paulis) == 15


def test_certain_xx_error_matches_dense_oracle():
    # a phase rotation on Alice's register compiles to a CX ladder she alone runs
    game = coloring_game(Graph.from_edges(2, [(0, 1)]), 4)
    layer = MeasurementLayer.for_game("u3ry", game, conjugate=True, init="zeros")
    strat = Strategy("all_zero", (("ZZII", 0.3),), layer)
    assert evaluate_exact(strat, game).vertex_rate == 1.0
    noise = NoiseModel(1.0, ("XX",))
    for q in game.questions:
        gates = pauli_rotation_gates("ZZII", 0.3) + measurement_gates(strat, game, q)
        ref = np.abs(run_dense(gates, zero_state(4), 4, error="XX")) ** 2
        got = noisy_probabilities(strat, game, q, noise, 3, np.random.default_rng(0), compile_ansatz=True)
        assert np.allclose(got, ref, atol=1e-12)
    report = evaluate_noisy(strat, game, noise, trajectories=3, rng_seed=0, compile_ansatz=True)
    assert report.vertex_rate < 0.5


def test_sweep_orders_vertex_below_edge(g14_strategy):
    strategy, game = g14_strategy
    rows = sweep_noise(strategy, game, [0.0, 0.05], trajectories=100, rng_seed=2)
    assert rows[0]["vertex_rate"] == pytest.approx(1.0)
    assert rows[1]["vertex_rate"] < rows[1]["edge_rate"] < 1.0
    again = sweep_noise(strategy, game, [0.0, 0.05], trajectories=100, rng_seed=2)
    assert rows == again


def test_noisy_shots_mode(g14_strategy):
    strategy, game = g14_strategy
    report = evaluate_noisy(strategy, game, NoiseModel(0.02), trajectories=20, shots=64, rng_seed=1)
    assert report.shots_per_question == 64
    assert all(0.0 <= r <= 1.0 for r in report.per_question.values())


def test_csv_is_rfc4180(k3):
    layer = MeasurementLayer.for_game("u3", k3, init="zeros")
    text = evaluate_exact(Strategy("all_zero", (), layer), k3).to_csv()
    assert text.endswith("\r\n")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["question", "category", "win_rate", "stderr"]
    assert len(rows) == 1 + len(k3.questions)
    assert rows[1][:2] == ["0-0", "vertex"]


def test_question_labels(g14):
    assert question_label((3, 13)) == "3-13"
    assert parse_question("3-13", g14) == (3, 13)
    with pytest.raises(KeyError):
        parse_question("3-5", g14)


def test_classical_thresholds(g14, k3, c5):
    assert classical_threshold_fraction(g14).numerator == 36
    assert classical_threshold_fraction(g14).denominator == 37
    assert classical_threshold(k3) == 1.0
    assert classical_threshold(c5) == pytest.approx(4 / 5)
    with pytest.raises(ValueError):
        classical_threshold(chsh_game())
