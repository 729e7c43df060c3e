"""Gate-level circuits for strategies and OpenQASM export."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .games import GameSpec
from .statevector import PauliString, apply_gate, apply_pauli_rotation, reference_state, zero_state
from .strategy import Strategy


class Gate(NamedTuple):
    name: str
    qubits: tuple
    params: tuple = ()


def pauli_rotation_gates(pauli: PauliString | str, theta: float) -> list[Gate]:
    """``exp(i theta P)`` as basis change, CNOT ladder, ``Rz(-2 theta)`` and the inverse."""
    pauli = pauli if isinstance(pauli, PauliString) else PauliString(pauli)
    support = pauli.support
    if not support:
        return []
    change, undo = [], []
    for q in support:
        letter = pauli.word[q]
        if letter == "X":
            change.append(Gate("h", (q,)))
            undo.append(Gate("h", (q,)))
        elif letter == "Y":
            change += [Gate("sdg", (q,)), Gate("h", (q,))]
            undo += [Gate("h", (q,)), Gate("s", (q,))]
    ladder = [Gate("cx", (a, b)) for a, b in zip(support, support[1:])]
    core = ladder + [Gate("rz", (support[-1],), (-2.0 * theta,))] + ladder[::-1]
    return change + core + undo


def preparation_gates(reference: str, n_qubits: int) -> list[Gate]:
    if reference == "all_plus":
        return [Gate("h", (q,)) for q in range(n_qubits)]
    if reference == "all_zero":
        return []
    raise ValueError(f"unknown reference state {reference!r}")


def ansatz_gates(strategy: Strategy) -> list[Gate]:
    out = []
    for pauli, theta in strategy.ansatz:
        out += pauli_rotation_gates(pauli, theta)
    return out


def measurement_gates(strategy: Strategy, game: GameSpec, question) -> list[Gate]:
    """Each player's measurement-layer gates for a joint question, on global qubits."""
    layer = strategy.layer
    question = tuple(question)
    if question not in set(game.questions):
        raise KeyError(f"{question} is not a question of {game.name}")
    out = []
    for player, qubits in enumerate(game.register_slices()):
        idx = game.question_index(player)[question[player]]
        for name, local, params in layer.gates(player, idx):
            out.append(Gate(name, tuple(qubits[q] for q in local), tuple(params)))
    return out


def question_circuit(strategy: Strategy, game: GameSpec, question, compile_ansatz: bool = True) -> list:
    """Full gate list for one question. With ``compile_ansatz=False`` the ansatz
    rotations appear as ``("pauli", word, theta)`` pseudo-gates."""
    n = strategy.n_qubits
    gates = preparation_gates(strategy.reference, n)
    if compile_ansatz:
        gates += ansatz_gates(strategy)
    else:
        gates += [Gate("pauli", (), (str(p), t)) for p, t in strategy.ansatz]
    gates += measurement_gates(strategy, game, question)
    return gates


def run_gates(gates, psi) -> np.ndarray:
    for g in gates:
        if g.name == "pauli":
            psi = apply_pauli_rotation(psi, g.params[0], g.params[1])
        else:
            psi = apply_gate(psi, g.name, g.qubits, g.params)
    return psi


def simulate_question(strategy: Strategy, game: GameSpec, question) -> np.ndarray:
    """Final state of the compiled circuit (before measurement)."""
    return run_gates(question_circuit(strategy, game, question), zero_state(strategy.n_qubits))


def _fmt(x: float) -> str:
    return repr(float(x))


def to_qasm(gates, n_qubits: int) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{n_qubits}];", f"creg c[{n_qubits}];"]
    for g in gates:
        args = ",".join(f"q[{q}]" for q in g.qubits)
        if g.params:
            lines.append(f"{g.name}({','.join(_fmt(p) for p in g.params)}) {args};")
        else:
            lines.append(f"{g.name} {args};")
    lines += [f"measure q[{q}] -> c[{q}];" for q in range(n_qubits)]
    return "\n".join(lines) + "\n"


def export_circuit(strategy: Strategy, game: GameSpec, question) -> str:
    return to_qasm(question_circuit(strategy, game, question), strategy.n_qubits)


def initial_state(strategy: Strategy) -> np.ndarray:
    return reference_state(strategy.reference, strategy.n_qubits)
