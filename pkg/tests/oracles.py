"""Reference computations built from dense Kronecker products and brute force.

Nothing here imports the package's simulation code; tests compare the two.
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
LETTERS = {"I": I2, "X": X, "Y": Y, "Z": Z}

YU_OH_RAYS = np.array(
    [
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (0, 1, 1), (0, 1, -1), (1, 0, 1), (1, 0, -1), (1, 1, 0), (1, -1, 0),
        (1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1),
    ],
    dtype=float,
)


def kron(*mats):
    return reduce(np.kron, mats)


def pauli(word: str) -> np.ndarray:
    return kron(*(LETTERS[c] for c in word))


def rotation(word: str, theta: float) -> np.ndarray:
    return expm(1j * theta * pauli(word))


def ry(a):
    return expm(-0.5j * a * Y)


def rz(a):
    return expm(-0.5j * a * Z)


def u3(theta, phi, lam):
    # Rz(phi) Ry(theta) Rz(lam) times the global phase that makes the [0,0] entry real
    return np.exp(0.5j * (phi + lam)) * rz(phi) @ ry(theta) @ rz(lam)


CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def cnot_chain(n):
    out = np.eye(2**n, dtype=complex)
    for q in range(n - 1):
        out = kron(np.eye(2**q), CNOT, np.eye(2 ** (n - q - 2))) @ out
    return out


def layer_unitary(kind: str, params: np.ndarray) -> np.ndarray:
    """Measurement unitary for one question; ``params`` has shape (qubits, params_per_qubit)."""
    n = params.shape[0]
    if kind == "ry":
        return kron(*(ry(p[0]) for p in params))
    if kind == "u3":
        return kron(*(u3(*p[:3]) for p in params))
    if kind == "u3ry":
        first = kron(*(u3(*p[:3]) for p in params))
        last = kron(*(ry(p[3]) for p in params))
        return last @ cnot_chain(n) @ first
    raise ValueError(kind)


def player_unitaries(kind: str, phi: np.ndarray, conjugate: bool) -> list[list[np.ndarray]]:
    """``[player][question] -> unitary`` with Bob's taken as the entrywise conjugate when constrained."""
    alice = [layer_unitary(kind, phi[0, q]) for q in range(phi.shape[1])]
    if conjugate:
        return [alice, [u.conj() for u in alice]]
    return [[layer_unitary(kind, phi[p, q]) for q in range(phi.shape[1])] for p in range(phi.shape[0])]


def beta_dense(game, unitaries) -> np.ndarray:
    """Value operator from per-player projectors, summing over questions and winning answers."""
    dims = [2**k for k in game.qubits_per_player]
    total = np.zeros((np.prod(dims),) * 2, dtype=complex)
    for q, pq in zip(game.questions, game.q_dist):
        us = [unitaries[i][game.player_questions(i).index(q[i])] for i in range(game.n_players)]
        for idx in itertools.product(*(range(len(a)) for a in game.answers_per_player)):
            answer = tuple(game.answers_per_player[i][j] for i, j in enumerate(idx))
            if not game.rule(q, answer):
                continue
            projs = []
            for u, j, d in zip(us, idx, dims):
                e = np.zeros(d)
                e[j] = 1.0
                projs.append(u.conj().T @ np.outer(e, e) @ u)
            total += pq * kron(*projs)
    return total


def chsh_dense(unitaries) -> np.ndarray:
    a = [u.conj().T @ Z @ u for u in unitaries[0]]
    b = [u.conj().T @ Z @ u for u in unitaries[1]]
    return kron(a[0], b[0]) + kron(a[1], b[0]) + kron(a[0], b[1]) - kron(a[1], b[1])


def nps_dense(n: int, unitaries) -> np.ndarray:
    """``-2 S0 + S00/2 - S01 + S11/2 + 2N`` with ``A_x^i = U^dag Z U`` on party ``i``."""

    def local(i, x):
        u = unitaries[i][x]
        return kron(np.eye(2**i), u.conj().T @ Z @ u, np.eye(2 ** (n - i - 1)))

    A = [[local(i, x) for x in (0, 1)] for i in range(n)]
    S0 = sum(A[i][0] for i in range(n))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    S00 = sum(A[i][0] @ A[j][0] for i, j in pairs)
    S01 = sum(A[i][0] @ A[j][1] for i, j in pairs)
    S11 = sum(A[i][1] @ A[j][1] for i, j in pairs)
    return -2 * S0 + 0.5 * S00 - S01 + 0.5 * S11 + 2 * n * np.eye(2**n)


def mutual_information_schmidt(psi: np.ndarray, n_left: int) -> float:
    """Twice the entanglement entropy, from the Schmidt coefficients of a pure state."""
    m = psi.reshape(2**n_left, -1)
    s = np.linalg.svd(m, compute_uv=False) ** 2
    s = s[s > 1e-15]
    return float(-2 * np.sum(s * np.log2(s)))


def best_classical_value(game) -> float:
    """Enumerate every pair of deterministic lookup tables (two players only)."""
    qa, qb = game.player_questions(0), game.player_questions(1)
    aa, ab = game.answers_per_player
    best = 0.0
    for ta in itertools.product(aa, repeat=len(qa)):
        for tb in itertools.product(ab, repeat=len(qb)):
            fa, fb = dict(zip(qa, ta)), dict(zip(qb, tb))
            v = sum(p * game.rule(q, (fa[q[0]], fb[q[1]])) for q, p in zip(game.questions, game.q_dist))
            best = max(best, v)
    return best


def best_edge_rate(n_vertices: int, edges, colors: int) -> float:
    best = 0
    for coloring in itertools.product(range(colors), repeat=n_vertices):
        best = max(best, sum(coloring[u] != coloring[v] for u, v in edges))
    return best / len(edges)


def nps_classical_min(n: int) -> float:
    best = np.inf
    for signs in itertools.product((1, -1), repeat=2 * n):
        a0, a1 = np.array(signs[:n]), np.array(signs[n:])
        S0 = a0.sum()
        S00 = S0**2 - n
        S11 = a1.sum() ** 2 - n
        S01 = sum(a0[i] * a1[j] for i in range(n) for j in range(n) if i != j)
        best = min(best, -2 * S0 + 0.5 * S00 - S01 + 0.5 * S11 + 2 * n)
    return float(best)


def random_state(n_qubits: int, rng) -> np.ndarray:
    v = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return v / np.linalg.norm(v)


def central_difference(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


_ONE_QUBIT = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "x": X, "y": Y, "z": Z,
    "s": np.diag([1, 1j]), "sdg": np.diag([1, -1j]),
}


def embed_one(u, q, n):
    return kron(np.eye(2**q), u, np.eye(2 ** (n - q - 1)))


def embed_cx(c, t, n):
    m = np.zeros((2**n, 2**n))
    for i in range(2**n):
        j = i ^ (1 << (n - 1 - t)) if (i >> (n - 1 - c)) & 1 else i
        m[j, i] = 1
    return m


def gate_dense(name, qubits, params, n):
    if name == "cx":
        return embed_cx(qubits[0], qubits[1], n)
    if name in _ONE_QUBIT:
        return embed_one(_ONE_QUBIT[name], qubits[0], n)
    if name == "ry":
        return embed_one(ry(params[0]), qubits[0], n)
    if name == "rz":
        return embed_one(rz(params[0]), qubits[0], n)
    if name == "u3":
        return embed_one(u3(*params), qubits[0], n)
    raise ValueError(name)


def run_dense(gates, psi, n, error=None):
    """Apply ``gates``; ``error`` (a two-letter word) follows every CX on its two qubits."""
    for g in gates:
        psi = gate_dense(g.name, g.qubits, g.params, n) @ psi
        if g.name == "cx" and error:
            for letter, q in zip(error, g.qubits):
                if letter != "I":
                    psi = embed_one(LETTERS[letter], q, n) @ psi
    return psi
