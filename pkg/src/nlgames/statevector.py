"""Dense statevector simulation for small registers.

Conventions: qubit 0 is the leftmost letter of a Pauli word and the most
significant bit of a basis label.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

MAX_QUBITS = 12
NORM_ATOL = 1e-10
ENTROPY_FLOOR = 1e-12

PAULI_LETTERS = "IXYZ"

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """A Pauli word such as ``"YIZI"``."""

    word: str

    def __post_init__(self):
        word = self.word.upper()
        if not word or any(ch not in PAULI_LETTERS for ch in word):
            raise ValueError(f"invalid Pauli word {self.word!r}")
        object.__setattr__(self, "word", word)

    def __str__(self):
        return self.word

    def __len__(self):
        return len(self.word)

    @property
    def n_qubits(self) -> int:
        return len(self.word)

    @property
    def is_identity(self) -> bool:
        return set(self.word) == {"I"}

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.word) if ch != "I")

    @cached_property
    def _action(self) -> tuple[np.ndarray, np.ndarray]:
        # P|b> = phase[b] |b ^ xmask>
        n = self.n_qubits
        idx = np.arange(2**n)
        xmask = 0
        phase = np.ones(2**n, dtype=complex)
        for q, ch in enumerate(self.word):
            bit = (idx >> (n - 1 - q)) & 1
            if ch in "XY":
                xmask |= 1 << (n - 1 - q)
            if ch == "Y":
                phase *= np.where(bit == 0, 1j, -1j)
            elif ch == "Z":
                phase *= np.where(bit == 0, 1.0, -1.0)
        perm = idx ^ xmask
        # (P psi)[j] = phase[j ^ x] * psi[j ^ x]
        return perm, phase[perm]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Return ``P @ psi`` without building the matrix."""
        perm, phase = self._action
        return phase * psi[..., perm]

    def matrix(self) -> np.ndarray:
        out = np.array([[1.0 + 0j]])
        for ch in self.word:
            out = np.kron(out, _PAULI_MATRICES[ch])
        return out


def all_pauli_strings(n_qubits: int) -> list[PauliString]:
    """All ``4**n - 1`` non-identity words in lexicographic I<X<Y<Z order."""
    from itertools import product

    words = ("".join(p) for p in product(PAULI_LETTERS, repeat=n_qubits))
    return [PauliString(w) for w in words if set(w) != {"I"}]


def n_qubits_of(psi: np.ndarray) -> int:
    dim = psi.shape[-1]
    n = int(dim).bit_length() - 1
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
    return n


def check_state(psi, atol: float = NORM_ATOL) -> np.ndarray:
    """Validate a normalized statevector and return it as a complex array."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("statevector must be one-dimensional")
    n_qubits_of(psi)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"statevector norm {norm:.3g} differs from 1")
    return psi


def basis_state(bits: str | Sequence[int]) -> np.ndarray:
    bits = [int(b) for b in bits]
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int("".join(map(str, bits)), 2) if bits else 0] = 1.0
    return psi


def zero_state(n_qubits: int) -> np.ndarray:
    return basis_state([0] * n_qubits)


def plus_state(n_qubits: int) -> np.ndarray:
    return np.full(2**n_qubits, 2 ** (-n_qubits / 2), dtype=complex)


def reference_state(tag: str, n_qubits: int) -> np.ndarray:
    if tag == "all_zero":
        return zero_state(n_qubits)
    if tag == "all_plus":
        return plus_state(n_qubits)
    raise ValueError(f"unknown reference state {tag!r}")


def apply_pauli_rotation(psi: np.ndarray, pauli: PauliString | str, theta: float) -> np.ndarray:
    """Apply ``exp(i theta P)``, i.e. ``cos(theta) psi + i sin(theta) P psi``."""
    if not isinstance(pauli, PauliString):
        pauli = PauliString(pauli)
    psi = np.asarray(psi, dtype=complex)
    if pauli.n_qubits != n_qubits_of(psi):
        raise ValueError(
            f"Pauli word of length {pauli.n_qubits} applied to {n_qubits_of(psi)} qubits"
        )
    return np.cos(theta) * psi + 1j * np.sin(theta) * pauli.apply(psi)


# --- single- and two-qubit gates -------------------------------------------------


def ry(phi) -> np.ndarray:
    """``exp(-i phi Y / 2)``; broadcasts over arrays of angles."""
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    out = np.empty(phi.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def ry_deriv(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi / 2) / 2, np.sin(phi / 2) / 2
    out = np.empty(phi.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -s
    out[..., 0, 1] = -c
    out[..., 1, 0] = c
    out[..., 1, 1] = -s
    return out


def u3(theta, phi, lam) -> np.ndarray:
    """General single-qubit gate U3(theta, phi, lambda); broadcasts."""
    theta, phi, lam = np.broadcast_arrays(
        np.asarray(theta, float), np.asarray(phi, float), np.asarray(lam, float)
    )
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -np.exp(1j * lam) * s
    out[..., 1, 0] = np.exp(1j * phi) * s
    out[..., 1, 1] = np.exp(1j * (phi + lam)) * c
    return out


def u3_derivs(theta, phi, lam) -> np.ndarray:
    """Partial derivatives of :func:`u3`, stacked on a new axis before the matrix axes."""
    theta, phi, lam = np.broadcast_arrays(
        np.asarray(theta, float), np.asarray(phi, float), np.asarray(lam, float)
    )
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    el, ep, epl = np.exp(1j * lam), np.exp(1j * phi), np.exp(1j * (phi + lam))
    out = np.zeros(theta.shape + (3, 2, 2), dtype=complex)
    out[..., 0, 0, 0] = -s / 2
    out[..., 0, 0, 1] = -el * c / 2
    out[..., 0, 1, 0] = ep * c / 2
    out[..., 0, 1, 1] = -epl * s / 2
    out[..., 1, 1, 0] = 1j * ep * s
    out[..., 1, 1, 1] = 1j * epl * c
    out[..., 2, 0, 1] = -1j * el * s
    out[..., 2, 1, 1] = 1j * epl * c
    return out


def rz(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(phi.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * phi)
    out[..., 1, 1] = np.exp(0.5j * phi)
    return out


def rx(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    out = np.empty(phi.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -1j * s
    out[..., 1, 0] = -1j * s
    out[..., 1, 1] = c
    return out


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_GATE = np.diag([1, 1j])
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

_FIXED_GATES = {
    "h": HADAMARD,
    "x": _PAULI_MATRICES["X"],
    "y": _PAULI_MATRICES["Y"],
    "z": _PAULI_MATRICES["Z"],
    "s": S_GATE,
    "sdg": S_GATE.conj(),
}


def gate_matrix(name: str, params: Sequence[float] = ()) -> np.ndarray:
    """Matrix of a named gate (lower-case QASM names)."""
    if name in _FIXED_GATES:
        return _FIXED_GATES[name]
    if name == "ry":
        return ry(params[0])
    if name == "rz":
        return rz(params[0])
    if name == "rx":
        return rx(params[0])
    if name == "u3":
        return u3(*params)
    if name == "cx":
        return CNOT
    raise ValueError(f"unknown gate {name!r}")


def apply_matrix(psi: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply a ``2^k x 2^k`` matrix to the listed qubits (first listed = most significant)."""
    n = n_qubits_of(psi)
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"repeated qubit in {qubits}")
    if any(q < 0 or q >= n for q in qubits):
        raise ValueError(f"qubit index out of range in {qubits} for {n} qubits")
    k = len(qubits)
    if matrix.shape != (2**k, 2**k):
        raise ValueError(f"matrix shape {matrix.shape} does not act on {k} qubits")
    tensor = np.asarray(psi, dtype=complex).reshape((2,) * n)
    gate = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(gate, tensor, axes=(list(range(k, 2 * k)), qubits))
    out = np.moveaxis(out, list(range(k)), qubits)
    return out.reshape(-1)


def apply_gate(psi: np.ndarray, gate: str, qubits: Sequence[int], params: Sequence[float] = ()) -> np.ndarray:
    """Apply a named gate: ``ry``, ``u3``, ``cx`` (control, target), ``h``, ``rz``, ..."""
    matrix = gate_matrix(gate, params)
    if gate == "cx" and len(qubits) != 2:
        raise ValueError("cx needs (control, target)")
    return apply_matrix(psi, matrix, qubits)


# --- measurement --------------------------------------------------------------------


def expectation(psi: np.ndarray, operator: np.ndarray, atol: float = 1e-10) -> float:
    """``<psi|M|psi>`` for a Hermitian dense operator."""
    operator = np.asarray(operator)
    if operator.shape != (psi.shape[0], psi.shape[0]):
        raise ValueError("operator and state dimensions differ")
    if not np.allclose(operator, operator.conj().T, atol=1e-12, rtol=0):
        raise ValueError("operator is not Hermitian")
    value = np.vdot(psi, operator @ psi)
    if abs(value.imag) > atol:
        raise ValueError(f"imaginary residue {value.imag:.3g} in expectation")
    return float(value.real)


def probabilities(psi: np.ndarray) -> np.ndarray:
    p = np.abs(psi) ** 2
    return p / p.sum()


def bitstring(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def sample(psi: np.ndarray, shots: int, rng_seed=None) -> dict[str, int]:
    """Born-rule histogram of ``shots`` measurements in the computational basis."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    n = n_qubits_of(psi)
    rng = np.random.default_rng(rng_seed)
    counts = rng.multinomial(shots, probabilities(psi))
    return {bitstring(i, n): int(c) for i, c in enumerate(counts) if c}


# --- entanglement ---------------------------------------------------------------------


def reduced_density_matrix(psi: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    n = n_qubits_of(psi)
    keep = list(keep)
    rest = [q for q in range(n) if q not in keep]
    tensor = np.asarray(psi).reshape((2,) * n).transpose(keep + rest)
    mat = tensor.reshape(2 ** len(keep), 2 ** len(rest))
    return mat @ mat.conj().T


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Base-2 entropy; eigenvalues below the numerical floor count as zero."""
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > ENTROPY_FLOOR]
    return float(-np.sum(evals * np.log2(evals)))


def mutual_information(psi: np.ndarray, cut: tuple[Sequence[int], Sequence[int]]) -> float:
    """``S(A) + S(B) - S(AB)`` in bits for a bipartition ``cut = (A, B)``."""
    n = n_qubits_of(psi)
    part_a, part_b = list(cut[0]), list(cut[1])
    if sorted(part_a + part_b) != list(range(n)):
        raise ValueError(f"cut {cut} does not partition {n} qubits")
    s_a = von_neumann_entropy(reduced_density_matrix(psi, part_a)) if part_a else 0.0
    s_b = von_neumann_entropy(reduced_density_matrix(psi, part_b)) if part_b else 0.0
    # pure joint state: S(AB) = 0 up to the numerical floor
    rho_ab = np.outer(psi, psi.conj())
    s_ab = von_neumann_entropy(rho_ab)
    return s_a + s_b - s_ab
