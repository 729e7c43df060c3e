"""Quantum strategies: a shared state circuit plus a measurement layer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measurement import MeasurementLayer
from .statevector import PauliString, apply_pauli_rotation, reference_state

REFERENCE_STATES = ("all_zero", "all_plus")


@dataclass(frozen=True, eq=False)
class Strategy:
    """``|psi> = prod_j exp(i theta_j P_j) |ref>`` (first entry applied first) with ``layer``."""

    reference: str
    ansatz: tuple = ()
    layer: MeasurementLayer | None = None
    n_qubits: int = field(default=0)

    def __post_init__(self):
        if self.reference not in REFERENCE_STATES:
            raise ValueError(f"unknown reference state {self.reference!r}")
        ansatz = tuple(
            (p if isinstance(p, PauliString) else PauliString(p), float(t)) for p, t in self.ansatz
        )
        if any(not np.isfinite(t) for _, t in ansatz):
            raise ValueError("ansatz angles must be finite")
        n = self.n_qubits
        if not n and self.layer is not None:
            n = self.layer.n_players * self.layer.qubits
        if not n and ansatz:
            n = ansatz[0][0].n_qubits
        if any(p.n_qubits != n for p, _ in ansatz):
            raise ValueError("ansatz words must span the whole register")
        object.__setattr__(self, "ansatz", ansatz)
        object.__setattr__(self, "n_qubits", n)

    @property
    def paulis(self) -> list[PauliString]:
        return [p for p, _ in self.ansatz]

    @property
    def thetas(self) -> np.ndarray:
        return np.array([t for _, t in self.ansatz], dtype=float)

    def state(self) -> np.ndarray:
        psi = reference_state(self.reference, self.n_qubits)
        for pauli, theta in self.ansatz:
            psi = apply_pauli_rotation(psi, pauli, theta)
        return psi

    def replace(self, **changes) -> "Strategy":
        kw = dict(reference=self.reference, ansatz=self.ansatz, layer=self.layer, n_qubits=self.n_qubits)
        kw.update(changes)
        return Strategy(**kw)
