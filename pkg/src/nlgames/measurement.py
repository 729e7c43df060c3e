"""Parameterized measurement layers.

A layer holds a parameter tensor ``phi`` indexed ``(player, question, qubit,
param)``. Players listed in ``conjugate_pairs`` (dependent -> source) have no
slice of their own: their unitary is the entrywise conjugate of the source's.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, reduce

import numpy as np

from .statevector import CNOT, apply_matrix, ry, ry_deriv, u3, u3_derivs

PARAMS_PER_QUBIT = {"ry": 1, "u3": 3, "u3ry": 4}
LAYER_ALIASES = {"ry": "ry", "rylayer": "ry", "u3": "u3", "u3layer": "u3", "u3ry": "u3ry", "u3rylayer": "u3ry"}


def normalize_kind(kind: str) -> str:
    try:
        return LAYER_ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown layer kind {kind!r}; choose from ry, u3, u3ry") from None


def _kron_batched(mats):
    def kron2(a, b):
        out = np.einsum("...ij,...kl->...ikjl", a, b)
        shape = out.shape[:-4] + (a.shape[-2] * b.shape[-2], a.shape[-1] * b.shape[-1])
        return out.reshape(shape)

    return reduce(kron2, mats)


@lru_cache(maxsize=None)
def entangler(n_qubits: int) -> np.ndarray:
    """CNOT chain 0->1, 1->2, ... on a player's register."""
    dim = 2**n_qubits
    out = np.eye(dim, dtype=complex)
    for q in range(n_qubits - 1):
        out = np.stack([apply_matrix(col, CNOT, [q, q + 1]) for col in out.T], axis=1)
    return out


@dataclass(frozen=True, eq=False)
class MeasurementLayer:
    kind: str
    phi: np.ndarray
    n_players: int
    conjugate_pairs: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = normalize_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        phi = np.array(self.phi, dtype=float)
        if phi.ndim != 4:
            raise ValueError("phi must have shape (players, questions, qubits, params)")
        if phi.shape[3] != PARAMS_PER_QUBIT[kind]:
            raise ValueError(
                f"{kind} layer needs {PARAMS_PER_QUBIT[kind]} params per qubit, got {phi.shape[3]}"
            )
        pairs = {int(k): int(v) for k, v in dict(self.conjugate_pairs).items()}
        for dep, src in pairs.items():
            if dep == src or src in pairs or not (0 <= dep < self.n_players and 0 <= src < self.n_players):
                raise ValueError(f"invalid conjugate pair {dep} -> {src}")
        object.__setattr__(self, "conjugate_pairs", pairs)
        if phi.shape[0] != len(self.independent_players):
            raise ValueError(
                f"phi holds {phi.shape[0]} player slices, expected {len(self.independent_players)}"
            )
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi contains non-finite values")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    # --- construction ----------------------------------------------------------------

    @classmethod
    def for_game(cls, kind, game, conjugate: bool = False, init="random", rng=None):
        """Layer sized for ``game``; ``init`` is ``"random"`` (uniform on [-pi, pi)) or ``"zeros"``."""
        kind = normalize_kind(kind)
        qubits = set(game.qubits_per_player)
        if len(qubits) != 1:
            raise ValueError("measurement layers need equal register sizes per player")
        pairs = {1: 0} if conjugate else {}
        if conjugate and game.n_players != 2:
            raise ValueError("the conjugate constraint is defined for two players")
        n_q = max(len(game.player_questions(i)) for i in range(game.n_players))
        shape = (game.n_players - len(pairs), n_q, qubits.pop(), PARAMS_PER_QUBIT[kind])
        if init == "zeros":
            phi = np.zeros(shape)
        elif init == "random":
            rng = np.random.default_rng(rng)
            phi = rng.uniform(-np.pi, np.pi, size=shape)
        else:
            raise ValueError(f"unknown init {init!r}")
        return cls(kind, phi, game.n_players, pairs)

    def with_phi(self, phi) -> "MeasurementLayer":
        return MeasurementLayer(self.kind, np.reshape(phi, self.phi.shape), self.n_players, self.conjugate_pairs)

    def _conjugation_signs(self) -> np.ndarray:
        # conj(U3(t, p, l)) = U3(t, -p, -l); Ry is real
        signs = np.ones(self.params_per_qubit)
        if self.kind in ("u3", "u3ry"):
            signs[1:3] = -1.0
        return signs

    def expanded(self) -> "MeasurementLayer":
        """Equivalent layer with an explicit slice for every player and no conjugate pairs."""
        signs = self._conjugation_signs()
        slices = []
        for player in range(self.n_players):
            slot, conj = self.source_slot(player)
            slices.append(self.phi[slot] * signs if conj else self.phi[slot])
        return MeasurementLayer(self.kind, np.stack(slices), self.n_players, {})

    def fold_gradient(self, expanded_grad) -> np.ndarray:
        """Map a gradient over :meth:`expanded` parameters back onto ``phi``."""
        signs = self._conjugation_signs()
        grad = np.zeros(self.phi.shape)
        for player in range(self.n_players):
            slot, conj = self.source_slot(player)
            grad[slot] += expanded_grad[player] * signs if conj else expanded_grad[player]
        return grad

    # --- shape -----------------------------------------------------------------------

    @property
    def independent_players(self) -> list[int]:
        return [p for p in range(self.n_players) if p not in self.conjugate_pairs]

    @property
    def n_questions(self) -> int:
        return self.phi.shape[1]

    @property
    def qubits(self) -> int:
        return self.phi.shape[2]

    @property
    def params_per_qubit(self) -> int:
        return self.phi.shape[3]

    @property
    def dim(self) -> int:
        return 2**self.qubits

    @property
    def n_params(self) -> int:
        return self.phi.size

    def source_slot(self, player: int) -> tuple[int, bool]:
        """Index into ``phi`` that drives ``player`` and whether it is conjugated."""
        if not 0 <= player < self.n_players:
            raise IndexError(f"player {player} out of range")
        src = self.conjugate_pairs.get(player, player)
        return self.independent_players.index(src), player in self.conjugate_pairs

    # --- unitaries -------------------------------------------------------------------

    def _parts(self, phi):
        if self.kind == "ry":
            return ry(phi[..., 0]), ry_deriv(phi[..., 0])[..., None, :, :]
        g = u3(phi[..., 0], phi[..., 1], phi[..., 2])
        dg = u3_derivs(phi[..., 0], phi[..., 1], phi[..., 2])
        return g, dg

    def source_unitaries(self, phi=None) -> np.ndarray:
        """Unitaries of the independent slices, shape ``(slots, questions, d, d)``."""
        phi = self.phi if phi is None else np.reshape(phi, self.phi.shape)
        nq = self.qubits
        gates, _ = self._parts(phi)
        first = _kron_batched([gates[..., j, :, :] for j in range(nq)])
        if self.kind != "u3ry":
            return first
        last = _kron_batched([ry(phi[..., j, 3]) for j in range(nq)])
        return last @ entangler(nq) @ first

    def source_jacobians(self, phi=None) -> np.ndarray:
        """``dU/dphi`` for every parameter, shape ``(slots, questions, qubits, params, d, d)``."""
        phi = self.phi if phi is None else np.reshape(phi, self.phi.shape)
        nq = self.qubits
        gates, dgates = self._parts(phi)
        jac = np.zeros(phi.shape + (self.dim, self.dim), dtype=complex)
        n_first = dgates.shape[-3]
        for j in range(nq):
            for p in range(n_first):
                mats = [dgates[..., j, p, :, :] if k == j else gates[..., k, :, :] for k in range(nq)]
                jac[..., j, p, :, :] = _kron_batched(mats)
        if self.kind != "u3ry":
            return jac
        first = _kron_batched([gates[..., j, :, :] for j in range(nq)])
        rys = ry(phi[..., 3])
        drys = ry_deriv(phi[..., 3])
        last = _kron_batched([rys[..., j, :, :] for j in range(nq)])
        ent = entangler(nq)
        jac[..., :3, :, :] = (last @ ent)[..., None, None, :, :] @ jac[..., :3, :, :]
        tail = ent @ first
        for j in range(nq):
            mats = [drys[..., k, :, :] if k == j else rys[..., k, :, :] for k in range(nq)]
            jac[..., j, 3, :, :] = _kron_batched(mats) @ tail
        return jac

    def player_unitaries(self, phi=None) -> np.ndarray:
        """Unitaries for every player, shape ``(players, questions, d, d)``."""
        src = self.source_unitaries(phi)
        out = []
        for player in range(self.n_players):
            slot, conj = self.source_slot(player)
            out.append(src[slot].conj() if conj else src[slot])
        return np.stack(out)

    def unitary(self, player: int, question: int) -> np.ndarray:
        if not 0 <= question < self.n_questions:
            raise IndexError(f"question index {question} out of range")
        slot, conj = self.source_slot(player)
        u = self.source_unitaries()[slot, question]
        return u.conj() if conj else u

    # --- gate lists ------------------------------------------------------------------

    def gates(self, player: int, question: int) -> list[tuple[str, tuple[int, ...], tuple[float, ...]]]:
        """Gate sequence ``(name, local qubits, params)`` realizing :meth:`unitary`."""
        slot, conj = self.source_slot(player)
        if not 0 <= question < self.n_questions:
            raise IndexError(f"question index {question} out of range")
        phi = self.phi[slot, question]
        out = []
        for j in range(self.qubits):
            if self.kind == "ry":
                out.append(("ry", (j,), (float(phi[j, 0]),)))
            else:
                t, p, lam = (float(x) for x in phi[j, :3])
                if conj:
                    p, lam = -p, -lam
                out.append(("u3", (j,), (t, p, lam)))
        if self.kind == "u3ry":
            for j in range(self.qubits - 1):
                out.append(("cx", (j, j + 1), ()))
            for j in range(self.qubits):
                out.append(("ry", (j,), (float(phi[j, 3]),)))
        return out


def measurement_unitary(layer: MeasurementLayer, player: int, question: int) -> np.ndarray:
    """Unitary that ``player`` applies before measuring, for question index ``question``."""
    return layer.unitary(player, question)
