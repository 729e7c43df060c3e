"""Strategy files: JSON with an explicit phi shape and shortest round-trip floats."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .games import GameSpec, game_from_descriptor
from .measurement import MeasurementLayer
from .strategy import Strategy

FORMAT_VERSION = 1


class StrategyFileError(ValueError):
    pass


def _nested(array: np.ndarray):
    # Python floats serialize with repr, the shortest string that parses back bit-exact
    return np.asarray(array, dtype=float).tolist()


def strategy_to_dict(strategy: Strategy, game: GameSpec) -> dict:
    layer = strategy.layer
    if layer is None:
        raise StrategyFileError("strategy has no measurement layer")
    return {
        "format_version": FORMAT_VERSION,
        "game": game.descriptor(),
        "reference": strategy.reference,
        "n_qubits": strategy.n_qubits,
        "ansatz": [{"pauli": str(p), "theta": float(t)} for p, t in strategy.ansatz],
        "layer": {
            "kind": layer.kind,
            "n_players": layer.n_players,
            "conjugate": bool(layer.conjugate_pairs),
            "conjugate_pairs": {str(k): v for k, v in layer.conjugate_pairs.items()},
            "shape": list(layer.phi.shape),
            "phi": _nested(layer.phi),
        },
    }


def strategy_from_dict(data: dict) -> tuple[Strategy, GameSpec]:
    try:
        version = data["format_version"]
        if version != FORMAT_VERSION:
            raise StrategyFileError(f"unsupported format_version {version!r}")
        game = game_from_descriptor(data["game"])
        spec = data["layer"]
        phi = np.array(spec["phi"], dtype=float)
        shape = tuple(int(s) for s in spec["shape"])
        if phi.shape != shape:
            raise StrategyFileError(f"phi has shape {phi.shape}, header declares {shape}")
        pairs = {int(k): int(v) for k, v in spec.get("conjugate_pairs", {}).items()}
        if bool(spec.get("conjugate", False)) != bool(pairs):
            raise StrategyFileError("conjugate flag disagrees with conjugate_pairs")
        layer = MeasurementLayer(spec["kind"], phi, int(spec["n_players"]), pairs)
        ansatz = tuple((op["pauli"], float(op["theta"])) for op in data["ansatz"])
        strategy = Strategy(data["reference"], ansatz, layer, int(data["n_qubits"]))
    except (KeyError, TypeError) as exc:
        raise StrategyFileError(f"malformed strategy file: {exc}") from exc
    if strategy.n_qubits != game.n_qubits or layer.n_players != game.n_players:
        raise StrategyFileError("strategy registers do not match the stored game")
    return strategy, game


def save_strategy(strategy: Strategy, game: GameSpec, path) -> None:
    write_text_atomic(path, json.dumps(strategy_to_dict(strategy, game), indent=2) + "\n")


def load_strategy(path) -> tuple[Strategy, GameSpec]:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StrategyFileError(f"{path}: not valid JSON ({exc})") from exc
    return strategy_from_dict(data)


def load_builtin_strategy(name: str = "g14") -> tuple[Strategy, GameSpec]:
    """Strategy files shipped with the package (currently the perfect G14 strategy)."""
    from importlib import resources

    text = resources.files("nlgames.data").joinpath(f"{name}_strategy.json").read_text(encoding="utf-8")
    return strategy_from_dict(json.loads(text))


def write_text_atomic(path, text: str) -> None:
    """Write through a temporary sibling so a failed run never leaves a partial file."""
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
