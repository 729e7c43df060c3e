"""Command-line interface: ``nlgames {solve,eval,sweep-noise,export-circuit,classical}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .circuits import export_circuit
from .evaluation import (
    NoiseModel,
    classical_threshold_fraction,
    evaluate_exact,
    evaluate_noisy,
    evaluate_sampled,
    parse_question,
    sweep_noise,
)
from .games import (
    BudgetExceededError,
    GameSpec,
    chsh_game,
    classical_brute_force,
    classical_nps_bound,
    coloring_game,
    load_graph,
    nps_game,
)
from .io import StrategyFileError, load_strategy, save_strategy, write_text_atomic
from .measurement import PARAMS_PER_QUBIT
from .optimize import DPOConfig, best_trial, prune_gates, refine, run_trials
from .statevector import mutual_information

class CLIError(Exception):
    """Reported as ``error: ...`` with exit status 2."""


# --- argument helpers ---------------------------------------------------------------------


def _add_game_args(p: argparse.ArgumentParser):
    p.add_argument("game", choices=("chsh", "nps", "coloring"))
    p.add_argument("-N", "--players", type=int, default=6, help="NPS party count (default 6)")
    p.add_argument("--graph", help="edge-list file, or g13 / g14 for the bundled graphs")
    p.add_argument("--colors", type=int, help="colors for the coloring game")
    p.add_argument("--apex", action="store_true", help="add a vertex joined to every other vertex")
    p.add_argument("--qubits-per-player", type=int, help="register size (default: enough for the colors)")


def build_game(args) -> GameSpec:
    if args.game == "chsh":
        return chsh_game()
    if args.game == "nps":
        if args.players < 1:
            raise CLIError("-N must be at least 1")
        return nps_game(args.players)
    if not args.graph or not args.colors:
        raise CLIError("coloring needs --graph and --colors")
    try:
        graph = load_graph(args.graph, add_apex=args.apex)
    except FileNotFoundError as exc:
        raise CLIError(f"graph file not found: {args.graph}") from exc
    return coloring_game(graph, args.colors, args.qubits_per_player)


def _add_config_args(p: argparse.ArgumentParser):
    p.add_argument("--eps-theta", type=float, help="ADAPT pool-gradient threshold")
    p.add_argument("--eps-phi", type=float, help="BFGS gradient threshold")
    p.add_argument("--delta-e", type=float, help="outer convergence tolerance")
    p.add_argument("--max-outer-iters", type=int)
    p.add_argument("--max-adapt-ops", type=int)
    p.add_argument("--reference", choices=("all_zero", "all_plus"))
    conj = p.add_mutually_exclusive_group()
    conj.add_argument("--conjugate", dest="conjugate", action="store_true", default=None)
    conj.add_argument("--no-conjugate", dest="conjugate", action="store_false")
    p.add_argument("--pin", type=int, action="append", default=[], metavar="INDEX",
                   help="hold a flat phi index at 0 (repeatable)")


def build_config(args, game: GameSpec) -> DPOConfig:
    names = ("eps_theta", "eps_phi", "delta_e", "max_outer_iters", "max_adapt_ops", "reference", "conjugate")
    overrides = {k: getattr(args, k) for k in names if getattr(args, k) is not None}
    try:
        return DPOConfig.preset(game.kind, frozen_phi=tuple(args.pin), rng_seed=args.seed, **overrides)
    except ValueError as exc:
        raise CLIError(str(exc)) from exc


def _load(path):
    try:
        return load_strategy(path)
    except FileNotFoundError as exc:
        raise CLIError(f"strategy file not found: {path}") from exc
    except (StrategyFileError, ValueError) as exc:
        raise CLIError(f"{path}: {exc}") from exc


def _emit(text: str, out):
    if out:
        write_text_atomic(out, text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _num(x):
    return repr(float(x)) if x is not None else ""


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


# --- commands -------------------------------------------------------------------------------


def cmd_solve(args) -> int:
    game = build_game(args)
    config = build_config(args, game)
    if args.trials < 1:
        raise CLIError("--trials must be at least 1")
    if game.kind == "coloring" and args.layer is None:
        args.layer = "u3ry"
    layer = args.layer or "ry"
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        raise CLIError(f"--out {out} is not a directory")

    trials = run_trials(game, layer, config, args.trials, n_jobs=args.n_jobs, stop_below=args.stop_below)
    best = best_trial(trials)
    strategy, energy = best.strategy, best.final_energy
    if args.refine:
        strategy, energy = refine(strategy, game, frozen=config.frozen_phi)
    if args.prune is not None:
        strategy = prune_gates(strategy, args.prune, game)
        if args.refine:
            strategy, energy = refine(strategy, game, frozen=config.frozen_phi)

    report = evaluate_exact(strategy, game)
    half = game.register_slices()
    summary = {
        "game": game.descriptor(),
        "layer": strategy.layer.kind,
        "config": {
            "eps_theta": config.eps_theta,
            "eps_phi": config.eps_phi,
            "delta_e": config.delta_e,
            "max_outer_iters": config.max_outer_iters,
            "max_adapt_ops": config.max_adapt_ops,
            "reference": config.reference,
            "conjugate": config.conjugate,
            "pinned": list(config.frozen_phi),
        },
        "seed": args.seed,
        "n_trials": len(trials),
        "final_energies": [t.final_energy for t in trials],
        "converged": [t.converged for t in trials],
        "best_trial": trials.index(best),
        "best_energy": float(energy),
        "value": _finite_or_none(report.overall_value),
        "inequality_value": _finite_or_none(report.inequality_value),
        "n_ops": len(strategy.ansatz),
        "ansatz": [str(p) for p in strategy.paulis],
        "n_phi": int(strategy.layer.phi.size),
        "mutual_information": (
            mutual_information(strategy.state(), (half[0], sum(half[1:], [])))
            if game.n_players == 2 else None
        ),
    }
    rows = [(i, k, repr(float(e))) for i, t in enumerate(trials) for k, e in enumerate(t.energies)]
    out.mkdir(parents=True, exist_ok=True)
    save_strategy(strategy, game, out / "strategy.json")
    write_text_atomic(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    write_text_atomic(out / "trajectories.csv", _csv(["trial", "iteration", "energy"], rows))

    headline = summary["inequality_value"] if game.kind in ("chsh", "nps") else energy
    label = "inequality" if game.kind in ("chsh", "nps") else "energy"
    print(f"{game.name}: best {label} {headline:.6f} over {len(trials)} trial(s); wrote {out}/")
    return 0


def cmd_eval(args) -> int:
    strategy, game = _load(args.strategy)
    try:
        if args.mode == "exact":
            report = evaluate_exact(strategy, game)
        elif args.mode == "shots":
            report = evaluate_sampled(strategy, game, args.shots or 1024, args.seed)
        else:
            noise = NoiseModel(args.p_err)
            report = evaluate_noisy(
                strategy, game, noise, args.trajectories, args.shots, args.seed, args.compile_ansatz
            )
    except ValueError as exc:
        raise CLIError(str(exc)) from exc
    if args.out:
        stem = Path(args.out)
        base = stem.with_suffix("") if stem.suffix in (".json", ".csv") else stem
        json_text, csv_text = report.to_json() + "\n", report.to_csv()
        write_text_atomic(base.with_suffix(".json"), json_text)
        write_text_atomic(base.with_suffix(".csv"), csv_text)
    else:
        sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_json() + "\n")
    if args.out:
        value = report.overall_value if report.overall_value is not None else report.inequality_value
        print(f"{game.name}: value {value:.10f}")
    return 0


def cmd_sweep_noise(args) -> int:
    strategy, game = _load(args.strategy)
    if any(not 0 <= p <= 1 for p in args.p_err):
        raise CLIError("--p-err values must lie in [0, 1]")
    rows = sweep_noise(strategy, game, args.p_err, args.trajectories, args.shots, args.seed, args.compile_ansatz)
    if args.format == "json":
        text = json.dumps({"game": game.descriptor(), "rows": rows}, indent=2) + "\n"
    else:
        header = ["p_err", "vertex_rate", "edge_rate", "mean_rate", "stderr", "vertex_stderr", "edge_stderr"]
        text = _csv(header, [[_num(r[h]) for h in header] for r in rows])
    _emit(text, args.out)
    return 0


def cmd_export_circuit(args) -> int:
    strategy, game = _load(args.strategy)
    try:
        question = parse_question(args.question, game)
    except KeyError as exc:
        raise CLIError(exc.args[0]) from exc
    _emit(export_circuit(strategy, game, question), args.out)
    return 0


def cmd_classical(args) -> int:
    game = build_game(args)
    result = {"game": game.name}
    if game.kind == "nps":
        result["inequality"] = classical_nps_bound(game.params["n"])
    else:
        try:
            value, _ = classical_brute_force(game, args.budget)
            result["value"] = value
        except BudgetExceededError as exc:
            if game.kind != "coloring":
                raise CLIError(str(exc)) from exc
            result["value"] = None
            result["note"] = f"exhaustive value skipped: {exc}"
        if game.kind == "chsh":
            result["inequality"] = 8 * result["value"] - 4
        if game.kind == "coloring":
            frac = classical_threshold_fraction(game)
            result["edge_threshold"] = float(frac)
            result["edge_threshold_fraction"] = f"{frac.numerator}/{frac.denominator}"
    if args.format == "json":
        _emit(json.dumps(result, indent=2) + "\n", args.out)
    else:
        _emit("".join(f"{k}: {v}\n" for k, v in result.items()), args.out)
    return 0


# --- parser ---------------------------------------------------------------------------------


def _p_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad p_err list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlgames", description="Quantum strategies for nonlocal games.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=("json", "csv"), default_fmt="json"):
        p.add_argument("--seed", type=int, default=0, help="root random seed (default 0)")
        p.add_argument("--out", help="output path")
        p.add_argument("--format", choices=fmt, default=default_fmt)

    p = sub.add_parser("solve", help="run DPO trials and save the best strategy")
    _add_game_args(p)
    _add_config_args(p)
    p.add_argument("--layer", choices=sorted(PARAMS_PER_QUBIT), help="measurement layer (ry; u3ry for coloring)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--n-jobs", type=int, default=None)
    p.add_argument("--stop-below", type=float, help="stop after the first trial whose energy is below this")
    p.add_argument("--refine", action="store_true", help="polish the best trial with a joint BFGS")
    p.add_argument("--prune", type=float, metavar="THRESHOLD", help="drop ansatz angles below THRESHOLD")
    common(p)
    p.set_defaults(out=".", func=cmd_solve)

    p = sub.add_parser("eval", help="evaluate a strategy file")
    p.add_argument("strategy")
    p.add_argument("--mode", choices=("exact", "shots", "noisy"), default="exact")
    p.add_argument("--shots", type=int, default=None, help="shots per question (shots mode default 1024)")
    p.add_argument("--p-err", type=float, default=0.0)
    p.add_argument("--trajectories", type=int, default=200)
    p.add_argument("--compile-ansatz", action="store_true")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep-noise", help="win rates against the CX error probability")
    p.add_argument("strategy")
    p.add_argument("--p-err", type=_p_list, default=[0.0, 0.01, 0.02, 0.05, 0.1])
    p.add_argument("--trajectories", type=int, default=200)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--compile-ansatz", action="store_true")
    common(p, default_fmt="csv")
    p.set_defaults(func=cmd_sweep_noise)

    p = sub.add_parser("export-circuit", help="QASM text for one joint question")
    p.add_argument("strategy")
    p.add_argument("--question", required=True, help='joint question label such as "0-1"')
    common(p, fmt=("qasm",), default_fmt="qasm")
    p.set_defaults(func=cmd_export_circuit)

    p = sub.add_parser("classical", help="best deterministic strategy and edge threshold")
    _add_game_args(p)
    p.add_argument("--budget", type=int, default=10**7, help="max lookup tables to enumerate")
    common(p, fmt=("json", "text"), default_fmt="text")
    p.set_defaults(func=cmd_classical)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
