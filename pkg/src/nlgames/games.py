"""Nonlocal games as data, built-in games and classical baselines."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Hashable, Sequence

import numpy as np

Question = tuple
Answer = tuple
Rule = Callable[[Question, Answer], int]

DEFAULT_BRUTE_FORCE_BUDGET = 10**7


class BudgetExceededError(RuntimeError):
    """Raised when an exhaustive search would exceed its configured budget."""


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: frozenset

    def __post_init__(self):
        if self.n_vertices < 0:
            raise ValueError("vertex count must be non-negative")
        normalized = set()
        for edge in self.edges:
            u, v = edge
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            for w in (u, v):
                if not 0 <= w < self.n_vertices:
                    raise ValueError(f"vertex {w} out of range [0, {self.n_vertices})")
            key = (min(u, v), max(u, v))
            if key in normalized:
                raise ValueError(f"duplicate edge {key}")
            normalized.add(key)
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_edges(cls, n_vertices: int, edges) -> "Graph":
        edges = [tuple(e) for e in edges]
        seen = set()
        for u, v in edges:
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        return cls(n_vertices, frozenset(edges))

    @property
    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def with_apex(self) -> "Graph":
        """Add a vertex adjacent to every existing vertex."""
        apex = self.n_vertices
        return Graph(apex + 1, self.edges | {(v, apex) for v in range(apex)})

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


@dataclass(frozen=True, eq=False)
class GameSpec:
    """A nonlocal game over a joint question list.

    ``rule(q, a)`` returns 1 when joint answer ``a`` wins joint question ``q``.
    Inequality-only games (NPS) carry ``rule=None``.
    """

    name: str
    n_players: int
    questions: tuple
    answers_per_player: tuple
    rule: Rule | None
    q_dist: np.ndarray
    qubits_per_player: tuple
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    categories: tuple | None = None

    def __post_init__(self):
        questions = tuple(tuple(q) for q in self.questions)
        object.__setattr__(self, "questions", questions)
        object.__setattr__(self, "answers_per_player", tuple(tuple(a) for a in self.answers_per_player))
        object.__setattr__(self, "qubits_per_player", tuple(int(k) for k in self.qubits_per_player))
        q_dist = np.array(self.q_dist, dtype=float)
        q_dist.setflags(write=False)
        object.__setattr__(self, "q_dist", q_dist)

        if self.n_players < 1:
            raise ValueError("a game needs at least one player")
        if any(len(q) != self.n_players for q in questions):
            raise ValueError("every joint question needs one label per player")
        if len(set(questions)) != len(questions):
            raise ValueError("duplicate joint question")
        if len(self.answers_per_player) != self.n_players or len(self.qubits_per_player) != self.n_players:
            raise ValueError("answers and qubits must be given per player")
        if q_dist.shape != (len(questions),):
            raise ValueError("q_dist needs one probability per joint question")
        if np.any(q_dist < 0) or abs(q_dist.sum() - 1.0) > 1e-12:
            raise ValueError("q_dist must be a probability distribution")
        for answers, k in zip(self.answers_per_player, self.qubits_per_player):
            if len(answers) > 2**k:
                raise ValueError(f"{len(answers)} answers do not fit in {k} qubits")
        if self.categories is not None and len(self.categories) != len(questions):
            raise ValueError("categories must align with questions")

    @property
    def n_qubits(self) -> int:
        return sum(self.qubits_per_player)

    @property
    def inequality_only(self) -> bool:
        return self.rule is None

    def player_questions(self, player: int) -> list:
        """Sorted distinct labels that ``player`` can receive."""
        return sorted({q[player] for q in self.questions})

    def question_index(self, player: int) -> dict:
        return {label: i for i, label in enumerate(self.player_questions(player))}

    def register_slices(self) -> list[list[int]]:
        out, start = [], 0
        for k in self.qubits_per_player:
            out.append(list(range(start, start + k)))
            start += k
        return out

    def joint_answers(self):
        return itertools.product(*self.answers_per_player)

    def rule_vector(self, question: Question) -> np.ndarray:
        """Win indicator over computational basis states of the joint register.

        Basis states encoding an index past a player's alphabet are losing.
        """
        if self.rule is None:
            raise ValueError(f"{self.name} is inequality-only and has no rule")
        dims = [2**k for k in self.qubits_per_player]
        vec = np.zeros(int(np.prod(dims)))
        for idx in itertools.product(*(range(len(a)) for a in self.answers_per_player)):
            answer = tuple(self.answers_per_player[i][j] for i, j in enumerate(idx))
            if self.rule(question, answer):
                vec[np.ravel_multi_index(idx, dims)] = 1.0
        return vec

    def descriptor(self) -> dict:
        return {"kind": self.kind, **self.params}


# --- built-in games -------------------------------------------------------------------


def _chsh_rule(q, a):
    if q[0] == 1 and q[1] == 1:
        return int(a[0] != a[1])
    return int(a[0] == a[1])


def chsh_game() -> GameSpec:
    questions = list(itertools.product((0, 1), repeat=2))
    return GameSpec(
        name="CHSH",
        n_players=2,
        questions=questions,
        answers_per_player=((0, 1), (0, 1)),
        rule=_chsh_rule,
        q_dist=np.full(4, 0.25),
        qubits_per_player=(1, 1),
        kind="chsh",
    )


def nps_game(n: int) -> GameSpec:
    """N-partite symmetric scenario; answers are +1/-1, encoded |0>/|1>."""
    if n < 2:
        raise ValueError("NPS needs at least 2 players")
    questions = list(itertools.product((0, 1), repeat=n))
    return GameSpec(
        name=f"NPS-{n}",
        n_players=n,
        questions=questions,
        answers_per_player=((1, -1),) * n,
        rule=None,
        q_dist=np.full(len(questions), 1.0 / len(questions)),
        qubits_per_player=(1,) * n,
        kind="nps",
        params={"n": n},
    )


class _ColoringRule:
    # a plain class so games stay picklable for process-based parallelism
    def __call__(self, q, a):
        if q[0] == q[1]:
            return int(a[0] == a[1])
        return int(a[0] != a[1])


def coloring_game(graph: Graph, colors: int, qubits_per_player: int | None = None) -> GameSpec:
    """Two-player graph coloring game over vertex and directed edge questions."""
    if qubits_per_player is None:
        qubits_per_player = max(1, math.ceil(math.log2(colors)))
    if colors < 1:
        raise ValueError("need at least one color")
    if colors > 2**qubits_per_player:
        raise ValueError(f"{colors} colors exceed the capacity of {qubits_per_player} qubits")
    questions = [(v, v) for v in range(graph.n_vertices)]
    categories = ["vertex"] * graph.n_vertices
    for u, v in graph.sorted_edges:
        questions += [(u, v), (v, u)]
        categories += ["edge", "edge"]
    palette = tuple(range(colors))
    return GameSpec(
        name=f"coloring(n={graph.n_vertices}, m={len(graph.edges)}, c={colors})",
        n_players=2,
        questions=questions,
        answers_per_player=(palette, palette),
        rule=_ColoringRule(),
        q_dist=np.full(len(questions), 1.0 / len(questions)),
        qubits_per_player=(qubits_per_player, qubits_per_player),
        kind="coloring",
        params={
            "colors": colors,
            "qubits_per_player": qubits_per_player,
            "n_vertices": graph.n_vertices,
            "edges": [list(e) for e in graph.sorted_edges],
        },
        categories=tuple(categories),
    )


def game_from_descriptor(desc: dict) -> GameSpec:
    kind = desc["kind"]
    if kind == "chsh":
        return chsh_game()
    if kind == "nps":
        return nps_game(int(desc["n"]))
    if kind == "coloring":
        graph = Graph.from_edges(int(desc["n_vertices"]), desc["edges"])
        return coloring_game(graph, int(desc["colors"]), int(desc["qubits_per_player"]))
    raise ValueError(f"unknown game kind {kind!r}")


# --- graph files ----------------------------------------------------------------------


def parse_graph(text: str, add_apex: bool = False) -> Graph:
    """Parse the ``n m`` header plus ``u v`` edge-list format."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two integers, got {raw!r}")
        try:
            rows.append((lineno, int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValueError(f"line {lineno}: expected two integers, got {raw!r}") from None
    if not rows:
        raise ValueError("empty graph file")
    _, n, m = rows[0]
    edges = rows[1:]
    if len(edges) != m:
        raise ValueError(f"header declares {m} edges but {len(edges)} follow")
    seen = set()
    for lineno, u, v in edges:
        if u == v:
            raise ValueError(f"line {lineno}: self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"line {lineno}: vertex out of range [0, {n})")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f"line {lineno}: duplicate edge {key}")
        seen.add(key)
    graph = Graph(n, frozenset(seen))
    return graph.with_apex() if add_apex else graph


BUILTIN_GRAPHS = {"g13": ("g13.txt", False), "g14": ("g13.txt", True)}


def load_graph(path, add_apex: bool = False) -> Graph:
    """Load an edge-list file. ``"g13"`` and ``"g14"`` name the bundled graphs."""
    if isinstance(path, str) and path.lower() in BUILTIN_GRAPHS:
        fname, apex = BUILTIN_GRAPHS[path.lower()]
        text = resources.files("nlgames.data").joinpath(fname).read_text(encoding="utf-8")
        return parse_graph(text, add_apex=apex or add_apex)
    text = Path(path).read_text(encoding="utf-8")
    return parse_graph(text, add_apex=add_apex)


def format_graph(graph: Graph) -> str:
    lines = [f"{graph.n_vertices} {len(graph.edges)}"]
    lines += [f"{u} {v}" for u, v in graph.sorted_edges]
    return "\n".join(lines) + "\n"


# --- classical baselines ----------------------------------------------------------------


def validate_synchronous(game: GameSpec) -> bool:
    """True iff every repeated question forbids disagreeing answers."""
    if game.rule is None:
        raise ValueError(f"{game.name} has no rule")
    for q in game.questions:
        if len(set(q)) != 1:
            continue
        for a in game.joint_answers():
            if len(set(a)) > 1 and game.rule(q, a):
                return False
    return True


def _payoff_tensor(game: GameSpec) -> np.ndarray:
    # W[qA, qB, a, b] = sum of p(q) * rule over joint questions with those labels
    idx = [game.question_index(i) for i in range(2)]
    na, nb = (len(a) for a in game.answers_per_player)
    W = np.zeros((len(idx[0]), len(idx[1]), na, nb))
    for q, p in zip(game.questions, game.q_dist):
        for ia, a in enumerate(game.answers_per_player[0]):
            for ib, b in enumerate(game.answers_per_player[1]):
                W[idx[0][q[0]], idx[1][q[1]], ia, ib] += p * game.rule(q, (a, b))
    return W


def classical_brute_force(game: GameSpec, budget: int = DEFAULT_BRUTE_FORCE_BUDGET):
    """Exact best deterministic strategy.

    Returns ``(best_value, table)`` where ``table[i]`` maps player ``i``'s
    question labels to answers. Every joint lookup table is accounted for;
    for two players the last player's table is chosen as the exact best
    response to each enumerated table of the first.
    """
    if game.rule is None:
        raise ValueError(f"{game.name} is inequality-only and has no rule")
    size = 1
    for i in range(game.n_players):
        size *= len(game.answers_per_player[i]) ** len(game.player_questions(i))
    if size > budget:
        raise BudgetExceededError(f"{size} lookup tables exceed the budget of {budget}")

    labels = [game.player_questions(i) for i in range(game.n_players)]
    answers = game.answers_per_player
    if game.n_players == 2:
        W = _payoff_tensor(game)
        n_qa = len(labels[0])
        best, best_table = -1.0, None
        rows = np.arange(n_qa)
        for choice in itertools.product(range(len(answers[0])), repeat=n_qa):
            # payoff per (qB, b) given Alice's table
            gain = W[rows, :, list(choice), :].sum(axis=0)
            value = gain.max(axis=1).sum()
            if value > best + 1e-15:
                best = value
                bob = gain.argmax(axis=1)
                best_table = (
                    {lab: answers[0][c] for lab, c in zip(labels[0], choice)},
                    {lab: answers[1][c] for lab, c in zip(labels[1], bob)},
                )
        return float(best), best_table

    best, best_table = -1.0, None
    per_player = [list(itertools.product(answers[i], repeat=len(labels[i]))) for i in range(game.n_players)]
    index = [game.question_index(i) for i in range(game.n_players)]
    for tables in itertools.product(*per_player):
        value = 0.0
        for q, p in zip(game.questions, game.q_dist):
            a = tuple(tables[i][index[i][q[i]]] for i in range(game.n_players))
            value += p * game.rule(q, a)
        if value > best + 1e-15:
            best = value
            best_table = tuple(dict(zip(labels[i], tables[i])) for i in range(game.n_players))
    return float(best), best_table


def min_monochromatic_edges(graph: Graph, colors: int) -> tuple[int, list[int]]:
    """Fewest monochromatic edges over all colorings (exhaustive, pruned).

    Colors are assigned in first-use order to skip permuted duplicates.
    """
    n = graph.n_vertices
    adj = graph.adjacency()
    order = sorted(range(n), key=lambda v: -len(adj[v]))
    pos = {v: i for i, v in enumerate(order)}
    earlier = [[pos[w] for w in adj[v] if pos[w] < pos[v]] for v in order]
    coloring = [-1] * n
    best = [len(graph.edges) + 1, None]

    def search(i, cost, used):
        if cost >= best[0]:
            return
        if i == n:
            best[0], best[1] = cost, coloring[:]
            return
        for c in range(min(colors, used + 1)):
            extra = sum(1 for j in earlier[i] if coloring[j] == c)
            coloring[i] = c
            search(i + 1, cost + extra, max(used, c + 1))
            if best[0] == 0:
                return
        coloring[i] = -1

    search(0, 0, 0)
    by_vertex = [0] * n
    for v in order:
        by_vertex[v] = best[1][pos[v]] if best[1] else 0
    return best[0], by_vertex


def classical_nps_bound(n: int) -> float:
    """Minimum of the NPS expression over deterministic +/-1 assignments."""
    best = math.inf
    for choice in itertools.product([(1, 1), (1, -1), (-1, 1), (-1, -1)], repeat=n):
        a = np.array(choice, dtype=float)
        s0, s1 = a[:, 0].sum(), a[:, 1].sum()
        s00 = s0**2 - n
        s11 = s1**2 - n
        s01 = s0 * s1 - float(a[:, 0] @ a[:, 1])
        best = min(best, -2 * s0 + 0.5 * s00 - s01 + 0.5 * s11 + 2 * n)
    return float(best)
