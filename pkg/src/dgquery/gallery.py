"""Named example graphs and graph generators."""
from __future__ import annotations

import random
from typing import Sequence

from .graph import DataGraph


def fig5() -> DataGraph:
    """Seven nodes over {a, b}; n1 and n2 share data "0", n_i carries "i" otherwise."""
    nodes = [(f"n{i}", ("0" if i <= 2 else str(i),)) for i in range(1, 8)]
    b = [(4, 5), (5, 6), (6, 7), (7, 4), (7, 3), (2, 3)]
    a = [(3, 4), (3, 1), (1, 2), (2, 1)]
    edges = [(f"n{u}", "b", f"n{v}") for u, v in b] + [(f"n{u}", "a", f"n{v}") for u, v in a]
    return DataGraph.build(["a", "b"], 1, nodes, edges)


def fig3_fragment() -> DataGraph:
    """A social-network fragment with two properties (name, age-like value)."""
    nodes = [
        ("02", ("Ann", "66")),
        ("03", ("Mary", "56")),
        ("07", ("Bob", "66")),
        ("11", ("Sue", "41")),
        ("24", ("Paul", "5")),
        ("29", ("Paul", "5")),
    ]
    edges = [("03", "s", "02"), ("02", "p", "11"), ("11", "p", "24"), ("24", "f", "29"), ("07", "f", "24")]
    return DataGraph.build(["s", "p", "f"], 2, nodes, edges)


def simple_graph(n: int, arcs: Sequence[tuple[int, int]], label: str = "a", data: Sequence[str] | None = None,
                 sigma: Sequence[str] | None = None) -> DataGraph:
    data = list(data) if data is not None else ["0"] * n
    nodes = [(f"v{i}", (data[i],)) for i in range(n)]
    edges = [(f"v{u}", label, f"v{v}") for u, v in arcs]
    return DataGraph.build(list(sigma or [label]), 1, nodes, edges)


def cycle(n: int) -> DataGraph:
    return simple_graph(n, [(i, (i + 1) % n) for i in range(n)])


def star(n: int) -> DataGraph:
    """Centre v0 with arcs to v1..v(n-1)."""
    return simple_graph(n, [(0, i) for i in range(1, n)])


def complete(n: int) -> DataGraph:
    return simple_graph(n, [(i, j) for i in range(n) for j in range(n) if i != j])


def chain(n: int) -> DataGraph:
    return simple_graph(n, [(i, i + 1) for i in range(n - 1)])


def diamond() -> DataGraph:
    """s -> t directly and s -> m -> t: two routes of different lengths."""
    return simple_graph(3, [(0, 2), (0, 1), (1, 2)])


def single_edge() -> DataGraph:
    return simple_graph(2, [(0, 1)])


def random_graph(rng: random.Random, n_max: int = 5, sigma: Sequence[str] = ("a", "b"), k: int = 1,
                 p_edge: float | None = None, n_values: int | None = None, n_min: int = 1) -> DataGraph:
    n = rng.randint(n_min, n_max)
    p = p_edge if p_edge is not None else rng.choice([0.15, 0.25, 0.35])
    nv = n_values if n_values is not None else rng.randint(1, max(1, n))
    nodes = [(f"v{i}", tuple(str(rng.randrange(nv)) for _ in range(k))) for i in range(n)]
    edges = [(f"v{i}", a, f"v{j}") for i in range(n) for j in range(n) for a in sigma if rng.random() < p]
    return DataGraph.build(list(sigma), k, nodes, edges)


def random_dag(rng: random.Random, n_max: int = 4, sigma: Sequence[str] = ("a",), k: int = 1,
               p_edge: float = 0.5, n_values: int = 2, n_min: int = 1) -> DataGraph:
    n = rng.randint(n_min, n_max)
    nodes = [(f"v{i}", tuple(str(rng.randrange(n_values)) for _ in range(k))) for i in range(n)]
    edges = [(f"v{i}", a, f"v{j}") for i in range(n) for j in range(i + 1, n) for a in sigma if rng.random() < p_edge]
    return DataGraph.build(list(sigma), k, nodes, edges)


def is_acyclic(g: DataGraph) -> bool:
    indeg = [0] * g.n
    for _, _, v in g.edges:
        indeg[v] += 1
    succ: dict[int, set[int]] = {}
    for u, _, v in g.edges:
        succ.setdefault(u, set()).add(v)
    indeg = [0] * g.n
    for u, vs in succ.items():
        for v in vs:
            indeg[v] += 1
    queue = [v for v in g.nodes if indeg[v] == 0]
    seen = 0
    while queue:
        u = queue.pop()
        seen += 1
        for v in succ.get(u, ()):
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return seen == g.n


def longest_path(g: DataGraph) -> int | None:
    """Length of the longest path, or None if the graph has a cycle."""
    if not is_acyclic(g):
        return None
    memo: dict[int, int] = {}

    def lp(v: int) -> int:
        if v not in memo:
            memo[v] = max((1 + lp(w) for _, w in g.out(v)), default=0)
        return memo[v]

    return max(lp(v) for v in g.nodes)
