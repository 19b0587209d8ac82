"""Hypothesis strategies for small data graphs and their paths."""
from __future__ import annotations

from hypothesis import strategies as st

from dgquery.graph import DataGraph


@st.composite
def graphs(draw, max_nodes: int = 4, sigma: tuple[str, ...] = ("a", "b"), k: int = 1, min_nodes: int = 1):
    n = draw(st.integers(min_nodes, max_nodes))
    values = draw(st.lists(st.lists(st.sampled_from("0123"), min_size=k, max_size=k), min_size=n, max_size=n))
    candidates = [(u, a, v) for u in range(n) for a in sigma for v in range(n)]
    chosen = draw(st.lists(st.sampled_from(candidates), unique=True, max_size=min(len(candidates), 2 * n + 2)))
    nodes = [(f"v{i}", tuple(values[i])) for i in range(n)]
    edges = [(f"v{u}", a, f"v{v}") for u, a, v in chosen]
    return DataGraph.build(list(sigma), k, nodes, edges)
