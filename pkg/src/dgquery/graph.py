"""Data graphs, paths, data paths and convolutions."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Any, Iterable, Iterator, Sequence

from .errors import GraphError


class _Pad:
    """The reserved padding / unset token. Distinct from every user value."""

    __slots__ = ()
    _instance: "_Pad | None" = None

    def __new__(cls) -> "_Pad":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "PAD"

    def __str__(self) -> str:
        return PAD_SURFACE

    def __reduce__(self):
        return (_Pad, ())


PAD = _Pad()
PAD_SURFACE = "♯"

DataValue = tuple  # (id, props-tuple)


@dataclass(frozen=True)
class DataGraph:
    """Nodes are the integers ``0..n-1``; ``ids[v]`` and ``props[v]`` give their data."""

    sigma: tuple[str, ...]
    k: int
    ids: tuple[str, ...]
    props: tuple[tuple[str, ...], ...]
    edges: frozenset[tuple[int, str, int]]
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if not self.ids:
            raise GraphError("empty node set")
        if len(set(self.ids)) != len(self.ids):
            seen: set[str] = set()
            for i in self.ids:
                if i in seen:
                    raise GraphError(f"duplicate id {i!r}")
                seen.add(i)
        if len(set(self.sigma)) != len(self.sigma):
            raise GraphError("duplicate label in sigma")
        if self.k < 0:
            raise GraphError("property arity must be non-negative")
        if len(self.props) != len(self.ids):
            raise GraphError("props/ids length mismatch")
        for v, p in enumerate(self.props):
            if len(p) != self.k:
                raise GraphError(f"wrong property arity for node {self.ids[v]!r}: expected {self.k}, got {len(p)}")
        labels = set(self.sigma)
        n = len(self.ids)
        for u, a, v in self.edges:
            if a not in labels:
                raise GraphError(f"unknown label {a!r} on edge")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError("edge endpoint out of range")

    # -- construction -------------------------------------------------
    @classmethod
    def build(
        cls,
        sigma: Iterable[str],
        k: int,
        nodes: Iterable[tuple[str, Sequence[str]]],
        edges: Iterable[tuple[str, str, str]],
    ) -> "DataGraph":
        nodes = list(nodes)
        ids = tuple(str(i) for i, _ in nodes)
        props = tuple(tuple(str(x) for x in p) for _, p in nodes)
        index = {i: n for n, i in enumerate(ids)}
        es = set()
        for u, a, v in edges:
            if u not in index or v not in index:
                raise GraphError(f"unknown node in edge {(u, a, v)!r}")
            es.add((index[u], a, index[v]))
        return cls(tuple(sigma), k, ids, props, frozenset(es))

    # -- accessors ----------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def nodes(self) -> range:
        return range(len(self.ids))

    def id_of(self, v: int) -> str:
        return self.ids[v]

    def props_of(self, v: int) -> tuple[str, ...]:
        return self.props[v]

    def data_of(self, v: int) -> DataValue:
        return (self.ids[v], self.props[v])

    def node(self, node_id: str) -> int:
        idx = self._cached("index", lambda: {i: n for n, i in enumerate(self.ids)})
        try:
            return idx[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id!r}") from None

    def out(self, v: int) -> tuple[tuple[str, int], ...]:
        """Outgoing (label, target) pairs of ``v`` in a fixed order."""

        def mk():
            adj: list[list[tuple[str, int]]] = [[] for _ in self.ids]
            for u, a, w in self.edges:
                adj[u].append((a, w))
            return tuple(tuple(sorted(x, key=lambda e: (e[0], self.ids[e[1]]))) for x in adj)

        return self._cached("out", mk)[v]

    def prop_class(self, v: int) -> int:
        """Index of the props tuple of ``v`` among the distinct props tuples of the graph."""

        def mk():
            classes: dict[tuple[str, ...], int] = {}
            return tuple(classes.setdefault(p, len(classes)) for p in self.props)

        return self._cached("pclass", mk)[v]

    def label_index(self, a: str) -> int:
        idx = self._cached("lidx", lambda: {a: i for i, a in enumerate(self.sigma)})
        return idx[a]

    def has_edge(self, u: int, a: str, v: int) -> bool:
        return (u, a, v) in self.edges

    def _cached(self, key: str, make):
        c = self._cache
        if key not in c:
            c[key] = make()
        return c[key]

    def render(self, p: "Path") -> str:
        out = [self.ids[p.start]]
        for a, v in p.steps:
            out += [a, self.ids[v]]
        return " ".join(out)

    def parse_path(self, text: str) -> "Path":
        toks = text.split()
        if len(toks) % 2 != 1:
            raise GraphError(f"malformed path {text!r}")
        start = self.node(toks[0])
        steps = tuple((toks[i], self.node(toks[i + 1])) for i in range(1, len(toks), 2))
        p = Path(start, steps)
        check_path(self, p)
        return p


@dataclass(frozen=True, order=True)
class Path:
    start: int
    steps: tuple[tuple[str, int], ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.start,) + tuple(v for _, v in self.steps)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.steps)

    @property
    def last(self) -> int:
        return self.steps[-1][1] if self.steps else self.start

    def prefix(self, n: int) -> "Path":
        return Path(self.start, self.steps[:n])

    def extend(self, a: str, v: int) -> "Path":
        return Path(self.start, self.steps + ((a, v),))


@dataclass(frozen=True)
class DataPath:
    values: tuple[DataValue, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.values) != len(self.labels) + 1:
            raise GraphError("a data path has exactly one more data value than labels")

    def __len__(self) -> int:
        return len(self.labels)

    def sequence(self) -> tuple:
        out: list = [self.values[0]]
        for a, d in zip(self.labels, self.values[1:]):
            out += [a, d]
        return tuple(out)


@dataclass(frozen=True)
class NaryDataPath:
    """Convolution of ``arity`` data paths: per-position tuples, tail-padded with PAD."""

    arity: int
    values: tuple[tuple, ...]
    labels: tuple[tuple, ...] = ()

    def __post_init__(self) -> None:
        if len(self.values) != len(self.labels) + 1:
            raise GraphError("parity violation in n-ary data path")
        for t in range(self.arity):
            if self.values[0][t] is PAD:
                raise GraphError("every tape starts with a data value")
            done = False
            for j in range(1, len(self.values)):
                pa, pd = self.labels[j - 1][t] is PAD, self.values[j][t] is PAD
                if pa != pd:
                    raise GraphError("label and data padding must coincide")
                if done and not pd:
                    raise GraphError("padding must be a suffix")
                done = done or pd

    def __len__(self) -> int:
        return len(self.labels)

    def tape(self, i: int) -> DataPath:
        vals = [self.values[0][i]]
        labs = []
        for a, d in zip(self.labels, self.values[1:]):
            if d[i] is PAD:
                break
            labs.append(a[i])
            vals.append(d[i])
        return DataPath(tuple(vals), tuple(labs))


# -- operations ----------------------------------------------------------

def check_path(g: DataGraph, p: Path) -> None:
    if not 0 <= p.start < g.n:
        raise GraphError("path start is not a node")
    u = p.start
    for a, v in p.steps:
        if (u, a, v) not in g.edges:
            raise GraphError(f"({g.ids[u]}, {a}, {g.ids[v] if 0 <= v < g.n else v}) is not an edge")
        u = v


def label_of(p: Path) -> tuple[str, ...]:
    return p.labels


def dp(g: DataGraph, p: Path) -> DataPath:
    return DataPath(tuple(g.data_of(v) for v in p.nodes), p.labels)


def convolve(ps: Sequence[DataPath]) -> NaryDataPath:
    if not ps:
        raise GraphError("convolution needs at least one data path")
    n = max(len(p) for p in ps)
    values = []
    labels = []
    for j in range(n + 1):
        values.append(tuple(p.values[j] if j <= len(p) else PAD for p in ps))
        if j:
            labels.append(tuple(p.labels[j - 1] if j <= len(p) else PAD for p in ps))
    return NaryDataPath(len(ps), tuple(values), tuple(labels))


def is_simple(p: Path) -> bool:
    ns = p.nodes
    return len(set(ns)) == len(ns)


def concat(p: Path, q: Path) -> Path:
    if p.last != q.start:
        raise GraphError("cannot concatenate: endpoint mismatch")
    return Path(p.start, p.steps + q.steps)


def _path_key(g: DataGraph, p: Path):
    return (g.ids[p.start], p.labels, tuple(g.ids[v] for v in p.nodes))


def paths_up_to(g: DataGraph, maxlen: int) -> Iterator[Path]:
    """Every path of length <= maxlen exactly once, by length then lexicographically."""
    if maxlen < 0:
        return
    level = sorted((Path(v) for v in g.nodes), key=lambda p: _path_key(g, p))
    for length in range(maxlen + 1):
        yield from level
        if length == maxlen or not level:
            break
        nxt = [p.extend(a, w) for p in level for a, w in g.out(p.last)]
        level = sorted(nxt, key=lambda p: _path_key(g, p))


def paths_of_length(g: DataGraph, n: int) -> list[Path]:
    return [p for p in paths_up_to(g, n) if len(p) == n]


# -- serialization -------------------------------------------------------

def _scalar(x: Any) -> str:
    return x if isinstance(x, str) else json.dumps(x)


def graph_from_obj(obj: Any, *, allow_pad_literal: bool = False) -> DataGraph:
    if not isinstance(obj, dict):
        raise GraphError("graph JSON must be an object")
    try:
        sigma = [str(a) for a in obj.get("sigma", [])]
        k = int(obj.get("k", 0))
        raw_nodes = obj.get("nodes", [])
        raw_edges = obj.get("edges", [])
    except (TypeError, ValueError) as e:
        raise GraphError(f"malformed graph: {e}") from None
    if not raw_nodes:
        raise GraphError("empty node set")
    nodes = []
    for nd in raw_nodes:
        if isinstance(nd, dict):
            nid, props = nd.get("id"), nd.get("props", [])
        else:
            raise GraphError("each node must be an object with id and props")
        if nid is None:
            raise GraphError("node without id")
        nid = _scalar(nid)
        if not isinstance(props, list):
            props = [props]
        props = [_scalar(x) for x in props]
        if len(props) != k:
            raise GraphError(f"wrong property arity for node {nid!r}: expected {k}, got {len(props)}")
        if not allow_pad_literal and (nid == PAD_SURFACE or PAD_SURFACE in props):
            raise GraphError(f"value {PAD_SURFACE!r} is reserved for padding")
        nodes.append((nid, props))
    ids = [i for i, _ in nodes]
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise GraphError(f"duplicate id {i!r}")
        seen.add(i)
    labels = set(sigma)
    edges = []
    for e in raw_edges:
        if not isinstance(e, (list, tuple)) or len(e) != 3:
            raise GraphError(f"malformed edge {e!r}")
        u, a, v = (_scalar(x) for x in e)
        if a not in labels:
            raise GraphError(f"unknown label {a!r} on edge")
        if u not in seen or v not in seen:
            raise GraphError(f"unknown node in edge {e!r}")
        edges.append((u, a, v))
    return DataGraph.build(sigma, k, nodes, edges)


def load_graph(source: Any, *, allow_pad_literal: bool = False) -> DataGraph:
    """Load a graph from JSON given as bytes, text, a binary/text stream or a path."""
    if isinstance(source, (FsPath,)):
        source = source.read_bytes()
    elif hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, dict):
        return graph_from_obj(source, allow_pad_literal=allow_pad_literal)
    try:
        obj = json.loads(source)
    except json.JSONDecodeError as e:
        raise GraphError(f"invalid JSON: {e}") from None
    return graph_from_obj(obj, allow_pad_literal=allow_pad_literal)


def load_graph_file(path: str | FsPath) -> DataGraph:
    with open(path, "rb") as fh:
        return load_graph(fh)


def graph_to_obj(g: DataGraph) -> dict:
    return {
        "sigma": list(g.sigma),
        "k": g.k,
        "nodes": [{"id": i, "props": list(p)} for i, p in zip(g.ids, g.props)],
        "edges": sorted([g.ids[u], a, g.ids[v]] for u, a, v in g.edges),
    }


def dump_graph(g: DataGraph) -> str:
    return json.dumps(graph_to_obj(g), indent=1, ensure_ascii=False)


def relabel_data(g: DataGraph, mapping: dict[str, str]) -> DataGraph:
    """Rename property values through ``mapping`` (values not in it are kept)."""
    props = tuple(tuple(mapping.get(x, x) for x in p) for p in g.props)
    return DataGraph(g.sigma, g.k, g.ids, props, g.edges)
