from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, strategies as st

from dgquery import gallery
from dgquery.errors import GraphError
from dgquery.graph import (
    PAD,
    DataGraph,
    DataPath,
    NaryDataPath,
    Path,
    concat,
    convolve,
    dp,
    dump_graph,
    is_simple,
    label_of,
    load_graph,
    paths_up_to,
    relabel_data,
)

from oracles import all_paths, walk_count
from strategies import graphs


def two_node() -> DataGraph:
    return DataGraph.build(["a"], 0, [("v", ()), ("w", ())], [("v", "a", "w")])


class TestLoading:
    def test_fig3_fragment_loads_with_two_properties(self):
        g = gallery.fig3_fragment()
        assert g.k == 2
        assert g.props_of(g.node("07"))[1] == "66"
        assert g.props_of(g.node("24")) == ("Paul", "5")
        assert g.props_of(g.node("29")) == ("Paul", "5")

    def test_empty_node_set(self):
        with pytest.raises(GraphError, match="empty node set"):
            load_graph(json.dumps({"sigma": ["a"], "k": 0, "nodes": [], "edges": []}))

    def test_duplicate_id(self):
        doc = {"sigma": [], "k": 0, "nodes": [{"id": "01"}, {"id": "01"}], "edges": []}
        with pytest.raises(GraphError, match="duplicate id"):
            load_graph(json.dumps(doc))

    @pytest.mark.parametrize(
        "doc, msg",
        [
            ({"sigma": ["a"], "k": 1, "nodes": [{"id": 1, "props": []}]}, "arity"),
            ({"sigma": ["a"], "k": 0, "nodes": [{"id": 1}], "edges": [[1, "b", 1]]}, "unknown label"),
            ({"sigma": ["a"], "k": 0, "nodes": [{"id": 1}], "edges": [[1, "a", 2]]}, "unknown node"),
            ({"sigma": ["a"], "k": 1, "nodes": [{"id": 1, "props": ["♯"]}]}, "reserved"),
        ],
    )
    def test_rejects_malformed(self, doc, msg):
        with pytest.raises(GraphError, match=msg):
            load_graph(json.dumps(doc))

    def test_numbers_are_stringified(self):
        g = load_graph(json.dumps({"sigma": ["a"], "k": 1, "nodes": [{"id": 7, "props": [56]}], "edges": []}))
        assert g.ids == ("7",) and g.props == (("56",),)

    def test_k_zero_allowed(self):
        assert two_node().k == 0

    def test_dump_roundtrip(self):
        g = gallery.fig5()
        assert load_graph(dump_graph(g)) == g

    def test_invalid_json(self):
        with pytest.raises(GraphError, match="invalid JSON"):
            load_graph("{nope")


class TestDataPaths:
    def test_fig3_path(self):
        g = gallery.fig3_fragment()
        rho = g.parse_path("03 s 02 p 11 p 24 f 29")
        d = dp(g, rho)
        assert d.values[0] == ("03", ("Mary", "56"))
        assert d.values[-1] == ("29", ("Paul", "5"))
        assert " ".join(label_of(rho)) == "s p p f"
        assert is_simple(rho)

    def test_length_zero(self):
        g = gallery.fig3_fragment()
        d = dp(g, Path(g.node("24")))
        assert d.values == (("24", ("Paul", "5")),) and d.labels == ()

    def test_single_edge_one_label(self):
        g = two_node()
        assert dp(g, g.parse_path("v a w")).labels == ("a",)

    def test_parity_enforced(self):
        with pytest.raises(GraphError):
            DataPath((("1", ()),), ("a",))

    def test_parse_path_checks_edges(self):
        with pytest.raises(GraphError, match="not an edge"):
            two_node().parse_path("w a v")


class TestConvolve:
    def test_pads_shorter_tape(self):
        d = DataPath((("d0", ()), ("d1", ())), ("a",))
        e = DataPath((("e0", ()),))
        c = convolve([d, e])
        assert len(c) == 1
        assert c.values == ((("d0", ()), ("e0", ())), (("d1", ()), PAD))
        assert c.labels == (("a", PAD),)

    def test_identical_tapes(self):
        g = gallery.fig5()
        u = dp(g, g.parse_path("n3 a n4 b n5"))
        c = convolve([u, u])
        assert all(x == y for x, y in c.values) and all(x == y for x, y in c.labels)
        assert PAD not in {x for t in c.values for x in t}

    def test_padding_must_be_suffix(self):
        d = ("d", ())
        with pytest.raises(GraphError, match="suffix"):
            NaryDataPath(1, ((d,), (PAD,), (d,)), ((PAD,), ("a",)))

    def test_roundtrip_random_tuples(self):
        rng = random.Random(3)
        g = gallery.random_graph(rng, n_max=5, n_min=5, p_edge=0.35)
        ps = all_paths(g, 4)
        for _ in range(50):
            tup = [rng.choice(ps) for _ in range(rng.randint(1, 3))]
            c = convolve([dp(g, p) for p in tup])
            assert [c.tape(i) for i in range(len(tup))] == [dp(g, p) for p in tup]


class TestEnumeration:
    def test_two_node_graph(self):
        g = two_node()
        assert {g.render(p) for p in paths_up_to(g, 1)} == {"v", "w", "v a w"}

    def test_isolated_node(self):
        g = DataGraph.build([], 0, [("x", ())], [])
        assert list(paths_up_to(g, 5)) == [Path(0)]

    def test_fig5_count_matches_walk_count(self):
        g = gallery.fig5()
        assert sum(1 for _ in paths_up_to(g, 3)) == walk_count(g, 3)

    def test_deterministic(self):
        g = gallery.fig5()
        assert list(paths_up_to(g, 4)) == list(paths_up_to(g, 4))

    @given(graphs(max_nodes=4), st.integers(0, 4))
    def test_matches_dfs_enumeration(self, g, n):
        got = list(paths_up_to(g, n))
        assert len(got) == len(set(got))
        assert set(got) == set(all_paths(g, n))

    @given(graphs(max_nodes=4), st.integers(0, 3))
    def test_monotone_in_bound(self, g, n):
        small, big = set(paths_up_to(g, n)), set(paths_up_to(g, n + 1))
        assert small <= big
        assert all(len(p) == n + 1 for p in big - small)

    @given(graphs(max_nodes=4))
    def test_dp_labels_roundtrip(self, g):
        for p in paths_up_to(g, 3):
            assert dp(g, p).labels == label_of(p)

    @given(graphs(max_nodes=5))
    def test_ids_injective(self, g):
        assert len({g.id_of(v) for v in g.nodes}) == g.n


class TestSimpleAndConcat:
    def test_repeated_endpoint_not_simple(self):
        g = DataGraph.build(["a"], 0, [("v", ()), ("w", ())], [("v", "a", "w"), ("w", "a", "v")])
        assert not is_simple(g.parse_path("v a w a v"))
        assert is_simple(Path(0))

    def test_concat(self):
        g = DataGraph.build(["a", "b"], 0, [("v", ()), ("w", ()), ("u", ())], [("v", "a", "w"), ("w", "b", "u")])
        p, q = g.parse_path("v a w"), g.parse_path("w b u")
        assert g.render(concat(p, q)) == "v a w b u"
        assert concat(p, Path(p.last)) == p

    def test_concat_mismatch(self):
        g = DataGraph.build(["a", "b"], 0, [(x, ()) for x in "vwuz"], [("v", "a", "w"), ("u", "b", "z")])
        with pytest.raises(GraphError, match="mismatch"):
            concat(g.parse_path("v a w"), g.parse_path("u b z"))


def test_relabel_data_preserves_structure():
    g = gallery.fig5()
    h = relabel_data(g, {"0": "zero", "3": "three"})
    assert h.edges == g.edges and h.ids == g.ids
    assert h.props_of(0) == ("zero",)
