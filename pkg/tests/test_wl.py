from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from dgquery import gallery, logic as L, nfa as N, wl as W
from dgquery import rdpa as R
from dgquery.errors import DgqError, ParseError
from dgquery.graph import DataGraph, Path, is_simple
from dgquery.randgen import random_mwl_sentence

from oracles import all_paths, has_hamiltonian_path


def resolver_for(g: DataGraph):
    return lambda ref: R.builtin(ref, g.sigma)


def translated(f, g: DataGraph) -> bool:
    return W.eval_translated(f, g, resolver=resolver_for(g))


def distinct_lengths(g: DataGraph, s: int, t: int) -> set[int]:
    return {len(p) for p in all_paths(g, g.n) if p.start == s and p.last == t}


class TestParsing:
    def test_phi_simple_parses(self):
        f = W.parse_wl("forall pos l:pi . forall pos m:pi . l = m | !(l ~id m)", dialect="wl")
        assert W.free_paths(f) == {"pi"}

    def test_cross_path_order(self):
        text = "exists path p . exists path q . exists pos l:p . exists pos m:q . l < m"
        with pytest.raises(ParseError, match="mwl"):
            W.parse_wl(text, dialect="wl")
        f = W.parse_wl(text, dialect="mwl")
        assert W.uses_cross_path_order(f)

    def test_unknown_label(self):
        with pytest.raises(ParseError, match="unknown label"):
            W.parse_wl("exists path p . exists pos l:p . E_c(l, l)", sigma=("a", "b"))

    def test_edge_sorts_must_match(self):
        with pytest.raises(ParseError):
            W.parse_wl("exists path p . exists path q . exists pos l:p . exists pos m:q . E_a(l, m)", dialect="mwl")

    def test_unbound_position(self):
        with pytest.raises(ParseError):
            W.parse_wl("exists path p . l ~id l")

    @pytest.mark.parametrize("name", sorted(W.LIBRARY))
    def test_library_roundtrip(self, name):
        f = W.builtin_wl(name)
        assert W.parse_wl(W.to_text(f), dialect="mwl") == f

    @given(st.integers(0, 10_000))
    def test_random_roundtrip(self, seed):
        f = random_mwl_sentence(random.Random(seed))
        assert W.parse_wl(W.to_text(f), dialect="mwl") == f

    @given(st.integers(0, 10_000))
    @settings(max_examples=30)
    def test_wl_sentences_also_mwl(self, seed):
        f = random_mwl_sentence(random.Random(seed), mwl=False)
        text = W.to_text(f)
        a, b = W.parse_wl(text, dialect="wl"), W.parse_wl(text, dialect="mwl")
        assert a == b
        g = gallery.random_dag(random.Random(seed), n_max=3)
        assert W.eval_bounded(a, g, 3) == W.eval_bounded(b, g, 3)


class TestBounded:
    def test_hamiltonian_on_cycle(self):
        assert W.eval_bounded(W.hamiltonian(), gallery.cycle(4), 6)

    def test_hamiltonian_without_edges(self):
        g = DataGraph.build(["a"], 1, [("v", ("0",)), ("w", ("0",))], [])
        assert not W.eval_bounded(W.hamiltonian(), g, 4)

    def test_hamiltonian_k3(self):
        g = gallery.complete(3)
        assert W.eval_bounded(W.hamiltonian(), g, 6) == has_hamiltonian_path(g) is True

    @pytest.mark.parametrize("seed", range(8))
    def test_hamiltonian_random(self, seed):
        g = gallery.random_graph(random.Random(seed), n_max=4, sigma=("a",))
        assert W.eval_bounded(W.hamiltonian(), g, g.n) == has_hamiltonian_path(g)

    def test_visitall_on_chain(self):
        g = gallery.chain(3)
        assert W.eval_bounded(W.phi_visitall(), g, 3, env={"pi": g.parse_path("v0 a v1 a v2")})
        assert not W.eval_bounded(W.phi_visitall(), g, 3, env={"pi": g.parse_path("v0 a v1")})

    def test_phi_simple_env(self):
        g = gallery.cycle(3)
        for p in all_paths(g, 5):
            assert W.eval_bounded(W.phi_simple(), g, 0, env={"pi": p}) == is_simple(p)

    def test_positions_are_zero_based(self):
        g = gallery.single_edge()
        # E_a(l, m) holds for l = 0, m = 1 on the one-edge path
        f = W.parse_wl("exists pos l:p . exists pos m:p . E_a(l, m) & !(exists pos k:p . k < l)")
        assert W.eval_bounded(f, g, 1, env={"p": g.parse_path("v0 a v1")})

    @given(st.integers(0, 10_000))
    @settings(max_examples=30)
    def test_existential_monotone_in_bound(self, seed):
        rng = random.Random(seed)
        g = gallery.random_graph(rng, n_max=3, sigma=("a",))
        # a purely existential sentence: no negation above a quantifier
        f = W.WExistsPath("p", W.WExistsPos("l", "p", W.WExistsPos("m", "p", W.WAnd(W.WLess("l", "m"), W.WIdEq("l", "m")))))
        for n in range(4):
            if W.eval_bounded(f, g, n):
                assert W.eval_bounded(f, g, n + 1)

    def test_unknown_label_at_evaluation(self):
        f = W.parse_wl("exists path p . exists pos l:p . E_zz(l, l)")
        with pytest.raises(DgqError):
            W.eval_bounded(f, gallery.cycle(3), 2)


class TestCertificate:
    def test_dag(self):
        c = W.certificate(gallery.chain(4), 3)
        assert c.exact
        assert not W.certificate(gallery.chain(4), 2).exact

    def test_cycle(self):
        assert not W.certificate(gallery.cycle(3), 100).exact


class TestTranslation:
    def test_reflexive_id(self):
        g = DataGraph.build(["a"], 1, [("v", ("0",))], [])
        f = W.parse_wl("exists path p . exists pos l:p . l ~id l")
        assert translated(f, g) and W.eval_bounded(f, g, 0)

    def test_diff_len_golden(self):
        assert translated(W.q_diff_len(), gallery.diamond())
        assert W.eval_bounded(W.q_diff_len(), gallery.diamond(), 2)
        assert not translated(W.q_diff_len(), gallery.single_edge())
        assert not W.eval_bounded(W.q_diff_len(), gallery.single_edge(), 1)

    @pytest.mark.parametrize("seed", range(6))
    def test_diff_len_against_path_lengths(self, seed):
        g = gallery.random_dag(random.Random(seed), n_max=4, p_edge=0.6)
        want = any(len(distinct_lengths(g, s, t)) >= 2 for s in g.nodes for t in g.nodes)
        assert translated(W.q_diff_len(), g) == want

    def test_phi_simple_translated(self):
        rng = random.Random(4)
        for _ in range(30):
            g = gallery.random_graph(rng, n_max=3)
            f = W.translate_mwl_to_fo_erdpq(W.phi_simple())
            ans = L.evaluate(f, g, resolver=resolver_for(g))
            for p in all_paths(g, 3):
                assert N.accepts_paths(ans.nfa, [p]) == W.eval_bounded(W.phi_simple(), g, 0, env={"pi": p})

    def test_translation_uses_prefix_automata(self):
        f = W.translate_mwl_to_fo_erdpq(W.parse_wl("exists path p . exists pos l:p . true"))
        names = {s.aut for s in L._walk(f) if isinstance(s, L.InAut)}
        assert names == {"A_prefix"}

    @given(st.integers(0, 100_000))
    @settings(max_examples=25)
    def test_translation_sound_when_certified(self, seed):
        rng = random.Random(seed)
        g = gallery.random_dag(rng, n_max=3)
        f = random_mwl_sentence(rng, depth=3)
        bound = 2 * g.n
        assert W.certificate(g, bound).exact
        assert W.eval_bounded(f, g, bound) == translated(f, g)


def test_single_node_paths():
    g = DataGraph.build(["a"], 1, [("v", ("0",))], [])
    assert W.eval_bounded(W.singleton("p"), g, 0, env={"p": Path(0)})
