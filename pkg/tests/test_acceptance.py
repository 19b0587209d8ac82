"""The eleven acceptance criteria, each timed against its own limit.

Every test records a one-line verdict; the lines are printed together at the
end of the run (see conftest.py).
"""
from __future__ import annotations

import random
import time
from contextlib import contextmanager
from itertools import product

from dgquery import gallery, gpc as P, logic as L, nfa as N, rdpa as R, wl as W
from dgquery.graph import dp, relabel_data
from dgquery.randgen import random_automaton, random_mwl_sentence, random_pattern, random_universal_sentence

from oracles import Q_PATHS, all_paths, has_hamiltonian_path, listed_members, reachable

RESULTS: list[str] = []


@contextmanager
def criterion(num: int, name: str, limit: float):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        passed = ok and dt < limit
        RESULTS.append(f"[{'PASS' if passed else 'FAIL'}] {num:2d}. {name}: {dt:.2f}s (limit {limit:g}s)")
    assert dt < limit, f"took {dt:.2f}s, limit {limit}s"


def resolver(g):
    return lambda ref: R.builtin(ref, g.sigma)


def test_01_fig5_golden():
    with criterion(1, "worked example graph: two-b-step and loop patterns", 1.0):
        g = gallery.fig5()
        q = P.parse_pattern(P.TWO_B_STEPS)
        assert {g.render(r) for r in P.match_paths(q, g, 6)} == Q_PATHS
        for r in P.RESTRICTORS:
            assert {g.render(x) for x in P.eval_query(P.GpcQuery(r, q), g)} == Q_PATHS
        p = P.parse_pattern(P.LOOP_PATTERN)
        assert P.eval_query(P.GpcQuery("simple", p), g) == set()
        members = listed_members(20)
        m = min(len(t.split()) for t in members)
        shortest = {t for t in members if len(t.split()) == m}
        assert {g.render(x) for x in P.eval_query(P.GpcQuery("shortest", p), g)} == shortest


def test_02_compiler_soundness():
    with criterion(2, "pattern compiler vs enumeration (300 triples)", 60.0):
        rng = random.Random(2002)
        checked = 0
        for _ in range(300):
            g = gallery.random_graph(rng, n_max=5, k=1)
            p = random_pattern(rng, depth=4, max_lo=1, max_span=2)
            a = R.ground(P.compile_pattern(p), g)
            matched = P.match_paths(p, g, 6)
            for rho in all_paths(g, 6):
                assert N.accepts_paths(a, [rho]) == (rho in matched), P.render(p)
            checked += 1
        assert checked >= 300


def _unary_and_nary(sigma):
    names = [n for n in R.LIBRARY if not n.startswith("A_succ")] + [f"A_succ[{a}]" for a in sigma]
    return [R.builtin(n, sigma) for n in names]


def test_03_grounding():
    with criterion(3, "grounding vs direct acceptance for every builtin", 60.0):
        rng = random.Random(3003)
        for _ in range(30):
            g = gallery.random_graph(rng, n_max=5, p_edge=0.15)
            paths = all_paths(g, 5)
            dps = {p: dp(g, p) for p in paths}
            for a in _unary_and_nary(g.sigma):
                ga = R.ground(a, g)
                if a.arity == 1:
                    for p in paths:
                        assert N.accepts_paths(ga, [p]) == R.accepts(a, [dps[p]]), a.name
                else:
                    # all pairs of short paths, then random tuples up to length 5
                    short = [p for p in paths if len(p) <= 2]
                    tuples = list(product(short, repeat=2)) if a.arity == 2 else []
                    tuples += [tuple(rng.choice(paths) for _ in range(a.arity)) for _ in range(300)]
                    for t in tuples:
                        assert N.accepts_paths(ga, list(t)) == R.accepts(a, [dps[x] for x in t]), a.name


def test_04_universal_fragment():
    with criterion(4, "universal fragment vs full evaluator (100 sentences)", 120.0):
        rng = random.Random(4004)
        for _ in range(100):
            g = gallery.random_graph(rng, n_max=4)
            f = random_universal_sentence(rng, sigma=g.sigma)
            res = resolver(g)
            assert bool(L.evaluate_universal(f, g, resolver=res)) == bool(L.evaluate(f, g, resolver=res))


def test_05_hamiltonicity():
    with criterion(5, "Hamiltonian path sentence vs brute force", 120.0):
        rng = random.Random(5005)
        phi = L.hamiltonian_sentence()
        for _ in range(30):
            g = gallery.random_graph(rng, n_max=5, n_min=3, sigma=("a",), p_edge=rng.choice([0.3, 0.45]))
            assert bool(L.evaluate(phi, g)) == has_hamiltonian_path(g)
        assert bool(L.evaluate(phi, gallery.cycle(5)))
        assert not bool(L.evaluate(phi, gallery.star(5)))


def test_06_fig4_datalink():
    with criterion(6, "DataLink encoding and DataConnection", 60.0):
        g = L.fig4_graph()
        rows = L.satisfying_nodes(L.evaluate(L.datalink(), g), ["x", "y"])
        assert (g.node("v1"), g.node("v4")) in rows
        assert (g.node("v3"), g.node("v5")) not in rows
        rng = random.Random(6006)
        for _ in range(20):
            n = rng.randint(1, 6)
            p = rng.choice([0.15, 0.3])
            arcs = [(u, w) for u in range(n) for w in range(n) if u != w and rng.random() < p]
            h = L.datalink_encoding(n, arcs)
            conn = L.satisfying_nodes(L.evaluate(L.dataconnection(), h), ["x", "y"])
            for u, w in product(range(n), repeat=2):
                assert ((h.node(f"v{u + 1}"), h.node(f"v{w + 1}")) in conn) == reachable(n, arcs, u, w)


def test_07_mwl_translation():
    with criterion(7, "MWL bounded vs translated (50 sentences)", 180.0):
        rng = random.Random(7007)
        certified = 0
        for _ in range(50):
            g = gallery.random_dag(rng, n_max=4)
            f = random_mwl_sentence(rng, depth=3)
            bound = 2 * g.n
            if W.certificate(g, bound).exact:
                certified += 1
                assert W.eval_bounded(f, g, bound) == W.eval_translated(f, g, resolver=resolver(g)), W.to_text(f)
        assert certified == 50
        q = W.q_diff_len()
        for g, want in ((gallery.diamond(), True), (gallery.single_edge(), False)):
            assert W.eval_bounded(q, g, 2 * g.n) is want
            assert W.eval_translated(q, g, resolver=resolver(g)) is want


def test_08_rdpq_translator():
    with criterion(8, "path query vs closure-logic translation", 300.0):
        rng = random.Random(8008)
        for _ in range(30):
            g = gallery.random_graph(rng, n_max=4, n_min=2)
            for a in (R.a_even(), R.fig2()):
                direct = L.satisfying_nodes(L.evaluate(L.rdpq_formula(a), g), ["s", "t"])
                phi = L.translate_rdpq_to_fostar(a, g)
                assert L.fragment_ok(phi, "fostar-data")
                assert L.satisfying_nodes(L.evaluate(phi, g), ["s", "t"]) == direct, a.name


def test_09_normal_form():
    with criterion(9, "normal form preserves matches (100 patterns)", 60.0):
        rng = random.Random(9009)
        for _ in range(100):
            g = gallery.random_graph(rng, n_max=5, n_min=2, p_edge=0.3)
            p = random_pattern(rng, depth=3, max_lo=1, max_span=1)
            n = P.normalize(p)
            assert P.is_normal_form(n)
            assert P.restrict_matches(P.eval_enum(n, g, 6), P.free_vars(p)) == P.eval_enum(p, g, 6), P.render(p)


def _lang(a, sample):
    return {t for t in sample if N.accepts_paths(a, list(t))}


def test_10_nfa_laws():
    with criterion(10, "NFA toolkit laws (100 automata)", 60.0):
        rng = random.Random(10010)
        for _ in range(100):
            g = gallery.random_graph(rng, n_max=3, n_min=2, p_edge=0.25)
            a, b = random_automaton(rng, g), random_automaton(rng, g)
            U = N.universe(g, 1)
            paths = all_paths(g, 8)
            sample = [(p,) for p in rng.sample(paths, min(len(paths), 200))]
            la = _lang(a, sample)
            assert _lang(N.complement(N.complement(a, U), U), sample) == la
            lhs = N.complement(N.union(a, b), U)
            rhs = N.intersect(N.complement(a, U), N.complement(b, U))
            assert _lang(lhs, sample) == _lang(rhs, sample)
            for tape in (0, 1):
                assert _lang(N.project(N.cylindrify(a, tape), tape), sample) == la
            pairs = [(rng.choice(paths), rng.choice(paths)) for _ in range(100)]
            c = N.cylindrify(a, 1)
            for p, q in pairs:
                assert N.accepts_paths(c, [p, q]) == N.accepts_paths(a, [p])


def test_11_isomorphism_invariance():
    with criterion(11, "data-renaming invariance (30 graph pairs)", 30.0):
        rng = random.Random(11011)
        for _ in range(30):
            g = gallery.random_graph(rng, n_max=4, n_min=2)
            values = sorted({x for t in g.props for x in t})
            renamed = dict(zip(values, rng.sample([f"w{i}" for i in range(10)], len(values))))
            h = relabel_data(g, renamed)
            for _ in range(4):
                p = random_pattern(rng, depth=4)
                assert P.eval_enum(p, g, 4) == P.eval_enum(p, h, 4), P.render(p)

