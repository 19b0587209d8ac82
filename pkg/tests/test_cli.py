from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from dgquery import gallery, logic as L
from dgquery.cli import main

from oracles import all_paths


@pytest.fixture(scope="module")
def ex(tmp_path_factory):
    d = tmp_path_factory.mktemp("examples")
    res = CliRunner().invoke(main, ["examples", str(d)])
    assert res.exit_code == 0, res.output
    return d


def run(*args, code: int = 0):
    res = CliRunner().invoke(main, [str(a) for a in args])
    assert res.exit_code == code, res.output
    return res


def report(*args, code: int = 0) -> dict:
    return json.loads(run(*args, code=code).stdout)


class TestEval:
    def test_fig5_query(self, ex):
        rep = report("eval", ex / "fig5.json", ex / "fig5_q.gpc", "--dialect", "gpc")
        paths = rep["result"]["paths"]
        assert rep["result"]["count"] == len(paths) == 5
        assert "n5 b n6 b n7" in paths

    def test_simple_p_is_empty(self, ex):
        rep = report("eval", ex / "fig5.json", ex / "fig5_p_simple.gpc", "--dialect", "gpc")
        assert rep["result"]["count"] == 0

    def test_wl_bound_echoed(self, ex):
        rep = report("eval", ex / "cycle4.json", ex / "hamiltonian.wl", "--dialect", "wl", "--maxlen", 8)
        assert rep["bound"] == 8 and rep["options"]["maxlen"] == 8
        assert rep["result"]["value"] is True
        assert rep["bound_exact"] is False

    def test_mwl_on_diamond(self, ex):
        rep = report("eval", ex / "diamond.json", ex / "q_diff_len.mwl", "--dialect", "mwl", "--maxlen", 3)
        assert rep["result"]["value"] is True and rep["bound_exact"] is True

    def test_phi_even_matches_oracle(self, ex):
        rep = report("eval", ex / "fig5.json", ex / "phi_even.fo", "--dialect", "foerdpq")
        g = gallery.fig5()
        want = any(len(p) % 2 == 0 and len(p) > 0 for p in all_paths(g, 2))
        assert rep["result"] == {"type": "boolean", "value": want}
        assert "witness" in rep

    def test_hamiltonian_fo(self, ex):
        assert report("eval", ex / "cycle5.json", ex / "hamiltonian.fo", "--dialect", "fostar-erdpq")["result"]["value"]
        assert not report("eval", ex / "star5.json", ex / "hamiltonian.fo", "--dialect", "fostar-erdpq")["result"]["value"]

    def test_datalink_relation(self, ex):
        rep = report("eval", ex / "fig4_encoding.json", ex / "datalink.fo", "--dialect", "fostar-data")
        assert rep["result"]["type"] == "relation"
        assert ["v1", "v4"] in rep["result"]["rows"]
        assert ["v3", "v5"] not in rep["result"]["rows"]

    def test_universal_fragment(self, ex):
        rep = report("eval", ex / "k3.json", ex / "phi_simple.uerdpq", "--dialect", "uerdpq", "--maxlen", 2)
        assert rep["strategy"] == "universal-fragment emptiness"
        assert rep["result"]["type"] == "automaton"
        assert all(len(row) == 1 for row in rep["result"]["sample"])

    def test_q4nodes(self, ex):
        assert report("eval", ex / "k4.json", ex / "q_4nodes.fo", "--dialect", "foerdpq")["result"]["value"]
        assert not report("eval", ex / "k3.json", ex / "q_4nodes.fo", "--dialect", "foerdpq")["result"]["value"]

    def test_reduction(self, ex):
        rep = report("eval", ex / "reduction_cycle3.json", ex / "reduction.fo", "--dialect", "foerdpq")
        assert rep["result"]["value"] is True

    def test_table_format(self, ex):
        out = run("eval", ex / "fig5.json", ex / "fig5_q.gpc", "--dialect", "gpc", "--format", "table").stdout
        assert "n5 b n6 b n7" in out and "count: 5" in out

    def test_deterministic(self, ex):
        args = ("check", ex / "fig5.json", ex / "fig5_q.gpc", "--dialect", "gpc")
        a, b = report(*args), report(*args)
        a.pop("time_s"), b.pop("time_s")
        assert a == b


class TestTools:
    def test_compile_json_and_dot(self, ex):
        doc = report("compile", ex / "fig5_q.gpc")
        assert doc["arity"] == 1
        assert "digraph" in run("compile", ex / "fig5_q.gpc", "--format", "dot").stdout

    def test_ground(self, ex):
        doc = report("ground", "A_even", ex / "cycle4.json")
        assert doc["arity"] == 1 and doc["states"] > 0
        assert "digraph" in run("ground", ex / "a_fig2.json", ex / "fig5.json", "--format", "dot").stdout

    def test_translate_mwl(self, ex):
        out = run("translate", ex / "q_diff_len.mwl", "--from", "mwl", "--to", "foerdpq").stdout
        f = L.parse_formula(out, dialect="foerdpq")
        assert not L.var_kinds(f)

    def test_translate_rdpq(self, ex):
        out = run("translate", ex / "rdpq_fig2.rdpq", "--from", "rdpq", "--to", "fostar", "--graph", ex / "k3.json").stdout
        f = L.parse_formula(out, dialect="fostar-data")
        assert set(L.var_kinds(f)) == {"s", "t"}

    def test_translate_rdpq_needs_graph(self, ex):
        run("translate", ex / "rdpq_fig2.rdpq", "--from", "rdpq", "--to", "fostar", code=1)


class TestCheck:
    def test_gpc_agree(self, ex):
        rep = report("check", ex / "fig5.json", ex / "fig5_q.gpc", "--dialect", "gpc")
        assert rep["verdict"] == "AGREE"

    def test_shortest_agree(self, ex):
        rep = report("check", ex / "fig5.json", ex / "fig5_p_shortest.gpc", "--dialect", "gpc", "--maxlen", 6)
        assert rep["verdict"] == "AGREE"
        assert len(rep["strategies"][0]["answer"]) == 2

    def test_mwl_agree_on_diamond(self, ex):
        rep = report("check", ex / "diamond.json", ex / "q_diff_len.mwl", "--dialect", "mwl")
        assert rep["verdict"] == "AGREE"

    def test_rdpq_agree(self, ex):
        rep = report("check", ex / "fig5.json", ex / "rdpq_fig2.rdpq", "--dialect", "rdpq")
        assert rep["verdict"] == "AGREE"
        assert {s["name"] for s in rep["strategies"]} >= {"automata induction", "closure-logic translation"}

    @pytest.mark.parametrize("graph, query, dialect", [
        ("cycle4.json", "hamiltonian.wl", "wl"),
        ("diamond.json", "q_diff_len.mwl", "mwl"),
    ])
    def test_small_bound_inconclusive(self, ex, graph, query, dialect):
        rep = report("check", ex / graph, ex / query, "--dialect", dialect, "--maxlen", 1)
        assert rep["verdict"] == "INCONCLUSIVE(bound)"

    def test_unbounded_pattern_inconclusive(self, ex, tmp_path):
        q = tmp_path / "loop.gpc"
        q.write_text("(-[a]->){1..inf}")
        rep = report("check", ex / "cycle4.json", q, "--dialect", "gpc", "--maxlen", 3)
        assert rep["verdict"] == "INCONCLUSIVE(bound)"


class TestExitCodes:
    def test_parse_error(self, ex, tmp_path):
        q = tmp_path / "bad.gpc"
        q.write_text("(x -[a]->")
        run("eval", ex / "fig5.json", q, "--dialect", "gpc", code=1)

    def test_missing_file(self, ex):
        run("eval", ex / "nope.json", ex / "fig5_q.gpc", "--dialect", "gpc", code=3)

    def test_bad_json(self, ex, tmp_path):
        g = tmp_path / "g.json"
        g.write_text("{not json")
        run("eval", g, ex / "fig5_q.gpc", "--dialect", "gpc", code=3)

    def test_cap(self, ex):
        run("eval", ex / "fig5.json", ex / "fig5_q.gpc", "--dialect", "gpc", "--state-cap", 1, code=2)
        run("ground", "A_3val", ex / "fig5.json", "--state-cap", 2, code=2)

    def test_wl_needs_sentence(self, ex, tmp_path):
        q = tmp_path / "open.wl"
        q.write_text("exists pos l:p . l ~id l")
        run("eval", ex / "cycle4.json", q, "--dialect", "wl", code=1)
