"""Command line: evaluate queries in every dialect, compile, ground, translate,
cross-check strategies and write out the built-in example material."""
from __future__ import annotations

import json
import sys
import time
from itertools import product
from pathlib import Path as FsPath

import click

from . import gallery, gpc, logic, nfa, rdpa, wl
from .errors import CapExceeded, DgqError, GraphError, ParseError
from .graph import DataGraph, Path, dump_graph, load_graph_file, paths_up_to

DIALECTS = ("gpc", "wl", "mwl", "foerdpq", "uerdpq", "fostar-erdpq", "fostar-data", "rdpq")
LOGIC_DIALECTS = ("foerdpq", "uerdpq", "fostar-erdpq", "fostar-data", "rdpq")
EXIT_PARSE, EXIT_CAP, EXIT_IO = 1, 2, 3
SAMPLE_LIMIT = 50


class _Fail(Exception):
    def __init__(self, code: int, msg: str) -> None:
        super().__init__(msg)
        self.code = code


def _guard(fn):
    """Map library errors onto exit codes."""

    def run(*a, **kw):
        try:
            return fn(*a, **kw)
        except _Fail as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(e.code)
        except CapExceeded as e:
            click.echo(f"error: cap exceeded: {e}", err=True)
            sys.exit(EXIT_CAP)
        except (OSError, GraphError, json.JSONDecodeError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_IO)
        except (DgqError, KeyError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_PARSE)
        except RecursionError:
            click.echo("error: query nesting too deep", err=True)
            sys.exit(EXIT_PARSE)

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def _read(path: str) -> str:
    return FsPath(path).read_text(encoding="utf-8")


def _resolver(base: FsPath, sigma):
    def resolve(ref: str) -> rdpa.Rdpa:
        if ref.startswith("@"):
            p = FsPath(ref[1:])
            if not p.is_absolute():
                p = base / p
            return rdpa.loads(p.read_text(encoding="utf-8"))
        return rdpa.builtin(ref, sigma)

    return resolve


def _load_automaton(ref: str, sigma) -> rdpa.Rdpa:
    p = FsPath(ref)
    if p.suffix == ".json" or p.exists():
        try:
            return rdpa.loads(p.read_text(encoding="utf-8"))
        except (ValueError, TypeError, KeyError) as e:
            if isinstance(e, json.JSONDecodeError):
                raise
            raise _Fail(EXIT_PARSE, f"malformed automaton file: {e}") from None
    return rdpa.builtin(ref, sigma)


def _emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(report, indent=2, ensure_ascii=False))
        return
    for k, v in report.items():
        if isinstance(v, dict):
            click.echo(f"{k}:")
            for k2, v2 in v.items():
                if isinstance(v2, list):
                    click.echo(f"  {k2}:")
                    for item in v2:
                        click.echo(f"    {item if not isinstance(item, list) else ' | '.join(map(str, item))}")
                else:
                    click.echo(f"  {k2}: {v2}")
        elif isinstance(v, list):
            click.echo(f"{k}:")
            for item in v:
                if isinstance(item, dict):
                    item = "; ".join(f"{k2}={v2}" for k2, v2 in item.items())
                click.echo(f"  {item}")
        else:
            click.echo(f"{k}: {v}")


# -- evaluation per dialect ---------------------------------------------------------------


def _finite_paths(a: nfa.Nfa) -> set[Path] | None:
    """All accepted paths if the (trimmed) language is finite, else None."""
    t = nfa.trim(a)
    color: dict[int, int] = {}

    def cyclic(s: int) -> bool:
        stack = [(s, iter(sorted({x for ts in t.delta[s].values() for x in ts})))]
        color[s] = 1
        while stack:
            u, it = stack[-1]
            for v in it:
                if color.get(v) == 1:
                    return True
                if v not in color:
                    color[v] = 1
                    stack.append((v, iter(sorted({x for ts in t.delta[v].values() for x in ts}))))
                    break
            else:
                color[u] = 2
                stack.pop()
        return False

    if any(s not in color and cyclic(s) for s in range(t.n_states)):
        return None
    words = nfa.words_up_to(t, t.n_states + 1)
    return {nfa.decode(t.alphabet, w)[0] for w in words}


def _sorted_paths(g: DataGraph, ps) -> list[str]:
    return [g.render(p) for p in sorted(ps, key=lambda p: (len(p), g.render(p)))]


def eval_gpc(g: DataGraph, text: str, maxlen: int, cap: int) -> dict:
    text = text.strip()
    first = text.split(None, 1)[0] if text else ""
    if first in gpc.RESTRICTORS:
        q = gpc.parse_query(text)
        ps = gpc.eval_query(q, g, cap)
        # re-validate every answer against the enumeration semantics
        for p in ps:
            if not gpc.match_paths(q.pattern, g, len(p)) >= {p}:
                raise DgqError(f"internal check failed for {g.render(p)}")
        return {
            "strategy": "compile+ground",
            "result": {"type": "paths", "restrictor": q.restrictor, "count": len(ps), "paths": _sorted_paths(g, ps)},
        }
    p = gpc.parse_pattern(text)
    a = rdpa.ground(gpc.compile_pattern(p), g, cap)
    ps = _finite_paths(a)
    if ps is not None:
        return {"strategy": "compile+ground", "result": {"type": "paths", "count": len(ps), "paths": _sorted_paths(g, ps)}}
    listed = gpc.match_paths(p, g, maxlen)
    return {
        "strategy": "compile+ground",
        "bound": maxlen,
        "result": {"type": "paths", "infinite": True, "count_up_to_bound": len(listed), "paths": _sorted_paths(g, listed)},
    }


def eval_wl(g: DataGraph, text: str, dialect: str, maxlen: int | None) -> dict:
    f = wl.parse_wl(text, dialect, g.sigma)
    if wl.free_paths(f):
        raise _Fail(EXIT_PARSE, f"walk-logic queries must be sentences; free paths: {sorted(wl.free_paths(f))}")
    B = maxlen if maxlen is not None else 2 * g.n
    cert = wl.certificate(g, B)
    return {
        "strategy": "bounded",
        "bound": B,
        "bound_exact": cert.exact,
        "bound_note": cert.reason,
        "result": {"type": "boolean", "value": wl.eval_bounded(f, g, B)},
    }


def _body_of_exists(f: logic.Formula) -> logic.Formula:
    while isinstance(f, logic.Exists):
        f = f.body
    return f


def _answer_json(g: DataGraph, ans: logic.Answer, maxlen: int) -> dict:
    if not ans.vars:
        return {"type": "boolean", "value": bool(ans)}
    if ans.rows is not None:
        rows = sorted([g.id_of(v) for v in r] for r in ans.rows)
        return {"type": "relation", "vars": list(ans.vars), "rows": rows}
    domains = [list(g.nodes) if k == logic.NODE else list(paths_up_to(g, maxlen)) for k in ans.kinds]
    sample = []
    for combo in product(*domains):
        ps = [Path(x, ()) if k == logic.NODE else x for x, k in zip(combo, ans.kinds)]
        if nfa.accepts_paths(ans.nfa, ps):
            sample.append([g.id_of(x) if k == logic.NODE else g.render(x) for x, k in zip(combo, ans.kinds)])
            if len(sample) >= SAMPLE_LIMIT:
                break
    return {
        "type": "automaton",
        "vars": list(ans.vars),
        "kinds": list(ans.kinds),
        "states": ans.nfa.n_states,
        "empty": not bool(ans),
        "sample_bound": maxlen,
        "sample": sample,
    }


def eval_logic(g: DataGraph, text: str, dialect: str, base: FsPath, maxlen: int, cap: int, strict_star: bool) -> dict:
    f = logic.parse_formula(text, _resolver(base, g.sigma), dialect)
    resolver = _resolver(base, g.sigma)
    if dialect == "uerdpq":
        ans = logic.evaluate_universal(f, g, cap, resolver=resolver)
        strategy = "universal-fragment emptiness"
    else:
        ans = logic.evaluate(f, g, strict_star=strict_star, cap=cap, resolver=resolver)
        strategy = "automata induction"
    out = {"strategy": strategy, "result": _answer_json(g, ans, maxlen)}
    if not ans.vars and bool(ans) and isinstance(f, logic.Exists):
        w = logic.witness(f, g, strict_star=strict_star, cap=cap, resolver=resolver)
        if w is not None:
            body = _body_of_exists(f)
            bound = max([maxlen] + [len(v) for v in w.values() if isinstance(v, Path)])
            ok = logic.holds_bounded(body, g, bound, w, strict_star, resolver)
            if ok:
                out["witness"] = {k: (g.render(v) if isinstance(v, Path) else g.id_of(v)) for k, v in w.items()}
            else:
                out["witness_note"] = "witness found but not confirmed by bounded direct semantics; omitted"
    return out


# -- commands ---------------------------------------------------------------------------------

_common = [
    click.option("--dialect", type=click.Choice(DIALECTS), required=True, help="Query language of QUERY_FILE."),
    click.option("--maxlen", type=int, default=None, help="Path-length bound for bounded strategies (default 2|V|)."),
    click.option("--state-cap", type=int, default=rdpa.DEFAULT_STATE_CAP, show_default=True, help="Automaton state cap."),
    click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json", show_default=True),
    click.option("--strict-star", is_flag=True, help="Closure needs at least one step (no reflexive pairs)."),
]


def _with_common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Query workbench for data graphs."""


@main.command("eval")
@click.argument("graph_file", type=click.Path())
@click.argument("query_file", type=click.Path())
@_with_common
@_guard
def cmd_eval(graph_file, query_file, dialect, maxlen, state_cap, fmt, strict_star):
    """Evaluate QUERY_FILE on GRAPH_FILE and print a report."""
    g = load_graph_file(graph_file)
    text = _read(query_file)
    t0 = time.perf_counter()
    B = maxlen if maxlen is not None else 2 * g.n
    if dialect == "gpc":
        body = eval_gpc(g, text, B, state_cap)
    elif dialect in ("wl", "mwl"):
        body = eval_wl(g, text, dialect, maxlen)
    else:
        body = eval_logic(g, text, dialect, FsPath(query_file).parent, B, state_cap, strict_star)
    report = {
        "query": text.strip(),
        "dialect": dialect,
        "graph": str(graph_file),
        **body,
        "options": {"maxlen": B, "state_cap": state_cap, "strict_star": strict_star},
        "time_s": round(time.perf_counter() - t0, 4),
    }
    _emit(report, fmt)


@main.command("compile")
@click.argument("pattern_file", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]), default="json", show_default=True)
@_guard
def cmd_compile(pattern_file, fmt):
    """Compile a pattern (or restricted query) into a register automaton."""
    text = _read(pattern_file).strip()
    first = text.split(None, 1)[0] if text else ""
    p = gpc.parse_query(text).pattern if first in gpc.RESTRICTORS else gpc.parse_pattern(text)
    a = gpc.compile_pattern(p)
    click.echo(rdpa.to_dot(a) if fmt == "dot" else rdpa.dumps(a))


@main.command("ground")
@click.argument("automaton")
@click.argument("graph_file", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]), default="json", show_default=True)
@click.option("--state-cap", type=int, default=rdpa.DEFAULT_STATE_CAP, show_default=True)
@_guard
def cmd_ground(automaton, graph_file, fmt, state_cap):
    """Ground AUTOMATON (a JSON file or library name) over GRAPH_FILE."""
    g = load_graph_file(graph_file)
    a = rdpa.ground(_load_automaton(automaton, g.sigma), g, state_cap)
    click.echo(nfa.to_dot(a) if fmt == "dot" else nfa.dumps(a))


@main.command("translate")
@click.argument("query_file", type=click.Path())
@click.option("--from", "src", type=click.Choice(["mwl", "wl", "rdpq"]), required=True)
@click.option("--to", "dst", type=click.Choice(["foerdpq", "fostar"]), required=True)
@click.option("--graph", "graph_file", type=click.Path(), default=None, help="Needed for rdpq -> fostar.")
@_guard
def cmd_translate(query_file, src, dst, graph_file):
    """Translate a walk-logic sentence or a path query into another logic."""
    text = _read(query_file)
    if src in ("mwl", "wl"):
        if dst != "foerdpq":
            raise _Fail(EXIT_PARSE, "walk logic translates to foerdpq")
        click.echo(logic.to_text(wl.translate_mwl_to_fo_erdpq(wl.parse_wl(text, src))))
        return
    if dst != "fostar":
        raise _Fail(EXIT_PARSE, "rdpq translates to fostar")
    if graph_file is None:
        raise _Fail(EXIT_PARSE, "rdpq -> fostar emits a graph-specific formula; pass --graph")
    g = load_graph_file(graph_file)
    f = logic.parse_formula(text, _resolver(FsPath(query_file).parent, g.sigma), "rdpq")
    x, _, y, a = logic.rdpq_parts(f)
    click.echo(logic.to_text(logic.translate_rdpq_to_fostar(a, g, x, y)))


def _verdict(strategies: list[dict]) -> str:
    """AGREE needs two exact strategies with equal answers; bounded or
    unfinished strategies never count towards agreement."""
    exact = [s for s in strategies if s["exact"]]
    for s in strategies:
        if exact:
            s["consistent"] = s["answer"] == exact[0]["answer"]
    if any(s["answer"] != exact[0]["answer"] for s in exact[1:]):
        return "DISAGREE"
    if len(exact) >= 2:
        return "AGREE"
    return "INCONCLUSIVE(bound)"


def check_report(g: DataGraph, text: str, dialect: str, base: FsPath, maxlen: int | None, cap: int,
                 strict_star: bool) -> dict:
    B = maxlen if maxlen is not None else 2 * g.n
    strategies: list[dict] = []
    if dialect == "gpc":
        text = text.strip()
        first = text.split(None, 1)[0] if text else ""
        if first in gpc.RESTRICTORS:
            q = gpc.parse_query(text)
            auto = gpc.eval_query(q, g, cap)
            enum = gpc.eval_query_enum(q, g, B)
            if q.restrictor == "shortest":
                exact = all(len(p) <= B for p in auto)
            else:
                exact = B >= g.n - 1
            strategies.append({"name": "compile+ground", "exact": True, "answer": _sorted_paths(g, auto)})
        else:
            p = gpc.parse_pattern(text)
            found = _finite_paths(rdpa.ground(gpc.compile_pattern(p), g, cap))
            strategies.append({"name": "compile+ground", "exact": found is not None,
                               "answer": None if found is None else _sorted_paths(g, found)})
            enum = gpc.match_paths(p, g, B)
            # the enumeration is exact when no match can be longer than the bound
            longest = gpc.max_length(p)
            exact = longest is not None and longest <= B
        strategies.append({"name": "enumeration", "exact": exact, "bound": B, "answer": _sorted_paths(g, enum)})
    elif dialect in ("wl", "mwl"):
        f = wl.parse_wl(text, dialect, g.sigma)
        cert = wl.certificate(g, B)
        strategies.append({"name": "bounded", "exact": cert.exact, "bound": B, "note": cert.reason,
                           "answer": wl.eval_bounded(f, g, B)})
        _attempt(strategies, "translate+evaluate", True, lambda: wl.eval_translated(f, g, strict_star=strict_star, cap=cap))
    else:
        return _check_logic(g, text, dialect, base, B, cap, strict_star)
    return {"strategies": strategies, "verdict": _verdict(strategies)}


def _attempt(strategies: list[dict], name: str, exact: bool, fn, **extra) -> None:
    try:
        strategies.append({"name": name, "exact": exact, **extra, "answer": fn()})
    except CapExceeded as e:
        strategies.append({"name": name, "exact": False, **extra, "answer": None, "note": f"did not complete: {e}"})


def _check_logic(g: DataGraph, text: str, dialect: str, base: FsPath, B: int, cap: int, strict_star: bool) -> dict:
    strategies: list[dict] = []
    resolver = _resolver(base, g.sigma)
    f = logic.parse_formula(text, resolver, dialect)
    kinds = logic.var_kinds(f)
    free = sorted(kinds)
    if any(k == logic.PATH for k in kinds.values()):
        raise _Fail(EXIT_PARSE, "check needs a formula without free path variables")

    def rows(ans: logic.Answer) -> list:
        if not free:
            return bool(ans)
        return sorted([g.id_of(v) for v in r] for r in logic.satisfying_nodes(ans, free))

    _attempt(strategies, "automata induction", True,
             lambda: rows(logic.evaluate(f, g, strict_star=strict_star, cap=cap, resolver=resolver)))
    if logic.is_universal_fragment(f):
        _attempt(strategies, "universal-fragment emptiness", True,
                 lambda: rows(logic.evaluate_universal(f, g, cap, resolver=resolver)))
    parts = logic.rdpq_parts(f)
    if parts is not None and g.n >= 2 and set(free) == {parts[0], parts[2]} and parts[0] != parts[2]:
        a = parts[3] if isinstance(parts[3], rdpa.Rdpa) else resolver(parts[3])
        if a.arity == 1:
            tf = logic.translate_rdpq_to_fostar(a, g, parts[0], parts[2])
            _attempt(strategies, "closure-logic translation", True,
                     lambda: rows(logic.evaluate(tf, g, resolver=resolver)))
    has_path_q = any(isinstance(s, logic.Exists) and s.kind == logic.PATH for s in logic._walk(f))
    exact = not has_path_q or wl.certificate(g, B).exact

    def bounded():
        if not free:
            return logic.holds_bounded(f, g, B, {}, strict_star, resolver)
        return sorted(
            [g.id_of(v) for v in combo]
            for combo in product(g.nodes, repeat=len(free))
            if logic.holds_bounded(f, g, B, dict(zip(free, combo)), strict_star, resolver)
        )

    _attempt(strategies, "bounded direct semantics", exact, bounded, bound=B)
    return {"strategies": strategies, "verdict": _verdict(strategies)}


@main.command("check")
@click.argument("graph_file", type=click.Path())
@click.argument("query_file", type=click.Path())
@_with_common
@_guard
def cmd_check(graph_file, query_file, dialect, maxlen, state_cap, fmt, strict_star):
    """Run every applicable strategy and compare their answers."""
    g = load_graph_file(graph_file)
    text = _read(query_file)
    t0 = time.perf_counter()
    rep = check_report(g, text, dialect, FsPath(query_file).parent, maxlen, state_cap, strict_star)
    report = {"query": text.strip(), "dialect": dialect, "graph": str(graph_file), **rep,
              "time_s": round(time.perf_counter() - t0, 4)}
    _emit(report, fmt)
    if rep["verdict"] == "DISAGREE":
        sys.exit(4)


def example_files() -> dict[str, str]:
    """File name -> contents for the built-in graphs, queries and automata."""
    F = logic.to_text
    files = {
        "fig5.json": dump_graph(gallery.fig5()),
        "fig5_q.gpc": gpc.TWO_B_STEPS,
        "fig5_p_shortest.gpc": "shortest " + gpc.LOOP_PATTERN,
        "fig5_p_simple.gpc": "simple " + gpc.LOOP_PATTERN,
        "fig3.json": dump_graph(gallery.fig3_fragment()),
        "fig4_encoding.json": dump_graph(logic.fig4_graph()),
        "datalink.fo": F(logic.datalink()),
        "dataconnection.fo": F(logic.dataconnection()),
        "cycle5.json": dump_graph(gallery.cycle(5)),
        "star5.json": dump_graph(gallery.star(5)),
        "hamiltonian.fo": F(logic.hamiltonian_sentence()),
        "phi_even.fo": "exists x, y . " + F(logic.phi_even()),
        "phi_simple.uerdpq": F(logic.phi_simple("pi")),
        "a_fig2.json": rdpa.dumps(rdpa.fig2()),
        "rdpq_fig2.rdpq": "exists path pi . (s, pi, t) & pi in @a_fig2.json",
        "k3.json": dump_graph(gallery.complete(3)),
        "k4.json": dump_graph(gallery.complete(4)),
        "a_4ids.json": rdpa.dumps(logic.a_4ids()),
        "q_4nodes.fo": "exists s, t . exists path pi . (s, pi, t) & pi in @a_4ids.json",
        "reduction_cycle3.json": dump_graph(logic.hamiltonian_reduction_graph(3, [(0, 1), (1, 2), (2, 0)])),
        "a_reduction.json": rdpa.dumps(logic.a_reduction_reject()),
        "reduction.fo": "exists path pi . pi notin @a_reduction.json",
        "diamond.json": dump_graph(gallery.diamond()),
        "single_edge.json": dump_graph(gallery.single_edge()),
        "q_diff_len.mwl": wl.to_text(wl.q_diff_len()),
        "hamiltonian.wl": wl.to_text(wl.hamiltonian()),
        "cycle4.json": dump_graph(gallery.cycle(4)),
    }
    return {k: v if v.endswith("\n") else v + "\n" for k, v in files.items()}


@main.command("examples")
@click.argument("directory", type=click.Path())
@_guard
def cmd_examples(directory):
    """Write the built-in example graphs, queries and automata into DIRECTORY."""
    d = FsPath(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, content in example_files().items():
        (d / name).write_text(content, encoding="utf-8")
        click.echo(str(d / name))


if __name__ == "__main__":
    main()
