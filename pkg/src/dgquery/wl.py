"""Walk logic over paths and positions: syntax, bounded evaluation, and the
exact translation into first-order logic with automaton atoms."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union as TUnion

from . import logic as L
from .errors import DgqError, ParseError
from .gallery import is_acyclic, longest_path
from .graph import DataGraph, Path, paths_up_to

WL, MWL = "wl", "mwl"

# -- AST -------------------------------------------------------------------------


@dataclass(frozen=True)
class WTrue:
    pass


@dataclass(frozen=True)
class WEdge:
    label: str
    l: str
    m: str


@dataclass(frozen=True)
class WLess:
    l: str
    m: str


@dataclass(frozen=True)
class WIdEq:
    l: str
    m: str


@dataclass(frozen=True)
class WDataEq:
    l: str
    m: str


@dataclass(frozen=True)
class WNot:
    arg: "WlFormula"


@dataclass(frozen=True)
class WOr:
    left: "WlFormula"
    right: "WlFormula"


@dataclass(frozen=True)
class WAnd:
    left: "WlFormula"
    right: "WlFormula"


@dataclass(frozen=True)
class WExistsPath:
    p: str
    body: "WlFormula"


@dataclass(frozen=True)
class WExistsPos:
    l: str
    sort: str
    body: "WlFormula"


WlFormula = TUnion[WTrue, WEdge, WLess, WIdEq, WDataEq, WNot, WOr, WAnd, WExistsPath, WExistsPos]


def w_forall_path(p: str, body: WlFormula) -> WlFormula:
    return WNot(WExistsPath(p, WNot(body)))


def w_forall_pos(l: str, sort: str, body: WlFormula) -> WlFormula:
    return WNot(WExistsPos(l, sort, WNot(body)))


def w_implies(a: WlFormula, b: WlFormula) -> WlFormula:
    return WOr(WNot(a), b)


def w_le(l: str, m: str) -> WlFormula:
    return WNot(WLess(m, l))


def w_poseq(l: str, m: str) -> WlFormula:
    return WAnd(WNot(WLess(l, m)), WNot(WLess(m, l)))


def w_and(*fs: WlFormula) -> WlFormula:
    out = fs[0]
    for f in fs[1:]:
        out = WAnd(out, f)
    return out


# -- sorts -----------------------------------------------------------------------


def check_sorts(f: WlFormula, dialect: str = MWL, sigma: Sequence[str] | None = None) -> None:
    """Every position variable must be bound; comparisons obey the dialect."""

    def rec(f, sorts: dict[str, str], paths: set[str]) -> None:
        def sort(l: str) -> str:
            if l not in sorts:
                raise ParseError(f"position variable {l!r} is not bound")
            return sorts[l]

        if isinstance(f, WEdge):
            if sigma is not None and f.label not in sigma:
                raise ParseError(f"unknown label {f.label!r} in E_{f.label}")
            if sort(f.l) != sort(f.m):
                raise ParseError(f"E_{f.label}({f.l}, {f.m}) relates positions of different paths")
        elif isinstance(f, WLess):
            if sort(f.l) != sort(f.m) and dialect == WL:
                raise ParseError(f"{f.l} < {f.m} compares positions of different paths (allowed in mwl only)")
        elif isinstance(f, (WIdEq, WDataEq)):
            sort(f.l)
            sort(f.m)
        elif isinstance(f, WNot):
            rec(f.arg, sorts, paths)
        elif isinstance(f, (WOr, WAnd)):
            rec(f.left, sorts, paths)
            rec(f.right, sorts, paths)
        elif isinstance(f, WExistsPath):
            if f.p in sorts:
                raise ParseError(f"{f.p!r} is used both as a path and as a position variable")
            inner = {k: v for k, v in sorts.items() if v != f.p}  # positions of a rebound path go out of scope
            rec(f.body, inner, paths | {f.p})
        elif isinstance(f, WExistsPos):
            if f.l in paths or f.l == f.sort:
                raise ParseError(f"{f.l!r} is used both as a path and as a position variable")
            rec(f.body, {**sorts, f.l: f.sort}, paths | {f.sort})

    rec(f, {}, set())


def free_paths(f: WlFormula) -> frozenset[str]:
    out: set[str] = set()

    def rec(f, bound: frozenset[str]) -> None:
        if isinstance(f, WNot):
            rec(f.arg, bound)
        elif isinstance(f, (WOr, WAnd)):
            rec(f.left, bound)
            rec(f.right, bound)
        elif isinstance(f, WExistsPath):
            rec(f.body, bound | {f.p})
        elif isinstance(f, WExistsPos):
            if f.sort not in bound:
                out.add(f.sort)
            rec(f.body, bound)

    rec(f, frozenset())
    return frozenset(out)


def uses_cross_path_order(f: WlFormula) -> bool:
    sorts: dict[str, str] = {}

    def rec(f) -> bool:
        if isinstance(f, WLess):
            return sorts.get(f.l) != sorts.get(f.m)
        if isinstance(f, WNot):
            return rec(f.arg)
        if isinstance(f, (WOr, WAnd)):
            return rec(f.left) or rec(f.right)
        if isinstance(f, WExistsPath):
            return rec(f.body)
        if isinstance(f, WExistsPos):
            old = sorts.get(f.l)
            sorts[f.l] = f.sort
            r = rec(f.body)
            if old is None:
                sorts.pop(f.l)
            else:
                sorts[f.l] = old
            return r
        return False

    return rec(f)


# -- surface syntax ---------------------------------------------------------------

_TOK = re.compile(r"\s*(?:(?P<op>~id|~data|<=|!=|[()<=,.:|&!])|(?P<name>[A-Za-z_][A-Za-z0-9_']*))")
_KW = {"exists", "forall", "path", "pos", "true", "false"}


class _WParser:
    def __init__(self, text: str) -> None:
        self.t: list[tuple[str, str]] = []
        pos, text = 0, text.rstrip()
        while pos < len(text):
            m = _TOK.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character at offset {pos}: {text[pos:pos + 10]!r}")
            pos = m.end()
            self.t.append(("op", m.group("op")) if m.group("op") else ("name", m.group("name")))
        self.t.append(("eof", ""))
        self.i = 0

    def peek(self, k: int = 0) -> str:
        return self.t[min(self.i + k, len(self.t) - 1)][1]

    def expect(self, v: str) -> None:
        if self.peek() != v:
            raise ParseError(f"expected {v!r} but found {self.peek() or 'end of input'!r}")
        self.i += 1

    def name(self) -> str:
        k, v = self.t[self.i]
        if k != "name" or v in _KW:
            raise ParseError(f"expected a variable name but found {v or 'end of input'!r}")
        self.i += 1
        return v

    def formula(self) -> WlFormula:
        f = self.conj()
        while self.peek() == "|":
            self.i += 1
            f = WOr(f, self.conj())
        return f

    def conj(self) -> WlFormula:
        f = self.unary()
        while self.peek() == "&":
            self.i += 1
            f = WAnd(f, self.unary())
        return f

    def unary(self) -> WlFormula:
        v = self.peek()
        if v == "!":
            self.i += 1
            return WNot(self.unary())
        if v in ("exists", "forall"):
            self.i += 1
            binders = [self.binder()]
            while self.peek() == ",":
                self.i += 1
                binders.append(self.binder())
            self.expect(".")
            body = self.formula()
            for name, sort in reversed(binders):
                if v == "exists":
                    body = WExistsPath(name, body) if sort is None else WExistsPos(name, sort, body)
                else:
                    body = w_forall_path(name, body) if sort is None else w_forall_pos(name, sort, body)
            return body
        if v == "(":
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def binder(self) -> tuple[str, str | None]:
        kw = None
        if self.peek() in ("path", "pos"):
            kw = self.peek()
            self.i += 1
        name = self.name()
        if self.peek() == ":":
            if kw == "path":
                raise ParseError(f"path variable {name!r} cannot carry a sort")
            self.i += 1
            return name, self.name()
        if kw == "pos":
            raise ParseError(f"position variable {name!r} needs a sort, as in {name}:p")
        return name, None

    def atom(self) -> WlFormula:
        v = self.peek()
        if v in ("true", "false"):
            self.i += 1
            return WTrue() if v == "true" else WNot(WTrue())
        if v.startswith("E_") and self.peek(1) == "(":
            self.i += 2
            l = self.name()
            self.expect(",")
            m = self.name()
            self.expect(")")
            return WEdge(v[2:], l, m)
        l = self.name()
        op = self.peek()
        self.i += 1
        if op not in ("<", "<=", "=", "!=", "~id", "~data"):
            raise ParseError(f"expected a comparison after {l!r} but found {op or 'end of input'!r}")
        m = self.name()
        return {
            "<": lambda: WLess(l, m),
            "<=": lambda: w_le(l, m),
            "=": lambda: w_poseq(l, m),
            "!=": lambda: WNot(w_poseq(l, m)),
            "~id": lambda: WIdEq(l, m),
            "~data": lambda: WDataEq(l, m),
        }[op]()


def parse_wl(text: str, dialect: str = WL, sigma: Sequence[str] | None = None) -> WlFormula:
    if dialect not in (WL, MWL):
        raise ValueError(f"unknown dialect {dialect!r}")
    p = _WParser(text)
    f = p.formula()
    if p.peek() != "":
        raise ParseError(f"unexpected trailing input {p.peek()!r}")
    check_sorts(f, dialect, sigma)
    return f


def _poseq(f: WlFormula) -> bool:
    return (
        isinstance(f, WAnd)
        and isinstance(f.left, WNot)
        and isinstance(f.right, WNot)
        and isinstance(f.left.arg, WLess)
        and isinstance(f.right.arg, WLess)
        and (f.left.arg.l, f.left.arg.m) == (f.right.arg.m, f.right.arg.l)
    )


def to_text(f: WlFormula) -> str:
    def rec(f, top: bool = False) -> str:
        if isinstance(f, WTrue):
            return "true"
        if isinstance(f, WEdge):
            return f"E_{f.label}({f.l}, {f.m})"
        if isinstance(f, WLess):
            return f"{f.l} < {f.m}"
        if isinstance(f, WIdEq):
            return f"{f.l} ~id {f.m}"
        if isinstance(f, WDataEq):
            return f"{f.l} ~data {f.m}"
        if isinstance(f, WNot):
            a = f.arg
            if isinstance(a, WExistsPath) and isinstance(a.body, WNot):
                s = f"forall path {a.p} . {rec(a.body.arg, True)}"
                return s if top else f"({s})"
            if isinstance(a, WExistsPos) and isinstance(a.body, WNot):
                s = f"forall pos {a.l}:{a.sort} . {rec(a.body.arg, True)}"
                return s if top else f"({s})"
            if isinstance(a, WLess):
                return f"{a.m} <= {a.l}"
            if _poseq(a):
                return f"{a.left.arg.l} != {a.left.arg.m}"
            return "!" + rec(a)
        if _poseq(f):
            return f"{f.left.arg.l} = {f.left.arg.m}"
        if isinstance(f, (WOr, WAnd)):
            s = f"{rec(f.left)} {'|' if isinstance(f, WOr) else '&'} {rec(f.right)}"
            return s if top else f"({s})"
        if isinstance(f, WExistsPath):
            s = f"exists path {f.p} . {rec(f.body, True)}"
            return s if top else f"({s})"
        if isinstance(f, WExistsPos):
            s = f"exists pos {f.l}:{f.sort} . {rec(f.body, True)}"
            return s if top else f"({s})"
        raise TypeError(f)

    return rec(f, True)


# -- bounded semantics --------------------------------------------------------------


def eval_bounded(f: WlFormula, g: DataGraph, maxlen: int | None = None, env: dict | None = None) -> bool:
    """Satisfaction with path quantifiers ranging over paths of length at most
    ``maxlen`` (default 2|V|). Exact when g is acyclic and maxlen covers its
    longest path. ``env`` may fix free path variables."""
    if maxlen is None:
        maxlen = 2 * g.n
    paths = list(paths_up_to(g, maxlen))
    for s in _walk(f):
        if isinstance(s, WEdge) and s.label not in g.sigma:
            raise DgqError(f"unknown label {s.label!r}")

    def rec(f, pe: dict[str, Path], po: dict[str, tuple[str, int]]) -> bool:
        if isinstance(f, WTrue):
            return True
        if isinstance(f, WEdge):
            pl, r = po[f.l]
            _, s = po[f.m]
            return s == r + 1 and pe[pl].labels[s - 1] == f.label
        if isinstance(f, WLess):
            return po[f.l][1] < po[f.m][1]
        if isinstance(f, (WIdEq, WDataEq)):
            pl, r = po[f.l]
            pm, s = po[f.m]
            u, v = pe[pl].nodes[r], pe[pm].nodes[s]
            return u == v if isinstance(f, WIdEq) else g.props_of(u) == g.props_of(v)
        if isinstance(f, WNot):
            return not rec(f.arg, pe, po)
        if isinstance(f, WOr):
            return rec(f.left, pe, po) or rec(f.right, pe, po)
        if isinstance(f, WAnd):
            return rec(f.left, pe, po) and rec(f.right, pe, po)
        if isinstance(f, WExistsPath):
            inner_po = {k: v for k, v in po.items() if v[0] != f.p}
            return any(rec(f.body, {**pe, f.p: p}, inner_po) for p in paths)
        if isinstance(f, WExistsPos):
            p = pe[f.sort]
            return any(rec(f.body, pe, {**po, f.l: (f.sort, r)}) for r in range(len(p) + 1))
        raise TypeError(f)

    return rec(f, dict(env or {}), {})


def _walk(f: WlFormula):
    yield f
    if isinstance(f, WNot):
        yield from _walk(f.arg)
    elif isinstance(f, (WOr, WAnd)):
        yield from _walk(f.left)
        yield from _walk(f.right)
    elif isinstance(f, (WExistsPath, WExistsPos)):
        yield from _walk(f.body)


@dataclass(frozen=True)
class Certificate:
    exact: bool
    reason: str


def certificate(g: DataGraph, maxlen: int) -> Certificate:
    """Whether bounded evaluation at ``maxlen`` is exact on ``g``."""
    lp = longest_path(g)
    if lp is None:
        return Certificate(False, "graph has a cycle, so no path-length bound is complete")
    if maxlen < lp:
        return Certificate(False, f"bound {maxlen} is below the longest path length {lp}")
    return Certificate(True, f"acyclic graph, bound {maxlen} covers the longest path length {lp}")


# -- translation into FO with automaton atoms -----------------------------------------


def translate_mwl_to_fo_erdpq(f: WlFormula) -> L.Formula:
    """Each position variable of sort p becomes a path variable constrained to
    be a prefix of p; positions compare through prefix automata."""

    def rec(f) -> L.Formula:
        if isinstance(f, WTrue):
            return L.TrueF()
        if isinstance(f, WEdge):
            return L.InAut((f.l, f.m), f"A_succ[{f.label}]")
        if isinstance(f, WLess):
            return L.InAut((f.l, f.m), "A_lt")
        if isinstance(f, WIdEq):
            return L.InAut((f.l, f.m), "A_lastid")
        if isinstance(f, WDataEq):
            return L.InAut((f.l, f.m), "A_lastdata")
        if isinstance(f, WNot):
            return L.Not(rec(f.arg))
        if isinstance(f, WOr):
            return L.Or(rec(f.left), rec(f.right))
        if isinstance(f, WAnd):
            return L.And(rec(f.left), rec(f.right))
        if isinstance(f, WExistsPath):
            return L.Exists(f.p, L.PATH, rec(f.body))
        if isinstance(f, WExistsPos):
            return L.Exists(f.l, L.PATH, L.And(L.InAut((f.l, f.sort), "A_prefix"), rec(f.body)))
        raise TypeError(f)

    return rec(f)


def eval_translated(f: WlFormula, g: DataGraph, **kw) -> bool:
    return bool(L.evaluate(translate_mwl_to_fo_erdpq(f), g, **kw))


# -- library -----------------------------------------------------------------------


def phi_simple(p: str = "pi") -> WlFormula:
    l, m = f"l_{p}", f"m_{p}"
    return w_forall_pos(l, p, w_forall_pos(m, p, w_implies(WNot(w_poseq(l, m)), WNot(WIdEq(l, m)))))


def phi_visitall(p: str = "pi") -> WlFormula:
    return w_forall_path("omega", w_forall_pos("m_omega", "omega", WExistsPos(f"l_{p}", p, WIdEq(f"l_{p}", "m_omega"))))


def hamiltonian() -> WlFormula:
    return WExistsPath("pi", WAnd(phi_simple("pi"), phi_visitall("pi")))


def first(l: str, sort: str) -> WlFormula:
    return w_forall_pos(l + "'", sort, w_le(l, l + "'"))


def last(l: str, sort: str) -> WlFormula:
    return w_forall_pos(l + "'", sort, w_le(l + "'", l))


def singleton(p: str) -> WlFormula:
    return w_forall_pos(f"a_{p}", p, w_forall_pos(f"b_{p}", p, w_poseq(f"a_{p}", f"b_{p}")))


def _begins(p: str, q: str) -> WlFormula:
    a, b = f"bp_{p}_{q}", f"bq_{p}_{q}"
    return WExistsPos(a, p, WExistsPos(b, q, w_and(first(a, p), first(b, q), WIdEq(a, b))))


def _ends(p: str, q: str) -> WlFormula:
    a, b = f"ep_{p}_{q}", f"eq_{p}_{q}"
    return WExistsPos(a, p, WExistsPos(b, q, w_and(last(a, p), last(b, q), WIdEq(a, b))))


def q_diff_len_open(p1: str = "pi1", p2: str = "pi2") -> WlFormula:
    """Two paths from the node of p1 to the node of p2 with different lengths."""
    body = w_and(
        last("m", "pi"),
        last("t", "omega"),
        WLess("m", "t"),
        _begins("pi", p1),
        _begins("omega", p1),
        _ends("pi", p2),
        _ends("omega", p2),
    )
    core = WExistsPath("pi", WExistsPath("omega", WExistsPos("m", "pi", WExistsPos("t", "omega", body))))
    return w_and(singleton(p1), singleton(p2), core)


def q_diff_len() -> WlFormula:
    return WExistsPath("pi1", WExistsPath("pi2", q_diff_len_open()))


LIBRARY = {
    "phi_simple": lambda: phi_simple("pi"),
    "phi_visitall": lambda: phi_visitall("pi"),
    "hamiltonian": hamiltonian,
    "q_diff_len": q_diff_len,
}


def builtin_wl(name: str) -> WlFormula:
    try:
        return LIBRARY[name]()
    except KeyError:
        raise KeyError(f"unknown formula {name!r}; known: {', '.join(sorted(LIBRARY))}") from None
