"""GPC patterns: parsing, enumeration semantics, normal form, compilation to RDPA."""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Union as TUnion

from . import nfa as _nfa
from . import rdpa as _rdpa
from .errors import CapExceeded, ParseError
from .graph import DataGraph, Path, is_simple

# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    var: str | None = None


@dataclass(frozen=True)
class Edge:
    label: str | None = None


@dataclass(frozen=True)
class Union:
    left: "Pattern"
    right: "Pattern"


@dataclass(frozen=True)
class Concat:
    left: "Pattern"
    right: "Pattern"


@dataclass(frozen=True)
class Repeat:
    body: "Pattern"
    lo: int
    hi: int | None  # None means unbounded


@dataclass(frozen=True)
class Cond:
    body: "Pattern"
    theta: "Condition"


Pattern = TUnion[Node, Edge, Union, Concat, Repeat, Cond]


@dataclass(frozen=True)
class DEq:
    x: str
    y: str


@dataclass(frozen=True)
class CNot:
    arg: "Condition"


@dataclass(frozen=True)
class CAnd:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class COr:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class CConst:
    value: bool


TRUE, FALSE = CConst(True), CConst(False)
Condition = TUnion[DEq, CNot, CAnd, COr, CConst]

RESTRICTORS = ("simple", "shortest", "shortestsimple")


@dataclass(frozen=True)
class GpcQuery:
    restrictor: str
    pattern: Pattern


def _balanced(parts: list[Pattern], node) -> Pattern:
    # balanced trees keep recursion depth logarithmic for long unions
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return node(_balanced(parts[:mid], node), _balanced(parts[mid:], node))


def concat_all(parts: Iterable[Pattern]) -> Pattern:
    return _balanced(list(parts), Concat)


def union_all(parts: Iterable[Pattern]) -> Pattern:
    return _balanced(list(parts), Union)


def cond_vars(t: Condition) -> frozenset[str]:
    if isinstance(t, DEq):
        return frozenset((t.x, t.y))
    if isinstance(t, CNot):
        return cond_vars(t.arg)
    if isinstance(t, (CAnd, COr)):
        return cond_vars(t.left) | cond_vars(t.right)
    return frozenset()


def all_vars(p: Pattern) -> frozenset[str]:
    if isinstance(p, Node):
        return frozenset([p.var]) if p.var else frozenset()
    if isinstance(p, Edge):
        return frozenset()
    if isinstance(p, (Union, Concat)):
        return all_vars(p.left) | all_vars(p.right)
    if isinstance(p, Repeat):
        return all_vars(p.body)
    return all_vars(p.body) | cond_vars(p.theta)


def free_vars(p: Pattern) -> frozenset[str]:
    if isinstance(p, Node):
        return frozenset([p.var]) if p.var else frozenset()
    if isinstance(p, Edge):
        return frozenset()
    if isinstance(p, (Union, Concat)):
        return free_vars(p.left) | free_vars(p.right)
    if isinstance(p, Repeat):
        return frozenset()
    return free_vars(p.body)


def max_length(p: Pattern) -> int | None:
    """Longest path any match can have, or None if repetition is unbounded."""
    if isinstance(p, Node):
        return 0
    if isinstance(p, Edge):
        return 1
    if isinstance(p, Cond):
        return max_length(p.body)
    if isinstance(p, Repeat):
        b = max_length(p.body)
        if b is None or (p.hi is None and b > 0):
            return None
        return 0 if p.hi is None else b * p.hi
    a, b = max_length(p.left), max_length(p.right)
    if a is None or b is None:
        return None
    return a + b if isinstance(p, Concat) else max(a, b)


def check_pattern(p: Pattern) -> None:
    """Enforce the repetition-variable rule, condition scoping and bounds."""

    def rec(p: Pattern) -> frozenset[str]:
        # returns the variables used inside some repetition of p
        if isinstance(p, (Node, Edge)):
            return frozenset()
        if isinstance(p, (Union, Concat)):
            rl, rr = rec(p.left), rec(p.right)
            clash = (rl & all_vars(p.right)) | (rr & all_vars(p.left))
            if clash:
                raise ParseError(f"variable {sorted(clash)[0]!r} is used inside a repetition and elsewhere")
            return rl | rr
        if isinstance(p, Repeat):
            if p.lo < 0 or (p.hi is not None and p.hi < p.lo):
                raise ParseError(f"bad repetition bounds {p.lo}..{p.hi}")
            rec(p.body)
            return all_vars(p.body)
        missing = cond_vars(p.theta) - free_vars(p.body)
        if missing:
            raise ParseError(f"condition variable {sorted(missing)[0]!r} is not free in the conditioned pattern")
        return rec(p.body)

    rec(p)


# -- surface syntax -------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<ledge>-\[\s*(?P<lab>[^\]\s]+)\s*\]->)|(?P<arrow>->)|(?P<range>\{\s*(?P<lo>\d+)\s*\.\.\s*(?P<hi>\d+|inf)\s*\})"
    r"|(?P<deq>~data|≡data)|(?P<sym>[()+<>!&|])|(?P<name>[A-Za-z_][A-Za-z0-9_#'.]*))"
)


def _tokenize(text: str) -> list[tuple[str, object]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at offset {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group("ledge"):
            out.append(("edge", m.group("lab")))
        elif m.group("arrow"):
            out.append(("edge", None))
        elif m.group("range"):
            hi = m.group("hi")
            out.append(("range", (int(m.group("lo")), None if hi == "inf" else int(hi))))
        elif m.group("deq"):
            out.append(("deq", None))
        elif m.group("sym"):
            out.append((m.group("sym"), None))
        else:
            out.append(("name", m.group("name")))
    out.append(("eof", None))
    return out


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> tuple[str, object]:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self, kind: str) -> object:
        t, v = self.peek()
        if t != kind:
            raise ParseError(f"expected {kind!r} but found {t if v is None else v!r}")
        self.i += 1
        return v

    def pattern(self) -> Pattern:
        parts = [self.concat()]
        while self.peek()[0] == "+":
            self.i += 1
            parts.append(self.concat())
        return union_all(parts)

    def concat(self) -> Pattern:
        parts = []
        while self.peek()[0] in ("(", "edge"):
            parts.append(self.postfix())
        if not parts:
            t, v = self.peek()
            raise ParseError(f"expected a pattern but found {t if v is None else v!r}")
        return concat_all(parts)

    def postfix(self) -> Pattern:
        p = self.primary()
        while True:
            t, v = self.peek()
            if t == "range":
                self.i += 1
                p = Repeat(p, v[0], v[1])
            elif t == "<":
                self.i += 1
                c = self.cond()
                self.take(">")
                p = Cond(p, c)
            else:
                return p

    def primary(self) -> Pattern:
        t, v = self.peek()
        if t == "edge":
            self.i += 1
            return Edge(v)
        self.take("(")
        t, v = self.peek()
        if t == ")":
            self.i += 1
            return Node(None)
        if t == "name" and self.peek(1)[0] == ")":
            self.i += 2
            return Node(v)
        p = self.pattern()
        self.take(")")
        return p

    def cond(self) -> Condition:
        c = self.conj()
        while self.peek()[0] == "|":
            self.i += 1
            c = COr(c, self.conj())
        return c

    def conj(self) -> Condition:
        c = self.unary()
        while self.peek()[0] == "&":
            self.i += 1
            c = CAnd(c, self.unary())
        return c

    def unary(self) -> Condition:
        t, v = self.peek()
        if t == "!":
            self.i += 1
            return CNot(self.unary())
        if t == "(":
            self.i += 1
            c = self.cond()
            self.take(")")
            return c
        name = self.take("name")
        if name in ("true", "false") and self.peek()[0] != "deq":
            return CConst(name == "true")
        self.take("deq")
        return DEq(name, self.take("name"))


def parse_pattern(text: str) -> Pattern:
    ps = _Parser(text)
    p = ps.pattern()
    ps.take("eof")
    check_pattern(p)
    return p


def parse_query(text: str) -> GpcQuery:
    ps = _Parser(text)
    t, v = ps.peek()
    if t != "name" or v not in RESTRICTORS:
        raise ParseError(f"a query starts with a restrictor ({', '.join(RESTRICTORS)}), found {v or t!r}")
    ps.i += 1
    p = ps.pattern()
    ps.take("eof")
    check_pattern(p)
    return GpcQuery(v, p)


def render_cond(t: Condition, top: bool = True) -> str:
    if isinstance(t, DEq):
        return f"{t.x} ~data {t.y}"
    if isinstance(t, CConst):
        return "true" if t.value else "false"
    if isinstance(t, CNot):
        return "!" + render_cond(t.arg, False)
    op = " & " if isinstance(t, CAnd) else " | "
    s = render_cond(t.left, False) + op + render_cond(t.right, False)
    return s if top else f"({s})"


def render(p: Pattern) -> str:
    if isinstance(p, Node):
        return f"({p.var or ''})"
    if isinstance(p, Edge):
        return f"-[{p.label}]->" if p.label else "->"
    if isinstance(p, Union):
        return f"({render(p.left)} + {render(p.right)})"
    if isinstance(p, Concat):
        return f"{render(p.left)} {render(p.right)}"
    inner = render(p.body)
    if isinstance(p.body, Concat):
        inner = f"({inner})"
    if isinstance(p, Repeat):
        return f"{inner}{{{p.lo}..{'inf' if p.hi is None else p.hi}}}"
    return f"{inner}<{render_cond(p.theta)}>"


def render_query(q: GpcQuery) -> str:
    return f"{q.restrictor} {render(q.pattern)}"


# -- enumeration semantics (the oracle) -------------------------------------------

Mapping = tuple  # sorted ((var, node-or-None), ...); None is the null value
NULL = None


def holds(theta: Condition, mu: dict, g: DataGraph) -> bool:
    """Condition truth; a comparison involving a null variable is false."""
    if isinstance(theta, DEq):
        a, b = mu.get(theta.x), mu.get(theta.y)
        return a is not None and b is not None and g.props_of(a) == g.props_of(b)
    if isinstance(theta, CConst):
        return theta.value
    if isinstance(theta, CNot):
        return not holds(theta.arg, mu, g)
    if isinstance(theta, CAnd):
        return holds(theta.left, mu, g) and holds(theta.right, mu, g)
    return holds(theta.left, mu, g) or holds(theta.right, mu, g)


def _join(m1: Mapping, m2: Mapping) -> Mapping | None:
    d = dict(m1)
    for x, v in m2:
        if x in d:
            u = d[x]
            if u is not None and v is not None and u != v:
                return None
            if u is None:
                d[x] = v
        else:
            d[x] = v
    return tuple(sorted(d.items()))


def _steps_join(p: Path, q: Path) -> Path:
    return Path(p.start, p.steps + q.steps)


def eval_enum(p: Pattern, g: DataGraph, maxlen: int) -> set[tuple[Path, Mapping]]:
    """All (path, mapping) pairs of the pattern with path length at most ``maxlen``."""
    memo: dict = {}

    def sem(p: Pattern) -> set[tuple[Path, Mapping]]:
        hit = memo.get(id(p))
        if hit is not None and hit[0] is p:
            return hit[1]
        res = _sem(p)
        memo[id(p)] = (p, res)
        return res

    def _sem(p: Pattern) -> set[tuple[Path, Mapping]]:
        if isinstance(p, Node):
            return {(Path(v), ((p.var, v),) if p.var else ()) for v in g.nodes}
        if isinstance(p, Edge):
            if maxlen < 1:
                return set()
            return {(Path(u, ((a, v),)), ()) for u, a, v in g.edges if p.label in (None, a)}
        if isinstance(p, Union):
            fv = free_vars(p)
            out = set()
            for rho, mu in sem(p.left) | sem(p.right):
                d = dict(mu)
                out.add((rho, tuple(sorted((x, d.get(x)) for x in fv))))
            return out
        if isinstance(p, Concat):
            right: dict[int, list] = {}
            for rho, mu in sem(p.right):
                right.setdefault(rho.start, []).append((rho, mu))
            out = set()
            for rho, mu in sem(p.left):
                budget = maxlen - len(rho)
                for rho2, mu2 in right.get(rho.last, ()):
                    if len(rho2) <= budget:
                        m = _join(mu, mu2)
                        if m is not None:
                            out.add((_steps_join(rho, rho2), m))
            return out
        if isinstance(p, Repeat):
            body = {rho for rho, _ in sem(p.body)}
            by_start: dict[int, list[Path]] = {}
            for rho in body:
                by_start.setdefault(rho.start, []).append(rho)

            def extend(level: set[Path]) -> set[Path]:
                nxt = set()
                for rho in level:
                    for r2 in by_start.get(rho.last, ()):
                        if len(rho) + len(r2) <= maxlen:
                            nxt.add(_steps_join(rho, r2))
                return nxt

            level = {Path(v) for v in g.nodes}
            for _ in range(p.lo):
                level = extend(level)
            acc = set(level)
            i = p.lo
            while level and (p.hi is None or i < p.hi):
                level = extend(level)
                i += 1
                if p.hi is None:
                    level -= acc
                acc |= level
            return {(rho, ()) for rho in acc}
        return {(rho, mu) for rho, mu in sem(p.body) if holds(p.theta, dict(mu), g)}

    return sem(p)


def match_paths(p: Pattern, g: DataGraph, maxlen: int) -> set[Path]:
    return {rho for rho, _ in eval_enum(p, g, maxlen)}


# -- normal form -------------------------------------------------------------------

def simplify(t: Condition) -> Condition:
    if isinstance(t, CNot):
        a = simplify(t.arg)
        if isinstance(a, CConst):
            return CConst(not a.value)
        return CNot(a)
    if isinstance(t, (CAnd, COr)):
        a, b = simplify(t.left), simplify(t.right)
        absorbing = isinstance(t, COr)
        for x, y in ((a, b), (b, a)):
            if isinstance(x, CConst):
                return x if x.value == absorbing else y
        return type(t)(a, b)
    return t


def _null_out(t: Condition, present: frozenset[str]) -> Condition:
    if isinstance(t, DEq):
        return t if t.x in present and t.y in present else FALSE
    if isinstance(t, CNot):
        return CNot(_null_out(t.arg, present))
    if isinstance(t, (CAnd, COr)):
        return type(t)(_null_out(t.left, present), _null_out(t.right, present))
    return t


class _Fresh:
    def __init__(self, taken: Iterable[str] = ()) -> None:
        self.n = 0
        self.taken = set(taken)

    def name(self, x: str) -> str:
        while True:
            self.n += 1
            cand = f"{x.split('#')[0]}#{self.n}"
            if cand not in self.taken:
                self.taken.add(cand)
                return cand


def rename(p: Pattern, m: dict[str, str]) -> Pattern:
    if isinstance(p, Node):
        return Node(m.get(p.var, p.var)) if p.var else p
    if isinstance(p, Edge):
        return p
    if isinstance(p, (Union, Concat)):
        return type(p)(rename(p.left, m), rename(p.right, m))
    if isinstance(p, Repeat):
        return Repeat(rename(p.body, m), p.lo, p.hi)
    return Cond(rename(p.body, m), _rename_cond(p.theta, m))


def _rename_cond(t: Condition, m: dict[str, str]) -> Condition:
    if isinstance(t, DEq):
        return DEq(m.get(t.x, t.x), m.get(t.y, t.y))
    if isinstance(t, CNot):
        return CNot(_rename_cond(t.arg, m))
    if isinstance(t, (CAnd, COr)):
        return type(t)(_rename_cond(t.left, m), _rename_cond(t.right, m))
    return t


def fresh_copy(p: Pattern, fresh: _Fresh) -> Pattern:
    return rename(p, {x: fresh.name(x) for x in sorted(all_vars(p))})


def normalize(p: Pattern, max_terms: int = 100_000) -> Pattern:
    """Rewrite into a union of conditioned concatenations of atoms and stars.

    Finite repetitions are unfolded into fresh copies (their variables become
    free), so match sets agree with the input only after restricting the
    mappings to the input's free variables.
    """
    fresh = _Fresh(all_vars(p))

    def star_free_vars(items: list[Pattern]) -> frozenset[str]:
        return frozenset(it.var for it in items if isinstance(it, Node) and it.var)

    def product(a: list, b: list) -> list:
        out: dict = {}
        for ia, ta in a:
            for ib, tb in b:
                items = tuple(x for x in ia + ib if x != Node(None)) or (Node(None),)
                out[(items, simplify(CAnd(ta, tb)))] = None
        if len(out) > max_terms:
            raise CapExceeded(f"normal form exceeds {max_terms} disjuncts")
        return [(list(k[0]), k[1]) for k in out]

    def norm(p: Pattern) -> list[tuple[list[Pattern], Condition]]:
        if isinstance(p, (Node, Edge)):
            return [([p], TRUE)]
        if isinstance(p, Union):
            return norm(p.left) + norm(p.right)
        if isinstance(p, Concat):
            return product(norm(p.left), norm(p.right))
        if isinstance(p, Cond):
            out = []
            for items, eta in norm(p.body):
                theta = simplify(_null_out(p.theta, star_free_vars(items)))
                out.append((items, simplify(CAnd(eta, theta))))
            return out
        # repetition
        if p.hi is None:
            acc = [([Repeat(to_pattern(norm(p.body)), 0, None)], TRUE)]
            for _ in range(p.lo):
                acc = product(norm(fresh_copy(p.body, fresh)), acc)
            return acc
        out = []
        for i in range(p.lo, p.hi + 1):
            acc = [([Node(None)], TRUE)]
            for _ in range(i):
                acc = product(acc, norm(fresh_copy(p.body, fresh)))
            out.extend(acc)
        return out

    return to_pattern(norm(p))


def to_pattern(disjuncts: list[tuple[list[Pattern], Condition]]) -> Pattern:
    live = [(items, t) for items, t in disjuncts if t != FALSE] or disjuncts[:1]
    live = list(dict.fromkeys((tuple(items), t) for items, t in live))
    terms = []
    for items, t in live:
        body = concat_all(items)
        terms.append(body if t == TRUE else Cond(body, t))
    return union_all(terms)


def is_normal_form(p: Pattern) -> bool:
    def atoms_or_star(q: Pattern) -> bool:
        if isinstance(q, Concat):
            return atoms_or_star(q.left) and atoms_or_star(q.right)
        if isinstance(q, Repeat):
            return q.lo == 0 and q.hi is None
        return isinstance(q, (Node, Edge))

    def term(q: Pattern) -> bool:
        return atoms_or_star(q.body) if isinstance(q, Cond) else atoms_or_star(q)

    if isinstance(p, Union):
        return is_normal_form(p.left) and is_normal_form(p.right)
    return term(p)


def restrict_matches(ms: Iterable[tuple[Path, Mapping]], fv: Iterable[str]) -> set[tuple[Path, Mapping]]:
    fv = sorted(fv)
    out = set()
    for rho, mu in ms:
        d = dict(mu)
        out.add((rho, tuple((x, d.get(x)) for x in fv)))
    return out


# -- compiler --------------------------------------------------------------------

# actions carried on skeleton data transitions
#   ("bind", x, scopes)        bind variable x to the current node
#   ("reset", vars, scopes)    forget variables/scopes of a repetition body
#   ("check", scope)           evaluate the scope's condition


@dataclass
class _Frag:
    init: int
    finals: set[int]
    word: list[tuple[int, object, int]]  # (src, label-or-WILD, dst)
    data: list[tuple[int, tuple, int]]  # (src, actions, dst)


class _Compiler:
    def __init__(self, p: Pattern) -> None:
        self.n = 0
        self.fresh = _Fresh(all_vars(p))
        self.scopes: dict[int, Condition] = {}
        self.vars: set[str] = set()
        self.bound: list[str] = []  # every bind site, in compilation order

    def st(self) -> int:
        self.n += 1
        return self.n

    def frag(self, p: Pattern, enclosing: tuple[int, ...]) -> _Frag:
        if isinstance(p, Node):
            i, f = self.st(), self.st()
            acts: tuple = ()
            if p.var:
                self.vars.add(p.var)
                self.bound.append(p.var)
                acts = (("bind", p.var, enclosing),)
            return _Frag(i, {f}, [], [(i, acts, f)])
        if isinstance(p, Edge):
            i, w, d, f = self.st(), self.st(), self.st(), self.st()
            return _Frag(i, {f}, [(w, p.label if p.label else _rdpa.WILD, d)], [(i, (), w), (d, (), f)])
        if isinstance(p, Union):
            return self.union(self.frag(p.left, enclosing), self.frag(p.right, enclosing))
        if isinstance(p, Concat):
            return self.concat(self.frag(p.left, enclosing), self.frag(p.right, enclosing))
        if isinstance(p, Cond):
            c = len(self.scopes)
            self.scopes[c] = p.theta
            a = self.frag(p.body, enclosing + (c,))
            a.data = [(s, acts + (("check", c),) if t in a.finals else acts, t) for s, acts, t in a.data]
            return a
        return self.repeat(p, enclosing)

    def union(self, a: _Frag, b: _Frag) -> _Frag:
        i = self.st()
        data = [(s, acts, t) for s, acts, t in a.data + b.data if s not in (a.init, b.init)]
        data += [(i, acts, t) for s, acts, t in a.data + b.data if s in (a.init, b.init)]
        return _Frag(i, a.finals | b.finals, a.word + b.word, data)

    def concat(self, a: _Frag, b: _Frag) -> _Frag:
        into = [(s, acts, t) for s, acts, t in a.data if t in a.finals]
        start = [(acts, t) for s, acts, t in b.data if s == b.init]
        data = [x for x in a.data if x[2] not in a.finals]
        data += [x for x in b.data if x[0] != b.init]
        data += [(s, a1 + a2, t) for s, a1, _ in into for a2, t in start]
        return _Frag(a.init, set(b.finals), a.word + b.word, data)

    def repeat(self, p: Repeat, enclosing: tuple[int, ...]) -> _Frag:
        if p.hi == 0:
            return self.frag(Node(None), enclosing)
        if p.hi is not None:
            if p.lo == p.hi:
                parts = [self.frag(fresh_copy(p.body, self.fresh), enclosing) for _ in range(p.lo)]
                out = parts[0]
                for q in parts[1:]:
                    out = self.concat(out, q)
                return out
            alts = [self.repeat(Repeat(p.body, i, i), enclosing) for i in range(p.lo, p.hi + 1)]
            out = alts[0]
            for q in alts[1:]:
                out = self.union(out, q)
            return out
        loop = self.loop(fresh_copy(p.body, self.fresh), enclosing)
        if p.lo <= 1:
            return loop if p.lo == 1 else self.union(self.frag(Node(None), enclosing), loop)
        head = self.repeat(Repeat(p.body, p.lo, p.lo), enclosing)
        return self.concat(head, self.union(self.frag(Node(None), enclosing), loop))

    def loop(self, body: Pattern, enclosing: tuple[int, ...]) -> _Frag:
        before, nbound = len(self.scopes), len(self.bound)
        a = self.frag(body, enclosing)
        inner_scopes = tuple(range(before, len(self.scopes)))
        # nested repetitions rename again, so collect what was actually bound
        reset = ("reset", frozenset(self.bound[nbound:]), inner_scopes)
        into = [(s, acts) for s, acts, t in a.data if t in a.finals]
        start = [(acts, t) for s, acts, t in a.data if s == a.init]
        a.data = a.data + [(s, a1 + (reset,) + a2, t) for s, a1 in into for a2, t in start]
        return a


def compile_pattern(p: Pattern) -> _rdpa.Rdpa:
    """An RDPA accepting dp(rho) exactly when some mapping makes (rho, mapping) a match."""
    check_pattern(p)
    comp = _Compiler(p)
    frag = comp.frag(p, ())
    names = sorted(comp.vars)
    regs = []
    for x in names:
        regs += [(f"{x}.id", "id"), (f"{x}.data", "data")]
    rid = {x: 2 * i for i, x in enumerate(names)}
    rdata = {x: 2 * i + 1 for i, x in enumerate(names)}
    pairs: set[tuple[str, str]] = set()

    def collect(t: Condition) -> None:
        if isinstance(t, DEq) and t.x != t.y:
            pairs.add(tuple(sorted((t.x, t.y))))
        elif isinstance(t, CNot):
            collect(t.arg)
        elif isinstance(t, (CAnd, COr)):
            collect(t.left)
            collect(t.right)

    for t in comp.scopes.values():
        collect(t)
    partners: dict[str, list[str]] = {}
    for x, y in pairs:
        partners.setdefault(x, []).append(y)
        partners.setdefault(y, []).append(x)
    scope_vars = {c: cond_vars(t) for c, t in comp.scopes.items()}

    def truth(t: Condition, c: int, L: frozenset, B: frozenset) -> bool:
        if isinstance(t, DEq):
            if (c, t.x) not in L or (c, t.y) not in L:
                return False
            return t.x == t.y or tuple(sorted((t.x, t.y))) in B
        if isinstance(t, CConst):
            return t.value
        if isinstance(t, CNot):
            return not truth(t.arg, c, L, B)
        if isinstance(t, CAnd):
            return truth(t.left, c, L, B) and truth(t.right, c, L, B)
        return truth(t.left, c, L, B) or truth(t.right, c, L, B)

    def run(actions: tuple, info: tuple) -> list[tuple]:
        # returns (E, I, U, info') alternatives
        W, L, B = info
        branches = [(frozenset(), frozenset(), frozenset(), W, L, B, frozenset())]
        for act in actions:
            nxt = []
            for E, I, U, W, L, B, cur in branches:
                kind = act[0]
                if kind == "bind":
                    _, x, scopes = act
                    L2 = L | {(c, x) for c in scopes if x in scope_vars[c]}
                    if x in W:
                        if x not in cur:
                            E = E | {(rid[x], 0)}
                        nxt.append((E, I, U, W, L2, B, cur))
                        continue
                    U = U | {(rid[x], 0), (rdata[x], 0)}
                    W2, cur2 = W | {x}, cur | {x}
                    opts = [(E, I, B)]
                    for y in partners.get(x, ()):
                        if y not in W:
                            continue
                        key = tuple(sorted((x, y)))
                        grown = []
                        for e, i, b in opts:
                            if y in cur:
                                grown.append((e, i, b | {key}))
                            else:
                                grown.append((e | {(rdata[y], 0)}, i, b | {key}))
                                grown.append((e, i | {(rdata[y], 0)}, b - {key}))
                        opts = grown
                    for e, i, b in opts:
                        nxt.append((e, i, U, W2, L2, b, cur2))
                elif kind == "reset":
                    _, vs, scopes = act
                    W2 = W - vs
                    L2 = frozenset(z for z in L if z[0] not in scopes)
                    B2 = frozenset(k for k in B if k[0] not in vs and k[1] not in vs)
                    nxt.append((E, I, U, W2, L2, B2, cur - vs))
                else:
                    c = act[1]
                    if truth(comp.scopes[c], c, L, B):
                        nxt.append((E, I, U, W, L, B, cur))
            branches = nxt
        return [(E, I, U, (W, L, B)) for E, I, U, W, L, B, _ in branches if not (E & I)]

    word_out: dict[int, list] = {}
    for s, lab, t in frag.word:
        word_out.setdefault(s, []).append((lab, t))
    data_out: dict[int, list] = {}
    for s, acts, t in frag.data:
        data_out.setdefault(s, []).append((acts, t))

    b = _rdpa.Builder(1, regs)
    ids: dict = {}
    queue: deque = deque()

    def name(key) -> str:
        if key not in ids:
            ids[key] = f"s{len(ids)}"
            queue.append(key)
        return ids[key]

    empty = frozenset()
    start = (frag.init, (empty, empty, empty))
    b.initial = name(start)
    run_cache: dict = {}
    while queue:
        key = queue.popleft()
        s, info = key
        src = ids[key]
        if s in frag.finals:
            b.finals.add(src)
            b.ws.add(src)
        for lab, t in word_out.get(s, ()):
            b.w(src, (lab,), name((t, info)))
        for acts, t in data_out.get(s, ()):
            ck = (acts, info)
            alts = run_cache.get(ck)
            if alts is None:
                alts = run_cache[ck] = run(acts, info)
            for E, I, U, info2 in alts:
                b.d(src, name((t, info2)), eq=E, neq=I, upd=U)
    return b.build("compiled")


# -- queries -------------------------------------------------------------------------


def _paths_of_words(a: _nfa.Nfa, words: Iterable[tuple]) -> set[Path]:
    return {_nfa.decode(a.alphabet, w)[0] for w in words}


def _shortest(a: _nfa.Nfa) -> set[Path]:
    """Per (start, end) pair, all accepted paths of minimum length."""
    alpha = a.alphabet
    best: dict[tuple[int, int], int] = {}
    # breadth-first over (state, start node, current node)
    frontier: set[tuple[int, int, int]] = set()
    for s in a.initials:
        for l, ts in a.delta[s].items():
            v = alpha.letter(l)[1]
            frontier |= {(t, v, v) for t in ts}
    seen = set(frontier)
    depth = 0
    while frontier:
        for t, u, v in frontier:
            if t in a.finals and (u, v) not in best:
                best[(u, v)] = depth
        nxt = set()
        for t, u, v in frontier:
            for l, ts in a.delta[t].items():
                w = alpha.comp_node(alpha.letter(l)[1])
                for t2 in ts:
                    k = (t2, u, w)
                    if k not in seen:
                        seen.add(k)
                        nxt.add(k)
        frontier = nxt
        depth += 1
    if not best:
        return set()
    out: set[Path] = set()
    limit = max(best.values())
    for w in _nfa.words_up_to(a, limit + 1):
        rho = _nfa.decode(alpha, w)[0]
        if best.get((rho.start, rho.last)) == len(rho):
            out.add(rho)
    return out


def _simple_only(a: _nfa.Nfa, g: DataGraph, cap: int) -> _nfa.Nfa:
    nonsimple = _rdpa.ground(_rdpa.builtin("A_nonsimple"), g, cap)
    simple = _nfa.complement(nonsimple, _nfa.universe(g, 1), cap)
    return _nfa.intersect(a, simple, cap)


def eval_query(q: GpcQuery, g: DataGraph, cap: int = _rdpa.DEFAULT_STATE_CAP) -> set[Path]:
    """Restrictor semantics through the automaton route."""
    a = _rdpa.ground(compile_pattern(q.pattern), g, cap)
    if q.restrictor == "shortest":
        return _shortest(a)
    a = _simple_only(a, g, cap)
    if q.restrictor == "simple":
        return _paths_of_words(a, _nfa.words_up_to(a, g.n))
    return _shortest(a)


def eval_query_enum(q: GpcQuery, g: DataGraph, maxlen: int) -> set[Path]:
    """Restrictor semantics over matches of length at most ``maxlen``.

    Exact for ``simple`` and ``shortestsimple`` once ``maxlen >= |V| - 1``; for
    ``shortest`` it is exact only if every endpoint pair's shortest match fits.
    """
    paths = match_paths(q.pattern, g, maxlen)
    if q.restrictor != "shortest":
        paths = {p for p in paths if is_simple(p)}
        if q.restrictor == "simple":
            return paths
    best: dict[tuple[int, int], int] = {}
    for p in paths:
        k = (p.start, p.last)
        best[k] = min(best.get(k, len(p)), len(p))
    return {p for p in paths if best[(p.start, p.last)] == len(p)}


def satisfies(g: DataGraph, q: GpcQuery, cap: int = _rdpa.DEFAULT_STATE_CAP) -> bool:
    a = _rdpa.ground(compile_pattern(q.pattern), g, cap)
    if q.restrictor != "shortest":
        a = _simple_only(a, g, cap)
    return not _nfa.is_empty(a)


def matched_paths_iter(p: Pattern, g: DataGraph, maxlen: int) -> Iterator[Path]:
    """Matched paths in the deterministic order of ``paths_up_to``."""
    from .graph import paths_up_to

    ms = match_paths(p, g, maxlen)
    for rho in paths_up_to(g, maxlen):
        if rho in ms:
            yield rho


LOOP_PATTERN = (
    "(x) -[a]-> () ( (-[b]-> -[b]-> -[b]->){1..inf} + ((y) ->{3..7} (z))<y ~data z>{1..1} ) () -[b]-> (x)"
)
TWO_B_STEPS = "-[b]-> -[b]->"
