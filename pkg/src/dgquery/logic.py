"""First-order logics over data graphs with path variables, automata atoms and
transitive closure: syntax, the automata-based evaluator, the universal-fragment
route, a bounded reference checker, and the automaton-to-closure-logic translator."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence, Union as TUnion

from . import nfa as _nfa
from . import rdpa as _rdpa
from .errors import CapExceeded, DgqError, ParseError
from .graph import PAD, DataGraph, Path, dp, paths_up_to

NODE, PATH = "node", "path"
DEFAULT_TUPLE_CAP = 10**6

# -- AST --------------------------------------------------------------------------


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class NodeEq:
    x: str
    y: str


@dataclass(frozen=True)
class PathEq:
    p: str
    q: str


@dataclass(frozen=True)
class Reach:
    x: str
    p: str
    y: str


@dataclass(frozen=True)
class InAut:
    paths: tuple[str, ...]
    aut: object  # an Rdpa or a library name


@dataclass(frozen=True)
class EdgeAtom:
    label: str
    x: str
    y: str


@dataclass(frozen=True)
class DataEq:
    x: str
    y: str


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    kind: str
    body: "Formula"


@dataclass(frozen=True)
class Star:
    """Closure of the relation body(xs, ys), applied to (args_x, args_y)."""

    body: "Formula"
    xs: tuple[str, ...]
    ys: tuple[str, ...]
    args_x: tuple[str, ...]
    args_y: tuple[str, ...]


Formula = TUnion[TrueF, FalseF, NodeEq, PathEq, Reach, InAut, EdgeAtom, DataEq, Not, And, Or, Exists, Star]


def forall(var: str, kind: str, body: Formula) -> Formula:
    return Not(Exists(var, kind, Not(body)))


def exists_all(binders: Sequence[tuple[str, str]], body: Formula) -> Formula:
    for v, k in reversed(list(binders)):
        body = Exists(v, k, body)
    return body


def forall_all(binders: Sequence[tuple[str, str]], body: Formula) -> Formula:
    for v, k in reversed(list(binders)):
        body = forall(v, k, body)
    return body


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return TrueF()
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return FalseF()
    # balanced, so long disjunctions do not recurse deeply
    while len(fs) > 1:
        fs = [Or(fs[i], fs[i + 1]) if i + 1 < len(fs) else fs[i] for i in range(0, len(fs), 2)]
    return fs[0]


def star_apply(body: Formula, xs: Sequence[str], ys: Sequence[str], args_x: Sequence[str] | None = None,
               args_y: Sequence[str] | None = None) -> Star:
    xs, ys = tuple(xs), tuple(ys)
    ax = tuple(args_x) if args_x is not None else xs
    ay = tuple(args_y) if args_y is not None else ys
    if not (len(xs) == len(ys) == len(ax) == len(ay)) or not xs:
        raise ParseError("closure vectors must be non-empty and of equal arity")
    return Star(body, xs, ys, ax, ay)


# -- variables, kinds, fragments ------------------------------------------------------


def var_kinds(f: Formula) -> dict[str, str]:
    """Kinds of the free variables of ``f``; raises on inconsistent use."""
    out: dict[str, str] = {}

    def note(v: str, k: str, bound: dict[str, str]) -> None:
        if v in bound:
            if bound[v] != k:
                raise ParseError(f"variable {v!r} used both as a node and as a path variable")
            return
        if out.get(v, k) != k:
            raise ParseError(f"variable {v!r} used both as a node and as a path variable")
        out[v] = k

    def rec(f: Formula, bound: dict[str, str]) -> None:
        if isinstance(f, (NodeEq, EdgeAtom, DataEq)):
            note(f.x, NODE, bound)
            note(f.y, NODE, bound)
        elif isinstance(f, PathEq):
            note(f.p, PATH, bound)
            note(f.q, PATH, bound)
        elif isinstance(f, Reach):
            note(f.x, NODE, bound)
            note(f.p, PATH, bound)
            note(f.y, NODE, bound)
        elif isinstance(f, InAut):
            for p in f.paths:
                note(p, PATH, bound)
        elif isinstance(f, Not):
            rec(f.arg, bound)
        elif isinstance(f, (And, Or)):
            rec(f.left, bound)
            rec(f.right, bound)
        elif isinstance(f, Exists):
            rec(f.body, {**bound, f.var: f.kind})
        elif isinstance(f, Star):
            inner = {**bound, **{v: NODE for v in f.xs + f.ys}}
            rec(f.body, inner)
            for v in f.args_x + f.args_y:
                note(v, NODE, bound)

    rec(f, {})
    return out


def free_vars(f: Formula) -> frozenset[str]:
    return frozenset(var_kinds(f))


def _walk(f: Formula):
    yield f
    if isinstance(f, Not):
        yield from _walk(f.arg)
    elif isinstance(f, (And, Or)):
        yield from _walk(f.left)
        yield from _walk(f.right)
    elif isinstance(f, (Exists, Star)):
        yield from _walk(f.body)


def is_universal_fragment(f: Formula) -> bool:
    """A prefix of universal path quantifiers over a quantifier-free matrix."""
    while True:
        if isinstance(f, Not) and isinstance(f.arg, Exists) and isinstance(f.arg.body, Not):
            if f.arg.kind != PATH:
                return False
            f = f.arg.body.arg
            continue
        break
    return all(not isinstance(s, (Exists, Star)) for s in _walk(f))


def fragment_ok(f: Formula, dialect: str) -> bool:
    nodes = list(_walk(f))
    has_path = any(isinstance(s, (PathEq, Reach, InAut)) or (isinstance(s, Exists) and s.kind == PATH) for s in nodes)
    has_star = any(isinstance(s, Star) for s in nodes)
    has_data = any(isinstance(s, (EdgeAtom, DataEq)) for s in nodes)
    if dialect == "fostar-erdpq":
        return True
    if dialect == "fostar-data":
        return not has_path
    if dialect == "foerdpq":
        return not has_star and not has_data
    if dialect == "uerdpq":
        return not has_star and not has_data and is_universal_fragment(f)
    if dialect == "rdpq":
        return rdpq_parts(f) is not None
    raise ValueError(f"unknown dialect {dialect!r}")


def rdpq_parts(f: Formula) -> tuple[str, str, str, object] | None:
    """(x, pi, y, A) if f is of the shape  exists pi. (x, pi, y) & pi in A."""
    while isinstance(f, Exists) and f.kind == NODE:
        f = f.body
    if not (isinstance(f, Exists) and f.kind == PATH and isinstance(f.body, And)):
        return None
    a, b = f.body.left, f.body.right
    if isinstance(b, Reach):
        a, b = b, a
    if isinstance(a, Reach) and isinstance(b, InAut) and a.p == f.var and b.paths == (f.var,):
        return a.x, f.var, a.y, b.aut
    return None


# -- surface syntax ---------------------------------------------------------------------

_TOK = re.compile(
    r"\s*(?:(?P<ref>@\"[^\"]*\"|@[^\s()&|,]+)|(?P<op>->|!=|~data|≡data|[()\[\],.;|&!=@])|(?P<str>\"[^\"]*\")|(?P<name>[A-Za-z_][A-Za-z0-9_#']*(?:\[[^\]\s]+\])?))"
)
_KEYWORDS = {"exists", "forall", "in", "notin", "node", "path", "true", "false", "TC"}


def _lex(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at offset {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group("ref"):
            out.append(("ref", m.group("ref")[1:].strip('"')))
        elif m.group("op"):
            out.append(("op", m.group("op")))
        elif m.group("str"):
            out.append(("str", m.group("str")[1:-1]))
        else:
            out.append(("name", m.group("name")))
    out.append(("eof", ""))
    return out


class _FParser:
    def __init__(self, text: str, resolver: Callable[[str], object] | None) -> None:
        self.t = _lex(text)
        self.i = 0
        self.resolver = resolver

    def peek(self, k: int = 0) -> tuple[str, str]:
        return self.t[min(self.i + k, len(self.t) - 1)]

    def at(self, val: str, k: int = 0) -> bool:
        return self.peek(k)[1] == val and self.peek(k)[0] in ("op", "name")

    def expect(self, val: str) -> None:
        if not self.at(val):
            raise ParseError(f"expected {val!r} but found {self.peek()[1] or 'end of input'!r}")
        self.i += 1

    def name(self) -> str:
        k, v = self.peek()
        if k != "name" or v in _KEYWORDS:
            raise ParseError(f"expected a variable name but found {v or 'end of input'!r}")
        self.i += 1
        return v

    def formula(self) -> Formula:
        f = self.conj()
        while self.at("|"):
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.at("&"):
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.at("!"):
            self.i += 1
            return Not(self.unary())
        if self.at("exists") or self.at("forall"):
            q = self.peek()[1]
            self.i += 1
            binders = [self.binder()]
            while self.at(","):
                self.i += 1
                binders.append(self.binder())
            self.expect(".")
            body = self.formula()
            return (exists_all if q == "exists" else forall_all)(binders, body)
        return self.primary()

    def binder(self) -> tuple[str, str | None]:
        kind = None
        if self.at("node") or self.at("path"):
            kind = self.peek()[1]
            self.i += 1
        return self.name(), kind

    def names(self, stop: str) -> list[str]:
        out = [self.name()]
        while self.at(","):
            self.i += 1
            out.append(self.name())
        return out

    def autref(self) -> object:
        k, v = self.peek()
        if k == "ref":
            ref = "@" + v
        elif k == "name":
            ref = v
        else:
            raise ParseError(f"expected an automaton name or @file but found {v or 'end of input'!r}")
        self.i += 1
        if self.resolver is not None:
            return self.resolver(ref)
        return ref

    def membership(self, paths: list[str]) -> Formula:
        neg = self.peek()[1] == "notin"
        self.i += 1
        f = InAut(tuple(paths), self.autref())
        return Not(f) if neg else f

    def primary(self) -> Formula:
        k, v = self.peek()
        if self.at("true") or self.at("false"):
            self.i += 1
            return TrueF() if v == "true" else FalseF()
        if self.at("TC"):
            return self.star()
        if self.at("("):
            # tuple membership, reachability triple or a parenthesized formula
            j, names = self.i + 1, []
            while self.t[j][0] == "name" and self.t[j][1] not in _KEYWORDS:
                names.append(self.t[j][1])
                if self.t[j + 1][1] == ",":
                    j += 2
                    continue
                break
            if names and self.t[j + 1][1] == ")":
                after = self.t[j + 2][1]
                if after in ("in", "notin"):
                    self.i = j + 2
                    return self.membership(names)
                if len(names) == 3:
                    self.i = j + 2
                    return Reach(names[0], names[1], names[2])
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        if k == "name" and v.startswith("E_") and self.at("(", 1):
            label = v[2:]
            self.i += 2
            x = self.name()
            self.expect(",")
            y = self.name()
            self.expect(")")
            return EdgeAtom(label, x, y)
        x = self.name()
        if self.at("in") or self.at("notin"):
            return self.membership([x])
        if self.at("="):
            self.i += 1
            return _Eq(x, self.name())
        if self.at("!="):
            self.i += 1
            return Not(_Eq(x, self.name()))
        if self.at("~data") or self.at("≡data"):
            self.i += 1
            return DataEq(x, self.name())
        raise ParseError(f"unexpected token {self.peek()[1] or 'end of input'!r} after {x!r}")

    def star(self) -> Formula:
        self.i += 1
        self.expect("[")
        xs = self.names("->")
        self.expect("->")
        ys = self.names("]")
        self.expect("]")
        self.expect("(")
        body = self.formula()
        self.expect(")")
        ax, ay = xs, ys
        if self.at("("):
            self.i += 1
            ax = self.names("->")
            self.expect("->")
            ay = self.names(")")
            self.expect(")")
        if len(xs) != len(ys) or len(ax) != len(xs) or len(ay) != len(xs):
            raise ParseError("closure vectors have unequal arity")
        return Star(body, tuple(xs), tuple(ys), tuple(ax), tuple(ay))


@dataclass(frozen=True)
class _Eq:
    """Equality whose kind is decided after parsing."""

    x: str
    y: str


def _resolve_kinds(f: Formula) -> Formula:
    """Infer variable kinds, turning placeholder equalities into node/path ones."""
    # union-find over binding sites
    parent: dict = {}
    kind: dict = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def set_kind(site, k: str) -> None:
        r = find(site)
        if kind.get(r, k) != k:
            raise ParseError(f"variable {site[1]!r} used both as a node and as a path variable")
        kind[r] = k

    def unify(a, b) -> None:
        ra, rb = find(a), find(b)
        if ra == rb:
            return
        ka, kb = kind.get(ra), kind.get(rb)
        if ka and kb and ka != kb:
            raise ParseError(f"variables {a[1]!r} and {b[1]!r} compared across kinds")
        parent[ra] = rb
        if ka and not kb:
            kind[rb] = ka

    counter = [0]
    sites: dict[int, tuple] = {}

    def site(env: dict, v: str):
        return env.get(v, ("free", v))

    def rec(f, env: dict) -> None:
        if isinstance(f, (NodeEq, EdgeAtom, DataEq)):
            set_kind(site(env, f.x), NODE)
            set_kind(site(env, f.y), NODE)
        elif isinstance(f, PathEq):
            set_kind(site(env, f.p), PATH)
            set_kind(site(env, f.q), PATH)
        elif isinstance(f, _Eq):
            unify(site(env, f.x), site(env, f.y))
        elif isinstance(f, Reach):
            set_kind(site(env, f.x), NODE)
            set_kind(site(env, f.p), PATH)
            set_kind(site(env, f.y), NODE)
        elif isinstance(f, InAut):
            for p in f.paths:
                set_kind(site(env, p), PATH)
        elif isinstance(f, Not):
            rec(f.arg, env)
        elif isinstance(f, (And, Or)):
            rec(f.left, env)
            rec(f.right, env)
        elif isinstance(f, Exists):
            counter[0] += 1
            s = ("bound", f.var, counter[0])
            sites[id(f)] = s
            if f.kind:
                set_kind(s, f.kind)
            rec(f.body, {**env, f.var: s})
        elif isinstance(f, Star):
            counter[0] += 1
            inner = dict(env)
            for v in f.xs + f.ys:
                s = ("bound", v, counter[0])
                set_kind(s, NODE)
                inner[v] = s
            sites[id(f)] = inner
            rec(f.body, inner)
            for v in f.args_x + f.args_y:
                set_kind(site(env, v), NODE)

    rec(f, {})

    def k_of(s) -> str:
        return kind.get(find(s), NODE)

    def build(f, env: dict):
        if isinstance(f, _Eq):
            k = k_of(site(env, f.x))
            return PathEq(f.x, f.y) if k == PATH else NodeEq(f.x, f.y)
        if isinstance(f, Not):
            return Not(build(f.arg, env))
        if isinstance(f, (And, Or)):
            return type(f)(build(f.left, env), build(f.right, env))
        if isinstance(f, Exists):
            s = sites[id(f)]
            return Exists(f.var, k_of(s), build(f.body, {**env, f.var: s}))
        if isinstance(f, Star):
            return Star(build(f.body, sites[id(f)]), f.xs, f.ys, f.args_x, f.args_y)
        return f

    out = build(f, {})
    var_kinds(out)
    return out


def parse_formula(text: str, resolver: Callable[[str], object] | None = None, dialect: str | None = None) -> Formula:
    """Parse a formula. Automaton references stay names unless ``resolver`` maps them."""
    p = _FParser(text, resolver)
    f = p.formula()
    if p.peek()[0] != "eof":
        raise ParseError(f"unexpected trailing input {p.peek()[1]!r}")
    f = _resolve_kinds(f)
    if dialect is not None and not fragment_ok(f, dialect):
        raise ParseError(f"formula is outside the {dialect} fragment")
    return f


def _aut_name(a: object) -> str:
    if isinstance(a, _rdpa.Rdpa):
        return a.name or "A_anonymous"
    return str(a)


def to_text(f: Formula) -> str:
    def rec(f, top: bool = False) -> str:
        if isinstance(f, TrueF):
            return "true"
        if isinstance(f, FalseF):
            return "false"
        if isinstance(f, (NodeEq, PathEq)):
            a, b = (f.x, f.y) if isinstance(f, NodeEq) else (f.p, f.q)
            return f"{a} = {b}"
        if isinstance(f, Reach):
            return f"({f.x}, {f.p}, {f.y})"
        if isinstance(f, InAut):
            lhs = f.paths[0] if len(f.paths) == 1 else "(" + ", ".join(f.paths) + ")"
            return f"{lhs} in {_aut_name(f.aut)}"
        if isinstance(f, EdgeAtom):
            return f"E_{f.label}({f.x}, {f.y})"
        if isinstance(f, DataEq):
            return f"{f.x} ~data {f.y}"
        if isinstance(f, Not):
            if isinstance(f.arg, InAut):
                s = rec(f.arg)
                return s.replace(" in ", " notin ", 1)
            if isinstance(f.arg, (NodeEq, PathEq)):
                return rec(f.arg).replace(" = ", " != ")
            if isinstance(f.arg, Exists) and isinstance(f.arg.body, Not):
                e = f.arg
                s = f"forall {e.kind} {e.var} . {rec(e.body.arg, True)}"
                return s if top else f"({s})"
            return "!" + rec(f.arg)
        if isinstance(f, (And, Or)):
            op = " & " if isinstance(f, And) else " | "
            parts = []

            # only the left spine flattens, matching left-associative parsing
            g = f
            while type(g) is type(f):
                parts.append(rec(g.right))
                g = g.left
            parts.append(rec(g))
            parts.reverse()
            s = op.join(parts)
            return s if top else f"({s})"
        if isinstance(f, Exists):
            s = f"exists {f.kind} {f.var} . {rec(f.body, True)}"
            return s if top else f"({s})"
        if isinstance(f, Star):
            s = f"TC[{', '.join(f.xs)} -> {', '.join(f.ys)}]({rec(f.body, True)})"
            if (f.args_x, f.args_y) != (f.xs, f.ys):
                s += f"({', '.join(f.args_x)} -> {', '.join(f.args_y)})"
            return s
        raise TypeError(f)

    return rec(f, True)


# -- relations ----------------------------------------------------------------------------


@dataclass
class Table:
    """A finite relation over node variables (rows of node indices)."""

    vars: tuple[str, ...]
    rows: set


@dataclass
class Auto:
    """A relation over node and path variables as a multi-tape automaton."""

    vars: tuple[str, ...]
    kinds: tuple[str, ...]
    nfa: _nfa.Nfa


Rel = TUnion[Table, Auto]


@dataclass
class Answer:
    vars: tuple[str, ...]
    kinds: tuple[str, ...]
    rows: frozenset | None = None
    nfa: _nfa.Nfa | None = field(default=None, repr=False)

    def __bool__(self) -> bool:
        if self.rows is not None:
            return bool(self.rows)
        return not _nfa.is_empty(self.nfa)

    @property
    def value(self) -> bool:
        return bool(self)


def transitive_closure(R: Iterable[tuple[tuple, tuple]], domain: Iterable[tuple] = (), strict: bool = False,
                       seeds: Iterable[tuple] | None = None) -> set[tuple[tuple, tuple]]:
    """Closure under chains u1 R u2 R ... R un.

    By default chains of a single vector count (so every vector of ``domain``
    relates to itself); ``strict`` requires at least one step. With ``seeds``
    only chains starting there are explored.
    """
    succ: dict[tuple, set[tuple]] = {}
    for a, b in R:
        succ.setdefault(a, set()).add(b)
    starts = set(seeds) if seeds is not None else set(succ) | set(domain)
    out = set()
    for s in starts:
        seen: set[tuple] = set()
        stack = list(succ.get(s, ()))
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            stack.extend(succ.get(u, ()))
        if not strict:
            seen.add(s)
        out.update((s, t) for t in seen)
    return out


class Evaluator:
    def __init__(self, g: DataGraph, strict_star: bool = False, cap: int = _rdpa.DEFAULT_STATE_CAP,
                 tuple_cap: int = DEFAULT_TUPLE_CAP, subset_cap: int = _nfa.DEFAULT_SUBSET_CAP,
                 resolver: Callable[[str], _rdpa.Rdpa] | None = None) -> None:
        self.g = g
        self.strict_star = strict_star
        self.cap = cap
        self.tuple_cap = tuple_cap
        self.subset_cap = subset_cap
        self.resolver = resolver

    # -- helpers -----------------------------------------------------------------
    def aut(self, a: object) -> _rdpa.Rdpa:
        if isinstance(a, _rdpa.Rdpa):
            return a
        if self.resolver is not None:
            return self.resolver(a)
        return _rdpa.builtin(str(a), self.g.sigma)

    def check_size(self, k: int) -> None:
        if self.g.n ** k > self.tuple_cap:
            raise CapExceeded(f"{self.g.n}^{k} node tuples exceed the cap of {self.tuple_cap}")

    def all_rows(self, k: int) -> set[tuple]:
        self.check_size(k)
        return set(product(self.g.nodes, repeat=k))

    def to_auto(self, r: Rel) -> Auto:
        if isinstance(r, Auto):
            return r
        return Auto(r.vars, (NODE,) * len(r.vars), _nfa.from_tuples(self.g, r.rows, len(r.vars)))

    def to_table(self, a: Auto) -> Rel:
        if all(k == NODE for k in a.kinds):
            if not a.vars:
                return Table((), {()} if not _nfa.is_empty(a.nfa) else set())
            return Table(a.vars, _nfa.start_tuples(a.nfa))
        return a

    def node_tapes(self, kinds: Sequence[str]) -> list[int]:
        return [i for i, k in enumerate(kinds) if k == NODE]

    def universe(self, kinds: Sequence[str]) -> _nfa.Nfa:
        return _nfa.universe(self.g, len(kinds), self.node_tapes(kinds))

    def collapse(self, vars_: Sequence[str], kinds: Sequence[str], a: _nfa.Nfa) -> Auto:
        """Merge tapes that carry the same variable."""
        vars_, kinds = list(vars_), list(kinds)
        i = 0
        while i < len(vars_):
            j = len(vars_) - 1
            while j > i:
                if vars_[j] == vars_[i]:
                    a = _nfa.project(_nfa.restrict_equal(a, i, j), j)
                    del vars_[j], kinds[j]
                j -= 1
            i += 1
        return Auto(tuple(vars_), tuple(kinds), a)

    def align(self, a: Auto, vars_: Sequence[str], kinds: Sequence[str]) -> _nfa.Nfa:
        cur_vars, cur_kinds, n = list(a.vars), list(a.kinds), a.nfa
        for v, k in zip(vars_, kinds):
            if v not in cur_vars:
                n = _nfa.cylindrify(n, len(cur_vars), node=(k == NODE))
                cur_vars.append(v)
                cur_kinds.append(k)
        order = [cur_vars.index(v) for v in vars_]
        return _nfa.permute(n, order)

    # -- table algebra ---------------------------------------------------------
    def extend(self, t: Table, vars_: Sequence[str]) -> Table:
        missing = [v for v in vars_ if v not in t.vars]
        if not missing:
            return t
        if len(t.rows) * self.g.n ** len(missing) > self.tuple_cap:
            raise CapExceeded(f"padding a relation with {len(missing)} variables exceeds {self.tuple_cap} tuples")
        rows = {r + ext for r in t.rows for ext in product(self.g.nodes, repeat=len(missing))}
        return Table(t.vars + tuple(missing), rows)

    def reorder(self, t: Table, vars_: Sequence[str]) -> Table:
        if tuple(vars_) == t.vars:
            return t
        idx = [t.vars.index(v) for v in vars_]
        return Table(tuple(vars_), {tuple(r[i] for i in idx) for r in t.rows})

    def join(self, a: Table, b: Table) -> Table:
        shared = [v for v in a.vars if v in b.vars]
        extra = [v for v in b.vars if v not in a.vars]
        ia = [a.vars.index(v) for v in shared]
        ib = [b.vars.index(v) for v in shared]
        ie = [b.vars.index(v) for v in extra]
        index: dict[tuple, list[tuple]] = {}
        for r in b.rows:
            index.setdefault(tuple(r[i] for i in ib), []).append(tuple(r[i] for i in ie))
        rows = set()
        for r in a.rows:
            for e in index.get(tuple(r[i] for i in ia), ()):
                rows.add(r + e)
        if len(rows) > self.tuple_cap:
            raise CapExceeded(f"intermediate relation exceeds {self.tuple_cap} tuples")
        return Table(a.vars + tuple(extra), rows)

    def filter_not(self, a: Table, b: Table) -> Table:
        idx = [a.vars.index(v) for v in b.vars]
        return Table(a.vars, {r for r in a.rows if tuple(r[i] for i in idx) not in b.rows})

    # -- evaluation --------------------------------------------------------------
    def ev(self, f: Formula) -> Rel:
        g = self.g
        if isinstance(f, TrueF):
            return Table((), {()})
        if isinstance(f, FalseF):
            return Table((), set())
        if isinstance(f, NodeEq):
            if f.x == f.y:
                return Table((f.x,), {(v,) for v in g.nodes})
            return Table((f.x, f.y), {(v, v) for v in g.nodes})
        if isinstance(f, EdgeAtom):
            if f.label not in g.sigma:
                raise DgqError(f"unknown label {f.label!r}")
            pairs = {(u, v) for u, a, v in g.edges if a == f.label}
            if f.x == f.y:
                return Table((f.x,), {(u,) for u, v in pairs if u == v})
            return Table((f.x, f.y), pairs)
        if isinstance(f, DataEq):
            if g.k == 0:
                raise DgqError("data comparisons need property values (k = 0 here)")
            if f.x == f.y:
                return Table((f.x,), {(v,) for v in g.nodes})
            return Table((f.x, f.y), {(u, v) for u in g.nodes for v in g.nodes if g.props_of(u) == g.props_of(v)})
        if isinstance(f, PathEq):
            if f.p == f.q:
                return Auto((f.p,), (PATH,), _nfa.universe(g, 1))
            return Auto((f.p, f.q), (PATH, PATH), _nfa.restrict_equal(_nfa.universe(g, 2), 0, 1))
        if isinstance(f, Reach):
            return self.collapse((f.x, f.p, f.y), (NODE, PATH, NODE), reach_nfa(g))
        if isinstance(f, InAut):
            a = self.aut(f.aut)
            if a.arity != len(f.paths):
                raise DgqError(f"automaton {a.name} has arity {a.arity}, used with {len(f.paths)} paths")
            n = _rdpa.ground(a, g, self.cap)
            return self.collapse(f.paths, (PATH,) * len(f.paths), n)
        if isinstance(f, Not):
            if isinstance(f.arg, Not):
                return self.ev(f.arg.arg)
            r = self.ev(f.arg)
            if isinstance(r, Table):
                return Table(r.vars, self.all_rows(len(r.vars)) - r.rows)
            return Auto(r.vars, r.kinds, _nfa.complement(r.nfa, self.universe(r.kinds), self.subset_cap))
        if isinstance(f, Or):
            a, b = self.ev(f.left), self.ev(f.right)
            if isinstance(a, Table) and isinstance(b, Table):
                allv = a.vars + tuple(v for v in b.vars if v not in a.vars)
                a2 = self.reorder(self.extend(a, allv), allv)
                b2 = self.reorder(self.extend(b, allv), allv)
                return Table(allv, a2.rows | b2.rows)
            a, b = self.to_auto(a), self.to_auto(b)
            kinds = dict(zip(a.vars, a.kinds)) | dict(zip(b.vars, b.kinds))
            allv = a.vars + tuple(v for v in b.vars if v not in a.vars)
            ks = tuple(kinds[v] for v in allv)
            return Auto(allv, ks, _nfa.union(self.align(a, allv, ks), self.align(b, allv, ks)))
        if isinstance(f, And):
            return self.ev_and(f)
        if isinstance(f, Exists):
            r = self.ev(f.body)
            if f.var not in r.vars:
                return r
            i = r.vars.index(f.var)
            if isinstance(r, Table):
                rest = r.vars[:i] + r.vars[i + 1 :]
                return Table(rest, {row[:i] + row[i + 1 :] for row in r.rows})
            rest_v = r.vars[:i] + r.vars[i + 1 :]
            rest_k = r.kinds[:i] + r.kinds[i + 1 :]
            if not rest_v:
                return Table((), set() if _nfa.is_empty(r.nfa) else {()})
            return self.to_table(Auto(rest_v, rest_k, _nfa.project(r.nfa, i)))
        if isinstance(f, Star):
            return self.ev_star(f, None)
        raise TypeError(f"not a formula: {f!r}")

    def ev_and(self, f: And) -> Rel:
        parts: list[Formula] = []

        def flat(h):
            if isinstance(h, And):
                flat(h.left)
                flat(h.right)
            else:
                parts.append(h)

        flat(f)
        tables: list[Table] = []
        negs: list[Table] = []
        autos: list[Auto] = []
        stars: list[Star] = []
        for p in parts:
            if isinstance(p, Star):
                stars.append(p)
                continue
            if isinstance(p, Not) and not isinstance(p.arg, Not):
                kinds = var_kinds(p.arg)
                if all(k == NODE for k in kinds.values()) and not any(isinstance(s, Star) for s in _walk(p.arg)):
                    r = self.ev(p.arg)
                    if isinstance(r, Table):
                        negs.append(r)
                        continue
            r = self.ev(p)
            (tables if isinstance(r, Table) else autos).append(r)
        # join positive tables, smallest and most connected first
        cur: Table | None = None
        pending = sorted(tables, key=lambda t: len(t.rows))
        while pending:
            if cur is None:
                cur = pending.pop(0)
                continue
            pending.sort(key=lambda t: (not (set(t.vars) & set(cur.vars)), len(t.rows)))
            cur = self.join(cur, pending.pop(0))
            if not cur.rows:
                break
        if cur is None:
            cur = Table((), {()})
        for s in stars:
            seeds = None
            if set(s.args_x) <= set(cur.vars) and cur.vars:
                idx = [cur.vars.index(v) for v in s.args_x]
                seeds = {tuple(r[i] for i in idx) for r in cur.rows}
            cur = self.join(cur, self.ev_star(s, seeds))
        for t in negs:
            if not set(t.vars) <= set(cur.vars):
                cur = self.extend(cur, cur.vars + tuple(v for v in t.vars if v not in cur.vars))
            cur = self.filter_not(cur, t)
        if not autos:
            return cur
        if not cur.rows:
            kinds = {}
            for a in autos:
                kinds.update(zip(a.vars, a.kinds))
            kinds.update((v, NODE) for v in cur.vars)
            vs = tuple(kinds)
            return Auto(vs, tuple(kinds[v] for v in vs), _nfa.empty(self.g, len(vs)))
        autos.sort(key=lambda a: (len(a.vars), a.nfa.n_states))
        acc = autos[0]
        rest = autos[1:] + ([self.to_auto(cur)] if cur.vars or not cur.rows else [])
        for b in rest:
            kinds = dict(zip(acc.vars, acc.kinds)) | dict(zip(b.vars, b.kinds))
            allv = acc.vars + tuple(v for v in b.vars if v not in acc.vars)
            ks = tuple(kinds[v] for v in allv)
            n = _nfa.intersect(self.align(acc, allv, ks), self.align(b, allv, ks), self.cap)
            acc = Auto(allv, ks, n)
        return self.to_table(acc)

    def ev_star(self, f: Star, seeds: set[tuple] | None) -> Table:
        body = self.ev(f.body)
        if isinstance(body, Auto):
            if any(k == PATH for k in body.kinds):
                raise DgqError("closure bodies may not have free path variables")
            body = self.to_table(body)
        k = len(f.xs)
        self.check_size(k)
        closure_vars = f.xs + f.ys
        params = tuple(v for v in body.vars if v not in closure_vars)
        t = self.reorder(self.extend(body, params + closure_vars), params + closure_vars)
        np_ = len(params)
        groups: dict[tuple, list] = {}
        for r in t.rows:
            groups.setdefault(r[:np_], []).append((r[np_ : np_ + k], r[np_ + k :]))
        if np_ and len(groups) < len(self.all_rows(np_)):
            for pv in product(self.g.nodes, repeat=np_):
                groups.setdefault(pv, [])
        if not np_:
            groups.setdefault((), [])
        domain = () if seeds is not None or self.strict_star else list(product(self.g.nodes, repeat=k))
        out_vars: list[str] = list(params)
        for v in f.args_x + f.args_y:
            if v not in out_vars:
                out_vars.append(v)
        rows = set()
        for pv, rel in groups.items():
            cl = transitive_closure(rel, domain, self.strict_star, seeds)
            for a, b in cl:
                binding: dict[str, int] = dict(zip(params, pv))
                ok = True
                for v, val in zip(f.args_x + f.args_y, a + b):
                    if binding.setdefault(v, val) != val:
                        ok = False
                        break
                if ok:
                    rows.add(tuple(binding[v] for v in out_vars))
            if len(rows) > self.tuple_cap:
                raise CapExceeded(f"closure exceeds {self.tuple_cap} tuples")
        return Table(tuple(out_vars), rows)


def reach_nfa(g: DataGraph) -> _nfa.Nfa:
    """Tapes (x, pi, y) with x, y nodes: pi runs from x to y."""
    key = ("reach",)
    if key in g._cache:
        return g._cache[key]
    alpha = _nfa.alphabet(g, 3)
    PADC = _nfa.PADC

    def succ(k):
        if k == "init":
            for u in g.nodes:
                for w in g.nodes:
                    yield alpha.intern((0, u, u, w)), (u, w)
            return
        cur, w = k
        for lab, v in g.out(cur):
            yield alpha.intern((1, PADC, alpha.comp(lab, v), PADC)), (v, w)

    res = _nfa.trim(_nfa.explore(alpha, ["init"], succ, lambda k: k != "init" and k[0] == k[1]))
    g._cache[key] = res
    return res


def _answer(r: Rel, kinds_of: dict[str, str]) -> Answer:
    if isinstance(r, Table):
        return Answer(r.vars, tuple(kinds_of.get(v, NODE) for v in r.vars), rows=frozenset(r.rows))
    return Answer(r.vars, r.kinds, nfa=r.nfa)


def evaluate(f: Formula, g: DataGraph, strict_star: bool = False, cap: int = _rdpa.DEFAULT_STATE_CAP,
             tuple_cap: int = DEFAULT_TUPLE_CAP, resolver: Callable[[str], _rdpa.Rdpa] | None = None) -> Answer:
    """Exact evaluation by induction on the formula over grounded automata."""
    kinds = var_kinds(f)
    ev = Evaluator(g, strict_star, cap, tuple_cap, resolver=resolver)
    return _answer(ev.ev(f), kinds)


def satisfying_nodes(ans: Answer, order: Sequence[str]) -> set[tuple]:
    """Rows of a node-only answer, reordered to ``order``."""
    if ans.rows is None:
        raise DgqError("answer has free path variables")
    idx = [ans.vars.index(v) for v in order]
    return {tuple(r[i] for i in idx) for r in ans.rows}


# -- the universal fragment ---------------------------------------------------------------


def _strip_universal(f: Formula) -> tuple[list[str], Formula]:
    prefix = []
    while isinstance(f, Not) and isinstance(f.arg, Exists) and isinstance(f.arg.body, Not) and f.arg.kind == PATH:
        prefix.append(f.arg.var)
        f = f.arg.body.arg
    return prefix, f


def _nnf_dnf(f: Formula, neg: bool = False) -> list[list[tuple[bool, Formula]]]:
    """DNF of (not f if neg else f) as lists of (positive, atom) literals."""
    if isinstance(f, Not):
        return _nnf_dnf(f.arg, not neg)
    if isinstance(f, TrueF) or isinstance(f, FalseF):
        val = isinstance(f, TrueF) != neg
        return [[]] if val else []
    if isinstance(f, (And, Or)):
        is_and = isinstance(f, And) != neg
        a, b = _nnf_dnf(f.left, neg), _nnf_dnf(f.right, neg)
        if is_and:
            return [x + y for x in a for y in b]
        return a + b
    return [[(not neg, f)]]


def evaluate_universal(f: Formula, g: DataGraph, cap: int = _rdpa.DEFAULT_STATE_CAP,
                       resolver: Callable[[str], _rdpa.Rdpa] | None = None) -> Answer:
    """Evaluate a universal-fragment formula by testing non-emptiness of
    intersections of grounded automata and complements, one per disjunct of
    the negated matrix."""
    if not is_universal_fragment(f):
        raise DgqError("formula is not in the universal fragment")
    kinds = var_kinds(f)
    prefix, matrix = _strip_universal(f)
    ev = Evaluator(g, cap=cap, resolver=resolver)
    free = sorted(kinds)
    fkinds = [kinds[v] for v in free]
    tape_vars = free + [p for p in prefix if p not in free]
    tape_kinds = fkinds + [PATH] * (len(tape_vars) - len(free))
    m = len(tape_vars)
    U = ev.universe(tape_kinds) if m else None
    counter: _nfa.Nfa | None = None  # assignments of the free variables refuting the matrix
    sentence_false = False
    for lits in _nnf_dnf(matrix, neg=True):
        if m == 0:
            # closed matrix without quantified paths: plain Boolean evaluation
            sentence_false |= all(bool(ev.ev(a).rows) == pos for pos, a in lits)
            continue
        acc = U
        for pos, atom in lits:
            n = ev.align(ev.to_auto(ev.ev(atom)), tape_vars, tape_kinds)
            acc = _nfa.intersect(acc, n if pos else _nfa.complement(n, U, ev.subset_cap), cap)
            if _nfa.is_empty(acc):
                break
        if _nfa.is_empty(acc):
            continue
        if not free:
            sentence_false = True
            break
        for _ in range(m - len(free)):
            acc = _nfa.project(acc, len(free))
        counter = acc if counter is None else _nfa.union(counter, acc)
    if not free:
        return Answer((), (), rows=frozenset() if sentence_false else frozenset({()}))
    Uf = ev.universe(fkinds)
    good = Uf if counter is None else _nfa.complement(counter, Uf, ev.subset_cap)
    if all(k == NODE for k in fkinds):
        return Answer(tuple(free), tuple(fkinds), rows=frozenset(_nfa.start_tuples(good)))
    return Answer(tuple(free), tuple(fkinds), nfa=_nfa.trim(good))


# -- bounded reference semantics ---------------------------------------------------------------


def holds_bounded(f: Formula, g: DataGraph, maxlen: int, env: dict | None = None, strict_star: bool = False,
                  resolver: Callable[[str], _rdpa.Rdpa] | None = None) -> bool:
    """Direct recursive semantics; path quantifiers range over paths of length
    at most ``maxlen``. Exact for formulas without path quantifiers."""
    env = dict(env or {})
    paths = list(paths_up_to(g, maxlen))
    auts: dict = {}

    def aut(a):
        if isinstance(a, _rdpa.Rdpa):
            return a
        if a not in auts:
            auts[a] = resolver(a) if resolver else _rdpa.builtin(str(a), g.sigma)
        return auts[a]

    def rec(f, e) -> bool:
        if isinstance(f, TrueF):
            return True
        if isinstance(f, FalseF):
            return False
        if isinstance(f, NodeEq):
            return e[f.x] == e[f.y]
        if isinstance(f, PathEq):
            return e[f.p] == e[f.q]
        if isinstance(f, Reach):
            p = e[f.p]
            return p.start == e[f.x] and p.last == e[f.y]
        if isinstance(f, InAut):
            return _rdpa.accepts(aut(f.aut), [dp(g, e[p]) for p in f.paths])
        if isinstance(f, EdgeAtom):
            return g.has_edge(e[f.x], f.label, e[f.y])
        if isinstance(f, DataEq):
            return g.props_of(e[f.x]) == g.props_of(e[f.y])
        if isinstance(f, Not):
            return not rec(f.arg, e)
        if isinstance(f, And):
            return rec(f.left, e) and rec(f.right, e)
        if isinstance(f, Or):
            return rec(f.left, e) or rec(f.right, e)
        if isinstance(f, Exists):
            dom = g.nodes if f.kind == NODE else paths
            return any(rec(f.body, {**e, f.var: d}) for d in dom)
        if isinstance(f, Star):
            k = len(f.xs)
            vecs = list(product(g.nodes, repeat=k))
            rel = [
                (a, b)
                for a in vecs
                for b in vecs
                if rec(f.body, {**e, **dict(zip(f.xs, a)), **dict(zip(f.ys, b))})
            ]
            src = tuple(e[v] for v in f.args_x)
            dst = tuple(e[v] for v in f.args_y)
            return (src, dst) in transitive_closure(rel, vecs, strict_star, [src])
        raise TypeError(f)

    return rec(f, env)


# -- witnesses ---------------------------------------------------------------------------------


def witness(f: Formula, g: DataGraph, **kw) -> dict[str, object] | None:
    """For a sentence  exists v1 ... vn . body, an assignment satisfying body."""
    binders = []
    while isinstance(f, Exists):
        binders.append((f.var, f.kind))
        f = f.body
    if not binders:
        return None
    ev = Evaluator(g, **kw)
    r = ev.to_auto(ev.ev(f))
    names = [v for v, _ in binders]
    kinds = dict(binders)
    target = tuple(names)
    tk = tuple(kinds[v] for v in names)
    extra = [v for v in r.vars if v not in names]
    if extra:
        return None
    n = ev.align(r, target, tk)
    w = _nfa.witness(n)
    if w is None:
        return None
    paths = _nfa.decode(n.alphabet, w)
    return {v: (paths[i].start if kinds[v] == NODE else paths[i]) for i, v in enumerate(names)}


# -- automaton to closure-logic translation ------------------------------------------------------


def _controls(a: _rdpa.Rdpa) -> tuple[list, list, list]:
    """Abstract run structure: (controls, initial moves, steps).

    A control is (word state, frozenset of written registers).
    """
    if a.arity != 1:
        raise DgqError("the translation handles unary automata only")

    def usable(t: _rdpa.DataTransition, written: frozenset) -> bool:
        if t.tape_neq:
            return False
        return all(r in written for r, _ in t.eq)

    init_moves = []
    for t in a.data_out(a.initial):
        if usable(t, frozenset()):
            init_moves.append((t, (t.dst, frozenset(r for r, _ in t.upd))))
    controls = {c for _, c in init_moves}
    stack = list(controls)
    steps = []
    while stack:
        c = stack.pop()
        p, written = c
        for wt in a.word_out(p):
            lab = wt.labels[0]
            if lab is PAD:
                continue
            for dt in a.data_out(wt.dst):
                if not usable(dt, written):
                    continue
                c2 = (dt.dst, written | frozenset(r for r, _ in dt.upd))
                steps.append((c, lab, dt, c2))
                if c2 not in controls:
                    controls.add(c2)
                    stack.append(c2)
    order = sorted(controls, key=lambda c: (str(c[0]), sorted(c[1])))
    return order, init_moves, steps


def translate_rdpq_to_fostar(a: _rdpa.Rdpa, g: DataGraph, s: str = "s", t: str = "t") -> Formula:
    """A closure-logic formula phi(s, t), using only edge atoms, node equality and
    data equality, that holds iff some path from s to t has a data path accepted
    by ``a``. Control states are encoded as bit vectors over two distinct nodes
    v, w; register contents are represented by nodes carrying the value."""
    if g.n < 2:
        raise DgqError("the translation needs a graph with at least two nodes")
    controls, init_moves, steps = _controls(a)
    nbits = max(1, math.ceil(math.log2(max(1, len(controls)))))
    code = {c: i for i, c in enumerate(controls)}
    nreg = len(a.registers)
    X = [f"x{i}" for i in range(nbits)]
    Z = [f"z{i}" for i in range(nreg)]
    X2 = [v + "'" for v in X]
    Z2 = [v + "'" for v in Z]
    V, W, Y, Y2 = "v", "w", "y", "y'"

    def bits(xs: list[str], c) -> list[Formula]:
        i = code[c]
        return [NodeEq(x, W if (i >> b) & 1 else V) for b, x in enumerate(xs)]

    def same(kind: str, z: str, y: str) -> Formula:
        return NodeEq(z, y) if kind == "id" else DataEq(z, y)

    init_parts = []
    for dt, c in init_moves:
        lits = bits(X, c) + [NodeEq(Y, s)]
        upd = {r for r, _ in dt.upd}
        for r in range(nreg):
            lits.append(NodeEq(Z[r], Y if r in upd else V))
        init_parts.append(conj(lits))
    step_parts = []
    for c, lab, dt, c2 in steps:
        if lab is PAD:
            continue
        labels = list(g.sigma) if lab in (_rdpa.WILD, _rdpa.ANY) else ([lab] if lab in g.sigma else [])
        if not labels:
            continue
        written = c[1]
        upd = {r for r, _ in dt.upd}
        lits = bits(X, c) + bits(X2, c2)
        lits.append(disj(EdgeAtom(l, Y, Y2) for l in labels))
        for r, _ in dt.eq:
            lits.append(same(a.reg_kind(r), Z[r], Y2))
        for r, _ in dt.neq:
            if r in written:
                lits.append(Not(same(a.reg_kind(r), Z[r], Y2)))
        for r in range(nreg):
            lits.append(NodeEq(Z2[r], Y2 if r in upd else Z[r]))
        step_parts.append(conj(lits))
    final_parts = [conj(bits(X2, c) + [NodeEq(Y2, t)]) for c in controls if c[0] in a.finals]
    src = (V, W, *X, Y, *Z)
    dst = (V, W, *X2, Y2, *Z2)
    # inside the closure the two anchors are carried along unchanged
    sv, sw = "v'", "w'"
    body_src = (V, W, *X, Y, *Z)
    body_dst = (sv, sw, *X2, Y2, *Z2)
    body = And(And(NodeEq(sv, V), NodeEq(sw, W)), disj(step_parts))
    closure = Star(body, body_src, body_dst, src, dst)
    inner = exists_all(
        [(x, NODE) for x in X + [Y] + Z + X2 + [Y2] + Z2],
        conj([disj(init_parts), closure, disj(final_parts)]),
    )
    return Exists(V, NODE, Exists(W, NODE, And(Not(NodeEq(V, W)), inner)))


def rdpq_formula(a: object, x: str = "s", y: str = "t", p: str = "pi") -> Formula:
    return Exists(p, PATH, And(Reach(x, p, y), InAut((p,), a)))


# -- library ---------------------------------------------------------------------------------------


def phi_even() -> Formula:
    return rdpq_formula("A_even", "x", "y")


def phi_h(p: str = "pi") -> Formula:
    """pi is a Hamiltonian path: no repeated id, and every path's first node is on pi."""
    return And(Not(InAut((p,), "A_repeat")), forall("omega", PATH, InAut(("omega", p), "A_visit")))


def hamiltonian_sentence() -> Formula:
    return Exists("pi", PATH, phi_h("pi"))


def phi_simple(p: str = "pi") -> Formula:
    """Universal form of simplicity: every pair of prefixes of different length ends at different nodes."""
    return forall_all(
        [("tau", PATH), ("nu", PATH)],
        InAut((p, "tau", "nu"), "A_simple"),
    )


def phi_shortest(aut: object, p: str = "pi") -> Formula:
    """pi matches ``aut`` and no path with the same endpoints matching ``aut`` is shorter."""
    return And(
        InAut((p,), aut),
        forall("omega", PATH, Or(Not(InAut(("omega",), aut)), Or(Not(InAut(("omega", p), "A_same")), InAut((p, "omega"), "A_le")))),
    )


def phi_shortestsimple(aut: object, p: str = "pi") -> Formula:
    return And(
        And(InAut((p,), aut), phi_simple(p)),
        forall(
            "omega",
            PATH,
            Or(
                Not(And(InAut(("omega",), aut), phi_simple("omega"))),
                Or(Not(InAut(("omega", p), "A_same")), InAut((p, "omega"), "A_le")),
            ),
        ),
    )


def a_4ids() -> _rdpa.Rdpa:
    """At least four distinct node ids along the path (three id registers)."""
    b = _rdpa.Builder(1, [("r1", "id"), ("r2", "id"), ("r3", "id")])
    b.initial = "i"
    b.finals = {"c4"}
    b.d("i", "c1", upd=[("r1", 0)])
    for k in (1, 2, 3):
        b.w(f"c{k}", (_rdpa.WILD,), f"d{k}")
        b.d(f"d{k}", f"c{k}")
        regs = [(f"r{j}", 0) for j in range(1, k + 1)]
        b.d(f"d{k}", f"c{k + 1}", neq=regs, upd=[(f"r{k + 1}", 0)] if k < 3 else [])
    b.w("c4", (_rdpa.WILD,), "d4")
    b.d("d4", "c4")
    return b.build("A_4ids")


def q_4nodes() -> Formula:
    return Exists("s", NODE, Exists("t", NODE, rdpq_formula(a_4ids(), "s", "t")))


def datalink(x: str = "x", y: str = "y") -> Formula:
    """x has an OUT-neighbour z, and some node with z's data has an IN-edge to y."""
    return Exists("z", NODE, And(EdgeAtom("OUT", x, "z"), Exists("x1", NODE, And(EdgeAtom("IN", "x1", y), DataEq("x1", "z")))))


def dataconnection(x: str = "x", y: str = "y") -> Formula:
    return Star(datalink("x", "y"), ("x",), ("y",), (x,), (y,))


def datalink_encoding(n: int, arcs: Sequence[tuple[int, int]]) -> DataGraph:
    """Encode a directed graph: arc (u, w) becomes u -OUT-> s_uw and f_uw -IN-> w,
    where s_uw and f_uw share a data value no other node carries."""
    nodes = [(f"v{i + 1}", (f"node{i + 1}",)) for i in range(n)]
    edges = []
    for j, (u, w) in enumerate(sorted(set(arcs))):
        nodes.append((f"s{j}", (f"arc{j}",)))
        nodes.append((f"f{j}", (f"arc{j}",)))
        edges.append((f"v{u + 1}", "OUT", f"s{j}"))
        edges.append((f"f{j}", "IN", f"v{w + 1}"))
    return DataGraph.build(["IN", "OUT"], 1, nodes, edges)


FIG4_SOURCE = (5, [(0, 3), (1, 3), (2, 1), (3, 4)])  # v1->v4, v2->v4, v3->v2, v4->v5


def fig4_graph() -> DataGraph:
    return datalink_encoding(*FIG4_SOURCE)


def hamiltonian_reduction_graph(n: int, arcs: Sequence[tuple[int, int]]) -> DataGraph:
    """Layered copy of a directed graph on nodes 0..n-1: layer i holds a copy of
    every node carrying that node's number as data; arcs go from layer i-1 to
    layer i, labelled a between the first two and the last two layers and b
    elsewhere."""
    nodes = [(f"{v}@{i}", (str(v),)) for i in range(1, n + 1) for v in range(n)]
    edges = []
    for i in range(2, n + 1):
        lab = "a" if i in (2, n) else "b"
        for u, w in arcs:
            edges.append((f"{u}@{i - 1}", lab, f"{w}@{i}"))
    return DataGraph.build(["a", "b"], 1, nodes, edges)


def a_reduction_reject() -> _rdpa.Rdpa:
    """Accepts unless the labels spell a b* a and all data values are distinct."""
    W = _rdpa.WILD
    b = _rdpa.Builder(1, [("r", "data")])
    b.initial = "i"
    # label branch: recognise words outside a b* a
    b.finals |= {"L0", "Lbad", "La"}
    b.d("i", "L0")
    b.w("L0", ("b",), "dLbad")
    b.w("L0", ("a",), "dLa")
    b.d("dLa", "La")
    b.w("La", ("b",), "dLa2")
    b.d("dLa2", "La")
    b.w("La", ("a",), "dLend")
    b.d("dLend", "Lend")
    b.w("Lend", (W,), "dLbad")
    b.d("dLbad", "Lbad")
    b.w("Lbad", (W,), "dLbad")
    # data branch: some data value repeats
    b.finals.add("Dfound")
    b.d("i", "Dskip")
    b.d("i", "Dheld", upd=[("r", 0)])
    b.w("Dskip", (W,), "dDskip")
    b.d("dDskip", "Dskip")
    b.d("dDskip", "Dheld", upd=[("r", 0)])
    b.w("Dheld", (W,), "dDheld")
    b.d("dDheld", "Dheld")
    b.d("dDheld", "Dfound", eq=[("r", 0)])
    b.w("Dfound", (W,), "dDfound")
    b.d("dDfound", "Dfound")
    return b.build("A_reduction")


def reduction_sentence() -> Formula:
    return Exists("pi", PATH, Not(InAut(("pi",), a_reduction_reject())))


LIBRARY = {
    "phi_even": phi_even,
    "hamiltonian": hamiltonian_sentence,
    "q_4nodes": q_4nodes,
    "datalink": datalink,
    "dataconnection": dataconnection,
    "reduction": reduction_sentence,
}


def builtin_formula(name: str) -> Formula:
    try:
        return LIBRARY[name]()
    except KeyError:
        raise KeyError(f"unknown formula {name!r}; known: {', '.join(sorted(LIBRARY))}") from None
