"""Register data path automata (RDPA): construction, simulation and grounding."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Iterable, Sequence

from . import nfa as _nfa
from .errors import InvariantError
from .graph import PAD, DataGraph, DataPath, NaryDataPath, convolve

UNSET = PAD  # registers start out holding the padding token


class _LabelPattern:
    __slots__ = ("tag",)

    def __init__(self, tag: str) -> None:
        self.tag = tag

    def __repr__(self) -> str:
        return self.tag


WILD = _LabelPattern("WILD")  # any label, but not padding
ANY = _LabelPattern("ANY")  # any label or padding

KINDS = ("id", "data")
DEFAULT_STATE_CAP = 10**6


def label_matches(pattern: Any, x: Any) -> bool:
    if pattern is ANY:
        return True
    if pattern is WILD:
        return x is not PAD
    if pattern is PAD:
        return x is PAD
    return pattern == x


@dataclass(frozen=True)
class WordTransition:
    src: str
    labels: tuple
    dst: str


@dataclass(frozen=True)
class DataTransition:
    """``src --E,I,U--> dst``.

    ``eq``/``neq``/``upd`` hold (register, tape) pairs. ``tape_eq``/``tape_neq``
    hold (kind, tape_i, tape_j) comparisons between two input components of
    the same position, needed by the n-ary library automata.
    """

    src: str
    dst: str
    eq: frozenset = frozenset()
    neq: frozenset = frozenset()
    upd: frozenset = frozenset()
    tape_eq: frozenset = frozenset()
    tape_neq: frozenset = frozenset()


@dataclass(frozen=True)
class Configuration:
    state: str
    reg: tuple


@dataclass(frozen=True)
class Rdpa:
    arity: int
    word_states: frozenset
    data_states: frozenset
    initial: str
    finals: frozenset
    registers: tuple  # ((name, kind), ...)
    word_transitions: tuple
    data_transitions: tuple
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise InvariantError("arity must be at least 1")
        if self.word_states & self.data_states:
            raise InvariantError("word and data states must be disjoint")
        if self.initial not in self.data_states:
            raise InvariantError("the initial state must be a data state")
        if not self.finals <= self.word_states:
            raise InvariantError("final states must be word states")
        names = [n for n, _ in self.registers]
        if len(set(names)) != len(names):
            raise InvariantError("duplicate register name")
        for _, k in self.registers:
            if k not in KINDS:
                raise InvariantError(f"unknown register kind {k!r}")
        nreg = len(self.registers)
        for t in self.word_transitions:
            if t.src not in self.word_states or t.dst not in self.data_states:
                raise InvariantError(f"word transition {t.src}->{t.dst} breaks alternation")
            if len(t.labels) != self.arity:
                raise InvariantError("word transition label tuple has wrong arity")
        for t in self.data_transitions:
            if t.src not in self.data_states or t.dst not in self.word_states:
                raise InvariantError(f"data transition {t.src}->{t.dst} breaks alternation")
            for r, tape in t.eq | t.neq | t.upd:
                if not (0 <= r < nreg and 0 <= tape < self.arity):
                    raise InvariantError("register or tape index out of range")
            if t.eq & t.neq:
                raise InvariantError("E and I must be disjoint")
            upd_regs = [r for r, _ in t.upd]
            if len(set(upd_regs)) != len(upd_regs):
                raise InvariantError("a register is updated from two tapes at once")
            for kind, i, j in t.tape_eq | t.tape_neq:
                if kind not in KINDS or not (0 <= i < self.arity and 0 <= j < self.arity):
                    raise InvariantError("bad tape comparison")
            if t.tape_eq & t.tape_neq:
                raise InvariantError("tape equality and inequality must be disjoint")

    @property
    def states(self) -> frozenset:
        return self.word_states | self.data_states

    def reg_kind(self, r: int) -> str:
        return self.registers[r][1]

    def word_out(self, s: str) -> list[WordTransition]:
        idx = self._cache.get("wout")
        if idx is None:
            idx = {}
            for t in self.word_transitions:
                idx.setdefault(t.src, []).append(t)
            self._cache["wout"] = idx
        return idx.get(s, [])

    def data_out(self, s: str) -> list[DataTransition]:
        idx = self._cache.get("dout")
        if idx is None:
            idx = {}
            for t in self.data_transitions:
                idx.setdefault(t.src, []).append(t)
            self._cache["dout"] = idx
        return idx.get(s, [])

    def split(self, pairs: Iterable[tuple[int, int]]) -> tuple[set, set]:
        """Split (register, tape) pairs into their id and data parts."""
        ids, datas = set(), set()
        for r, t in pairs:
            (ids if self.reg_kind(r) == "id" else datas).add((r, t))
        return ids, datas

    def initial_configuration(self) -> Configuration:
        return Configuration(self.initial, (UNSET,) * len(self.registers))


# -- simulation ---------------------------------------------------------------

def _view(kind: str, d: Any) -> Any:
    if d is PAD:
        return PAD
    return d[0] if kind == "id" else d[1]


def _fire(a: Rdpa, t: DataTransition, reg: tuple, sym: Sequence) -> tuple | None:
    for r, tape in t.eq:
        if reg[r] != _view(a.reg_kind(r), sym[tape]):
            return None
    for r, tape in t.neq:
        if reg[r] == _view(a.reg_kind(r), sym[tape]):
            return None
    for kind, i, j in t.tape_eq:
        if _view(kind, sym[i]) != _view(kind, sym[j]):
            return None
    for kind, i, j in t.tape_neq:
        if _view(kind, sym[i]) == _view(kind, sym[j]):
            return None
    if not t.upd:
        return reg
    new = list(reg)
    for r, tape in t.upd:
        new[r] = _view(a.reg_kind(r), sym[tape])
    return tuple(new)


def _is_data_symbol(x: Any) -> bool:
    return x is PAD or (isinstance(x, tuple) and len(x) == 2 and isinstance(x[1], tuple))


def step(a: Rdpa, c: Configuration, sym: Sequence) -> set[Configuration]:
    """All configurations reachable from ``c`` by one transition on ``sym``."""
    sym = tuple(sym)
    if len(sym) != a.arity:
        raise InvariantError("symbol arity mismatch")
    if c.state in a.word_states:
        if any(isinstance(x, tuple) for x in sym):
            raise InvariantError("a word state reads labels, not data values")
        return {
            Configuration(t.dst, c.reg)
            for t in a.word_out(c.state)
            if all(label_matches(p, x) for p, x in zip(t.labels, sym))
        }
    if not all(_is_data_symbol(x) for x in sym):
        raise InvariantError("a data state reads data values, not labels")
    out = set()
    for t in a.data_out(c.state):
        r = _fire(a, t, c.reg, sym)
        if r is not None:
            out.add(Configuration(t.dst, r))
    return out


def accepts(a: Rdpa, ps: Sequence[DataPath] | NaryDataPath) -> bool:
    if isinstance(ps, NaryDataPath):
        word = ps
    else:
        if len(ps) != a.arity:
            raise InvariantError(f"expected {a.arity} data paths, got {len(ps)}")
        word = convolve(ps)
    if word.arity != a.arity:
        raise InvariantError("arity mismatch")
    confs = step(a, a.initial_configuration(), word.values[0])
    for labels, values in zip(word.labels, word.values[1:]):
        if not confs:
            return False
        mid: set[Configuration] = set()
        for c in confs:
            mid |= step(a, c, labels)
        confs = set()
        for c in mid:
            confs |= step(a, c, values)
    return any(c.state in a.finals for c in confs)


# -- grounding ----------------------------------------------------------------

def ground(a: Rdpa, g: DataGraph, cap: int = DEFAULT_STATE_CAP) -> _nfa.Nfa:
    """Product of ``a`` with ``g``: an NFA accepting exactly the convolutions of
    tuples of data paths of ``g`` that ``a`` accepts. Register contents range
    over node indices (id registers) or property classes (data registers)."""
    key = ("ground", id(a), cap)
    hit = g._cache.get(key)
    if hit is not None and hit[0] is a:
        return hit[1]
    m = a.arity
    alpha = _nfa.alphabet(g, m)
    PADC, DONE = _nfa.PADC, _nfa.DONE
    pclass = [g.prop_class(v) for v in g.nodes]
    kinds = [k for _, k in a.registers]

    def view(kind: str, node: int) -> int:
        if node < 0:
            return PADC
        return node if kind == "id" else pclass[node]

    def fire(t: DataTransition, reg: tuple, nodes: tuple) -> tuple | None:
        for r, tape in t.eq:
            if reg[r] != view(kinds[r], nodes[tape]):
                return None
        for r, tape in t.neq:
            if reg[r] == view(kinds[r], nodes[tape]):
                return None
        for kind, i, j in t.tape_eq:
            if view(kind, nodes[i]) != view(kind, nodes[j]):
                return None
        for kind, i, j in t.tape_neq:
            if view(kind, nodes[i]) == view(kind, nodes[j]):
                return None
        if not t.upd:
            return reg
        new = list(reg)
        for r, tape in t.upd:
            new[r] = view(kinds[r], nodes[tape])
        return tuple(new)

    init = ("init",)
    reg0 = (PADC,) * len(a.registers)

    def succ(k):
        if k == init:
            for vs in product(g.nodes, repeat=m):
                l = alpha.intern((0, *vs))
                for t in a.data_out(a.initial):
                    r = fire(t, reg0, vs)
                    if r is not None:
                        yield l, (t.dst, r, vs)
            return
        p, reg, cur = k
        wts = a.word_out(p)
        if not wts:
            return
        opts = []
        for c in cur:
            o = [(PADC, PAD, DONE)]
            if c != DONE:
                for lab, w in g.out(c):
                    o.append((alpha.comp(lab, w), lab, w))
            opts.append(o)
        for combo in product(*opts):
            comps = tuple(x[0] for x in combo)
            if all(x == PADC for x in comps):
                continue
            labels = tuple(x[1] for x in combo)
            nxt = tuple(x[2] for x in combo)
            l = None
            for wt in wts:
                if not all(label_matches(pt, x) for pt, x in zip(wt.labels, labels)):
                    continue
                for t in a.data_out(wt.dst):
                    r = fire(t, reg, nxt)
                    if r is not None:
                        if l is None:
                            l = alpha.intern((1, *comps))
                        yield l, (t.dst, r, nxt)

    res = _nfa.explore(alpha, [init], succ, lambda k: k != init and k[0] in a.finals, cap)
    res = _nfa.trim(res)
    g._cache[key] = (a, res)
    return res


# -- construction helpers -------------------------------------------------------

class Builder:
    def __init__(self, arity: int, registers: Sequence[tuple[str, str]] = ()) -> None:
        self.arity = arity
        self.registers = list(registers)
        self.ws: set[str] = set()
        self.ds: set[str] = set()
        self.wt: list[WordTransition] = []
        self.dt: list[DataTransition] = []
        self.finals: set[str] = set()
        self.initial: str | None = None

    def reg(self, name: str) -> int:
        for i, (n, _) in enumerate(self.registers):
            if n == name:
                return i
        raise KeyError(name)

    def w(self, src: str, labels: Sequence, dst: str) -> None:
        self.ws.add(src)
        self.ds.add(dst)
        self.wt.append(WordTransition(src, tuple(labels), dst))

    def d(self, src: str, dst: str, eq=(), neq=(), upd=(), teq=(), tneq=()) -> None:
        self.ds.add(src)
        self.ws.add(dst)
        fix = lambda ps: frozenset((self.reg(r) if isinstance(r, str) else r, t) for r, t in ps)
        norm = lambda ts: frozenset((k, min(i, j), max(i, j)) for k, i, j in ts)
        self.dt.append(DataTransition(src, dst, fix(eq), fix(neq), fix(upd), norm(teq), norm(tneq)))

    def build(self, name: str = "") -> Rdpa:
        assert self.initial is not None
        ds = self.ds | {self.initial}
        ws = self.ws | self.finals
        return Rdpa(
            self.arity,
            frozenset(ws),
            frozenset(ds),
            self.initial,
            frozenset(self.finals),
            tuple(self.registers),
            tuple(dict.fromkeys(self.wt)),
            tuple(dict.fromkeys(self.dt)),
            name,
        )


def union(a: Rdpa, b: Rdpa, name: str = "") -> Rdpa:
    """Disjoint union with a fresh initial state copying both initial transitions."""
    if a.arity != b.arity:
        raise InvariantError("arity mismatch")
    off = len(a.registers)
    regs = tuple((f"1.{n}", k) for n, k in a.registers) + tuple((f"2.{n}", k) for n, k in b.registers)
    bb = Builder(a.arity, regs)
    bb.initial = "init"

    def copy(x: Rdpa, tag: str, shift: int):
        sh = lambda ps: [(r + shift, t) for r, t in ps]
        for t in x.word_transitions:
            bb.w(f"{tag}{t.src}", t.labels, f"{tag}{t.dst}")
        for t in x.data_transitions:
            srcs = [f"{tag}{t.src}"] + (["init"] if t.src == x.initial else [])
            for s in srcs:
                bb.d(s, f"{tag}{t.dst}", sh(t.eq), sh(t.neq), sh(t.upd), t.tape_eq, t.tape_neq)
        bb.ws.update(f"{tag}{s}" for s in x.word_states)
        bb.ds.update(f"{tag}{s}" for s in x.data_states)
        bb.finals.update(f"{tag}{s}" for s in x.finals)

    copy(a, "1.", 0)
    copy(b, "2.", off)
    return bb.build(name or f"({a.name}|{b.name})")


# -- library ---------------------------------------------------------------------

def _others(arity: int, fill: dict[int, Any]) -> tuple:
    return tuple(fill.get(i, ANY) for i in range(arity))


def a_even() -> Rdpa:
    b = Builder(1)
    b.initial = "i"
    b.finals = {"even"}
    b.d("i", "even")
    b.w("even", (WILD,), "d_odd")
    b.d("d_odd", "odd")
    b.w("odd", (WILD,), "d_even")
    b.d("d_even", "even")
    return b.build("A_even")


def a_true() -> Rdpa:
    b = Builder(1)
    b.initial = "i"
    b.finals = {"s"}
    b.d("i", "s")
    b.w("s", (WILD,), "d")
    b.d("d", "s")
    return b.build("A_true")


def a_false() -> Rdpa:
    b = Builder(1)
    b.initial = "i"
    return b.build("A_false")


def a_repeat(name: str = "A_repeat") -> Rdpa:
    b = Builder(1, [("r", "id")])
    b.initial = "i"
    b.finals = {"found"}
    b.d("i", "skip")
    b.d("i", "held", upd=[("r", 0)])
    b.w("skip", (WILD,), "d_skip")
    b.d("d_skip", "skip")
    b.d("d_skip", "held", upd=[("r", 0)])
    b.w("held", (WILD,), "d_held")
    b.d("d_held", "held")
    b.d("d_held", "found", eq=[("r", 0)])
    b.w("found", (WILD,), "d_found")
    b.d("d_found", "found")
    return b.build(name)


def a_visit() -> Rdpa:
    # stores the first id of tape 0, accepts once it shows up on tape 1
    b = Builder(2, [("r", "id")])
    b.initial = "i"
    b.finals = {"found"}
    b.d("i", "found", upd=[("r", 0)], teq=[("id", 0, 1)])
    b.d("i", "search", upd=[("r", 0)])
    b.w("search", (ANY, ANY), "d_search")
    b.d("d_search", "search")
    b.d("d_search", "found", eq=[("r", 1)])
    b.w("found", (ANY, ANY), "d_found")
    b.d("d_found", "found")
    return b.build("A_visit")


def a_prefix(sigma: Sequence[str]) -> Rdpa:
    # tape 0 is a prefix of tape 1
    b = Builder(2)
    b.initial = "i"
    b.finals = {"sync", "rest"}
    b.d("i", "sync", teq=[("id", 0, 1)])
    for a in sigma:
        b.w("sync", (a, a), "d_sync")
    b.d("d_sync", "sync", teq=[("id", 0, 1)])
    b.w("sync", (PAD, WILD), "d_rest")
    b.w("rest", (PAD, WILD), "d_rest")
    b.d("d_rest", "rest")
    return b.build("A_prefix")


def _last_compare(kind: str, equal: bool, arity: int = 2, tapes: tuple[int, int] = (0, 1),
                  first_equal: bool = False, b: Builder | None = None,
                  tag: str = "") -> Builder:
    """Compare the last ``kind`` values of two tapes (equal or different).

    Endings are guessed at data positions; the register keeps the last value
    of the tape that ends first.
    """
    own = b is None
    if b is None:
        b = Builder(arity, [("r", kind)])
        b.initial = "i"
    x, y = tapes
    cmp_r = "eq" if equal else "neq"
    first = [("id", x, y)] if first_equal else []
    both_act = _others(arity, {x: WILD, y: WILD})
    x_done = _others(arity, {x: PAD, y: WILD})
    y_done = _others(arity, {x: WILD, y: PAD})
    both_done = _others(arity, {x: PAD, y: PAD})
    S = lambda s: tag + s
    b.finals |= {S("end_same"), S("end_split")}

    def endings(src: str, extra_teq: list) -> None:
        b.d(src, S("act"), teq=extra_teq)
        if equal:
            b.d(src, S("end_same"), teq=extra_teq + [(kind, x, y)])
        else:
            b.d(src, S("end_same"), teq=extra_teq, tneq=[(kind, x, y)])
        b.d(src, S("x_done"), upd=[(b.reg("r"), x)], teq=extra_teq)
        b.d(src, S("y_done"), upd=[(b.reg("r"), y)], teq=extra_teq)

    endings(b.initial if own else S("i"), first)
    b.w(S("act"), both_act, S("d_act"))
    endings(S("d_act"), [])
    b.w(S("x_done"), x_done, S("d_x"))
    b.d(S("d_x"), S("x_done"))
    b.d(S("d_x"), S("end_split"), **{cmp_r: [(b.reg("r"), y)]})
    b.w(S("y_done"), y_done, S("d_y"))
    b.d(S("d_y"), S("y_done"))
    b.d(S("d_y"), S("end_split"), **{cmp_r: [(b.reg("r"), x)]})
    if arity > 2:
        for s in ("end_same", "end_split"):
            b.w(S(s), both_done, S(f"d_{s}"))
            b.d(S(f"d_{s}"), S(s))
    return b


def a_same() -> Rdpa:
    return _last_compare("id", True, first_equal=True).build("A_same")


def a_last_id() -> Rdpa:
    return _last_compare("id", True).build("A_lastid")


def a_last_data() -> Rdpa:
    return _last_compare("data", True).build("A_lastdata")


def a_le() -> Rdpa:
    b = Builder(2)
    b.initial = "i"
    b.finals = {"s"}
    b.d("i", "s")
    b.w("s", (WILD, WILD), "d")
    b.w("s", (PAD, WILD), "d")
    b.d("d", "s")
    return b.build("A_le")


def a_lt() -> Rdpa:
    b = Builder(2)
    b.initial = "i"
    b.finals = {"shorter"}
    b.d("i", "level")
    b.w("level", (WILD, WILD), "d_level")
    b.d("d_level", "level")
    b.w("level", (PAD, WILD), "d_shorter")
    b.w("shorter", (PAD, WILD), "d_shorter")
    b.d("d_shorter", "shorter")
    return b.build("A_lt")


def a_succ(label: str) -> Rdpa:
    # |tape1| = |tape0| + 1 and the last label of tape 1 is ``label``
    b = Builder(2)
    b.initial = "i"
    b.finals = {"done"}
    b.d("i", "level")
    b.w("level", (WILD, WILD), "d_level")
    b.d("d_level", "level")
    b.w("level", (PAD, label), "d_done")
    b.d("d_done", "done")
    return b.build(f"A_succ[{label}]")


def a_simple(sigma: Sequence[str]) -> Rdpa:
    """Triples (rho, tau, nu): if tau and nu are prefixes of rho of different
    lengths then their last ids differ. Built as a union of four branches."""
    b = Builder(3, [("r", "id")])
    b.initial = "i"

    # branches 1 and 2: tape k is not a prefix of tape 0
    for k in (1, 2):
        t = f"np{k}."
        b.finals.add(t + "found")
        b.d("i", t + "scan")
        b.d("i", t + "found", tneq=[("id", 0, k)])
        b.w(t + "scan", _others(3, {k: PAD}), t + "d_scan")
        b.d(t + "d_scan", t + "scan")
        b.w(t + "scan", _others(3, {k: WILD}), t + "d_cmp")
        b.d(t + "d_cmp", t + "scan")
        b.d(t + "d_cmp", t + "found", tneq=[("id", 0, k)])
        for x in sigma:
            for y in sigma:
                if x != y:
                    b.w(t + "scan", _others(3, {0: x, k: y}), t + "d_hit")
        b.w(t + "scan", _others(3, {0: PAD, k: WILD}), t + "d_hit")
        b.d(t + "d_hit", t + "found")
        b.w(t + "found", _others(3, {}), t + "d_found")
        b.d(t + "d_found", t + "found")

    # branch 3: tapes 1 and 2 have the same length
    b.finals.add("eq.s")
    b.d("i", "eq.s")
    b.w("eq.s", (ANY, WILD, WILD), "eq.d")
    b.w("eq.s", (ANY, PAD, PAD), "eq.d")
    b.d("eq.d", "eq.s")

    # branch 4: last ids of tapes 1 and 2 differ
    b.ds.add("ld.i")
    _last_compare("id", False, arity=3, tapes=(1, 2), b=b, tag="ld.")
    for t in [t for t in b.dt if t.src == "ld.i"]:
        b.dt.append(DataTransition("i", t.dst, t.eq, t.neq, t.upd, t.tape_eq, t.tape_neq))
    return b.build("A_simple")


def a_3val() -> Rdpa:
    regs = [("r1", "data"), ("r2", "data"), ("r3", "data")]
    b = Builder(1, regs)
    b.initial = "i"
    b.finals = {"c3"}
    b.d("i", "c1", upd=[("r1", 0)])
    for k in (1, 2, 3):
        b.w(f"c{k}", (WILD,), f"d{k}")
        for j in range(1, k + 1):
            b.d(f"d{k}", f"c{k}", eq=[(f"r{j}", 0)])
        if k < 3:
            b.d(f"d{k}", f"c{k + 1}", neq=[(f"r{j}", 0) for j in range(1, k + 1)], upd=[(f"r{k + 1}", 0)])
    return b.build("A_3val")


def fig2() -> Rdpa:
    """One data register x: store d0, then accept once a later value equals it.

    The final state's data self-loop is split through ``q3d`` so that word and
    data states keep alternating.
    """
    b = Builder(1, [("x", "data")])
    b.initial = "q0"
    b.finals = {"q3"}
    b.d("q0", "q1", upd=[("x", 0)])
    b.w("q1", ("a",), "q2")
    b.d("q2", "q1")
    b.d("q2", "q3", eq=[("x", 0)])
    b.w("q3", ("a",), "q3d")
    b.d("q3d", "q3")
    return b.build("A_fig2")


_NEEDS_SIGMA = {"A_prefix": a_prefix, "A_simple": a_simple}
_PLAIN = {
    "A_even": a_even,
    "A_repeat": a_repeat,
    "A_nonsimple": lambda: a_repeat("A_nonsimple"),
    "A_visit": a_visit,
    "A_same": a_same,
    "A_le": a_le,
    "A_lt": a_lt,
    "A_3val": a_3val,
    "A_lastid": a_last_id,
    "A_lastdata": a_last_data,
    "A_true": a_true,
    "A_false": a_false,
    "A_fig2": fig2,
}
LIBRARY = tuple(sorted(list(_PLAIN) + list(_NEEDS_SIGMA) + ["A_succ[<label>]"]))


def builtin(name: str, sigma: Sequence[str] | None = None) -> Rdpa:
    """Look up a library automaton. Label-sensitive ones need ``sigma``."""
    key = ("builtin", name, tuple(sigma) if sigma is not None else None)
    hit = _BUILTIN_CACHE.get(key)
    if hit is not None:
        return hit
    if name in _PLAIN:
        a = _PLAIN[name]()
    elif name in _NEEDS_SIGMA:
        if sigma is None:
            raise KeyError(f"{name} depends on the label alphabet; pass sigma")
        a = _NEEDS_SIGMA[name](tuple(sigma))
    elif name.startswith("A_succ[") and name.endswith("]"):
        a = a_succ(name[len("A_succ[") : -1])
    else:
        raise KeyError(f"unknown automaton {name!r}")
    _BUILTIN_CACHE[key] = a
    return a


_BUILTIN_CACHE: dict = {}


# -- serialization ------------------------------------------------------------------

def _lab_out(x: Any) -> Any:
    if x is PAD:
        return {"pad": True}
    if x is WILD:
        return {"wild": True}
    if x is ANY:
        return {"any": True}
    return x


def _lab_in(x: Any) -> Any:
    if isinstance(x, dict):
        if x.get("pad"):
            return PAD
        if x.get("wild"):
            return WILD
        if x.get("any"):
            return ANY
        raise InvariantError(f"bad label pattern {x!r}")
    return str(x)


def to_obj(a: Rdpa) -> dict:
    def pairs(ps):
        ids, datas = a.split(ps)
        return {"id": sorted(map(list, ids)), "data": sorted(map(list, datas))}

    def tp(ts):
        return sorted([k, i, j] for k, i, j in ts)

    return {
        "name": a.name,
        "arity": a.arity,
        "registers": [{"name": n, "kind": k} for n, k in a.registers],
        "initial": a.initial,
        "finals": sorted(a.finals),
        "states": [{"name": s, "kind": "word"} for s in sorted(a.word_states)]
        + [{"name": s, "kind": "data"} for s in sorted(a.data_states)],
        "word_transitions": [
            {"src": t.src, "labels": [_lab_out(x) for x in t.labels], "dst": t.dst} for t in a.word_transitions
        ],
        "data_transitions": [
            {
                "src": t.src,
                "dst": t.dst,
                "E": pairs(t.eq),
                "I": pairs(t.neq),
                "U": pairs(t.upd),
                "tape_eq": tp(t.tape_eq),
                "tape_neq": tp(t.tape_neq),
            }
            for t in a.data_transitions
        ],
    }


def from_obj(obj: dict) -> Rdpa:
    try:
        regs = tuple((r["name"], r["kind"]) for r in obj.get("registers", []))
        ws = frozenset(s["name"] for s in obj["states"] if s["kind"] == "word")
        ds = frozenset(s["name"] for s in obj["states"] if s["kind"] == "data")

        def pairs(x):
            if not x:
                return frozenset()
            if isinstance(x, dict):
                items = list(x.get("id", [])) + list(x.get("data", []))
            else:
                items = list(x)
            return frozenset((int(r), int(t)) for r, t in items)

        def tp(x):
            return frozenset((k, min(int(i), int(j)), max(int(i), int(j))) for k, i, j in (x or []))

        wts = tuple(
            WordTransition(t["src"], tuple(_lab_in(x) for x in t["labels"]), t["dst"]) for t in obj["word_transitions"]
        )
        dts = tuple(
            DataTransition(
                t["src"],
                t["dst"],
                pairs(t.get("E")),
                pairs(t.get("I")),
                pairs(t.get("U")),
                tp(t.get("tape_eq")),
                tp(t.get("tape_neq")),
            )
            for t in obj["data_transitions"]
        )
        a = Rdpa(int(obj["arity"]), ws, ds, obj["initial"], frozenset(obj["finals"]), regs, wts, dts, obj.get("name", ""))
    except (KeyError, TypeError) as e:
        raise InvariantError(f"malformed automaton JSON: {e}") from None
    return a


def dumps(a: Rdpa) -> str:
    return json.dumps(to_obj(a), indent=1, ensure_ascii=False)


def loads(text: str | bytes) -> Rdpa:
    return from_obj(json.loads(text))


def to_dot(a: Rdpa) -> str:
    def fmt(ps):
        return "{" + ",".join(f"{a.registers[r][0]}@{t}" for r, t in sorted(ps)) + "}"

    lines = ["digraph rdpa {", "  rankdir=LR;"]
    for s in sorted(a.states):
        shape = "doublecircle" if s in a.finals else ("box" if s in a.data_states else "circle")
        lines.append(f'  "{s}" [shape={shape}];')
    lines.append(f'  __init [shape=point]; __init -> "{a.initial}";')
    for t in a.word_transitions:
        lab = ",".join(str(_lab_out(x)) if not isinstance(x, str) else x for x in t.labels)
        lines.append(f'  "{t.src}" -> "{t.dst}" [label="{lab}"];')
    for t in a.data_transitions:
        lab = f"{fmt(t.eq)},{fmt(t.neq)},{fmt(t.upd)}"
        if t.tape_eq or t.tape_neq:
            lab += f" ={sorted(t.tape_eq)} !={sorted(t.tape_neq)}"
        lines.append(f'  "{t.src}" -> "{t.dst}" [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines)
