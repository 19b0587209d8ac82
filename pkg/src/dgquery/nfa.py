"""Multi-tape finite automata over the letters of a fixed data graph.

A word over ``m`` tapes is a sequence of letters. The first letter is a *start
letter* ``(0, v_1, ..., v_m)`` carrying the first node of every tape; every
later letter is a *step letter* ``(1, c_1, ..., c_m)`` where each component is
either ``PADC`` or an encoded (label, node) pair. A data-path position and the
label leading into it are therefore read together, which keeps the
label/data alternation implicit. Letters are interned per (graph, arity).
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Callable, Hashable, Iterable, Iterator, Sequence

from .errors import CapExceeded, InvariantError
from .graph import DataGraph, Path

PADC = -1
DONE = -2  # tape finished (used inside state keys)
DEFAULT_SUBSET_CAP = 2**20


class Alphabet:
    def __init__(self, graph: DataGraph, arity: int) -> None:
        self.graph = graph
        self.arity = arity
        self._index: dict[tuple, int] = {}
        self._letters: list[tuple] = []

    def intern(self, letter: tuple) -> int:
        i = self._index.get(letter)
        if i is None:
            i = self._index[letter] = len(self._letters)
            self._letters.append(letter)
        return i

    def lookup(self, letter: tuple) -> int | None:
        return self._index.get(letter)

    def letter(self, i: int) -> tuple:
        return self._letters[i]

    def is_start(self, i: int) -> bool:
        return self._letters[i][0] == 0

    def is_pad(self, i: int) -> bool:
        l = self._letters[i]
        return l[0] == 1 and all(c == PADC for c in l[1:])

    # component helpers
    def comp(self, label: str, node: int) -> int:
        return self.graph.label_index(label) * self.graph.n + node

    def comp_node(self, c: int) -> int:
        return c % self.graph.n

    def comp_label(self, c: int) -> str:
        return self.graph.sigma[c // self.graph.n]

    def describe(self, i: int) -> str:
        l = self._letters[i]
        g = self.graph
        if l[0] == 0:
            return "<" + ",".join(g.ids[v] for v in l[1:]) + ">"
        parts = ["♯" if c == PADC else f"{self.comp_label(c)}:{g.ids[self.comp_node(c)]}" for c in l[1:]]
        return "[" + ",".join(parts) + "]"


def alphabet(g: DataGraph, arity: int) -> Alphabet:
    key = ("alphabet", arity)
    c = g._cache
    if key not in c:
        c[key] = Alphabet(g, arity)
    return c[key]


@dataclass(eq=False)
class Nfa:
    alphabet: Alphabet
    initials: frozenset[int]
    finals: frozenset[int]
    delta: list[dict[int, frozenset[int]]]

    @property
    def arity(self) -> int:
        return self.alphabet.arity

    @property
    def graph(self) -> DataGraph:
        return self.alphabet.graph

    @property
    def n_states(self) -> int:
        return len(self.delta)

    def n_transitions(self) -> int:
        return sum(len(t) for d in self.delta for t in d.values())


# -- construction helpers ---------------------------------------------------

def explore(
    alpha: Alphabet,
    init_keys: Iterable[Hashable],
    succ: Callable[[Hashable], Iterable[tuple[int, Hashable]]],
    is_final: Callable[[Hashable], bool],
    cap: int | None = None,
    keep_keys: bool = False,
):
    """Build the reachable part of an automaton given by a successor function."""
    ids: dict = {}
    keys: list = []
    delta: list[dict[int, set[int]]] = []
    queue: deque = deque()

    def get(k) -> int:
        i = ids.get(k)
        if i is None:
            if cap is not None and len(keys) >= cap:
                raise CapExceeded(f"automaton state cap {cap} exceeded")
            i = ids[k] = len(keys)
            keys.append(k)
            delta.append({})
            queue.append(k)
        return i

    inits = frozenset(get(k) for k in init_keys)
    while queue:
        k = queue.popleft()
        d = delta[ids[k]]
        for letter, k2 in succ(k):
            j = get(k2)
            s = d.get(letter)
            if s is None:
                d[letter] = {j}
            else:
                s.add(j)
    finals = frozenset(i for i, k in enumerate(keys) if is_final(k))
    nfa = Nfa(alpha, inits, finals, [{l: frozenset(t) for l, t in d.items()} for d in delta])
    return (nfa, keys) if keep_keys else nfa


def empty(g: DataGraph, arity: int) -> Nfa:
    return Nfa(alphabet(g, arity), frozenset([0]), frozenset(), [{}])


def from_tuples(g: DataGraph, rows: Iterable[Sequence[int]], arity: int) -> Nfa:
    """Automaton over node-only tapes accepting exactly the given node tuples."""
    alpha = alphabet(g, arity)
    d: dict[int, frozenset[int]] = {}
    for r in rows:
        d[alpha.intern((0, *r))] = frozenset([1])
    return Nfa(alpha, frozenset([0]), frozenset([1]), [d, {}])


def start_tuples(a: Nfa) -> set[tuple[int, ...]]:
    """Node tuples accepted by a one-letter word (node-only tapes)."""
    out = set()
    alpha = a.alphabet
    for q in a.initials:
        for l, ts in a.delta[q].items():
            if alpha.is_start(l) and ts & a.finals:
                out.add(alpha.letter(l)[1:])
    return out


def _tape_options(g: DataGraph, alpha: Alphabet, cur: int, node: bool) -> list[tuple[int, int]]:
    """(component, next cur) choices for one tape in a step letter."""
    if cur == DONE or node:
        return [(PADC, DONE)]
    opts = [(PADC, DONE)]
    for a, w in g.out(cur):
        opts.append((alpha.comp(a, w), w))
    return opts


def universe(g: DataGraph, arity: int, node_tapes: Iterable[int] = ()) -> Nfa:
    """Accepts exactly the convolutions of ``arity``-tuples of data paths of ``g``.

    Tapes listed in ``node_tapes`` range over length-0 paths only.
    """
    key = ("universe", arity, frozenset(node_tapes))
    if key in g._cache:
        return g._cache[key]
    nt = frozenset(node_tapes)
    alpha = alphabet(g, arity)
    start = "init"

    def succ(k):
        if k == start:
            for vs in product(g.nodes, repeat=arity):
                yield alpha.intern((0, *vs)), tuple(DONE if i in nt else v for i, v in enumerate(vs))
            return
        opts = [_tape_options(g, alpha, c, False) for c in k]
        for combo in product(*opts):
            comps = tuple(c for c, _ in combo)
            if all(c == PADC for c in comps):
                continue
            yield alpha.intern((1, *comps)), tuple(n for _, n in combo)

    res = explore(alpha, [start], succ, lambda k: k != start)
    g._cache[key] = res
    return res


# -- Boolean operations -----------------------------------------------------

def _same_alpha(a: Nfa, b: Nfa) -> None:
    if a.alphabet is not b.alphabet:
        raise InvariantError("automata over different alphabets (cylindrify first)")


def union(a: Nfa, b: Nfa) -> Nfa:
    _same_alpha(a, b)
    off = a.n_states
    delta = list(a.delta) + [{l: frozenset(t + off for t in ts) for l, ts in d.items()} for d in b.delta]
    return Nfa(
        a.alphabet,
        a.initials | frozenset(i + off for i in b.initials),
        a.finals | frozenset(i + off for i in b.finals),
        delta,
    )


def intersect(a: Nfa, b: Nfa, cap: int | None = None) -> Nfa:
    _same_alpha(a, b)

    def succ(k):
        p, q = k
        dp_, dq = a.delta[p], b.delta[q]
        if len(dq) < len(dp_):
            for l, tq in dq.items():
                tp = dp_.get(l)
                if tp:
                    for x in tp:
                        for y in tq:
                            yield l, (x, y)
        else:
            for l, tp in dp_.items():
                tq = dq.get(l)
                if tq:
                    for x in tp:
                        for y in tq:
                            yield l, (x, y)

    res = explore(
        a.alphabet,
        [(p, q) for p in a.initials for q in b.initials],
        succ,
        lambda k: k[0] in a.finals and k[1] in b.finals,
        cap,
    )
    return trim(res)


def complement(a: Nfa, universe_nfa: Nfa, cap: int = DEFAULT_SUBSET_CAP) -> Nfa:
    """Words of ``universe_nfa`` not accepted by ``a`` (subset construction)."""
    _same_alpha(a, universe_nfa)
    U = universe_nfa
    afin = a.finals

    def succ(k):
        u, S = k
        du = U.delta[u]
        for l, us in du.items():
            nxt = set()
            for s in S:
                t = a.delta[s].get(l)
                if t:
                    nxt |= t
            fs = frozenset(nxt)
            for u2 in us:
                yield l, (u2, fs)

    res = explore(
        a.alphabet,
        [(u, frozenset(a.initials)) for u in U.initials],
        succ,
        lambda k: k[0] in U.finals and not (k[1] & afin),
        cap,
    )
    return trim(res)


def difference(a: Nfa, b: Nfa, cap: int = DEFAULT_SUBSET_CAP) -> Nfa:
    """L(a) minus L(b), determinizing only ``b``."""
    return complement(b, a, cap)


# -- tape manipulation -------------------------------------------------------

def _map_letters(a: Nfa, new_alpha: Alphabet, f: Callable[[tuple], tuple]) -> list[dict[int, set[int]]]:
    old = a.alphabet
    cache: dict[int, int] = {}
    out: list[dict[int, set[int]]] = []
    for d in a.delta:
        nd: dict[int, set[int]] = {}
        for l, ts in d.items():
            nl = cache.get(l)
            if nl is None:
                nl = cache[l] = new_alpha.intern(f(old.letter(l)))
            nd.setdefault(nl, set()).update(ts)
        out.append(nd)
    return out


def project(a: Nfa, tape: int) -> Nfa:
    """Existentially drop ``tape`` and re-normalize trailing padding."""
    if not 0 <= tape < a.arity:
        raise IndexError(tape)
    m = a.arity
    na = alphabet(a.graph, m - 1)
    delta = _map_letters(a, na, lambda l: l[: tape + 1] + l[tape + 2 :])
    return _strip_pad(Nfa(na, a.initials, a.finals, [{l: frozenset(t) for l, t in d.items()} for d in delta]))


def _strip_pad(a: Nfa) -> Nfa:
    """Treat all-PAD step letters as silent moves; they may only occur at the tail."""
    alpha = a.alphabet
    pad_ids = {l for d in a.delta for l in d if alpha.is_pad(l)}
    if not pad_ids:
        return a
    rev: list[set[int]] = [set() for _ in a.delta]
    for s, d in enumerate(a.delta):
        for l in pad_ids:
            for t in d.get(l, ()):
                rev[t].add(s)
    fin = set(a.finals)
    stack = list(fin)
    while stack:
        t = stack.pop()
        for s in rev[t]:
            if s not in fin:
                fin.add(s)
                stack.append(s)
    delta = [{l: ts for l, ts in d.items() if l not in pad_ids} for d in a.delta]
    return trim(Nfa(alpha, a.initials, frozenset(fin), delta))


def cylindrify(a: Nfa, new_tape: int, node: bool = False) -> Nfa:
    """Insert an unconstrained tape at index ``new_tape``.

    With ``node=True`` the new tape ranges over length-0 paths (nodes) only.
    """
    m = a.arity
    if not 0 <= new_tape <= m:
        raise IndexError(new_tape)
    g = a.graph
    old = a.alphabet
    na = alphabet(g, m + 1)
    pos = new_tape + 1
    FIN = -1

    def ins(l: tuple, c: int) -> tuple:
        return l[:pos] + (c,) + l[pos:]

    init = ("init",)
    allpad_old = (1,) + (PADC,) * m

    def succ(k):
        if k == init:
            for q in a.initials:
                for l, ts in a.delta[q].items():
                    lt = old.letter(l)
                    if lt[0] != 0:
                        continue
                    for v in g.nodes:
                        nl = na.intern(ins(lt, v))
                        for t in ts:
                            yield nl, (t, DONE if node else v)
            return
        q, cur = k
        opts = _tape_options(g, na, cur, node)
        if q != FIN:
            for l, ts in a.delta[q].items():
                lt = old.letter(l)
                if lt[0] != 1:
                    continue
                old_pad = lt == allpad_old
                for c, nxt in opts:
                    if old_pad and c == PADC:
                        continue
                    nl = na.intern(ins(lt, c))
                    for t in ts:
                        yield nl, (t, nxt)
            if q not in a.finals:
                return
        for c, nxt in opts:
            if c != PADC:
                yield na.intern(ins(allpad_old, c)), (FIN, nxt)

    res = explore(na, [init], succ, lambda k: k != init and (k[0] == FIN or k[0] in a.finals))
    return trim(res)


def permute(a: Nfa, order: Sequence[int]) -> Nfa:
    """New tape ``i`` is old tape ``order[i]``."""
    if sorted(order) != list(range(a.arity)):
        raise ValueError("order must be a permutation of the tapes")
    if list(order) == list(range(a.arity)):
        return a
    delta = _map_letters(a, a.alphabet, lambda l: (l[0],) + tuple(l[1 + i] for i in order))
    return Nfa(a.alphabet, a.initials, a.finals, [{l: frozenset(t) for l, t in d.items()} for d in delta])


def restrict_equal(a: Nfa, i: int, j: int) -> Nfa:
    """Keep only words whose tapes ``i`` and ``j`` coincide."""
    alpha = a.alphabet
    delta = [{l: ts for l, ts in d.items() if alpha.letter(l)[1 + i] == alpha.letter(l)[1 + j]} for d in a.delta]
    return trim(Nfa(alpha, a.initials, a.finals, delta))


# -- analysis ----------------------------------------------------------------

def trim(a: Nfa) -> Nfa:
    n = a.n_states
    fwd = set(a.initials)
    stack = list(fwd)
    while stack:
        s = stack.pop()
        for ts in a.delta[s].values():
            for t in ts:
                if t not in fwd:
                    fwd.add(t)
                    stack.append(t)
    rev: list[list[int]] = [[] for _ in range(n)]
    for s in fwd:
        for ts in a.delta[s].values():
            for t in ts:
                rev[t].append(s)
    bwd = {f for f in a.finals if f in fwd}
    stack = list(bwd)
    while stack:
        t = stack.pop()
        for s in rev[t]:
            if s not in bwd:
                bwd.add(s)
                stack.append(s)
    keep = sorted(bwd)
    if not keep:
        return empty(a.graph, a.arity)
    if len(keep) == n:
        return a
    ren = {s: i for i, s in enumerate(keep)}
    delta = []
    for s in keep:
        nd = {}
        for l, ts in a.delta[s].items():
            t2 = frozenset(ren[t] for t in ts if t in ren)
            if t2:
                nd[l] = t2
        delta.append(nd)
    return Nfa(
        a.alphabet,
        frozenset(ren[s] for s in a.initials if s in ren),
        frozenset(ren[s] for s in a.finals if s in ren),
        delta,
    )


def is_empty(a: Nfa) -> bool:
    seen = set(a.initials)
    stack = list(seen)
    while stack:
        s = stack.pop()
        if s in a.finals:
            return False
        for ts in a.delta[s].values():
            for t in ts:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
    return True


def witness(a: Nfa) -> list[tuple] | None:
    """A shortest accepted word (as letter tuples), or None."""
    parent: dict[int, tuple[int, int] | None] = {s: None for s in a.initials}
    queue = deque(sorted(a.initials))
    while queue:
        s = queue.popleft()
        if s in a.finals:
            word = []
            while parent[s] is not None:
                prev, l = parent[s]
                word.append(a.alphabet.letter(l))
                s = prev
            return word[::-1]
        for l in sorted(a.delta[s]):
            for t in sorted(a.delta[s][l]):
                if t not in parent:
                    parent[t] = (s, l)
                    queue.append(t)
    return None


def decode(alpha: Alphabet, word: Sequence[tuple]) -> tuple[Path, ...]:
    """Split a word into one path per tape."""
    if not word or word[0][0] != 0:
        raise ValueError("a word starts with a start letter")
    m = alpha.arity
    paths = [Path(v) for v in word[0][1:]]
    for l in word[1:]:
        for t in range(m):
            c = l[1 + t]
            if c != PADC:
                paths[t] = paths[t].extend(alpha.comp_label(c), alpha.comp_node(c))
    return tuple(paths)


def encode(g: DataGraph, paths: Sequence[Path]) -> list[tuple]:
    """The convolution of the given paths as letter tuples."""
    n = max(len(p) for p in paths)
    word = [(0, *(p.start for p in paths))]
    alpha = alphabet(g, len(paths))
    for j in range(n):
        comps = []
        for p in paths:
            if j < len(p):
                a, v = p.steps[j]
                comps.append(alpha.comp(a, v))
            else:
                comps.append(PADC)
        word.append((1, *comps))
    return word


def accepts_word(a: Nfa, word: Sequence[tuple]) -> bool:
    alpha = a.alphabet
    cur = set(a.initials)
    for letter in word:
        l = alpha.lookup(tuple(letter))
        if l is None:
            return False
        nxt: set[int] = set()
        for s in cur:
            t = a.delta[s].get(l)
            if t:
                nxt |= t
        if not nxt:
            return False
        cur = nxt
    return bool(cur & a.finals) and len(word) > 0


def accepts_paths(a: Nfa, paths: Sequence[Path]) -> bool:
    if len(paths) != a.arity:
        raise ValueError("arity mismatch")
    if a.arity == 0:
        return accepts_word(a, [(0,)])
    return accepts_word(a, encode(a.graph, paths))


def words_up_to(a: Nfa, max_letters: int) -> Iterator[tuple[tuple, ...]]:
    """All accepted words with at most ``max_letters`` letters (each once)."""
    alpha = a.alphabet

    def rec(states: frozenset[int], word: list[tuple]):
        if states & a.finals:
            yield tuple(word)
        if len(word) >= max_letters:
            return
        moves: dict[int, set[int]] = {}
        for s in states:
            for l, ts in a.delta[s].items():
                moves.setdefault(l, set()).update(ts)
        for l in sorted(moves):
            word.append(alpha.letter(l))
            yield from rec(frozenset(moves[l]), word)
            word.pop()

    if max_letters <= 0:
        return
    yield from rec(frozenset(a.initials), [])


# -- dumps -------------------------------------------------------------------

def to_json(a: Nfa) -> dict:
    alpha = a.alphabet
    return {
        "arity": a.arity,
        "states": a.n_states,
        "initials": sorted(a.initials),
        "finals": sorted(a.finals),
        "transitions": [
            [s, alpha.describe(l), t] for s, d in enumerate(a.delta) for l in sorted(d) for t in sorted(d[l])
        ],
    }


def to_dot(a: Nfa) -> str:
    alpha = a.alphabet
    lines = ["digraph nfa {", "  rankdir=LR;"]
    for s in range(a.n_states):
        shape = "doublecircle" if s in a.finals else "circle"
        lines.append(f'  s{s} [shape={shape},label="{s}"];')
    for i, s in enumerate(sorted(a.initials)):
        lines.append(f"  init{i} [shape=point]; init{i} -> s{s};")
    for s, d in enumerate(a.delta):
        for l in sorted(d):
            for t in sorted(d[l]):
                lines.append(f'  s{s} -> s{t} [label="{alpha.describe(l)}"];')
    lines.append("}")
    return "\n".join(lines)


def sample_dump(a: Nfa, max_letters: int) -> list[list[str]]:
    g = a.graph
    return [[g.render(p) for p in decode(a.alphabet, w)] for w in words_up_to(a, max_letters)]


def dumps(a: Nfa) -> str:
    return json.dumps(to_json(a), indent=1, ensure_ascii=False)
