"""Random generators for patterns, formulas and automata used by differential tests."""
from __future__ import annotations

import random
from typing import Sequence

from . import gpc as P


def random_pattern(rng: random.Random, depth: int = 4, sigma: Sequence[str] = ("a", "b"),
                   free: Sequence[str] = ("x", "y", "z"), max_lo: int = 2, max_span: int = 2) -> P.Pattern:
    """A well-formed pattern of nesting depth at most ``depth``.

    Variables used inside repetitions are drawn fresh so the repetition rule
    holds; conditions only mention variables free in their body.
    """
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"u{counter[0]}"

    def cond(vs: list[str], d: int) -> P.Condition:
        if d <= 0 or rng.random() < 0.5:
            return P.DEq(rng.choice(vs), rng.choice(vs))
        r = rng.random()
        if r < 0.4:
            return P.CNot(cond(vs, d - 1))
        if r < 0.7:
            return P.CAnd(cond(vs, d - 1), cond(vs, d - 1))
        return P.COr(cond(vs, d - 1), cond(vs, d - 1))

    def gen(d: int, pool: Sequence[str] | None) -> P.Pattern:
        if d <= 0 or rng.random() < 0.25:
            if rng.random() < 0.5:
                if rng.random() < 0.3:
                    return P.Node(None)
                return P.Node(rng.choice(pool) if pool else fresh())
            return P.Edge(rng.choice(list(sigma) + [None]))
        r = rng.random()
        if r < 0.25:
            return P.Union(gen(d - 1, pool), gen(d - 1, pool))
        if r < 0.6:
            return P.Concat(gen(d - 1, pool), gen(d - 1, pool))
        if r < 0.8:
            lo = rng.randint(0, max_lo)
            hi = rng.choice([lo + k for k in range(max_span + 1)] + [None])
            # inner variables are local to this repetition
            inner = [fresh() for _ in range(2)]
            return P.Repeat(gen(d - 1, inner), lo, hi)
        body = gen(d - 1, pool)
        vs = sorted(P.free_vars(body))
        if not vs:
            return body
        return P.Cond(body, cond(vs, 2))

    while True:
        p = gen(depth, list(free))
        try:
            P.check_pattern(p)
        except Exception:
            continue
        return p


UNARY_AUTOMATA = ("A_even", "A_repeat", "A_true", "A_false", "A_3val")
BINARY_AUTOMATA = ("A_same", "A_le", "A_lt", "A_lastid", "A_lastdata", "A_visit", "A_prefix")


def random_universal_sentence(rng: random.Random, sigma: Sequence[str] = ("a", "b"), max_vars: int = 2,
                              depth: int = 2):
    """A sentence  forall p1..pn . matrix  with a quantifier-free matrix over
    library automata and path equality."""
    from . import logic as L

    n = rng.randint(1, max_vars)
    ps = [f"p{i}" for i in range(n)]

    def atom():
        r = rng.random()
        if n >= 2 and r < 0.15:
            a, b = rng.sample(ps, 2)
            return L.PathEq(a, b)
        if n >= 2 and r < 0.6:
            a, b = rng.sample(ps, 2)
            name = rng.choice(BINARY_AUTOMATA + (f"A_succ[{rng.choice(list(sigma))}]",))
            return L.InAut((a, b), name)
        return L.InAut((rng.choice(ps),), rng.choice(UNARY_AUTOMATA))

    def gen(d: int):
        if d <= 0 or rng.random() < 0.3:
            return atom()
        r = rng.random()
        if r < 0.3:
            return L.Not(gen(d - 1))
        if r < 0.65:
            return L.And(gen(d - 1), gen(d - 1))
        return L.Or(gen(d - 1), gen(d - 1))

    return L.forall_all([(p, L.PATH) for p in ps], gen(depth))


def random_mwl_sentence(rng: random.Random, sigma: Sequence[str] = ("a",), depth: int = 3, mwl: bool = True):
    """A walk-logic sentence with quantifier depth at most ``depth`` (at least 2,
    since a position needs a path quantifier above it)."""
    from . import wl as W

    depth = max(depth, 2)
    counter = [0]

    def fresh(prefix: str) -> str:
        counter[0] += 1
        return f"{prefix}{counter[0]}"

    def atom(pos: list[tuple[str, str]]):
        (l, sl), (m, sm) = rng.choice(pos), rng.choice(pos)
        r = rng.random()
        if r < 0.25 and sl == sm:
            return W.WEdge(rng.choice(list(sigma)), l, m)
        if r < 0.5 and (sl == sm or mwl):
            return W.WLess(l, m)
        if r < 0.8:
            return W.WIdEq(l, m)
        return W.WDataEq(l, m)

    def gen(d: int, paths: list[str], pos: list[tuple[str, str]]):
        if d > 0 and (not pos or rng.random() < 0.55):
            neg = rng.random() < 0.4
            if not paths or rng.random() < 0.35:
                p = fresh("p")
                body = gen(d - 1, paths + [p], pos)
                f = W.WExistsPath(p, W.WNot(body) if neg else body)
            else:
                s = rng.choice(paths)
                l = fresh("l")
                body = gen(d - 1, paths, pos + [(l, s)])
                f = W.WExistsPos(l, s, W.WNot(body) if neg else body)
            return W.WNot(f) if neg else f
        if not pos:
            return W.WTrue()
        r = rng.random()
        if r < 0.5:
            return atom(pos)
        if r < 0.65:
            return W.WNot(gen(d, paths, pos))
        left, right = gen(d, paths, pos), gen(d, paths, pos)
        return W.WAnd(left, right) if r < 0.85 else W.WOr(left, right)

    while True:
        f = gen(depth, [], [])
        if any(isinstance(s, W.WExistsPos) for s in W._walk(f)):
            return f


def random_automaton(rng: random.Random, g, arity: int = 1, depth: int = 2):
    """A grounded automaton over ``g``: library automata and compiled patterns
    combined by union, intersection and complement."""
    from . import nfa as N
    from . import rdpa as R

    def leaf():
        if arity == 1:
            if rng.random() < 0.4:
                return R.ground(P.compile_pattern(random_pattern(rng, depth=2, sigma=g.sigma, max_lo=1, max_span=1)), g)
            return R.ground(R.builtin(rng.choice(UNARY_AUTOMATA + ("A_fig2",))), g)
        names = [n for n in BINARY_AUTOMATA] + [f"A_succ[{a}]" for a in g.sigma]
        return R.ground(R.builtin(rng.choice(names), g.sigma), g)

    def gen(d: int):
        if d <= 0 or rng.random() < 0.4:
            return leaf()
        r = rng.random()
        if r < 0.35:
            return N.union(gen(d - 1), gen(d - 1))
        if r < 0.7:
            return N.intersect(gen(d - 1), gen(d - 1))
        return N.complement(gen(d - 1), N.universe(g, arity))

    return gen(depth)
