"""Strategy term graphs, the CCS translation, process terms and behaviours.

A :class:`Strategy` at arity n is a finite list of definite strategies; a
:class:`DefiniteStrategy` maps each basic move class at arity n to the
strategy played afterwards.  Graphs may be cyclic (recursion) and are
unfolded lazily, since processes that keep creating channels have
infinitely many distinct nodes.

States of a strategy at a view ``b1...bk`` are index paths ``(i0, ..., ik)``:
``i0`` picks an initial state, and ``ij`` a state of the residual after
``bj``.  They are enumerated lexicographically, so restricting a state to a
prefix of its view is truncation.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Optional

from . import ccs
from .ccs import Nu as CNu, Par as CPar, RecDef, Sum
from .game import (NU, PARAL, PARAR, TICK, BasicMoveClass, BIn, BOut, Play, Position, ViewPath,
                   basic_classes, glue, involved, trace)

_serials = itertools.count()
_lock = threading.Lock()


def class_index(b: BasicMoveClass) -> int:
    """Position of ``b`` in :func:`basic_classes`."""
    if b.tag in ("in", "out"):
        return 4 + 2 * (b.index - 1) + (b.tag == "out")
    return ("paral", "parar", "tick", "nu").index(b.tag)


class Strategy:
    """``⊕`` of a list of definite strategies (``∅`` when empty)."""

    __slots__ = ("arity", "branches", "serial")

    def __init__(self, arity: int, branches: Iterable["DefiniteStrategy"] = ()):
        self.arity = arity
        self.branches = tuple(branches)
        for d in self.branches:
            if d.arity != arity:
                raise ValueError(f"branch of arity {d.arity} in a strategy of arity {arity}")
        self.serial = next(_serials)

    def __len__(self):
        return len(self.branches)

    def __iter__(self):
        return iter(self.branches)

    def __getitem__(self, i):
        return self.branches[i]

    @property
    def is_definite(self) -> bool:
        return len(self.branches) == 1

    def __repr__(self):
        return f"<Strategy #{self.serial} arity={self.arity} m={len(self)}>"

    def __str__(self):
        return dump(self)


class DefiniteStrategy:
    """A table from basic move classes to strategies, computed on first access."""

    __slots__ = ("arity", "_table", "_thunk", "serial")

    def __init__(self, arity: int, table=None, thunk: Optional[Callable] = None):
        if (table is None) == (thunk is None):
            raise ValueError("give exactly one of table and thunk")
        self.arity = arity
        self._table = None
        self._thunk = thunk
        if table is not None:
            self._set(table)
        self.serial = next(_serials)

    def _set(self, table):
        classes = basic_classes(self.arity)
        if isinstance(table, dict):
            table = tuple(table[b] if b in table else empty(b.target_arity(self.arity))
                          for b in classes)
        table = tuple(table)
        if len(table) != len(classes):
            raise ValueError("table must cover every basic class")
        for b, s in zip(classes, table):
            if s.arity != b.target_arity(self.arity):
                raise ValueError(f"entry {b} has arity {s.arity}")
        self._table = table

    @property
    def table(self) -> tuple:
        if self._table is None:
            thunk, self._thunk = self._thunk, None
            self._set(thunk())
        return self._table

    def __getitem__(self, b: BasicMoveClass) -> Strategy:
        if not b.valid_at(self.arity):
            raise ValueError(f"{b} is not a basic class at arity {self.arity}")
        return self.table[class_index(b)]

    def items(self):
        return zip(basic_classes(self.arity), self.table)

    def __repr__(self):
        return f"<DefiniteStrategy #{self.serial} arity={self.arity}>"


@lru_cache(maxsize=None)
def empty(n: int) -> Strategy:
    """The empty strategy ``∅`` at arity n (shared)."""
    return Strategy(n, ())


def deadlock(n: int) -> Strategy:
    return definite(n, {})


def definite(n: int, table: dict) -> Strategy:
    """The one-state strategy with the given table (missing entries are ``∅``)."""
    return Strategy(n, (DefiniteStrategy(n, table=table),))


def oplus(*ss: Strategy) -> Strategy:
    if not ss:
        raise ValueError("oplus needs an arity; use empty(n)")
    if len(ss) == 1:
        return ss[0]
    return Strategy(ss[0].arity, tuple(d for s in ss for d in s.branches))


def residual(d: DefiniteStrategy, b: BasicMoveClass) -> Strategy:
    return d[b]


def restrict(s: Strategy, i: int) -> DefiniteStrategy:
    if not 0 <= i < len(s):
        raise IndexError(f"state {i} out of range for a strategy with {len(s)} initial states")
    return s.branches[i]


# --------------------------------------------------------------------------
# values on views
# --------------------------------------------------------------------------


def _check_view(s: Strategy, v: ViewPath):
    if v.arity != s.arity:
        raise ValueError(f"view at arity {v.arity} for a strategy of arity {s.arity}")
    if not v.is_valid():
        raise ValueError(f"ill-formed view {v}")


def value_on_view(s: Strategy, v: ViewPath) -> int:
    _check_view(s, v)
    return _value(s, v.moves)


def _value(s: Strategy, moves: tuple) -> int:
    if not moves:
        return len(s)
    b, rest = moves[0], moves[1:]
    return sum(_value(d[b], rest) for d in s.branches)


def states(s: Strategy, v: ViewPath) -> list:
    """States of ``s`` at ``v`` as index paths, in lexicographic (enumeration) order."""
    _check_view(s, v)
    out = []

    def walk(t, moves, path):
        for i, d in enumerate(t.branches):
            if moves:
                walk(d[moves[0]], moves[1:], path + (i,))
            else:
                out.append(path + (i,))

    walk(s, v.moves, ())
    return out


def state_index(s: Strategy, v: ViewPath, path: tuple) -> int:
    """Rank of the state ``path`` in :func:`states` ``(s, v)``."""
    _check_view(s, v)
    if len(path) != len(v) + 1:
        raise ValueError("state path length must be view length + 1")
    rank, t = 0, s
    for k, i in enumerate(path):
        if not 0 <= i < len(t):
            raise IndexError("state path out of range")
        rest = v.moves[k + 1:]
        if k < len(v):
            rank += sum(_value(t.branches[j][v.moves[k]], rest) for j in range(i))
            t = t.branches[i][v.moves[k]]
        else:
            rank += i
    return rank


def definite_at(s: Strategy, v: ViewPath, path: tuple) -> DefiniteStrategy:
    """The definite strategy reached by the state ``path``."""
    t = s
    for k, i in enumerate(path):
        d = t.branches[i]
        if k < len(v):
            t = d[v.moves[k]]
    return d


# --------------------------------------------------------------------------
# the CCS translation
# --------------------------------------------------------------------------

_translations: dict = {}


def _prefix_class(pre: ccs.Prefix) -> BasicMoveClass:
    if pre.kind == "tick":
        return TICK
    return BIn(pre.channel) if pre.kind == "in" else BOut(pre.channel)


def _gather(n: int, items: list) -> dict:
    """Group ``(class, strategy)`` pairs into a table, reusing a lone strategy as is."""
    table = {}
    for b, s in items:
        table.setdefault(b, []).append(s)
    return {b: oplus(*ss) for b, ss in table.items()}


def translate_ccs(ctx: int, p) -> Strategy:
    """The strategy of a well-formed process; recursion yields cycles."""
    key = (ctx, p)
    hit = _translations.get(key)
    if hit is not None:
        return hit
    if isinstance(p, RecDef):
        s = translate_ccs(ctx, ccs.unfold(ctx, p))
    elif isinstance(p, CPar):
        s = Strategy(ctx, (DefiniteStrategy(ctx, thunk=lambda: {
            PARAL: translate_ccs(ctx, p.left), PARAR: translate_ccs(ctx, p.right)}),))
    elif isinstance(p, CNu):
        s = Strategy(ctx, (DefiniteStrategy(ctx, thunk=lambda: {
            NU: translate_ccs(ctx + 1, p.body)}),))
    elif isinstance(p, Sum):
        s = Strategy(ctx, (DefiniteStrategy(ctx, thunk=lambda: _gather(ctx, [
            (_prefix_class(pre), translate_ccs(ctx, q)) for pre, q in p.branches])),))
    else:
        raise ccs.CcsError(f"cannot translate {p!r}")
    with _lock:
        return _translations.setdefault(key, s)


def clear_caches():
    with _lock:
        _translations.clear()
        _thetas.clear()


# --------------------------------------------------------------------------
# process terms
# --------------------------------------------------------------------------


class ProcessTerm:
    __slots__ = ()


class Fork(ProcessTerm):
    __slots__ = ("arity", "_children", "_thunk", "serial")

    def __init__(self, arity, left=None, right=None, thunk=None):
        self.arity = arity
        self._children = None if thunk else (left, right)
        self._thunk = thunk
        self.serial = next(_serials)

    def _force(self):
        if self._children is None:
            thunk, self._thunk = self._thunk, None
            self._children = tuple(thunk())
        return self._children

    @property
    def left(self) -> ProcessTerm:
        return self._force()[0]

    @property
    def right(self) -> ProcessTerm:
        return self._force()[1]

    def __repr__(self):
        return f"<Fork #{self.serial} arity={self.arity}>"


_GUARDS = ("tick", "nu", "in", "out")


class GuardedSum(ProcessTerm):
    """Branches are ``(guard, term)`` pairs with guards among tick, nu, in(i), out(i)."""

    __slots__ = ("arity", "_branches", "_thunk", "serial")

    def __init__(self, arity, branches=None, thunk=None):
        self.arity = arity
        self._thunk = thunk
        self._branches = None
        if thunk is None:
            self._set(branches or ())
        self.serial = next(_serials)

    def _set(self, branches):
        branches = tuple(branches)
        for g, t in branches:
            if g.tag not in _GUARDS or not g.valid_at(self.arity):
                raise ValueError(f"bad guard {g} at arity {self.arity}")
            if t.arity != g.target_arity(self.arity):
                raise ValueError(f"body after {g} has arity {t.arity}")
        self._branches = branches

    @property
    def branches(self) -> tuple:
        if self._branches is None:
            thunk, self._thunk = self._thunk, None
            self._set(thunk())
        return self._branches

    def __repr__(self):
        return f"<GuardedSum #{self.serial} arity={self.arity}>"


_thetas: dict = {}


def theta(ctx: int, p) -> ProcessTerm:
    """Embed a process into process terms."""
    key = (ctx, p)
    hit = _thetas.get(key)
    if hit is not None:
        return hit
    if isinstance(p, RecDef):
        t = theta(ctx, ccs.unfold(ctx, p))
    elif isinstance(p, CPar):
        t = Fork(ctx, thunk=lambda: (theta(ctx, p.left), theta(ctx, p.right)))
    elif isinstance(p, CNu):
        t = GuardedSum(ctx, thunk=lambda: ((NU, theta(ctx + 1, p.body)),))
    elif isinstance(p, Sum):
        t = GuardedSum(ctx, thunk=lambda: tuple(
            (_prefix_class(pre), theta(ctx, q)) for pre, q in p.branches))
    else:
        raise ccs.CcsError(f"cannot embed {p!r}")
    with _lock:
        return _thetas.setdefault(key, t)


class Interpreter:
    """Interpret process terms as strategies, memoised per term node.

    ``swap_forks`` exchanges the two children of every fork; it exists to
    check that the comparison machinery notices a wrong interpretation.
    """

    def __init__(self, swap_forks: bool = False):
        self.swap_forks = swap_forks
        self._memo = {}

    def __call__(self, t: ProcessTerm) -> Strategy:
        hit = self._memo.get(t.serial)
        if hit is not None:
            return hit
        n = t.arity
        if isinstance(t, Fork):
            def table():
                a, b = self(t.left), self(t.right)
                if self.swap_forks:
                    a, b = b, a
                return {PARAL: a, PARAR: b}
        else:
            def table():
                return _gather(n, [(g, self(u)) for g, u in t.branches])
        s = Strategy(n, (DefiniteStrategy(n, thunk=table),))
        self._memo[t.serial] = s
        return s


def interpret_term(t: ProcessTerm, swap_forks: bool = False) -> Strategy:
    return Interpreter(swap_forks)(t)


# --------------------------------------------------------------------------
# structural equality
# --------------------------------------------------------------------------


def graph_equal(s: Strategy, t: Strategy, depth: Optional[int] = None,
                limit: int = 200_000) -> bool:
    """Coinductive structural equality of term graphs.

    Explores pairs of nodes breadth first, assuming already visited pairs
    equal.  ``depth`` bounds the number of table lookups followed (needed for
    graphs with infinitely many nodes); ``limit`` bounds visited pairs and
    raises ``RuntimeError`` when exceeded.
    """
    seen = set()
    frontier = [(s, t)]
    level = 0
    while frontier:
        nxt = []
        for a, b in frontier:
            if (a.serial, b.serial) in seen or a is b:
                continue
            seen.add((a.serial, b.serial))
            if len(seen) > limit:
                raise RuntimeError("graph_equal: visited-pair limit exceeded")
            if a.arity != b.arity or len(a) != len(b):
                return False
            if depth is not None and level >= depth:
                continue
            for da, db in zip(a.branches, b.branches):
                nxt.extend(zip(da.table, db.table))
        frontier = nxt
        level += 1
    return True


# --------------------------------------------------------------------------
# families, pairing and behaviours
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StrategyFamily:
    position: Position
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != len(self.position.players):
            raise ValueError("one strategy per player is required")
        for x, s in enumerate(self.components):
            if s.arity != self.position.arity(x):
                raise ValueError(f"player {x} has arity {self.position.arity(x)}, "
                                 f"strategy has arity {s.arity}")


def family_of(ctx: int, p) -> StrategyFamily:
    from .game import individual
    return StrategyFamily(individual(ctx), (translate_ccs(ctx, p),))


def pair(f: StrategyFamily, g: StrategyFamily, h: tuple, k: tuple,
         interface: Optional[Position] = None) -> StrategyFamily:
    """Family on the gluing of ``f.position`` and ``g.position`` along ``h`` and ``k``."""
    if interface is not None:
        if interface.players:
            raise ValueError("the gluing interface must not contain players")
        if interface.channels != len(h):
            raise ValueError("interface size does not match the gluing maps")
    z = glue(f.position, h, g.position, k)
    return StrategyFamily(z.position, f.components + g.components)


@dataclass(frozen=True)
class BehaviourElement:
    """A matching family: for each ``(root player, view)`` met along the play, a state.

    ``assignment`` maps keys to state paths; :meth:`index` gives the
    enumeration index of a state.
    """

    assignment: frozenset

    def as_dict(self) -> dict:
        return dict(self.assignment)

    def index(self, family: StrategyFamily, key) -> int:
        x, v = key
        return state_index(family.components[x], v, self.as_dict()[key])


def extend(f: StrategyFamily, u: Play) -> set:
    """Elements of the behaviour of ``f`` at the play ``u``."""
    if u.initial != f.position:
        raise ValueError("play does not start at the family's position")
    X = f.position
    current = [(x, ViewPath(X.arity(x))) for x in range(len(X.players))]
    partial = [dict()]
    for x, key in enumerate(current):
        s = f.components[x]
        partial = [{**e, key: ((i,), d)} for e in partial for i, d in enumerate(s.branches)]
    for m in u.steps:
        moved = involved(m)
        nxt_current = [None] * len(m.final.players)
        for y in range(len(m.final.players)):
            x = next(x for x, ys in enumerate(m.player_map) if y in ys)
            nxt_current[y] = current[x]
        new_keys = []
        for x, y, b in moved:
            root, v = current[x]
            child = (root, ViewPath(v.arity, v.moves + (b,)))
            nxt_current[y] = child
            new_keys.append((current[x], child, b))
        grown = []
        for e in partial:
            options = []
            for parent, child, b in new_keys:
                path, d = e[parent]
                options.append([(child, (path + (j,), dj)) for j, dj in enumerate(d[b].branches)])
            for combo in itertools.product(*options):
                grown.append({**e, **dict(combo)})
        partial = grown
        current = nxt_current
    return {BehaviourElement(frozenset((k, path) for k, (path, _) in e.items())) for e in partial}


def restrict_element(e: BehaviourElement, f: StrategyFamily, u: Play, k: int) -> BehaviourElement:
    """Restriction of an element at ``u`` to the prefix of length ``k``."""
    keys = set()
    for j in range(k + 1):
        pj = u.prefix(j)
        keys.update(trace(pj, y) for y in range(len(pj.final.players)))
    return BehaviourElement(frozenset((kk, p) for kk, p in e.assignment if kk in keys))


# --------------------------------------------------------------------------
# dumps
# --------------------------------------------------------------------------


def _reachable(s: Strategy, depth: int):
    count = {}
    stack = [(s, 0)]
    while stack:
        t, lvl = stack.pop()
        for d in t.branches:
            count[d.serial] = count.get(d.serial, 0) + 1
            if count[d.serial] == 1 and lvl < depth:
                stack.extend((u, lvl + 1) for u in d.table if len(u))
    return count


def dump(s: Strategy, depth: int = 6) -> str:
    """Text form, ``⊕[⟨paraL↦…, …⟩, …]``; shared or cyclic nodes print as ``@k``."""
    shared = {k for k, c in _reachable(s, depth).items() if c > 1}
    labels = {}

    def show_s(t, lvl):
        if not len(t):
            return "∅"
        return "⊕[" + ", ".join(show_d(d, lvl) for d in t.branches) + "]"

    def show_d(d, lvl):
        if d.serial in labels:
            return f"@{labels[d.serial]}"
        tag = ""
        if d.serial in shared:
            labels[d.serial] = len(labels) + 1
            tag = f"@{labels[d.serial]}:"
        if lvl >= depth:
            return tag + "⟨…⟩"
        parts = [f"{b}↦{show_s(t, lvl + 1)}" for b, t in d.items() if len(t)]
        return tag + "⟨" + ", ".join(parts + ["_↦∅"]) + "⟩"

    return show_s(s, 0)


def to_json(s: Strategy, depth: int = 8) -> dict:
    """Nodes reachable within ``depth`` lookups; deeper nodes are listed as ``truncated``."""
    nodes, strategies = {}, {}
    frontier = [s]
    for lvl in range(depth + 1):
        nxt = []
        for t in frontier:
            if t.serial in strategies:
                continue
            strategies[t.serial] = {"arity": t.arity, "branches": [d.serial for d in t.branches]}
            for d in t.branches:
                if d.serial in nodes:
                    continue
                if lvl == depth:
                    nodes[d.serial] = {"arity": d.arity, "truncated": True}
                    continue
                nodes[d.serial] = {"arity": d.arity,
                                   "table": {str(b): u.serial for b, u in d.items()}}
                nxt.extend(d.table)
        frontier = nxt
    return {"root": s.serial, "strategies": {str(k): v for k, v in strategies.items()},
            "definite": {str(k): v for k, v in nodes.items()}}


def from_json(data: dict) -> Strategy:
    """Rebuild a (possibly cyclic) strategy graph dumped by :func:`to_json` without truncation."""
    built_s, built_d = {}, {}
    sdata, ddata = data["strategies"], data["definite"]

    def get_s(k):
        k = str(k)
        if k not in built_s:
            v = sdata[k]
            built_s[k] = Strategy(v["arity"], tuple(get_d(d) for d in v["branches"]))
        return built_s[k]

    def get_d(k):
        k = str(k)
        if k not in built_d:
            v = ddata[k]
            if v.get("truncated"):
                raise ValueError("cannot rebuild a truncated dump")
            built_d[k] = DefiniteStrategy(v["arity"], thunk=lambda: {
                BasicMoveClass.parse(b): get_s(u) for b, u in v["table"].items()})
        return built_d[k]

    return get_s(data["root"])
