"""Lazy labelled transition systems and the change of base between alphabets.

Three alphabets appear here:

* ``A``: CCS labels (:class:`~ccsgames.ccs.LabelA`), endo-edges on a context;
* ``F``: positions and full global moves;
* ``L``: interfaced positions, with full moves minus the inputs and outputs
  on private channels.

The strategy and process-term LTSs live over ``F``.  :func:`pullback_lts`
restricts an ``F``-LTS along the interface-forgetting map from ``L``, and
:func:`postcompose_lts` relabels an ``L``-LTS into ``A``.
"""

from __future__ import annotations

import hashlib
import itertools
import os
import threading
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Optional

from . import ccs
from . import presheaf as ps
from .ccs import LabelA
from .game import (NU, PARAL, PARAR, TICK, BIn, BOut, GlobalMove, Position, canonical_form,
                   In as KIn, Nu as KNu, Out as KOut, Para as KPara, Tau as KTau, Tick as KTick,
                   individual, instantiate, involved, is_full, player_kinds, predecessor)
from .strategies import (DefiniteStrategy, Fork, GuardedSum, Interpreter, ProcessTerm, Strategy,
                         graph_equal, translate_ccs)
from .verdict import FAIL, INCONCLUSIVE, PASS, BudgetExceeded, Verdict

DEFAULT_STATE_CAP = 100_000


def default_state_cap() -> int:
    return int(os.environ.get("CCSGAMES_STATE_CAP", DEFAULT_STATE_CAP))


# --------------------------------------------------------------------------
# alphabets and generic LTSs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphabetGraph:
    """A reflexive graph given by its edge endpoints and identity edges."""

    name: str
    source: Callable
    target: Callable
    identity: Callable
    is_identity: Callable


@dataclass(frozen=True)
class IdentityEdge:
    vertex: Any

    def __str__(self):
        return "id"


ALPHABET_A = AlphabetGraph("A", lambda l: l.endpoint, lambda l: l.endpoint,
                           lambda n: LabelA(n, "id"), lambda l: l.silent)

ALPHABET_F = AlphabetGraph("F", lambda m: m.initial if isinstance(m, GlobalMove) else m.vertex,
                           lambda m: m.final if isinstance(m, GlobalMove) else m.vertex,
                           IdentityEdge, lambda m: isinstance(m, IdentityEdge))


@dataclass(frozen=True)
class InterfacedPosition:
    """A position with interface channels ``h`` (``h[a-1]`` is the a-th interface channel)."""

    position: Position
    h: tuple

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(self.h))
        if len(set(self.h)) != len(self.h):
            raise ValueError("interface map must be injective")
        if any(not 1 <= c <= self.position.channels for c in self.h):
            raise ValueError("interface channel outside the position")

    @property
    def interface_size(self) -> int:
        return len(self.h)

    def canonical(self):
        return canonical_form(self.position, self.h)[0], len(self.h)


@dataclass(frozen=True)
class LEdge:
    """A full move seen from an interfaced position."""

    h: tuple
    move: GlobalMove

    @property
    def source(self) -> InterfacedPosition:
        return InterfacedPosition(self.move.initial, self.h)

    @property
    def target(self) -> InterfacedPosition:
        return InterfacedPosition(self.move.final, moved_interface(self.move, self.h))

    def __str__(self):
        return str(self.move)


ALPHABET_L = AlphabetGraph("L", lambda e: e.source if isinstance(e, LEdge) else e.vertex,
                           lambda e: e.target if isinstance(e, LEdge) else e.vertex,
                           IdentityEdge, lambda e: isinstance(e, IdentityEdge))


class Lts:
    """An LTS generated on demand by ``step(state) -> [(label, state)]``.

    ``key`` maps a state to a hashable canonical form; transitions are
    memoised per key.  ``vertex`` gives the alphabet vertex over which a
    state lies.
    """

    def __init__(self, step: Callable, key: Callable, alphabet: AlphabetGraph,
                 vertex: Callable, name: str = "lts"):
        self._step = step
        self.key = key
        self.alphabet = alphabet
        self.vertex = vertex
        self.name = name
        self._memo = {}
        self._lock = threading.Lock()

    def step(self, state) -> list:
        try:
            k = self.key(state)
            hit = self._memo.get(k)
            if hit is None:
                hit = list(self._step(state))
                with self._lock:
                    self._memo.setdefault(k, hit)
        except RecursionError:
            # states whose nesting grows without bound end up here long before any cap
            raise BudgetExceeded("state nesting exceeds the recursion limit",
                                 len(self._memo)) from None
        return hit

    def silent(self, label) -> bool:
        return self.alphabet.is_identity(label)

    def check_transition(self, state, label, nxt) -> bool:
        """The labelling is a graph morphism on this edge."""
        a = self.alphabet
        return a.source(label) == self.vertex(state) and a.target(label) == self.vertex(nxt)


# --------------------------------------------------------------------------
# CCS
# --------------------------------------------------------------------------


def ccs_lts() -> Lts:
    def step(st):
        ctx, p = st
        return [(l, (ctx, q)) for l, q in ccs.sorted_transitions(ctx, p)]

    return Lts(step, lambda st: st, ALPHABET_A, lambda st: st[0], "ccs")


# --------------------------------------------------------------------------
# strategies and process terms over F
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StrategyState:
    position: Position
    components: tuple  # DefiniteStrategy per player

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != len(self.position.players):
            raise ValueError("one definite strategy per player is required")

    def key(self, pinned: tuple = ()):
        return _tagged_key(self.position, tuple(d.serial for d in self.components), pinned)


@dataclass(frozen=True)
class TermState:
    position: Position
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def key(self, pinned: tuple = ()):
        return _tagged_key(self.position, tuple(t.serial for t in self.terms), pinned)


@lru_cache(maxsize=500_000)
def _tagged_key(position: Position, serials: tuple, pinned: tuple):
    canon, order, _ = canonical_form(position, pinned, serials)
    return canon, tuple(serials[x] for x in order)


def strategy_state(ctx: int, p) -> StrategyState:
    s = translate_ccs(ctx, p)
    return StrategyState(individual(ctx), (s.branches[0],))


def _classes_of(kind) -> list:
    """``(anchor slot, basic class)`` seen by the anchored players of a full move kind."""
    t, a = kind.tag, kind.args
    if t == "para":
        return [(0, PARAL), (0, PARAR)]
    if t in ("tick", "nu"):
        return [(0, TICK if t == "tick" else NU)]
    if t == "in":
        return [(0, BIn(a[1]))]
    if t == "out":
        return [(0, BOut(a[1]))]
    return [(0, BOut(a[1])), (1, BIn(a[3]))]


_CLOSED = ("para", "tick", "nu")


def _candidates(X: Position, closed_world: bool = False):
    """Full move kinds with anchors, in canonical order, before instantiation."""
    for x, p in enumerate(X.players):
        for kind in player_kinds(len(p)):
            if is_full(kind) and (not closed_world or kind.tag in _CLOSED):
                yield kind, (x,)
    for p, P in enumerate(X.players):
        for q, Q in enumerate(X.players):
            if p != q:
                for j, c in enumerate(P, 1):
                    for i, d in enumerate(Q, 1):
                        if c == d:
                            yield KTau(len(P), j, len(Q), i), (p, q)


def _fire(m: GlobalMove, comps: tuple, choices: list) -> list:
    """Successor component tuples; ``choices[k]`` are the options for the k-th involved player."""
    base = [comps[predecessor(m, y)] for y in range(len(m.final.players))]
    out = []
    ys = [y for _, y, _ in involved(m)]
    for combo in itertools.product(*choices):
        nxt = list(base)
        for y, c in zip(ys, combo):
            nxt[y] = c
        out.append(tuple(nxt))
    return out


def strategy_step(st: StrategyState, closed_world: bool = False) -> list:
    """Transitions ``(move, state)`` of a family of definite strategies.

    With ``closed_world`` only fork, tick, channel creation and
    synchronisation moves are generated.
    """
    X, comps = st.position, st.components
    out = []
    for kind, anchor in _candidates(X, closed_world):
        residuals = [comps[anchor[k]][b] for k, b in _classes_of(kind)]
        if any(not len(r) for r in residuals):
            continue
        m = instantiate(kind, X, anchor)  # raises ArityError past the maximum arity
        for nxt in _fire(m, comps, [r.branches for r in residuals]):
            out.append((m, StrategyState(m.final, nxt)))
    return out


def strategy_lts() -> Lts:
    return Lts(strategy_step, lambda st: st.key(), ALPHABET_F, lambda st: st.position,
               "strategies")


def _guard_kind(g, n: int):
    if g.tag == "tick":
        return KTick(n)
    if g.tag == "nu":
        return KNu(n)
    return (KIn if g.tag == "in" else KOut)(n, g.index)


def term_step(st: TermState) -> list:
    """Transitions of a family of process terms."""
    X, terms = st.position, st.terms
    for x, t in enumerate(terms):
        if t.arity != X.arity(x):
            raise ValueError(f"term of arity {t.arity} on a player of arity {X.arity(x)}")
    out = []
    for x, t in enumerate(terms):
        n = X.arity(x)
        if isinstance(t, Fork):
            m = instantiate(KPara(n), X, (x,))
            out += [(m, TermState(m.final, nxt)) for nxt in _fire(m, terms, [[t.left], [t.right]])]
            continue
        for g, u in t.branches:
            m = instantiate(_guard_kind(g, n), X, (x,))
            out += [(m, TermState(m.final, nxt)) for nxt in _fire(m, terms, [[u]])]
    for p, P in enumerate(X.players):
        tp = terms[p]
        if isinstance(tp, Fork):
            continue
        for q, Q in enumerate(X.players):
            tq = terms[q]
            if p == q or isinstance(tq, Fork):
                continue
            for gp, up in tp.branches:
                if gp.tag != "out":
                    continue
                for gq, uq in tq.branches:
                    if gq.tag == "in" and P[gp.index - 1] == Q[gq.index - 1]:
                        m = instantiate(KTau(len(P), gp.index, len(Q), gq.index), X, (p, q))
                        out += [(m, TermState(m.final, nxt))
                                for nxt in _fire(m, terms, [[up], [uq]])]
    return out


def term_lts() -> Lts:
    return Lts(term_step, lambda st: st.key(), ALPHABET_F, lambda st: st.position, "terms")


def _same_definite(a: DefiniteStrategy, b: DefiniteStrategy, depth: int) -> bool:
    if a is b:
        return True
    return graph_equal(Strategy(a.arity, (a,)), Strategy(b.arity, (b,)), depth=depth)


def interpret_is_strong_bisim(position: Position, terms, depth: int,
                              swap_forks: bool = False, compare_depth: int = 6,
                              state_cap: Optional[int] = None) -> Verdict:
    """Check that interpretation maps term transitions onto strategy transitions and back.

    Explores term states to ``depth``; at each, the image state is the family
    of interpreted terms.  A witness is the list of moves leading to the
    mismatching state plus the unmatched move.
    """
    interp = Interpreter(swap_forks)
    cap = state_cap or default_state_cap()

    def image(ts: TermState) -> StrategyState:
        return StrategyState(ts.position, tuple(interp(t).branches[0] for t in ts.terms))

    def same(a: tuple, b: tuple) -> bool:
        return all(_same_definite(x, y, compare_depth) for x, y in zip(a, b))

    start = TermState(position, tuple(terms))
    seen = {start.key()}
    frontier = [(start, [])]
    visited = 0
    for level in range(depth):
        nxt_frontier = []
        for ts, path in frontier:
            visited += 1
            if visited > cap:
                return Verdict(INCONCLUSIVE, False, None, visited, level, detail="state cap")
            ss = image(ts)
            t_out = term_step(ts)
            s_out = strategy_step(ss)
            for m, t2 in t_out:
                img = image(t2).components
                if not any(m2 == m and same(img, s2.components) for m2, s2 in s_out):
                    return Verdict(FAIL, True, path + [str(m)], visited, level,
                                   detail=f"term move {m} unmatched by the strategy")
            for m, s2 in s_out:
                if not any(m2 == m and same(image(t2).components, s2.components)
                           for m2, t2 in t_out):
                    return Verdict(FAIL, True, path + [str(m)], visited, level,
                                   detail=f"strategy move {m} unmatched by the term")
            for m, t2 in t_out:
                k = t2.key()
                if k not in seen:
                    seen.add(k)
                    nxt_frontier.append((t2, path + [str(m)]))
        frontier = nxt_frontier
    return Verdict(PASS, not frontier, None, visited, depth)


# --------------------------------------------------------------------------
# change of base
# --------------------------------------------------------------------------


def moved_interface(m: GlobalMove, h: tuple) -> tuple:
    return tuple(m.channel_map[c - 1] for c in h)


def visible(m: GlobalMove, h: tuple) -> bool:
    """False for inputs and outputs on channels outside the interface."""
    if m.kind.tag not in ("in", "out"):
        return True
    x, i = m.anchor[0], m.kind.args[1]
    return m.initial.players[x][i - 1] in h


def l_edges(v: InterfacedPosition) -> list:
    from .game import enabled_moves
    return [LEdge(v.h, m) for m in enabled_moves(v.position, "full") if visible(m, v.h)]


def chi(e):
    """Forget the interface: an L-vertex or L-edge to its F counterpart."""
    if isinstance(e, InterfacedPosition):
        return e.position
    if isinstance(e, LEdge):
        return e.move
    return IdentityEdge(chi(e.vertex))


def xi(e):
    """Relabel an L-vertex or L-edge into the CCS alphabet."""
    if isinstance(e, InterfacedPosition):
        return e.interface_size
    if isinstance(e, IdentityEdge):
        return LabelA(xi(e.vertex), "id")
    k, m = len(e.h), e.move
    t = m.kind.tag
    if t == "tick":
        return LabelA(k, "tick")
    if t in ("tau", "para", "nu"):
        return LabelA(k, "id")
    if t in ("in", "out"):
        c = m.initial.players[m.anchor[0]][m.kind.args[1] - 1]
        if c not in e.h:
            raise ValueError("input or output on a private channel is not an L-edge")
        return LabelA(k, t, e.h.index(c) + 1)
    raise ValueError(f"{m.kind.key} is not a full move")


@dataclass(frozen=True)
class LFragment:
    vertices: tuple
    edges: tuple  # (source, LEdge, target)


def build_chi(max_channels: int = 2, max_players: int = 2, max_arity: int = 2) -> LFragment:
    """Interfaced positions within the bounds (up to iso) and their L-edges."""
    seen, vertices = set(), []
    for n in range(max_channels + 1):
        assigns = [a for r in range(max_arity + 1)
                   for a in itertools.product(range(1, n + 1), repeat=r)]
        for q in range(max_players + 1):
            for players in itertools.combinations_with_replacement(assigns, q):
                X = Position(n, players)
                for k in range(n + 1):
                    for h in itertools.permutations(range(1, n + 1), k):
                        v = InterfacedPosition(X, h)
                        c = v.canonical()
                        if c not in seen:
                            seen.add(c)
                            vertices.append(v)
    edges = tuple((v, e, e.target) for v in vertices for e in l_edges(v))
    return LFragment(tuple(vertices), edges)


@dataclass(frozen=True)
class LState:
    h: tuple
    inner: Any

    @property
    def vertex(self) -> InterfacedPosition:
        return InterfacedPosition(self.inner.position, self.h)


def pullback_lts(base: Lts, name: str = "pullback") -> Lts:
    """Restrict an F-LTS of positioned states along the interface-forgetting map."""

    def step(st: LState):
        return [(LEdge(st.h, m), LState(moved_interface(m, st.h), nxt))
                for m, nxt in base.step(st.inner) if visible(m, st.h)]

    return Lts(step, lambda st: st.inner.key(st.h), ALPHABET_L, lambda st: st.vertex, name)


def postcompose_lts(lts: Lts, relabel: Callable = xi, name: str = "relabelled") -> Lts:
    """Same states and transitions, labels mapped through ``relabel``."""

    def step(st):
        return [(relabel(l), nxt) for l, nxt in lts.step(st)]

    return Lts(step, lts.key, ALPHABET_A, lambda st: relabel(lts.vertex(st)), name)


def strategy_pipeline(ctx: int, p) -> tuple:
    """The CCS-alphabet LTS of strategies with the whole context as interface, and ``⟦p⟧``'s state."""
    lts = postcompose_lts(pullback_lts(strategy_lts()))
    return lts, LState(tuple(range(1, ctx + 1)), strategy_state(ctx, p))


def term_pipeline(ctx: int, p) -> tuple:
    from .strategies import theta
    lts = postcompose_lts(pullback_lts(term_lts()))
    return lts, LState(tuple(range(1, ctx + 1)), TermState(individual(ctx), (theta(ctx, p),)))


# --------------------------------------------------------------------------
# exploration
# --------------------------------------------------------------------------


@dataclass
class Fragment:
    start: Any
    states: dict = field(default_factory=dict)  # key -> state
    edges: dict = field(default_factory=dict)  # key -> [(label, key)]
    complete: bool = True


def explore(lts: Lts, start, cap: Optional[int] = None, depth: Optional[int] = None) -> Fragment:
    """Breadth-first exploration; ``complete`` is false when the cap or depth cut it short."""
    cap = cap or default_state_cap()
    k0 = lts.key(start)
    frag = Fragment(k0, {k0: start})
    queue = deque([(k0, 0)])
    while queue:
        k, d = queue.popleft()
        if depth is not None and d >= depth:
            frag.complete = False
            continue
        out = []
        try:
            succ = lts.step(frag.states[k])
        except BudgetExceeded:
            frag.complete = False
            return frag
        for label, nxt in succ:
            k2 = lts.key(nxt)
            if k2 not in frag.states:
                if len(frag.states) >= cap:
                    frag.complete = False
                    frag.edges[k] = out
                    return frag
                frag.states[k2] = nxt
                queue.append((k2, d + 1))
            out.append((label, k2))
        frag.edges[k] = out
    return frag


def state_hash(key) -> str:
    return hashlib.sha1(repr(key).encode()).hexdigest()[:12]


def trace_json(states: list, labels: list) -> list:
    """Alternating state hashes and labels."""
    out = []
    for i, s in enumerate(states):
        out.append(state_hash(s))
        if i < len(labels):
            out.append(str(labels[i]))
    return out


def fragment_dot(frag: Fragment, silent: Callable = lambda l: getattr(l, "silent", False),
                 name: str = "lts") -> str:
    ids = {k: i for i, k in enumerate(frag.states)}
    lines = [f"digraph {name} {{", "  node [shape=circle, fontsize=9, label=\"\"];"]
    for k, i in ids.items():
        extra = ", shape=doublecircle" if k == frag.start else ""
        lines.append(f'  s{i} [xlabel="{state_hash(k)[:6]}"{extra}];')
    for k, out in frag.edges.items():
        for label, k2 in out:
            text = str(label)
            style = ""
            if silent(label):
                style = ", style=dashed"
            elif isinstance(label, LabelA) and label.kind == "tick":
                style = ", style=bold"
            lines.append(f'  s{ids[k]} -> s{ids[k2]} [label="{text}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# weak bisimilarity over A
# --------------------------------------------------------------------------


class _Saturated:
    """Weak transitions computed on demand from an LTS over ``A``."""

    def __init__(self, lts: Lts, cap: int):
        self.lts, self.cap = lts, cap
        self.states = {}
        self._closure = {}
        self._weak = {}
        self.used = 0

    def add(self, st):
        k = self.lts.key(st)
        self.states.setdefault(k, st)
        return k

    def succ(self, k):
        out = []
        for l, nxt in self.lts.step(self.states[k]):
            out.append((l, self.add(nxt)))
        self.used = max(self.used, len(self.states))
        if len(self.states) > self.cap:
            raise BudgetExceeded("state cap exceeded", len(self.states))
        return out

    def closure(self, k) -> frozenset:
        hit = self._closure.get(k)
        if hit is not None:
            return hit
        seen, stack = {k}, [k]
        while stack:
            u = stack.pop()
            for l, v in self.succ(u):
                if l.silent and v not in seen:
                    seen.add(v)
                    stack.append(v)
        res = frozenset(seen)
        self._closure[k] = res
        return res

    def weak(self, k) -> dict:
        """label (``id`` for silent) -> set of weak successors."""
        hit = self._weak.get(k)
        if hit is not None:
            return hit
        out = {}
        pre = self.closure(k)
        out[("id",)] = set(pre)
        for u in pre:
            for l, v in self.succ(u):
                if not l.silent:
                    out.setdefault((l.kind, l.channel), set()).update(self.closure(v))
        self._weak[k] = out
        return out


def _approx(a: _Saturated, ka, b: _Saturated, kb, k: int, memo: dict):
    """None when the states are ``k``-approximately weakly bisimilar, else a label trace."""
    if k == 0:
        return None
    key = (ka, kb, k)
    if key in memo:
        return memo[key]
    res = None
    for (x, kx), (y, ky), flip in ((a, ka), (b, kb), False), ((b, kb), (a, ka), True):
        wx, wy = x.weak(kx), y.weak(ky)
        for label, targets in wx.items():
            answers = wy.get(label, ())
            for t in targets:
                found, deepest = False, None
                for u in answers:
                    sub = _approx(x, t, y, u, k - 1, memo) if not flip else \
                        _approx(y, u, x, t, k - 1, memo)
                    if sub is None:
                        found = True
                        break
                    deepest = sub
                if not found:
                    res = [_label_text(label)] + (deepest or [])
                    break
            if res:
                break
        if res:
            break
    memo[key] = res
    return res


def _label_text(label) -> str:
    if label == ("id",):
        return "id"
    kind, ch = label
    return {"tick": "♥", "in": f"a{ch}", "out": f"~a{ch}"}[kind]


def _exact(a: _Saturated, ka, b: _Saturated, kb):
    """Partition refinement on the saturated union; returns ``(bisimilar, rounds)``."""
    nodes = [(0, k) for k in list(a.states)] + [(1, k) for k in list(b.states)]
    sat = {0: a, 1: b}
    weak = {n: sat[n[0]].weak(n[1]) for n in nodes}
    block = {n: 0 for n in nodes}
    nblocks, rounds = 1, 0
    while True:
        sigs = {n: frozenset((l, block[(n[0], t)]) for l, ts in weak[n].items() for t in ts)
                for n in nodes}
        number = {}
        new = {n: number.setdefault((block[n], sigs[n]), len(number)) for n in nodes}
        rounds += 1
        if new[(0, ka)] != new[(1, kb)]:
            return False, rounds
        if len(number) == nblocks:
            return True, rounds
        block, nblocks = new, len(number)


def weak_bisim_bounded(l1: Lts, s1, l2: Lts, s2, k: int,
                       state_cap: Optional[int] = None, bounded_only: bool = False) -> Verdict:
    """Weak bisimilarity over ``A``: exact when both reachable spaces fit the cap, else depth ``k``.

    ``bounded_only`` skips the exact attempt and always compares the depth-``k`` approximants.
    """
    if k < 0:
        raise ValueError("depth must be non-negative")
    cap = state_cap or default_state_cap()
    a, b = _Saturated(l1, cap), _Saturated(l2, cap)
    ka, kb = a.add(s1), b.add(s2)
    f1 = f2 = None
    if not bounded_only:
        f1, f2 = explore(l1, s1, cap), explore(l2, s2, cap)
    if f1 is not None and f1.complete and f2.complete:
        for frag, sat in ((f1, a), (f2, b)):
            for key, st in frag.states.items():
                sat.states.setdefault(key, st)
        try:
            same, rounds = _exact(a, ka, b, kb)
        except BudgetExceeded:
            pass
        else:
            used = len(f1.states) + len(f2.states)
            if same:
                return Verdict(PASS, True, None, used, rounds, detail="exact")
            witness = _approx(a, ka, b, kb, rounds, {})
            return Verdict(FAIL, True, witness, used, rounds, detail="exact")
    try:
        witness = _approx(a, ka, b, kb, k, {})
    except BudgetExceeded as e:
        return Verdict(INCONCLUSIVE, False, None, e.used, k, detail=str(e))
    used = len(a.states) + len(b.states)
    if witness is None:
        return Verdict(PASS, False, None, used, k, detail=f"bounded to depth {k}")
    # a bounded distinction is a genuine one
    return Verdict(FAIL, True, witness, used, k, detail=f"distinguished within depth {k}")
