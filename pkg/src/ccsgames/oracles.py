"""Reference implementations used to cross-check the engine.

Nothing here calls the transition, translation or behaviour code it is
compared against.  The reduction oracle works on named channels and a
multiset of threads; the matching-family oracle enumerates every assignment
of states and filters it.
"""

from __future__ import annotations

import itertools
from collections import deque

from . import ccs


# --------------------------------------------------------------------------
# reductions with named channels
# --------------------------------------------------------------------------


def _threads(p, env: tuple, fresh: list, recs: dict) -> list:
    """Split ``p`` into guarded-sum threads; ``env[c-1]`` names channel c."""
    if isinstance(p, ccs.Par):
        return _threads(p.left, env, fresh, recs) + _threads(p.right, env, fresh, recs)
    if isinstance(p, ccs.Nu):
        fresh[0] += 1
        return _threads(p.body, env + (f"n{fresh[0]}",), fresh, recs)
    if isinstance(p, ccs.RecDef):
        return _threads(p.body, env, fresh, {**recs, p.name: (p, env)})
    if isinstance(p, ccs.RecVar):
        q, env2 = recs[p.name]
        return _threads(q, env2, fresh, recs)
    if not p.branches:
        return []
    return [(p, env, tuple(sorted(recs.items(), key=lambda t: t[0])))]


def _branches(thread):
    p, env, recs = thread
    for pre, q in p.branches:
        name = env[pre.channel - 1] if pre.kind != "tick" else None
        yield pre.kind, name, (q, env, dict(recs))


def _canon(threads: list) -> tuple:
    """Rename generated channels by first occurrence after sorting threads by shape."""
    def shape(t):
        p, env, recs = t
        return (repr(p), tuple(n if not n.startswith("n") else "" for n in env))
    ordered = sorted(threads, key=shape)
    rename = {}
    out = []
    for p, env, recs in ordered:
        env2 = []
        for n in env:
            if n.startswith("n"):
                rename.setdefault(n, f"n{len(rename) + 1}")
                env2.append(rename[n])
            else:
                env2.append(n)
        out.append((p, tuple(env2), recs))
    fixed = []
    for p, env, recs in out:
        recs2 = tuple((k, (q, tuple(rename.get(n, n) for n in e))) for k, (q, e) in recs)
        fixed.append((p, env, recs2))
    return tuple(fixed)


def _reductions(state: tuple, fresh: list):
    """``(is_tick, next_state)`` for every reduction of a thread multiset."""
    threads = list(state)
    for i, t in enumerate(threads):
        rest = threads[:i] + threads[i + 1:]
        for kind, name, (q, env, recs) in _branches(t):
            if kind == "tick":
                yield True, rest + _threads(q, env, fresh, recs)
    for i, j in itertools.permutations(range(len(threads)), 2):
        rest = [t for k, t in enumerate(threads) if k not in (i, j)]
        for k1, n1, (q1, e1, r1) in _branches(threads[i]):
            if k1 != "out":
                continue
            for k2, n2, (q2, e2, r2) in _branches(threads[j]):
                if k2 == "in" and n1 == n2:
                    yield False, rest + _threads(q1, e1, fresh, r1) + _threads(q2, e2, fresh, r2)


def bot_reference(ctx: int, p, budget: int = 200_000) -> bool:
    """True when every tick-free reduction sequence from ``p`` extends to one with a tick."""
    fresh = [0]
    env = tuple(f"f{c}" for c in range(1, ctx + 1))
    start = _canon(_threads(p, env, fresh, {}))
    seen = {start}
    queue = deque([start])
    edges, ticking = {}, set()
    while queue:
        s = queue.popleft()
        out = []
        for tick, nxt in _reductions(s, fresh):
            if tick:
                ticking.add(s)
                continue
            c = _canon(nxt)
            out.append(c)
            if c not in seen:
                if len(seen) > budget:
                    raise RuntimeError("reference oracle budget exceeded")
                seen.add(c)
                queue.append(c)
        edges[s] = out
    # states that can still tick: backward closure from ticking states
    can = set(ticking)
    changed = True
    while changed:
        changed = False
        for s, out in edges.items():
            if s not in can and any(t in can for t in out):
                can.add(s)
                changed = True
    return seen <= can


# --------------------------------------------------------------------------
# matching families by brute force
# --------------------------------------------------------------------------


def _count(s, moves: tuple) -> int:
    if not moves:
        return len(s.branches)
    return sum(_count(d.table[_slot(d.arity, moves[0])], moves[1:]) for d in s.branches)


def _slot(n: int, b) -> int:
    fixed = {"paral": 0, "parar": 1, "tick": 2, "nu": 3}
    if b.tag in fixed:
        return fixed[b.tag]
    return 4 + 2 * (b.index - 1) + (b.tag == "out")


def _parent_index(s, moves: tuple, idx: int) -> int:
    """Index at ``moves[:-1]`` of state ``idx`` at ``moves``, from counts alone."""
    if len(moves) == 1:
        for i, d in enumerate(s.branches):
            c = _count(d.table[_slot(d.arity, moves[0])], ())
            if idx < c:
                return i
            idx -= c
        raise IndexError(idx)
    # states at moves are grouped by initial state i, each group being the
    # states of the residual after moves[0]; restriction acts inside a group
    before_child, before_parent = 0, 0
    for d in s.branches:
        r = d.table[_slot(d.arity, moves[0])]
        c = _count(r, moves[1:])
        if idx < c:
            return before_parent + _parent_index(r, moves[1:], idx)
        idx -= c
        before_parent += _count(r, moves[1:-1])
    raise IndexError(idx)


def matching_families(components, nodes) -> set:
    """All compatible assignments over ``nodes`` = ``{(root, view moves)}``.

    ``components[root]`` is the root player's strategy.  Returns frozensets of
    ``((root, moves), index)``.
    """
    nodes = sorted(nodes, key=lambda n: (n[0], len(n[1]), [str(b) for b in n[1]]))
    ranges = [range(_count(components[x], moves)) for x, moves in nodes]
    pos = {n: i for i, n in enumerate(nodes)}
    checks = []
    for i, (x, moves) in enumerate(nodes):
        if moves:
            j = pos.get((x, moves[:-1]))
            if j is not None:
                checks.append((i, j, components[x], moves))
    out = set()
    for combo in itertools.product(*ranges):
        if all(_parent_index(s, mv, combo[i]) == combo[j] for i, j, s, mv in checks):
            out.add(frozenset(zip(nodes, combo)))
    return out
