"""Fair testing, on CCS transition systems and on strategies.

The standard side composes a process with a test and checks that every
tick-free run can still be extended to a tick.  The semantic side does the
same on the closed-world moves of a family of strategies, enumerating
behaviour states configuration by configuration.
"""

from __future__ import annotations

import itertools
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from . import ccs
from .ccs import Par, Sum
from .game import Position
from .lts import Lts, StrategyState, ccs_lts, state_hash, strategy_step
from .strategies import StrategyFamily, family_of, pair
from .verdict import FAIL, INCONCLUSIVE, PASS, BudgetExceeded, Verdict

DEFAULT_BUDGET = 100_000


# --------------------------------------------------------------------------
# the standard predicate
# --------------------------------------------------------------------------


def bot_s(lts: Lts, s, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Every tick-free run from ``s`` extends to one containing a tick.

    Runs follow silent edges; the witness of a failure is the silent path to
    a state from which no tick is reachable.
    """
    k0 = lts.key(s)
    states, parent, order = {k0: s}, {k0: None}, [k0]
    ticks, silent_succ = set(), {}
    queue = deque([k0])
    while queue:
        k = queue.popleft()
        succ = []
        try:
            out = lts.step(states[k])
        except BudgetExceeded as e:
            return Verdict(INCONCLUSIVE, False, None, len(states), detail=str(e))
        for label, nxt in out:
            if label.kind == "tick":
                ticks.add(k)
            elif label.silent:
                k2 = lts.key(nxt)
                succ.append(k2)
                if k2 not in states:
                    if len(states) >= budget:
                        return Verdict(INCONCLUSIVE, False, None, len(states),
                                       detail="silent-reachable states exceed the budget")
                    states[k2], parent[k2] = nxt, (k, label)
                    order.append(k2)
                    queue.append(k2)
        silent_succ[k] = succ
    good = set(ticks)
    pred = {}
    for k, succ in silent_succ.items():
        for k2 in succ:
            pred.setdefault(k2, []).append(k)
    stack = list(good)
    while stack:
        k = stack.pop()
        for k1 in pred.get(k, ()):
            if k1 not in good:
                good.add(k1)
                stack.append(k1)
    for k in order:
        if k not in good:
            path, cur = [], k
            while parent[cur] is not None:
                cur, label = parent[cur]
                path.append(str(label))
            return Verdict(FAIL, True, {"path": path[::-1], "state": _show(states[k])},
                           len(states))
    return Verdict(PASS, True, None, len(states))


def _show(st) -> str:
    if isinstance(st, tuple) and len(st) == 2 and isinstance(st[0], int):
        return ccs.to_text(*st)
    return state_hash(st)


def bot_s_ccs(ctx: int, p, budget: int = DEFAULT_BUDGET) -> Verdict:
    return bot_s(ccs_lts(), (ctx, p), budget)


# --------------------------------------------------------------------------
# test families
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFamily:
    ctx: int
    tests: tuple

    def __post_init__(self):
        object.__setattr__(self, "tests", tuple(self.tests))
        for t in self.tests:
            ccs.check(self.ctx, t)

    def __len__(self):
        return len(self.tests)

    def __iter__(self):
        return iter(self.tests)

    def texts(self) -> list:
        return [ccs.to_text_body(t) for t in self.tests]


def _prefix_order(ctx: int) -> list:
    return ccs.prefixes(ctx)


def _trees(ctx: int, depth: int, width: int) -> list:
    if depth == 0:
        return [ccs.NIL]
    smaller = _trees(ctx, depth - 1, width)
    branches = [(pre, t) for pre in _prefix_order(ctx) for t in smaller]
    out = []
    for w in range(width + 1):
        for combo in itertools.combinations_with_replacement(range(len(branches)), w):
            out.append(Sum(tuple(branches[i] for i in combo)))
    return out


def _tree_stats(t) -> tuple:
    count, widest = 0, 0
    stack = [t]
    while stack:
        u = stack.pop()
        widest = max(widest, len(u.branches))
        count += len(u.branches)
        stack.extend(q for _, q in u.branches)
    return count, widest


def gen_tree_tests(ctx: int, depth: int, width: int = 2) -> TestFamily:
    """Guarded-sum trees of height at most ``depth`` and branching at most ``width``.

    Branches are multisets, so reorderings are not repeated.  Sorted by
    number of prefixes, then widest branching, then text.
    """
    if depth < 0 or width < 0:
        raise ValueError("depth and width must be non-negative")
    trees = _trees(ctx, depth, width)
    keyed = {ccs.to_text_body(t): t for t in trees}
    order = sorted(keyed, key=lambda s: (*_tree_stats(keyed[s]), s))
    return TestFamily(ctx, tuple(keyed[s] for s in order))


def fair_equiv_standard(p, q, ctx: int, tests, budget: int = DEFAULT_BUDGET,
                        jobs: int = 1) -> Verdict:
    """Compare ``p | T`` and ``q | T`` under the testing predicate for every ``T``.

    With ``jobs > 1`` the family is split into contiguous chunks checked in
    worker processes; merging in chunk order gives the sequential verdict.
    """
    tests = tests if isinstance(tests, TestFamily) else TestFamily(ctx, tests)
    if tests.ctx != ctx:
        raise ValueError("test family context differs from the processes' context")
    if jobs > 1 and len(tests) > 1:
        return _standard_chunked(p, q, ctx, tests, budget, jobs)
    lts = ccs_lts()
    used, unknown = 0, []
    for t in tests:
        vp = bot_s(lts, (ctx, Par(p, t)), budget)
        vq = bot_s(lts, (ctx, Par(q, t)), budget)
        used += vp.budget_used + vq.budget_used
        if vp.status == INCONCLUSIVE or vq.status == INCONCLUSIVE:
            unknown.append(ccs.to_text_body(t))
            continue
        if vp.status != vq.status:
            side = "right" if vp.passed else "left"
            failing = vq if vp.passed else vp
            return Verdict(FAIL, True, {"test": ccs.to_text_body(t), "failing_side": side,
                                        "run": failing.witness}, used, family_size=len(tests))
    if unknown:
        return Verdict(INCONCLUSIVE, False, {"undecided_tests": unknown}, used,
                       family_size=len(tests))
    return Verdict(PASS, True, None, used, family_size=len(tests),
                   detail="relative to the given test family")


def _standard_chunk(args) -> Verdict:
    p, q, ctx, chunk, budget = args
    return fair_equiv_standard(p, q, ctx, TestFamily(ctx, chunk), budget)


def _standard_chunked(p, q, ctx, tests, budget, jobs) -> Verdict:
    size = -(-len(tests) // jobs)
    chunks = [tests.tests[i:i + size] for i in range(0, len(tests), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_standard_chunk, [(p, q, ctx, c, budget) for c in chunks]))
    used, unknown = 0, []
    for v in parts:
        used += v.budget_used
        if v.failed:
            return Verdict(FAIL, True, v.witness, used, family_size=len(tests))
        if v.status == INCONCLUSIVE:
            unknown.extend(v.witness["undecided_tests"])
    if unknown:
        return Verdict(INCONCLUSIVE, False, {"undecided_tests": unknown}, used,
                       family_size=len(tests))
    return Verdict(PASS, True, None, used, family_size=len(tests),
                   detail="relative to the given test family")


# --------------------------------------------------------------------------
# the semantic predicate
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Subject:
    """An interfaced family: ``h[a-1]`` is the channel of ``family.position`` for interface channel a."""

    interface: int
    h: tuple
    family: StrategyFamily


@dataclass(frozen=True)
class SemanticTest:
    interface: int
    k: tuple
    family: StrategyFamily

    def __post_init__(self):
        if len(set(self.k)) != len(self.k) or len(self.k) != self.interface:
            raise ValueError("k must be an injection from the interface")


def ccs_subject(ctx: int, p) -> Subject:
    return Subject(ctx, tuple(range(1, ctx + 1)), family_of(ctx, p))


def ccs_test(ctx: int, t) -> SemanticTest:
    return SemanticTest(ctx, tuple(range(1, ctx + 1)), family_of(ctx, t))


def semantic_bot(Z: Position, f: StrategyFamily, k: int, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Bounded check that every unsuccessful closed-world behaviour state can still succeed.

    Behaviour states of ``f`` along closed-world plays are represented by
    configurations: the current position with the definite strategy each
    player has reached.  A configuration reached by a tick-free play of
    length below ``k`` must reach a tick within ``k`` further moves.  When
    the whole tick-free reachable part is explored the answer is exact and
    the bound ``k`` is not used; otherwise a Pass is depth-bounded, and a
    Fail is exact only if the failing configuration's own future was fully
    explored.
    """
    if f.position != Z:
        raise ValueError("family is not on the given position")
    if k < 1:
        raise ValueError("depth must be at least 1")
    starts = [StrategyState(Z, combo)
              for combo in itertools.product(*(s.branches for s in f.components))]
    states, dist, parent = {}, {}, {}
    edges, ready = {}, set()
    queue = deque()
    for st in starts:
        key = st.key()
        if key not in states:
            states[key], dist[key], parent[key] = st, 0, None
            queue.append(key)
    horizon = 2 * k - 2
    exhausted = False
    while queue:
        key = queue.popleft()
        if dist[key] > horizon:
            continue
        out = []
        for m, nxt in strategy_step(states[key], closed_world=True):
            if m.kind.tag == "tick":
                ready.add(key)
                continue
            k2 = nxt.key()
            out.append(k2)
            if k2 not in states:
                if len(states) >= budget:
                    exhausted = True
                    break
                states[k2], dist[k2], parent[k2] = nxt, dist[key] + 1, (key, str(m))
                queue.append(k2)
        edges[key] = out
        if exhausted:
            break
    frontier = [key for key in states if key not in edges]
    saturated = not frontier and not exhausted
    # distance (in tick-free moves) to a configuration where a tick is enabled
    to_tick = {key: 1 for key in ready}
    pred = {}
    for key, out in edges.items():
        for k2 in out:
            pred.setdefault(k2, set()).add(key)
    queue = deque(ready)
    while queue:
        key = queue.popleft()
        for k1 in pred.get(key, ()):
            if k1 not in to_tick:
                to_tick[k1] = to_tick[key] + 1
                queue.append(k1)
    # configurations whose future reaches unexplored territory
    open_ = set(frontier)
    queue = deque(frontier)
    while queue:
        key = queue.popleft()
        for k1 in pred.get(key, ()):
            if k1 not in open_:
                open_.add(k1)
                queue.append(k1)
    examined = [key for key in states if saturated or dist[key] < k]
    used = len(states)

    def witness(key):
        moves, cur = [], key
        while parent[cur] is not None:
            cur, m = parent[cur]
            moves.append(m)
        return {"play": moves[::-1], "configuration": state_hash(key)}

    bounded_fail = None
    for key in sorted(examined, key=lambda c: dist[c]):
        d = to_tick.get(key)
        if d is not None and (saturated or d <= k):
            continue
        if key not in open_ and d is None:
            return Verdict(FAIL, True, witness(key), used, k, len(examined),
                           detail="no tick reachable from a fully explored configuration")
        if bounded_fail is None:
            bounded_fail = key
    if bounded_fail is not None:
        if exhausted:
            return Verdict(INCONCLUSIVE, False, witness(bounded_fail), used, k, len(examined),
                           detail="configuration budget exhausted")
        return Verdict(FAIL, False, witness(bounded_fail), used, k, len(examined),
                       detail=f"no tick within {k} moves")
    if exhausted:
        return Verdict(INCONCLUSIVE, False, None, used, k, len(examined),
                       detail="configuration budget exhausted")
    return Verdict(PASS, saturated, None, used, k, len(examined),
                   detail="saturated" if saturated else f"bounded to depth {k}")


def passes(subject: Subject, test: SemanticTest, k: int, budget: int = DEFAULT_BUDGET) -> Verdict:
    if subject.interface != test.interface:
        raise ValueError("subject and test have different interfaces")
    fam = pair(subject.family, test.family, subject.h, test.k)
    return semantic_bot(fam.position, fam, k, budget)


def fair_equiv_semantic(s1: Subject, s2: Subject, tests, k: int,
                        budget: int = DEFAULT_BUDGET, cache: Optional[dict] = None) -> Verdict:
    """Compare two subjects on each test; ``cache`` may be shared across calls."""
    if s1.interface != s2.interface:
        raise ValueError("subjects have different interfaces")
    cache = {} if cache is None else cache
    tests = list(tests)
    used, unknown = 0, []

    def run(s, t):
        key = (id(s.family), s.h, id(t.family), t.k, k)
        if key not in cache:
            cache[key] = (passes(s, t, k, budget), s, t)  # keep s, t alive for the ids
        return cache[key][0]

    inexact = []
    for i, t in enumerate(tests):
        v1, v2 = run(s1, t), run(s2, t)
        used += v1.budget_used + v2.budget_used
        if v1.status == INCONCLUSIVE or v2.status == INCONCLUSIVE:
            unknown.append(i)
            continue
        if v1.status != v2.status:
            failing = v2 if v1.passed else v1
            return Verdict(FAIL, v1.exact and v2.exact,
                           {"test": i, "failing_side": "right" if v1.passed else "left",
                            "play": failing.witness}, used, k, len(tests))
        if not (v1.exact and v2.exact):
            inexact.append(i)
    if unknown:
        return Verdict(INCONCLUSIVE, False, {"undecided_tests": unknown}, used, k, len(tests))
    if inexact:
        return Verdict(PASS, False, {"inexact_tests": inexact}, used, k, len(tests),
                       detail="some tests only decided up to the depth bound")
    return Verdict(PASS, True, None, used, k, len(tests), detail="relative to the given tests")
