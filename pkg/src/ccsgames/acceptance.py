"""The acceptance criteria as callable checks with fixed seeds.

Each check returns a :class:`CriterionResult`; :func:`run_all` runs them in
order.  The CLI ``accept`` command and the test suite both use this module.
"""

from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

from . import ccs, oracles
from . import presheaf as ps
from .ccs import parse_body, parse_ccs
from .fairtest import (bot_s_ccs, ccs_subject, ccs_test, fair_equiv_semantic, fair_equiv_standard,
                       gen_tree_tests, passes)
from .game import (NU, PARAL, PARAR, BIn, BOut, Para, Position, basic_classes, enabled_moves,
                   glue_by_pushout, individual, player, view_of, compose, identity_play)
from .lts import (ccs_lts, explore, interpret_is_strong_bisim, pullback_lts, strategy_lts,
                  strategy_pipeline, strategy_state, weak_bisim_bounded, LState)
from .strategies import (DefiniteStrategy, Strategy, StrategyFamily, definite, extend, graph_equal,
                         oplus, state_index, theta, translate_ccs)

SEED = 20240517


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    runtime: float
    limit: float

    @property
    def within_limit(self) -> bool:
        return self.runtime < self.limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_limit

    def line(self) -> str:
        mark = "PASS" if self.ok else "FAIL"
        return (f"[{mark}] {self.number}. {self.name}: {self.detail} "
                f"({self.runtime:.2f}s / limit {self.limit:g}s)")


def _timed(number: int, name: str, limit: float, body: Callable) -> CriterionResult:
    t0 = time.perf_counter()
    passed, detail = body()
    return CriterionResult(number, name, passed, detail, time.perf_counter() - t0, limit)


# --------------------------------------------------------------------------
# 1. element counts
# --------------------------------------------------------------------------


def _c1():
    got = []
    y3 = ps.representable(player(3))
    ok = y3.size(ps.STAR) == 3 and y3.size(player(3)) == 1 and y3.total() == 4
    got.append(f"y[3]={{star:{y3.size(ps.STAR)}, [3]:{y3.size(player(3))}}}")
    yp = ps.representable(Para(2))
    want = {ps.STAR: 2, player(2): 3, ps.BaseObject("paral", (2,)): 1,
            ps.BaseObject("parar", (2,)): 1, Para(2): 1}
    ok &= {c: yp.size(c) for c in yp.support} == want
    got.append(f"yPara(2) total={yp.total()}")
    z = glue_by_pushout(individual(2), (1, 2), individual(2), (1, 2))
    ok &= z.channels == 2 and len(z.players) == 2
    got.append(f"pushout={z.channels} channels, {len(z.players)} players")
    return ok, "; ".join(got)


def criterion_1() -> CriterionResult:
    return _timed(1, "element counts and pushout", 1.0, _c1)


# --------------------------------------------------------------------------
# 2. translation tables
# --------------------------------------------------------------------------


def _c2():
    n = 2
    P, Q, R = parse_body(n, "tick.0"), parse_body(n, "'a1.0"), parse_body(n, "a2.tick.0")
    tr = lambda p, c=n: translate_ccs(c, p)
    cases = []
    s = tr(ccs.choice(ccs.prefixed(ccs.In(1), P), ccs.prefixed(ccs.In(1), Q),
                      ccs.prefixed(ccs.Out(2), R)))
    cases.append(("sum", s, definite(n, {BIn(1): oplus(tr(P), tr(Q)), BOut(2): tr(R)})))
    body = parse_body(n + 1, "a3.'a1.0")
    cases.append(("new", tr(ccs.Nu(body)), definite(n, {NU: tr(body, n + 1)})))
    cases.append(("par", tr(ccs.Par(P, Q)), definite(n, {PARAL: tr(P), PARAR: tr(Q)})))
    bad = [name for name, got, want in cases if not graph_equal(got, want)]
    return not bad, "all three tables equal" if not bad else f"mismatch: {bad}"


def criterion_2() -> CriterionResult:
    return _timed(2, "translation tables", 1.0, _c2)


# --------------------------------------------------------------------------
# 3. interpretation is a strong bisimulation
# --------------------------------------------------------------------------


def random_processes(count: int = 120, seed: int = SEED, max_size: int = 8,
                     max_ctx: int = 3, min_size: int = 5) -> list:
    """Distinct random processes; small draws are rejected so most samples interleave."""
    rng = random.Random(seed)
    out, seen = [], set()
    while len(out) < count:
        ctx = rng.randint(0, max_ctx)
        p = ccs.random_process(rng, ctx, max_size)
        if ccs.size(p) >= min_size and (ctx, p) not in seen:
            seen.add((ctx, p))
            out.append((ctx, p))
    return out


MUTATION_SAMPLE = "[1] a1.0 | 'a1.tick.0"

# hand-picked additions with several players, synchronisation and recursion
RICH_SAMPLES = ("[1] (a1.0 | 'a1.0) | (a1.tick.0 | 'a1.0)", "[1] rec X. (a1.X | 'a1.0)",
                "[0] new a. (rec X. (a1.X + tick.0) | 'a1.'a1.0)",
                "[2] a1.'a2.0 | (a2.tick.0 + 'a1.0) | 'a1.0",
                "[1] rec X. new a. (a2.X | 'a2.0 | 'a1.0)")


def _c3():
    sample = random_processes() + [parse_ccs(t) for t in RICH_SAMPLES]
    mismatches = [ccs.to_text(c, p) for c, p in sample
                  if not interpret_is_strong_bisim(individual(c), [theta(c, p)], 4).passed]
    ctx, p = parse_ccs(MUTATION_SAMPLE)
    mutant = interpret_is_strong_bisim(individual(ctx), [theta(ctx, p)], 4, swap_forks=True)
    caught = mutant.failed and "para" in mutant.witness[-1]
    detail = f"{len(sample)} processes, {len(mismatches)} mismatches; mutation " + \
        (f"caught at {mutant.witness}" if caught else "missed")
    return not mismatches and caught, detail


def criterion_3() -> CriterionResult:
    return _timed(3, "interpretation is a strong bisimulation", 60.0, _c3)


# --------------------------------------------------------------------------
# 4. CCS and change-of-based strategies are weakly bisimilar
# --------------------------------------------------------------------------

WEAK_BISIM_SAMPLES = ("[1] a1.0 | 'a1.0", "[0] new a. (a1.tick.0 | 'a1.0)",
                     "[2] a1.a2.0 + a2.a1.0", "[0] new a. a1.0")


def _c4():
    notes, ok = [], True
    for text in WEAK_BISIM_SAMPLES:
        ctx, p = parse_ccs(text)
        lts, st = strategy_pipeline(ctx, p)
        v = weak_bisim_bounded(ccs_lts(), (ctx, p), lts, st, 6)
        ok &= v.passed
        notes.append(f"{text}: {v.status}{'' if v.exact else ' (depth 6)'}")
    return ok, "; ".join(notes)


def criterion_4() -> CriterionResult:
    return _timed(4, "CCS vs strategies, weak bisimilarity", 60.0, _c4)


# --------------------------------------------------------------------------
# 5. undue transitions
# --------------------------------------------------------------------------


def _has_input(frag) -> bool:
    for out in frag.edges.values():
        for label, _ in out:
            move = getattr(label, "move", label)
            if move.kind.tag == "in":
                return True
    return False


def _c5():
    ctx, p = parse_ccs("[0] new a. a1.0")
    st = strategy_state(ctx, p)
    over_f = explore(strategy_lts(), st)
    over_l = explore(pullback_lts(strategy_lts()), LState((), st))
    ok = over_f.complete and over_l.complete and _has_input(over_f) and not _has_input(over_l)
    return ok, (f"input over F: {_has_input(over_f)}, over L: {_has_input(over_l)}")


def criterion_5() -> CriterionResult:
    return _timed(5, "undue transitions removed by the pullback", 1.0, _c5)


# --------------------------------------------------------------------------
# 6. the testing predicate against a reference
# --------------------------------------------------------------------------


def _c6():
    total, bad = 0, []
    for ctx in range(3):
        for p in ccs.enumerate_processes(ctx, 5):
            total += 1
            if bot_s_ccs(ctx, p).passed != oracles.bot_reference(ctx, p):
                bad.append(ccs.to_text(ctx, p))
    return not bad, f"{total} processes, {len(bad)} disagreements" + (f": {bad[:3]}" if bad else "")


def criterion_6() -> CriterionResult:
    return _timed(6, "testing predicate vs reference reductions", 120.0, _c6)


# --------------------------------------------------------------------------
# 7. standard and semantic fair testing agree
# --------------------------------------------------------------------------

PAIR_POOL_1 = ("0", "a1.0", "'a1.0", "tick.0", "a1.tick.0", "'a1.tick.0", "a1.0 + tick.0",
               "a1.0 | 'a1.0", "new a. (a2.tick.0 | 'a2.0)", "a1.0 + 'a1.0", "tick.0 | a1.0",
               "new a. a2.0")


def sample_pairs(count: int = 32, seed: int = SEED) -> list:
    rng = random.Random(seed)
    pairs = list(itertools.combinations(PAIR_POOL_1, 2))
    rng.shuffle(pairs)
    return pairs[:count]


class _Coherence:
    def __init__(self, k: int = 4):
        self.k = k
        self.cache = {}
        self.subjects = {}
        self.tests = {}
        self.per_test_disagreements = []

    def subject(self, ctx, text):
        if (ctx, text) not in self.subjects:
            self.subjects[(ctx, text)] = ccs_subject(ctx, parse_body(ctx, text))
        return self.subjects[(ctx, text)]

    def test_list(self, fam):
        key = (fam.ctx, fam.tests)
        if key not in self.tests:
            self.tests[key] = [ccs_test(fam.ctx, t) for t in fam]
        return self.tests[key]

    def compare(self, ctx, left, right, fam):
        std = fair_equiv_standard(parse_body(ctx, left), parse_body(ctx, right), ctx, fam)
        sem = fair_equiv_semantic(self.subject(ctx, left), self.subject(ctx, right),
                                  self.test_list(fam), self.k, cache=self.cache)
        return std, sem


def _c7():
    co = _Coherence()
    fam1 = gen_tree_tests(1, 2, 2)
    pairs = sample_pairs()
    disagreements, definite_both = [], 0
    for left, right in pairs:
        std, sem = co.compare(1, left, right, fam1)
        if std.definite and sem.definite:
            definite_both += 1
            if std.status != sem.status:
                disagreements.append((left, right))
    std, sem = co.compare(1, "a1.0", "0", fam1)
    texts = fam1.texts()
    known = (std.failed and sem.failed and sem.witness["test"] is not None
             and texts[sem.witness["test"]] == std.witness["test"])
    per_test, per_test_bad = 0, []
    for text in PAIR_POOL_1:
        p = parse_body(1, text)
        for t, st in zip(fam1, co.test_list(fam1)):
            std_v = bot_s_ccs(1, ccs.Par(p, t))
            sem_v = passes(co.subject(1, text), st, co.k)
            if std_v.definite and sem_v.definite:
                per_test += 1
                if std_v.status != sem_v.status:
                    per_test_bad.append((text, ccs.to_text_body(t)))
    fam2 = gen_tree_tests(2, 2, 1)
    std2, sem2 = co.compare(2, "a1.0 | a2.0", "a2.0 | a1.0", fam2)
    sym = std2.passed and sem2.passed
    detail = (f"{len(pairs)} pairs, {definite_both} definite on both sides, "
              f"{len(disagreements)} disagreements; {per_test} process/test runs, "
              f"{len(per_test_bad)} disagreements; (a.0, 0) fails on "
              f"{std.witness['test'] if std.failed else '-'} both sides: {known}; "
              f"(a|b, b|a) passes both: {sym}")
    ok = not disagreements and not per_test_bad and len(pairs) >= 30 and known and sym
    return ok, detail


def criterion_7() -> CriterionResult:
    return _timed(7, "standard vs semantic fair testing", 300.0, _c7)


# --------------------------------------------------------------------------
# 8. behaviours against brute-force matching families
# --------------------------------------------------------------------------

SMALL_POSITIONS = (
    Position(0, ((),)),
    Position(1, ((1,),)),
    Position(2, ((1, 2),)),
    Position(1, ((1,), (1,))),
    Position(2, ((1,), (2,))),
    Position(2, ((1, 2), (1,))),
    Position(2, ((1, 2), (2, 1))),
)


def graded_strategy(n: int, seed: int, depth: int = 4) -> Strategy:
    """A strategy whose initial-state counts vary with the basic class and depth."""
    return _graded(n, seed % 3, depth)


_graded_memo = {}


def _graded(n, a, depth):
    key = (n, a, depth)
    if key in _graded_memo:
        return _graded_memo[key]
    width = (1, 2, 1)[a] if depth else 1

    def table(j):
        def thunk():
            if depth == 0:
                return {}
            return {b: (_graded(b.target_arity(n), (a + i + j) % 3, depth - 1)
                        if (a + i + j) % 4 else Strategy(b.target_arity(n), ()))
                    for i, b in enumerate(basic_classes(n))}
        return thunk

    s = Strategy(n, tuple(DefiniteStrategy(n, thunk=table(j)) for j in range(width)))
    _graded_memo[key] = s
    return s


def small_plays(X: Position, length: int = 2):
    frontier = [identity_play(X)]
    yield frontier[0]
    for _ in range(length):
        nxt = []
        for u in frontier:
            for m in enabled_moves(u.final):
                v = compose(u, m)
                nxt.append(v)
                yield v
        frontier = nxt


def behaviour_nodes(u) -> set:
    from .game import trace
    nodes = set()
    for j in range(len(u) + 1):
        q = u.prefix(j)
        for y in range(len(q.final.players)):
            root, v = trace(q, y)
            nodes.add((root, v.moves))
    return nodes


def _c8():
    checked, bad = 0, []
    for X in SMALL_POSITIONS:
        for seed in range(2):
            comps = tuple(graded_strategy(X.arity(x), seed + x) for x in range(len(X.players)))
            fam = StrategyFamily(X, comps)
            for u in small_plays(X):
                checked += 1
                engine = set()
                for e in extend(fam, u):
                    engine.add(frozenset(((x, v.moves), state_index(comps[x], v, path))
                                         for (x, v), path in e.assignment))
                brute = oracles.matching_families(comps, behaviour_nodes(u))
                if engine != brute:
                    bad.append((X, seed, u.describe()))
    return not bad, f"{checked} plays, {len(bad)} disagreements" + (f": {bad[:2]}" if bad else "")


def criterion_8() -> CriterionResult:
    return _timed(8, "behaviours vs brute-force matching families", 60.0, _c8)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8)


def _run_one(i: int) -> CriterionResult:
    return CRITERIA[i - 1]()


def run_all(only=None, jobs: int = 1) -> list:
    """Run the selected criteria; with ``jobs > 1`` each runs in its own worker process."""
    chosen = [i for i in range(1, len(CRITERIA) + 1) if only is None or i in only]
    if jobs > 1 and len(chosen) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, chosen))
    return [_run_one(i) for i in chosen]
