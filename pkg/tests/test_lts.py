import itertools

import pytest
from hypothesis import given, strategies as st

from ccsgames import ccs
from ccsgames.ccs import LabelA, parse_ccs
from ccsgames.game import Position, individual
from ccsgames.lts import (InterfacedPosition, LState, build_chi, ccs_lts, chi, explore,
                          fragment_dot, interpret_is_strong_bisim, pullback_lts, strategy_lts,
                          strategy_pipeline, strategy_state, term_pipeline, trace_json,
                          weak_bisim_bounded, xi)
from ccsgames.strategies import theta


def ccs_state(text):
    return ccs_lts(), parse_ccs(text)


def weak(left, right, k=6, cap=None, bounded_only=False):
    return weak_bisim_bounded(*ccs_state(left), *ccs_state(right), k, cap, bounded_only)


def labels_from(lts, start):
    return sorted(str(l) for l, _ in lts.step(start))


# ---------------------------------------------------------------- change of base


def test_pipeline_relabels_visible_moves():
    lts, st0 = strategy_pipeline(*parse_ccs("[1] a1.0 + 'a1.tick.0"))
    assert labels_from(lts, st0) == ["a1", "~a1"]
    lts, st0 = strategy_pipeline(*parse_ccs("[1] a1.0 | 'a1.tick.0"))
    # the fork is silent; synchronisation needs both halves first
    assert labels_from(lts, st0) == ["id"]


def test_private_channel_moves_are_removed_by_the_pullback():
    ctx, p = parse_ccs("[0] new a. a1.0")
    st0 = strategy_state(ctx, p)
    over_f = explore(strategy_lts(), st0)
    over_l = explore(pullback_lts(strategy_lts()), LState((), st0))
    tags = lambda frag: {getattr(l, "move", l).kind.tag for out in frag.edges.values() for l, _ in out}
    assert "in" in tags(over_f) and "in" not in tags(over_l)


def test_xi_reads_channels_through_the_interface():
    v = InterfacedPosition(Position(2, ((2, 1),)), (2,))
    from ccsgames.lts import l_edges
    got = sorted(str(xi(e)) for e in l_edges(v))
    # only channel 2 is visible and it is interface channel 1
    assert got == ["a1", "id", "id", "~a1", "♥"]


def _brute_classes(max_channels, max_players, max_arity):
    """Interfaced positions up to iso, by trying every channel permutation."""
    classes = set()
    for n in range(max_channels + 1):
        assigns = [a for r in range(max_arity + 1)
                   for a in itertools.product(range(1, n + 1), repeat=r)]
        for q in range(max_players + 1):
            for players in itertools.combinations_with_replacement(assigns, q):
                for k in range(n + 1):
                    for h in itertools.permutations(range(1, n + 1), k):
                        best = min(
                            (tuple(sorted(tuple(pi[c - 1] for c in pl) for pl in players)),
                             tuple(pi[c - 1] for c in h))
                            for pi in itertools.permutations(range(1, n + 1)))
                        classes.add((n, best))
    return classes


def test_chi_fragment_has_one_vertex_per_iso_class():
    frag = build_chi(2, 2, 2)
    assert len(frag.vertices) == len(_brute_classes(2, 2, 2))


def test_chi_commutes_with_sources_and_targets():
    frag = build_chi(1, 2, 1)
    for v, e, t in frag.edges:
        m = chi(e)
        assert m.initial == chi(v) and m.final == chi(t)
        assert xi(e).endpoint == len(v.h) == len(t.h)


# ---------------------------------------------------------------- interpretation


@pytest.mark.parametrize("text", ["[1] a1.0 | 'a1.tick.0", "[0] new a. (a1.0 | 'a1.tick.0)",
                                  "[1] rec X. (a1.X + tick.0)", "[2] a1.0 + 'a2.0 | a2.tick.0"])
def test_interpretation_matches_term_transitions(text):
    ctx, p = parse_ccs(text)
    assert interpret_is_strong_bisim(individual(ctx), [theta(ctx, p)], 4).passed


def test_swapped_forks_are_caught():
    ctx, p = parse_ccs("[1] a1.0 | 'a1.tick.0")
    v = interpret_is_strong_bisim(individual(ctx), [theta(ctx, p)], 4, swap_forks=True)
    assert v.failed and v.witness


def test_term_pipeline_agrees_with_strategy_pipeline():
    ctx, p = parse_ccs("[1] new a. (a2.'a1.0 | 'a2.0)")
    v = weak_bisim_bounded(*term_pipeline(ctx, p), *strategy_pipeline(ctx, p), 6)
    assert v.passed and v.exact


# ---------------------------------------------------------------- weak bisimilarity


@pytest.mark.parametrize("left, right", [
    ("[1] new a. (a2.0 | 'a2.0)", "[1] 0"),
    ("[1] new b. (a2.a1.0 | 'a2.0)", "[1] a1.0"),
    ("[1] a1.0 | 0", "[1] a1.0"),
    ("[2] a1.0 | a2.0", "[2] a2.0 | a1.0"),
    ("[1] rec X. a1.X", "[1] rec Y. a1.a1.Y"),
])
def test_weakly_bisimilar_pairs(left, right):
    v = weak(left, right)
    assert v.passed and v.exact


@pytest.mark.parametrize("left, right", [
    ("[1] a1.0", "[1] 0"),
    ("[2] a1.(a2.0 + tick.0)", "[2] a1.a2.0 + a1.tick.0"),
    ("[1] a1.0 + tick.0", "[1] a1.0 | tick.0"),
])
def test_distinguished_pairs(left, right):
    v = weak(left, right)
    assert v.failed and v.exact and v.witness is not None


def test_infinite_spaces_fall_back_to_bounded_mode():
    v = weak("[1] rec X. a1.(X | X)", "[1] rec X. a1.(X | X)", k=2, cap=30)
    assert v.passed and not v.exact


def test_budget_exhaustion_is_inconclusive():
    v = weak("[1] rec X. a1.(X | X) + tick.(X | X)", "[1] rec X. tick.(X | X) + a1.(X | X)",
             k=8, cap=10)
    assert v.status == "inconclusive" and v.exit_code == 2


procs = st.sampled_from(["[1] 0", "[1] a1.0", "[1] 'a1.0", "[1] a1.0 | 'a1.0", "[1] tick.0",
                         "[1] new b. (a2.0 | 'a2.a1.0)", "[1] a1.0 + tick.0",
                         "[1] rec X. (a1.X + tick.0)", "[1] a1.a1.0"])


@given(procs, procs, st.integers(0, 3))
def test_bounded_distinctions_persist_at_greater_depth(left, right, k):
    small = weak(left, right, k, bounded_only=True)
    big = weak(left, right, k + 1, bounded_only=True)
    exact = weak(left, right)
    assert exact.exact
    if small.failed:
        assert big.failed and exact.failed
    if exact.passed:
        assert small.passed and not small.exact
    assert weak(left, left, k, bounded_only=True).passed


def test_dot_and_trace_output():
    frag = explore(*ccs_state("[1] a1.0 | 'a1.tick.0"))
    text = fragment_dot(frag)
    assert text.startswith("digraph") and text.count("->") == sum(map(len, frag.edges.values()))
    assert 'label="♥"' in text
    keys = list(frag.states)
    assert len(trace_json(keys[:2], [LabelA(1, "id")])) == 3
