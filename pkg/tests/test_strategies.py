import pytest
from hypothesis import given, strategies as st

from ccsgames import ccs
from ccsgames.acceptance import graded_strategy
from ccsgames.ccs import parse_ccs
from ccsgames.game import (NU, PARAL, PARAR, TICK, BIn, BOut, Position, ViewPath, compose,
                           enabled_moves, identity_play, individual)
from ccsgames.strategies import (DefiniteStrategy, Fork, GuardedSum, Interpreter, Strategy,
                                 StrategyFamily, definite, dump, empty, extend, family_of,
                                 from_json, graph_equal, oplus, pair, restrict, restrict_element,
                                 state_index, states, theta, to_json, translate_ccs,
                                 value_on_view)


def strat(text):
    return translate_ccs(*parse_ccs(text))


def val(s, *moves):
    return value_on_view(s, ViewPath(s.arity, moves))


def test_choice_on_a_shared_guard_gathers_the_continuations():
    s = strat("[1] a1.0 + a1.tick.0")
    assert val(s) == 1
    assert val(s, BIn(1)) == 2
    assert val(s, BIn(1), TICK) == 1
    assert val(s, BOut(1)) == 0 and val(s, TICK) == 0


def test_parallel_is_a_fork():
    s = strat("[1] a1.0 | 'a1.0")
    assert val(s, PARAL, BIn(1)) == 1 and val(s, PARAL, BOut(1)) == 0
    assert val(s, PARAR, BOut(1)) == 1 and val(s, BIn(1)) == 0


def test_restriction_grows_the_arity():
    s = strat("[0] new a. tick.0")
    assert val(s, NU) == 1 and s[0][NU].arity == 1
    assert val(s, NU, TICK) == 1


def test_recursion_gives_a_cycle():
    s = strat("[1] rec X. a1.X")
    assert val(s, BIn(1), BIn(1), BIn(1)) == 1
    assert graph_equal(s, s[0][BIn(1)])
    assert "@" in dump(s)


def test_dump_of_a_guarded_choice():
    assert dump(strat("[1] a1.0 + a1.tick.0")).startswith("⊕[⟨in1↦⊕[")


def test_states_are_ranked_in_enumeration_order():
    s = oplus(strat("[1] a1.0 + a1.tick.0"), strat("[1] a1.0"))
    v = ViewPath(1, (BIn(1),))
    got = states(s, v)
    assert got == [(0, 0), (0, 1), (1, 0)]
    assert [state_index(s, v, p) for p in got] == [0, 1, 2]


def test_restrict_and_empty():
    s = oplus(definite(1, {}), definite(1, {TICK: definite(1, {})}))
    assert val(restrict(s, 1)[TICK]) == 1
    with pytest.raises(IndexError):
        restrict(empty(1), 0)
    assert empty(2) is empty(2)


def test_tables_are_checked():
    with pytest.raises(ValueError):
        DefiniteStrategy(1, table={NU: empty(1)})
    with pytest.raises(ValueError):
        DefiniteStrategy(1)


def test_graph_equality_is_structural():
    a, b = strat("[1] rec X. a1.X"), strat("[1] rec Y. a1.a1.Y")
    assert graph_equal(a, b)
    assert not graph_equal(strat("[1] a1.0"), strat("[1] 'a1.0"))


def test_json_round_trip_of_finite_strategies():
    s = strat("[1] new a. (a2.'a1.0 | 'a2.tick.0)")
    assert graph_equal(from_json(to_json(s, 10)), s)


def test_swapping_forks_changes_the_interpretation():
    ctx, p = parse_ccs("[1] a1.0 | 'a1.tick.0")
    t = theta(ctx, p)
    assert isinstance(t, Fork)
    good, bad = Interpreter(False)(t), Interpreter(True)(t)
    assert graph_equal(good, translate_ccs(ctx, p))
    assert not graph_equal(good, bad)


def test_interpretation_of_a_guarded_sum():
    ctx, p = parse_ccs("[1] a1.0 + tick.0")
    t = theta(ctx, p)
    assert isinstance(t, GuardedSum)
    assert graph_equal(Interpreter(False)(t), translate_ccs(ctx, p))


def test_pairing_glues_positions():
    f, g = family_of(*parse_ccs("[1] a1.0")), family_of(*parse_ccs("[1] 'a1.0"))
    fg = pair(f, g, (1,), (1,))
    assert fg.position == Position(1, ((1,), (1,)))
    with pytest.raises(ValueError):
        StrategyFamily(individual(1), ())


def test_behaviour_counts_on_a_synchronisation():
    f = pair(family_of(*parse_ccs("[1] a1.0 + a1.tick.0")), family_of(*parse_ccs("[1] 'a1.0")),
             (1,), (1,))
    tau = [m for m in enabled_moves(f.position, "full") if m.kind.tag == "tau"]
    # only the output player can drive the synchronisation
    (m,) = [m for m in tau if m.anchor == (1, 0)]
    u = compose(identity_play(f.position), m)
    assert len(extend(f, u)) == 2
    assert len(extend(f, identity_play(f.position))) == 1


# ---------------------------------------------------------------- properties

POSITIONS = (Position(1, ((1,),)), Position(1, ((1,), (1,))), Position(2, ((1, 2), (2,))))


@given(st.sampled_from(POSITIONS), st.integers(0, 2), st.randoms(use_true_random=False))
def test_restricted_behaviours_lie_in_the_prefix_behaviour(X, seed, rng):
    f = StrategyFamily(X, tuple(graded_strategy(X.arity(x), seed + x) for x in range(len(X.players))))
    u = identity_play(X)
    for _ in range(3):
        u = compose(u, rng.choice(enabled_moves(u.final)))
    full = extend(f, u)
    for k in range(len(u)):
        below = extend(f, u.prefix(k))
        assert {restrict_element(e, f, u, k) for e in full} <= below


@given(st.integers(0, 2), st.randoms(use_true_random=False))
def test_state_ranks_match_the_enumeration(ctx, rng):
    p = ccs.random_process(rng, ctx, 7)
    s = translate_ccs(ctx, p)
    views = [ViewPath(ctx, ())]
    for _ in range(2):
        v = views[-1]
        from ccsgames.game import basic_classes
        views.append(ViewPath(ctx, v.moves + (rng.choice(basic_classes(v.final_arity)),)))
    for v in views:
        paths = states(s, v)
        assert len(paths) == value_on_view(s, v)
        assert [state_index(s, v, q) for q in paths] == list(range(len(paths)))
