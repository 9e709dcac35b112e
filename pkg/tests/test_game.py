import random

import pytest
from hypothesis import given, strategies as st

from ccsgames import presheaf as ps
from ccsgames.game import (NU, PARAL, PARAR, TICK, BIn, BOut, MoveError, Para, Position, Tau,
                           ViewPath, canonical_form, compose, enabled_moves, glue,
                           glue_by_pushout, identity_play, individual, instantiate,
                           instantiate_by_pushout, is_successful, isomorphic_positions,
                           move_cospan, play_cospan, play_of, player_kinds, position_dot,
                           view_of, In, Out, Nu, Tick)


def test_full_moves_of_two_players_sharing_two_channels():
    X = Position(2, ((1, 2), (1, 2)))
    moves = enabled_moves(X, "full")
    # per player: fork, tick, nu, two inputs, two outputs; plus a tau per shared channel and direction
    assert len(moves) == 18
    assert sum(m.kind.tag == "tau" for m in moves) == 4


def test_closed_world_moves_of_a_lone_player():
    assert [m.kind.tag for m in enabled_moves(individual(0), "closed")] == ["para", "tick", "nu"]


def test_nu_adds_a_private_channel():
    m = instantiate(Nu(1), individual(1), (0,))
    assert m.final == Position(2, ((1, 2),))
    assert m.channel_map == (1,)


def test_fork_splits_the_player():
    m = instantiate(Para(2), Position(3, ((1, 2), (2, 3))), (0,))
    # the left child keeps the anchor's place, the right child goes last
    assert m.final.players == ((1, 2), (2, 3), (1, 2))
    assert m.player_map == ((0, 2), (1,))


def test_tau_needs_a_shared_channel():
    with pytest.raises(MoveError):
        instantiate(Tau(1, 1, 1, 1), Position(2, ((1,), (2,))), (0, 1))


def test_combinatorial_and_pushout_instantiation_agree():
    X = Position(3, ((1, 2), (2, 3), (3,)))
    for m in enabled_moves(X):
        initial, final = instantiate_by_pushout(m.kind, X, m.anchor)
        assert isomorphic_positions(initial, X)
        assert isomorphic_positions(final, m.final), str(m)


def test_views_follow_lineage():
    X = individual(1)
    p = play_of(X, [(Para(1), (0,)), (In(1, 1), (1,)), (Nu(1), (1,))])
    assert view_of(p, 0) == ViewPath(1, (PARAL,))
    assert view_of(p, 1) == ViewPath(1, (PARAR, BIn(1), NU))
    assert view_of(p, 1).final_arity == 2


def test_tau_views_both_players():
    X = Position(1, ((1,), (1,)))
    p = play_of(X, [(Tau(1, 1, 1, 1), (0, 1))])
    assert {str(view_of(p, y)) for y in range(2)} == {str(ViewPath(1, (BOut(1),))),
                                                      str(ViewPath(1, (BIn(1),)))}


def test_successful_plays_end_in_tick():
    X = individual(0)
    assert is_successful(play_of(X, [(Tick(0), (0,))]))
    assert not is_successful(identity_play(X))


def test_canonical_form_ignores_player_order_and_channel_names():
    a = Position(3, ((1, 2), (3,)))
    b = Position(3, ((3,), (2, 1)))
    assert canonical_form(a)[0] == canonical_form(b)[0]
    assert canonical_form(a)[0] != canonical_form(Position(3, ((1, 2), (2,))))[0]


def test_canonical_form_respects_pins():
    a = Position(2, ((1,), (2,)))
    assert canonical_form(a, pinned=(1,))[0] == canonical_form(a, pinned=(2,))[0]
    b = Position(2, ((1,), (1,)))
    assert canonical_form(a, pinned=(1, 2))[0] != canonical_form(b, pinned=(1, 2))[0]


def test_glue_matches_pushout():
    X, Y = individual(2), Position(3, ((1, 3),))
    g = glue(X, (2,), Y, (1,))
    assert g.position.channels == 4
    assert isomorphic_positions(g.position, glue_by_pushout(X, (2,), Y, (1,)))


def test_move_cospan_legs_are_natural():
    X = Position(2, ((1, 2), (2,)))
    for m in enabled_moves(X):
        c = move_cospan(m)
        assert c.final_leg.is_natural() and c.initial_leg.is_natural()


def test_dot_output_mentions_every_player():
    text = position_dot(Position(2, ((1, 2), (2,))))
    assert text.startswith("graph") or text.startswith("digraph")
    assert text.count("->") + text.count("--") >= 3


# ---------------------------------------------------------------- properties

positions = st.builds(
    lambda n, picks: Position(n, tuple(tuple(c % n + 1 for c in p) for p in picks)),
    st.integers(1, 3),
    st.lists(st.lists(st.integers(0, 5), min_size=0, max_size=2), min_size=1, max_size=3))


def random_play(X, rng, length):
    p = identity_play(X)
    for _ in range(length):
        moves = [m for m in enabled_moves(p.final) if all(len(q) <= 2 for q in m.final.players)]
        if not moves:
            break
        p = compose(p, rng.choice(moves))
    return p


@given(positions, st.randoms(use_true_random=False), st.integers(0, 3))
def test_views_are_valid_and_end_at_the_player_arity(X, rng, length):
    p = random_play(X, rng, length)
    for y, q in enumerate(p.final.players):
        v = view_of(p, y)
        assert v.is_valid()
        assert v.final_arity == len(q)


@given(positions, st.randoms(use_true_random=False))
def test_independent_moves_commute(X, rng):
    if len(X.players) < 2:
        return
    kinds = [k for k in player_kinds(len(X.players[0])) if k.tag != "nu"]
    k0 = rng.choice(kinds)
    k1 = rng.choice([k for k in player_kinds(len(X.players[1])) if k.tag != "nu"])
    a = play_of(X, [(k0, (0,))])
    ab = compose(a, instantiate(k1, a.final, (a.steps[0].player_map[1][0],)))
    b = play_of(X, [(k1, (1,))])
    ba = compose(b, instantiate(k0, b.final, (b.steps[0].player_map[0][0],)))
    assert canonical_form(ab.final)[0] == canonical_form(ba.final)[0]
    assert ps.isomorphic(play_cospan(ab).apex, play_cospan(ba).apex)


@given(positions, st.randoms(use_true_random=False))
def test_canonical_form_is_invariant_under_relabelling(X, rng):
    perm = list(range(1, X.channels + 1))
    rng.shuffle(perm)
    players = [tuple(perm[c - 1] for c in q) for q in X.players]
    rng.shuffle(players)
    assert canonical_form(X)[0] == canonical_form(Position(X.channels, tuple(players)))[0]
