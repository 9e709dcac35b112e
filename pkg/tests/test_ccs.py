import random

import pytest
from hypothesis import given, strategies as st

from ccsgames import ccs
from ccsgames.ccs import LabelA, parse_body, parse_ccs, sorted_transitions, to_text


def steps(text):
    ctx, p = parse_ccs(text)
    return [(str(l), to_text(ctx, q)) for l, q in sorted_transitions(ctx, p)]


def test_prefix_and_sum_transitions():
    assert steps("[1] a1.0 + 'a1.tick.0") == [("a1", "[1] 0"), ("~a1", "[1] tick.0")]


def test_parallel_interleaves_and_synchronises():
    assert steps("[1] a1.0 | 'a1.0") == [("id", "[1] 0 | 0"), ("a1", "[1] 0 | 'a1.0"),
                                          ("~a1", "[1] a1.0 | 0")]


def test_restriction_hides_private_channel():
    assert steps("[0] new a. (a1.0 | 'a1.0)") == [("id", "[0] new a. 0 | 0")]
    assert steps("[0] new a. a1.0") == []


def test_restriction_keeps_outer_channels_and_tick():
    assert steps("[1] new a. (a1.0 + a2.0)") == [("a1", "[1] new a. 0")]
    assert steps("[1] new a. a2.0 + tick.0") == [("♥", "[1] new a. 0")]


def test_recursion_unfolds():
    assert steps("[1] rec X. a1.X") == [("a1", "[1] rec X. a1.X")]


def test_de_bruijn_levels_shift_under_binders():
    # the inner a1 is the outer free channel, a2 the restricted one
    ctx, p = parse_ccs("[1] new a. (a1.0 | 'a2.0)")
    assert [str(l) for l, _ in sorted_transitions(ctx, p)] == ["a1"]


@pytest.mark.parametrize("text", ["[1] a2.0", "[0] a1.0", "[1] rec X. X", "[1] rec X. (X | a1.0)",
                                  "[1] a1.0 +", "[1] (a1.0 | a1.0) + a1.0", "[] 0"])
def test_ill_formed_inputs_raise(text):
    with pytest.raises(ccs.CcsError):
        parse_ccs(text)


def test_labels_validate_channel_range():
    with pytest.raises(ValueError):
        LabelA(1, "in", 2)
    assert LabelA(2, "id").silent and not LabelA(2, "tick").silent


def test_json_round_trip():
    ctx, p = parse_ccs("[2] rec X. new a. (a3.X + 'a1.tick.0 | a2.0)")
    assert ccs.from_json(ccs.to_json(ctx, p)) == (ctx, p)


def test_enumeration_is_wellformed_and_distinct():
    procs = list(ccs.enumerate_processes(1, 4))
    assert len(procs) == len(set(procs))
    assert all(ccs.wellformed(1, p) and ccs.size(p) <= 4 for p in procs)


def test_size_counts_prefixes_nil_and_operators():
    assert ccs.size(parse_body(1, "a1.0 + 'a1.tick.0")) == 5
    assert ccs.size(parse_body(1, "rec X. a1.X")) == 3


@given(st.integers(0, 3), st.randoms(use_true_random=False))
def test_random_processes_are_wellformed_and_round_trip(ctx, rng):
    p = ccs.random_process(rng, ctx, 8)
    assert ccs.wellformed(ctx, p) and ccs.size(p) <= 8
    assert parse_ccs(to_text(ctx, p)) == (ctx, p)


@given(st.integers(0, 2), st.randoms(use_true_random=False))
def test_transitions_stay_in_context(ctx, rng):
    p = ccs.random_process(rng, ctx, 8)
    for label, q in sorted_transitions(ctx, p):
        assert label.endpoint == ctx
        assert ccs.wellformed(ctx, q)


def test_random_process_is_seeded():
    a = [ccs.random_process(random.Random(7), 2, 8) for _ in range(3)]
    assert a[0] == a[1] == a[2]
