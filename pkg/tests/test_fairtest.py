import pytest
from hypothesis import given, settings, strategies as st

from ccsgames import ccs, oracles
from ccsgames.ccs import Par, parse_body, parse_ccs, sorted_transitions
from ccsgames import fairtest
from ccsgames.fairtest import (bot_s_ccs, ccs_subject, ccs_test, fair_equiv_semantic,
                               fair_equiv_standard, gen_tree_tests, passes, semantic_bot)
from ccsgames.strategies import family_of


def bot(text):
    return bot_s_ccs(*parse_ccs(text))


@pytest.mark.parametrize("text, want", [
    ("[0] tick.0", True),
    ("[0] 0", False),
    ("[1] a1.0 | 'a1.tick.0", True),
    ("[1] a1.0", False),
    # the silent step may be taken and then no tick is possible
    ("[0] new a. ('a1.0 | (a1.0 + tick.0))", False),
    # an endless silent loop that can always escape to a tick still passes
    ("[0] new a. ((rec X. 'a1.X) | rec Y. (a1.Y + tick.0))", True),
    ("[0] new a. ((rec X. 'a1.X) | rec Y. a1.Y)", False),
])
def test_testing_predicate_on_known_processes(text, want):
    assert bot(text).passed is want
    assert oracles.bot_reference(*parse_ccs(text)) is want


def replays(ctx, p, witness):
    """The reported state is silently reachable in ``len(path)`` steps and cannot tick."""
    target = parse_ccs(witness["state"])[1]
    frontier = {p}
    for label in witness["path"]:
        assert label == "id"
        frontier = {q for r in frontier for l, q in sorted_transitions(ctx, r) if l.silent}
    return target in frontier and not oracles.bot_reference(ctx, target)


def test_failure_witness_replays():
    ctx, p = parse_ccs("[0] new a. ('a1.0 | (a1.0 + tick.0))")
    v = bot_s_ccs(ctx, p)
    assert v.failed and replays(ctx, p, v.witness)


def test_generated_family_small():
    assert gen_tree_tests(1, 1, 1).texts() == ["0", "'a1.0", "a1.0", "tick.0"]


def test_generated_family_size():
    # height 1, width 2: 1 + 3 + 6 = 10 trees; height 2 has 30 branches, so 1 + 30 + 465
    assert len(gen_tree_tests(1, 1, 2)) == 10
    assert len(gen_tree_tests(1, 2, 2)) == 496


def test_a_prefix_is_distinguished_from_nil():
    fam = gen_tree_tests(1, 2, 2)
    ctx, p = parse_ccs("[1] a1.0")
    q = ccs.NIL
    v = fair_equiv_standard(p, q, ctx, fam)
    assert v.failed and v.witness["test"] == "'a1.tick.0" and v.witness["failing_side"] == "right"
    t = parse_body(ctx, v.witness["test"])
    assert bot_s_ccs(ctx, Par(p, t)).passed and not bot_s_ccs(ctx, Par(q, t)).passed
    assert replays(ctx, Par(q, t), v.witness["run"])


def test_standard_and_semantic_agree_on_the_known_pair():
    fam = gen_tree_tests(1, 2, 2)
    tests = [ccs_test(1, t) for t in fam]
    v = fair_equiv_semantic(ccs_subject(1, parse_body(1, "a1.0")), ccs_subject(1, ccs.NIL), tests, 4)
    assert v.failed and fam.texts()[v.witness["test"]] == "'a1.tick.0"


def test_parallel_order_does_not_matter():
    fam = gen_tree_tests(2, 2, 1)
    p, q = parse_body(2, "a1.0 | a2.0"), parse_body(2, "a2.0 | a1.0")
    assert fair_equiv_standard(p, q, 2, fam).passed
    assert fair_equiv_semantic(ccs_subject(2, p), ccs_subject(2, q), [ccs_test(2, t) for t in fam], 4).passed


def test_parallel_jobs_give_the_sequential_verdict():
    fam = gen_tree_tests(1, 2, 2)
    p, q = parse_body(1, "a1.0 + tick.0"), parse_body(1, "a1.0")
    a = fair_equiv_standard(p, q, 1, fam)
    b = fair_equiv_standard(p, q, 1, fam, jobs=3)
    assert a.to_json() == b.to_json() and a.failed


def test_budget_exhaustion_is_inconclusive():
    v = fair_equiv_standard(parse_body(1, "rec X. (a1.0 | 'a1.X)"), ccs.NIL, 1,
                            [ccs.NIL], budget=5)
    assert v.status == "inconclusive" and v.exit_code == 2


def test_unboundedly_growing_terms_are_inconclusive():
    # rec scopes over the whole parallel, so every synchronisation adds a thread
    v = bot_s_ccs(*parse_ccs("[0] new a. rec X. ('a1.X | a1.0)"), budget=500)
    assert v.status == "inconclusive" and v.budget_used == 500
    # here the new thread lands deeper each time: nesting runs out before the budget
    v = bot("[0] new a. (rec X. 'a1.X | rec Y. (a1.Y + tick.0))")
    assert v.status == "inconclusive" and "nesting" in v.detail


def test_family_context_must_match():
    with pytest.raises(ValueError):
        fair_equiv_standard(ccs.NIL, ccs.NIL, 1, gen_tree_tests(2, 1, 1))
    with pytest.raises(ccs.CcsError):
        fairtest.TestFamily(0, [parse_body(1, "a1.0")])


def test_semantic_predicate_on_a_silent_loop():
    ctx, p = parse_ccs("[0] new a. ((rec X. 'a1.X) | rec Y. (a1.Y + tick.0))")
    f = family_of(ctx, p)
    v = semantic_bot(f.position, f, 4)
    assert v.passed and v.exact
    ctx, p = parse_ccs("[0] new a. ((rec X. 'a1.X) | rec Y. a1.Y)")
    f = family_of(ctx, p)
    v = semantic_bot(f.position, f, 4)
    assert v.failed and v.exact


SUBJECTS = ["0", "a1.0", "'a1.0", "tick.0", "a1.tick.0", "'a1.0 + tick.0", "a1.0 | 'a1.0",
            "new a. (a2.tick.0 | 'a2.0)", "rec X. (a1.X + tick.0)", "a1.'a1.0"]
TESTS = gen_tree_tests(1, 2, 1)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SUBJECTS), st.integers(0, len(TESTS) - 1))
def test_semantic_and_standard_predicates_agree(subject, i):
    p, t = parse_body(1, subject), TESTS.tests[i]
    std = bot_s_ccs(1, Par(p, t))
    sem = passes(ccs_subject(1, p), ccs_test(1, t), 4)
    if std.definite and sem.definite:
        assert std.status == sem.status


@pytest.mark.parametrize("text", ["[0] new a. ((rec X. 'a1.X) | rec Y. (a1.Y + tick.0))",
                                  "[0] new a. ((rec X. 'a1.X) | rec Y. a1.Y)",
                                  "[0] new a. ('a1.0 | (a1.0 + tick.0))", "[0] tick.0"])
def test_saturated_semantic_verdicts_are_stable_in_depth(text):
    f = family_of(*parse_ccs(text))
    verdicts = [semantic_bot(f.position, f, k) for k in range(1, 7)]
    exact = [v for v in verdicts if v.exact]
    assert exact and len({v.status for v in exact}) == 1
    assert all(v.exact for v in verdicts[verdicts.index(exact[0]):])


def test_fresh_channels_stay_private_to_the_subject():
    # the test's output on the interface channel cannot reach the restricted input
    p, t = parse_body(1, "new a. a2.tick.0"), parse_body(1, "'a1.0")
    assert not bot_s_ccs(1, Par(p, t)).passed
    v = passes(ccs_subject(1, p), ccs_test(1, t), 4)
    assert v.failed and v.exact
    # with the channel shared instead, synchronisation enables the tick
    q = parse_body(1, "a1.tick.0")
    assert bot_s_ccs(1, Par(q, t)).passed and passes(ccs_subject(1, q), ccs_test(1, t), 4).passed
