import pytest

from ccsgames import presheaf as ps
from ccsgames.game import In, Nu, Out, Para, Tau, Tick, individual, interface, position_morphism
from ccsgames.presheaf import STAR, player


def counts(c):
    y = ps.representable(c)
    return {str(o): y.size(o) for o in y.support}


# element counts derived by hand from the generating arrows
def test_representable_of_a_player():
    assert counts(player(3)) == {"star": 3, "player:3": 1}


def test_representable_of_fork():
    assert counts(Para(2)) == {"star": 2, "player:2": 3, "paral:2": 1, "parar:2": 1, "para:2": 1}


@pytest.mark.parametrize("kind, want", [
    (In(2, 1), {"star": 2, "player:2": 2, "in:2:1": 1}),
    (Out(1, 1), {"star": 1, "player:1": 2, "out:1:1": 1}),
    (Tick(1), {"star": 1, "player:1": 2, "tick:1": 1}),
    (Nu(1), {"star": 2, "player:1": 1, "player:2": 1, "nu:1": 1}),
    (Tau(1, 1, 1, 1), {"star": 1, "player:1": 4, "in:1:1": 1, "out:1:1": 1, "tau:1:1:1:1": 1}),
])
def test_representables_of_moves(kind, want):
    assert counts(kind) == want


def test_representables_satisfy_equations():
    for c in ps.objects(2):
        assert ps.check_presheaf(ps.representable(c))


def test_pushout_of_a_player_with_itself_over_its_interface():
    X = individual(2).to_presheaf()
    I = interface(2).to_presheaf()
    leg = position_morphism(interface(2), individual(2), (1, 2), ())
    po = ps.pushout(leg, leg)
    assert po.apex.size(STAR) == 2 and po.apex.size(player(2)) == 2
    assert po.in_x.is_natural() and po.in_y.is_natural()
    assert po.in_x.dom == X and leg.dom == I


def test_pushout_mediates_uniquely():
    leg = position_morphism(interface(1), individual(1), (1,), ())
    po = ps.pushout(leg, leg)
    one = individual(1).to_presheaf()
    fold = ps.identity_morphism(one)
    m = po.mediate(fold, fold)
    assert m.is_natural() and po.in_x.then(m).components == fold.components


def test_coproduct_adds_sizes():
    a, b = individual(1).to_presheaf(), individual(2).to_presheaf()
    z = ps.coproduct(a, b).apex
    assert z.size(STAR) == 3 and z.size(player(1)) == 1 and z.size(player(2)) == 1


def test_isomorphism_detects_channel_sharing():
    from ccsgames.game import Position
    shared = Position(1, ((1,), (1,))).to_presheaf()
    apart = Position(2, ((1,), (2,))).to_presheaf()
    assert not ps.isomorphic(shared, apart)
    assert ps.isomorphic(Position(2, ((1, 2),)).to_presheaf(), Position(2, ((2, 1),)).to_presheaf())


def test_json_round_trip():
    y = ps.representable(Para(1))
    assert ps.FinPresheaf.from_json(y.to_json()) == y


def test_arity_cap_is_enforced():
    ps.set_max_arity(2)
    with pytest.raises(ps.ArityError):
        ps.representable(player(3))
