"""Positions, local and global moves, plays and views.

A position lists its channels ``1..channels`` and its players, each player
being the tuple of channels it is connected to (its arity is the tuple's
length).  Global moves are stored combinatorially, together with the
correspondence from initial to final players and channels; the presheaf
pushout construction is available as :func:`instantiate_by_pushout` and is
used to cross-check the combinatorial one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from . import presheaf as ps
from .presheaf import BaseObject, FinPresheaf, PresheafMorphism, player

log = logging.getLogger(__name__)


class MoveError(ValueError):
    pass


# --------------------------------------------------------------------------
# positions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Position:
    channels: int
    players: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(tuple(p) for p in self.players))
        for p in self.players:
            for c in p:
                if not 1 <= c <= self.channels:
                    raise ValueError(f"player {p} uses undeclared channel {c}")

    def arity(self, x: int) -> int:
        return len(self.players[x])

    @property
    def is_interface(self) -> bool:
        return not self.players

    def __str__(self):
        inner = " | ".join(f"[{len(p)}]({','.join(map(str, p))})" for p in self.players)
        return f"<{self.channels} ch; {inner or 'no players'}>"

    def to_presheaf(self) -> FinPresheaf:
        sizes = {ps.STAR: self.channels}
        by_arity = {}
        for p in self.players:
            by_arity.setdefault(len(p), []).append(p)
        actions = {}
        for n, group in by_arity.items():
            ps.check_arity(n)
            sizes[player(n)] = len(group)
            for i in range(1, n + 1):
                g = ps.Generator("s", ps.STAR, player(n), i)
                actions[g] = tuple(p[i - 1] - 1 for p in group)
        return FinPresheaf(sizes, actions)

    def element_index(self, x: int) -> tuple:
        """The ``(object, index)`` of player ``x`` in :meth:`to_presheaf`."""
        n = self.arity(x)
        return player(n), sum(1 for y in range(x) if self.arity(y) == n)

    @classmethod
    def from_presheaf(cls, F: FinPresheaf) -> "Position":
        players = []
        for c in F.support:
            if c.tag == "star":
                continue
            if c.tag != "player":
                raise ValueError("a position is empty outside star and players")
            n = c.args[0]
            for x in range(F.size(c)):
                players.append(tuple(F.act(ps.Generator("s", ps.STAR, c, i), x) + 1
                                     for i in range(1, n + 1)))
        return cls(F.size(ps.STAR), tuple(players))

    def to_json(self):
        return {"channels": self.channels, "players": [list(p) for p in self.players]}

    @classmethod
    def from_json(cls, d) -> "Position":
        return cls(d["channels"], tuple(tuple(p) for p in d["players"]))


def individual(n: int) -> Position:
    """The position with one n-ary player on n distinct channels."""
    return Position(n, (tuple(range(1, n + 1)),))


def interface(n: int) -> Position:
    return Position(n, ())


def position_morphism(X: Position, Y: Position, channel_map, player_map) -> PresheafMorphism:
    """The presheaf map induced by channel and player maps ``X -> Y``."""
    comps = {ps.STAR: tuple(channel_map[c - 1] - 1 for c in range(1, X.channels + 1))}
    for x, y in enumerate(player_map):
        cx, kx = X.element_index(x)
        cy, ky = Y.element_index(y)
        comps.setdefault(cx, {})[kx] = ky
    for c, v in list(comps.items()):
        if isinstance(v, dict):
            comps[c] = tuple(v[k] for k in range(len(v)))
    return PresheafMorphism(X.to_presheaf(), Y.to_presheaf(), comps)


# --------------------------------------------------------------------------
# move kinds and basic move classes
# --------------------------------------------------------------------------

MoveKind = BaseObject


def In(n: int, i: int) -> MoveKind:
    return BaseObject("in", (n, i))


def Out(n: int, i: int) -> MoveKind:
    return BaseObject("out", (n, i))


def Nu(n: int) -> MoveKind:
    return BaseObject("nu", (n,))


def ParaL(n: int) -> MoveKind:
    return BaseObject("paral", (n,))


def ParaR(n: int) -> MoveKind:
    return BaseObject("parar", (n,))


def Para(n: int) -> MoveKind:
    return BaseObject("para", (n,))


def Tick(n: int) -> MoveKind:
    return BaseObject("tick", (n,))


def Tau(m: int, j: int, n: int, i: int) -> MoveKind:
    """Synchronisation: an m-ary player outputs on its j-th channel, an n-ary one inputs on its i-th."""
    return BaseObject("tau", (m, j, n, i))


def kind_str(kind: MoveKind) -> str:
    return kind.key


_BASIC_ORDER = {"paral": 0, "parar": 1, "tick": 2, "nu": 3, "in": 4, "out": 4}


@dataclass(frozen=True)
class BasicMoveClass:
    """Isomorphism class of basic moves out of an individual; ``index`` is the channel for in/out."""

    tag: str
    index: int = 0

    def __post_init__(self):
        if self.tag not in _BASIC_ORDER:
            raise ValueError(f"bad basic move class {self.tag!r}")
        if (self.tag in ("in", "out")) != (self.index > 0):
            raise ValueError("only in/out classes carry a channel index")

    def sort_key(self):
        return (_BASIC_ORDER[self.tag], self.index, self.tag)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def target_arity(self, n: int) -> int:
        return n + 1 if self.tag == "nu" else n

    def valid_at(self, n: int) -> bool:
        return self.tag not in ("in", "out") or 1 <= self.index <= n

    def __str__(self):
        names = {"paral": "paraL", "parar": "paraR"}
        return names.get(self.tag, self.tag) + (str(self.index) if self.index else "")

    @classmethod
    def parse(cls, text: str) -> "BasicMoveClass":
        t = text.strip()
        for tag, name in (("paral", "paraL"), ("parar", "paraR")):
            if t in (tag, name):
                return cls(tag)
        for tag in ("in", "out"):
            if t.startswith(tag) and t[len(tag):].isdigit():
                return cls(tag, int(t[len(tag):]))
        return cls(t)


PARAL = BasicMoveClass("paral")
PARAR = BasicMoveClass("parar")
TICK = BasicMoveClass("tick")
NU = BasicMoveClass("nu")


def BIn(i: int) -> BasicMoveClass:
    return BasicMoveClass("in", i)


def BOut(i: int) -> BasicMoveClass:
    return BasicMoveClass("out", i)


def basic_classes(n: int) -> tuple:
    """The classes at arity n in canonical order: paraL, paraR, tick, nu, in1, out1, in2, ..."""
    out = [PARAL, PARAR, TICK, NU]
    for i in range(1, n + 1):
        out += [BIn(i), BOut(i)]
    return tuple(out)


@dataclass(frozen=True)
class ViewPath:
    arity: int
    moves: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "moves", tuple(self.moves))

    def arities(self) -> list:
        out = [self.arity]
        for b in self.moves:
            out.append(b.target_arity(out[-1]))
        return out

    def is_valid(self) -> bool:
        return all(b.valid_at(n) for b, n in zip(self.moves, self.arities()))

    @property
    def final_arity(self) -> int:
        return self.arities()[-1]

    def __len__(self):
        return len(self.moves)

    def prefix(self, k: int) -> "ViewPath":
        return ViewPath(self.arity, self.moves[:k])

    def __str__(self):
        return f"[{self.arity}]" + "".join(f".{b}" for b in self.moves)


# --------------------------------------------------------------------------
# global moves
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GlobalMove:
    """A move instantiated in an ambient position.

    ``player_map[x]`` lists the final players descending from initial player
    ``x`` (two for the anchor of a fork); ``channel_map[c-1]`` is the final
    channel of initial channel ``c``.
    """

    kind: MoveKind
    initial: Position
    final: Position
    anchor: tuple
    player_map: tuple
    channel_map: tuple

    def __str__(self):
        who = ",".join(f"x{a}" for a in self.anchor)
        return f"{who}:{self.kind.key}"

    def to_json(self):
        return {"kind": self.kind.key, "anchor": list(self.anchor),
                "initial": self.initial.to_json(), "final": self.final.to_json(),
                "player_map": [list(v) for v in self.player_map],
                "channel_map": list(self.channel_map)}

    @classmethod
    def from_json(cls, d) -> "GlobalMove":
        move = instantiate(BaseObject.from_key(d["kind"]), Position.from_json(d["initial"]),
                           tuple(d["anchor"]))
        if move.to_json() != d:
            raise ValueError("inconsistent move JSON")
        return move


def is_full(m) -> bool:
    kind = m.kind if isinstance(m, GlobalMove) else m
    return kind.tag not in ("paral", "parar")


def is_closed_world(m) -> bool:
    kind = m.kind if isinstance(m, GlobalMove) else m
    return kind.tag in ("nu", "tick", "para", "tau")


def _anchor_arities(kind: MoveKind) -> tuple:
    if kind.tag == "tau":
        return (kind.args[0], kind.args[2])
    return (kind.args[0],)


def instantiate(kind: MoveKind, Z: Position, anchor) -> GlobalMove:
    """The global move of ``kind`` played by ``anchor`` (one player, or (output, input) for tau)."""
    anchor = (anchor,) if isinstance(anchor, int) else tuple(anchor)
    want = _anchor_arities(kind)
    if len(anchor) != len(want):
        raise MoveError(f"{kind.key} needs {len(want)} anchored player(s)")
    for x, n in zip(anchor, want):
        if not 0 <= x < len(Z.players):
            raise MoveError(f"no player {x}")
        if Z.arity(x) != n:
            raise MoveError(f"player {x} has arity {Z.arity(x)}, {kind.key} needs {n}")
    ps.check_arity(kind.arity)
    ident_players = tuple((x,) for x in range(len(Z.players)))
    ident_channels = tuple(range(1, Z.channels + 1))
    t = kind.tag
    if t == "tau":
        p, q = anchor
        m, j, n, i = kind.args
        if p == q:
            raise MoveError("a synchronisation needs two distinct players")
        if Z.players[p][j - 1] != Z.players[q][i - 1]:
            raise MoveError(f"players {p} and {q} do not share the required channel")
        return GlobalMove(kind, Z, Z, anchor, ident_players, ident_channels)
    (x,) = anchor
    if t in ("tick", "in", "out", "paral", "parar"):
        return GlobalMove(kind, Z, Z, anchor, ident_players, ident_channels)
    if t == "para":
        players = Z.players + (Z.players[x],)
        pm = list(ident_players)
        pm[x] = (x, len(Z.players))
        return GlobalMove(kind, Z, Position(Z.channels, players), anchor, tuple(pm), ident_channels)
    if t == "nu":
        fresh = Z.channels + 1
        players = list(Z.players)
        players[x] = players[x] + (fresh,)
        return GlobalMove(kind, Z, Position(fresh, tuple(players)), anchor, ident_players,
                          ident_channels)
    raise MoveError(f"not a move kind: {kind.key}")


_KIND_ORDER = ("para", "paral", "parar", "tick", "nu")


def player_kinds(n: int) -> list:
    out = [BaseObject(t, (n,)) for t in _KIND_ORDER]
    for i in range(1, n + 1):
        out += [In(n, i), Out(n, i)]
    return out


def enabled_moves(X: Position, filter: str = "all") -> list:
    """All instantiations in ``X``; ``filter`` is ``all``, ``full`` or ``closed``."""
    if filter not in ("all", "full", "closed"):
        raise ValueError(f"unknown filter {filter!r}")
    keep = {"all": lambda k: True, "full": is_full, "closed": is_closed_world}[filter]
    out = []
    for x, p in enumerate(X.players):
        for kind in player_kinds(len(p)):
            if not keep(kind):
                continue
            if kind.tag == "nu" and len(p) + 1 > ps.config.max_arity:
                log.warning("nu move of player %d skipped: arity %d exceeds max arity",
                            x, len(p) + 1)
                continue
            out.append(instantiate(kind, X, (x,)))
    if keep(BaseObject("tau", (1, 1, 1, 1))):
        for p, P in enumerate(X.players):
            for q, Q in enumerate(X.players):
                if p == q:
                    continue
                for j, c in enumerate(P, 1):
                    for i, d in enumerate(Q, 1):
                        if c == d:
                            out.append(instantiate(Tau(len(P), j, len(Q), i), X, (p, q)))
    return out


# --------------------------------------------------------------------------
# local seeds and the pushout construction
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalSeed:
    """A local move ``final -> mid <- initial`` with its canonical interface."""

    kind: MoveKind
    final: Position
    mid: FinPresheaf
    initial: Position
    final_leg: PresheafMorphism
    initial_leg: PresheafMorphism
    interface: Position
    interface_to_final: tuple  # interface channel -> final channel
    interface_to_initial: tuple


def _seed_paths(kind: MoveKind):
    g = {x.name: x for x in ps.generators_into(kind)}
    t = kind.tag
    if t in ("in", "out", "tick", "paral", "parar", "nu"):
        return [(g["tgt"],)], [(g["src"],)]
    if t == "para":
        n = kind.args[0]
        L, R = ps.generators_into(ParaL(n)), ps.generators_into(ParaR(n))
        srcL, tgtL = L
        srcR, tgtR = R
        return [(tgtL, g["l"])], [(srcL, g["l"]), (srcR, g["r"])]
    m, j, n, i = kind.args
    srcO, tgtO = ps.generators_into(Out(m, j))
    srcI, tgtI = ps.generators_into(In(n, i))
    return ([(tgtO, g["eps"]), (tgtI, g["rho"])], [(srcO, g["eps"]), (srcI, g["rho"])])


def _sub_position(kind, M, paths):
    elems = [ps.element_of(kind, p) for p in paths]
    chan_number, players = {}, []
    for obj, k in elems:
        n = obj.args[0]
        assign = []
        for i in range(1, n + 1):
            ch = M.act(ps.Generator("s", ps.STAR, obj, i), k)
            chan_number.setdefault(ch, len(chan_number) + 1)
            assign.append(chan_number[ch])
        players.append(tuple(assign))
    pos = Position(len(chan_number), tuple(players))
    comps = {ps.STAR: tuple(ch for ch, _ in sorted(chan_number.items(), key=lambda t: t[1]))}
    per = {}
    for x, (obj, k) in enumerate(elems):
        per.setdefault(obj, []).append(k)
    comps.update({obj: tuple(v) for obj, v in per.items()})
    return pos, PresheafMorphism(pos.to_presheaf(), M, comps)


def local_seed(kind: MoveKind) -> LocalSeed:
    """The local move of ``kind``, read off the category of elements of its representable."""
    M = ps.representable(kind)
    init_paths, final_paths = _seed_paths(kind)
    Y, ty = _sub_position(kind, M, init_paths)
    X, sx = _sub_position(kind, M, final_paths)
    star_y = ty.components.get(ps.STAR, ())
    star_x = {e: c for c, e in enumerate(sx.components.get(ps.STAR, ()), 1)}
    to_final = tuple(star_x[e] for e in star_y)
    I = interface(Y.channels)
    return LocalSeed(kind, X, M, Y, sx, ty, I, to_final, tuple(range(1, Y.channels + 1)))


def _interface_map(I: Position, X: Position, chans) -> PresheafMorphism:
    return PresheafMorphism(I.to_presheaf(), X.to_presheaf(),
                            {ps.STAR: tuple(c - 1 for c in chans)})


def instantiate_by_pushout(kind: MoveKind, Z: Position, anchor) -> tuple:
    """Initial and final positions of the global move, computed by pushouts of the seed.

    The rest of the world is ``Z`` without the anchored players; the seed is
    glued to it along its canonical interface.
    """
    anchor = (anchor,) if isinstance(anchor, int) else tuple(anchor)
    seed = local_seed(kind)
    rest = Position(Z.channels, tuple(p for x, p in enumerate(Z.players) if x not in anchor))
    # interface channel c is the c-th channel of the seed's initial position
    ambient = [None] * seed.initial.channels
    for sp, x in zip(seed.initial.players, anchor):
        for c_seed, c_amb in zip(sp, Z.players[x]):
            ambient[c_seed - 1] = c_amb
    I = seed.interface
    to_rest = _interface_map(I, rest, ambient)
    initial = ps.pushout(_interface_map(I, seed.initial, seed.interface_to_initial), to_rest)
    final = ps.pushout(_interface_map(I, seed.final, seed.interface_to_final), to_rest)
    return Position.from_presheaf(initial.apex), Position.from_presheaf(final.apex)


@dataclass(frozen=True)
class Cospan:
    """``final -> apex <- initial`` as presheaf maps."""

    apex: FinPresheaf
    final_leg: PresheafMorphism
    initial_leg: PresheafMorphism


def move_cospan(move: GlobalMove) -> Cospan:
    """The global move as a cospan of presheaves, by pushing the seed out along the rest."""
    seed = local_seed(move.kind)
    Z = move.initial
    rest_idx = [x for x in range(len(Z.players)) if x not in move.anchor]
    rest = Position(Z.channels, tuple(Z.players[x] for x in rest_idx))
    ambient = [None] * seed.initial.channels
    for sp, x in zip(seed.initial.players, move.anchor):
        for c_seed, c_amb in zip(sp, Z.players[x]):
            ambient[c_seed - 1] = c_amb
    I = seed.interface
    to_mid = _interface_map(I, seed.initial, seed.interface_to_initial).then(seed.initial_leg)
    po = ps.pushout(to_mid, _interface_map(I, rest, ambient))

    def leg(pos, seed_pos, seed_leg, seed_players):
        chans = [None] * pos.channels
        players = {}
        for c in range(1, Z.channels + 1):
            chans[c - 1] = po.in_y(ps.STAR, c - 1)
        for y, k in seed_players:
            obj, e = seed_pos.element_index(k)
            players[y] = po.in_x(obj, seed_leg(obj, e))
            for c_seed, c in zip(seed_pos.players[k], pos.players[y]):
                chans[c - 1] = po.in_x(ps.STAR, seed_leg(ps.STAR, c_seed - 1))
        comps = {ps.STAR: tuple(chans)}
        for y in range(len(pos.players)):
            obj, e = pos.element_index(y)
            if y not in players:
                x = predecessor(move, y) if pos is move.final else y
                ro, re_ = rest.element_index(rest_idx.index(x))
                players[y] = po.in_y(ro, re_)
            comps.setdefault(obj, {})[e] = players[y]
        comps = {c: (tuple(v[i] for i in range(len(v))) if isinstance(v, dict) else v)
                 for c, v in comps.items()}
        return PresheafMorphism(pos.to_presheaf(), po.apex, comps)

    init_pairs = list(zip(move.anchor, range(len(move.anchor))))
    final_pairs = [(y, k) for k, y in
                   enumerate(y for x in move.anchor for y in move.player_map[x])]
    return Cospan(po.apex,
                  leg(move.final, seed.final, seed.final_leg, final_pairs),
                  leg(Z, seed.initial, seed.initial_leg, init_pairs))


def play_cospan(p: Play) -> Cospan:
    """The underlying cospan of a play, composing move cospans by pushout."""
    F = p.initial.to_presheaf()
    ident = ps.identity_morphism(F)
    acc = Cospan(F, ident, ident)
    for m in p.steps:
        c = move_cospan(m)
        po = ps.pushout(acc.final_leg, c.initial_leg)
        acc = Cospan(po.apex, c.final_leg.then(po.in_y), acc.initial_leg.then(po.in_x))
    return acc


# --------------------------------------------------------------------------
# plays and views
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Play:
    initial: Position
    steps: tuple = ()

    @property
    def final(self) -> Position:
        return self.steps[-1].final if self.steps else self.initial

    def __len__(self):
        return len(self.steps)

    def prefix(self, k: int) -> "Play":
        return Play(self.initial, self.steps[:k])

    def to_json(self):
        return {"initial": self.initial.to_json(), "steps": [m.to_json() for m in self.steps]}

    @classmethod
    def from_json(cls, d) -> "Play":
        play = identity_play(Position.from_json(d["initial"]))
        for m in d["steps"]:
            play = compose(play, GlobalMove.from_json(m))
        return play

    def describe(self) -> list:
        return [str(m) for m in self.steps]


def identity_play(X: Position) -> Play:
    return Play(X, ())


def compose(p: Play, m: GlobalMove) -> Play:
    if m.initial != p.final:
        raise MoveError("move does not start at the play's final position")
    return Play(p.initial, p.steps + (m,))


def play_of(X: Position, moves: Iterable) -> Play:
    """Build a play from ``(kind, anchor)`` pairs."""
    play = identity_play(X)
    for kind, anchor in moves:
        play = compose(play, instantiate(kind, play.final, anchor))
    return play


def is_successful(p: Play) -> bool:
    return any(m.kind.tag == "tick" for m in p.steps)


def step_view(move: GlobalMove, x: int, y: int) -> Optional[BasicMoveClass]:
    """What initial player ``x`` (becoming final player ``y``) sees of ``move``."""
    if x not in move.anchor:
        return None
    t, a = move.kind.tag, move.kind.args
    if t == "para":
        return PARAL if y == move.player_map[x][0] else PARAR
    if t in ("paral", "parar", "tick", "nu"):
        return BasicMoveClass(t)
    if t in ("in", "out"):
        return BasicMoveClass(t, a[1])
    m, j, n, i = a
    return BOut(j) if x == move.anchor[0] else BIn(i)


def predecessor(move: GlobalMove, y: int) -> int:
    for x, ys in enumerate(move.player_map):
        if y in ys:
            return x
    raise MoveError(f"final player {y} has no antecedent")


def trace(p: Play, y: int) -> tuple:
    """``(initial ancestor, view)`` of final player ``y``."""
    if not 0 <= y < len(p.final.players):
        raise MoveError(f"no player {y} in final position")
    seen = []
    for m in reversed(p.steps):
        x = predecessor(m, y)
        b = step_view(m, x, y)
        if b is not None:
            seen.append(b)
        y = x
    return y, ViewPath(p.initial.arity(y), tuple(reversed(seen)))


def view_of(p: Play, y: int) -> ViewPath:
    return trace(p, y)[1]


def involved(move: GlobalMove) -> list:
    """``(initial player, final player, basic class)`` for each player whose view grows."""
    out = []
    for x in move.anchor:
        for y in move.player_map[x]:
            out.append((x, y, step_view(move, x, y)))
    return out


# --------------------------------------------------------------------------
# canonical forms and gluing
# --------------------------------------------------------------------------


def canonical_form(X: Position, pinned: tuple = (), tags=None, leaf_budget: int = 2000) -> tuple:
    """Canonical representative of ``X`` up to isomorphism fixing ``pinned``.

    ``pinned[a-1]`` is sent to channel ``a``; other channels are numbered by
    first use along the chosen player order.  ``tags`` (one comparable value
    per player) must be preserved too.  Returns ``(position, order, chan_map)``
    where ``order[k]`` is the original index of canonical player ``k``.

    Ties are broken by trying each candidate; past ``leaf_budget`` complete
    orderings the search stops branching, so the result is canonical only
    when the budget was not hit.
    """
    tags = tags if tags is not None else [0] * len(X.players)
    base = {c: a for a, c in enumerate(pinned, 1)}
    best = [None, None, None]

    def relabel(p, cmap, nxt):
        out, extra = [], {}
        for c in p:
            if c in cmap:
                out.append(cmap[c])
            else:
                if c not in extra:
                    extra[c] = nxt + len(extra)
                out.append(extra[c])
        return tuple(out), extra

    leaves = [0]

    def search(order, keys, cmap, nxt, remaining):
        while True:
            if best[0] is not None and keys > best[0][:len(keys)]:
                return
            if not remaining:
                leaves[0] += 1
                if best[0] is None or keys < best[0]:
                    best[:] = [keys, order, dict(cmap)]
                return
            cands = {}
            for x in remaining:
                lab, _ = relabel(X.players[x], cmap, nxt)
                k = (len(X.players[x]), tags[x], lab)
                cands.setdefault(k, {}).setdefault(X.players[x], x)
            kmin = min(cands)
            group = list(cands[kmin].values())
            if len(group) > 1:
                # tied players whose unnumbered channels nobody else uses are interchangeable
                owners = {}
                for y in remaining:
                    for c in set(X.players[y]):
                        if c not in cmap:
                            owners[c] = owners.get(c, 0) + 1
                private = [x for x in group
                           if all(owners[c] == 1 for c in X.players[x] if c not in cmap)]
                group = private[:1] + [x for x in group if x not in private]
            if leaves[0] >= leaf_budget:
                group = group[:1]
            for x in group[1:]:
                lab, extra = relabel(X.players[x], cmap, nxt)
                search(order + [x], keys + [kmin], {**cmap, **extra}, nxt + len(extra),
                       [y for y in remaining if y != x])
            x = group[0]
            lab, extra = relabel(X.players[x], cmap, nxt)
            order, keys = order + [x], keys + [kmin]
            cmap, nxt = {**cmap, **extra}, nxt + len(extra)
            remaining = [y for y in remaining if y != x]

    search([], [], dict(base), len(base) + 1, list(range(len(X.players))))
    keys, order, cmap = best
    nxt = len(cmap) + 1
    for c in range(1, X.channels + 1):
        if c not in cmap:
            cmap[c] = nxt
            nxt += 1
    canon = Position(X.channels, tuple(tuple(cmap[c] for c in X.players[x]) for x in order))
    return canon, order, cmap


def isomorphic_positions(X: Position, Y: Position) -> bool:
    return canonical_form(X)[0] == canonical_form(Y)[0]


@dataclass(frozen=True)
class Gluing:
    """Pushout of ``X <- I -> Y`` along channel injections ``h`` and ``k``."""

    position: Position
    x_channels: tuple
    y_channels: tuple
    x_players: tuple
    y_players: tuple


def glue(X: Position, h: tuple, Y: Position, k: tuple) -> Gluing:
    if len(h) != len(k):
        raise ValueError("interface maps have different domains")
    ymap = {}
    for a, (cx, cy) in enumerate(zip(h, k)):
        if cy in ymap and ymap[cy] != cx:
            raise ValueError("k is not injective on the interface")
        ymap[cy] = cx
    nxt = X.channels + 1
    ych = []
    for c in range(1, Y.channels + 1):
        if c not in ymap:
            ymap[c] = nxt
            nxt += 1
        ych.append(ymap[c])
    players = X.players + tuple(tuple(ymap[c] for c in p) for p in Y.players)
    nx = len(X.players)
    return Gluing(Position(nxt - 1, players), tuple(range(1, X.channels + 1)), tuple(ych),
                  tuple(range(nx)), tuple(range(nx, nx + len(Y.players))))


def glue_by_pushout(X: Position, h: tuple, Y: Position, k: tuple) -> Position:
    I = interface(len(h))
    po = ps.pushout(_interface_map(I, X, h), _interface_map(I, Y, k))
    return Position.from_presheaf(po.apex)


# --------------------------------------------------------------------------
# DOT
# --------------------------------------------------------------------------


def position_dot(X: Position, name: str = "position") -> str:
    lines = [f"graph {name} {{", "  node [fontsize=10];"]
    for c in range(1, X.channels + 1):
        lines.append(f'  c{c} [shape=circle, label="{c}"];')
    for x, p in enumerate(X.players):
        lines.append(f'  x{x} [shape=point, width=0.15, xlabel="x{x}"];')
        for i, c in enumerate(p, 1):
            lines.append(f'  x{x} -- c{c} [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def play_dot(p: Play, name: str = "play") -> str:
    """Players at each time slice as bullets, moves as labelled boxes."""
    lines = [f"graph {name} {{", "  rankdir=BT;", "  node [fontsize=10];"]
    for c in range(1, p.final.channels + 1):
        lines.append(f'  c{c} [shape=circle, label="{c}"];')
    positions = [p.initial] + [m.final for m in p.steps]
    for t, X in enumerate(positions):
        for x, pl in enumerate(X.players):
            lines.append(f'  t{t}x{x} [shape=point, width=0.12, xlabel="x{x}@{t}"];')
    for c in range(1, p.initial.channels + 1):
        for x, pl in enumerate(p.initial.players):
            if c in pl:
                lines.append(f"  t0x{x} -- c{c} [style=dotted];")
    for t, m in enumerate(p.steps):
        box = f"m{t}"
        lines.append(f'  {box} [shape=box, label="{m.kind.key}"];')
        for x, ys in enumerate(m.player_map):
            for y in ys:
                if x in m.anchor:
                    lines.append(f"  t{t}x{x} -- {box};")
                    lines.append(f"  {box} -- t{t + 1}x{y};")
                else:
                    lines.append(f"  t{t}x{x} -- t{t + 1}x{y} [color=gray];")
    lines.append("}")
    return "\n".join(lines) + "\n"
