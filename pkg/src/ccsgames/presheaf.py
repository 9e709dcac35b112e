"""The base category of the CCS game as a finite presentation, and finite
presheaves over it.

Objects are ``star`` (channels), ``player:n`` (n-ary players) and one object
per kind of local move.  Morphisms are paths of generators modulo four
equation schemes.  Every path has length at most three
(``star -> player -> move -> fork/sync``), so hom-sets are computed by
enumerating paths into a target and closing under the equations.

Presheaf actions are stored contravariantly: the action of a generator
``g: d -> c`` maps indices of ``F(c)`` to indices of ``F(d)``.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from functools import lru_cache

MOVE_TAGS = ("in", "out", "nu", "paral", "parar", "para", "tick", "tau")
_TAG_ORDER = {t: i for i, t in enumerate(("star", "player") + MOVE_TAGS)}


class ArityError(ValueError):
    """An arity exceeds the configured maximum."""


class _Config:
    def __init__(self):
        self.max_arity = 8
        self.lock = threading.Lock()


config = _Config()


def set_max_arity(n: int) -> None:
    """Change the arity bound and drop every cached table built for the old one."""
    if n < 0:
        raise ValueError("max arity must be non-negative")
    with config.lock:
        config.max_arity = n
        hom_classes.cache_clear()
        _representable.cache_clear()


def check_arity(n: int) -> None:
    if n > config.max_arity:
        raise ArityError(f"arity {n} exceeds configured max arity {config.max_arity}")


# --------------------------------------------------------------------------
# objects and generators
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BaseObject:
    """An object of the base category.

    ``args`` is ``(n,)`` for players and most moves, ``(n, i)`` for
    ``in``/``out``, and ``(m, j, n, i)`` for ``tau`` (an m-ary player outputs
    on its j-th channel to an n-ary player inputting on its i-th).
    """

    tag: str
    args: tuple = ()

    def __post_init__(self):
        t, a = self.tag, self.args
        if t == "star":
            ok = a == ()
        elif t in ("player", "nu", "paral", "parar", "para", "tick"):
            ok = len(a) == 1 and a[0] >= 0
        elif t in ("in", "out"):
            ok = len(a) == 2 and 1 <= a[1] <= a[0]
        elif t == "tau":
            ok = len(a) == 4 and 1 <= a[1] <= a[0] and 1 <= a[3] <= a[2]
        else:
            ok = False
        if not ok:
            raise ValueError(f"malformed base object {t}{a}")

    @property
    def key(self) -> str:
        return ":".join((self.tag,) + tuple(str(x) for x in self.args))

    @classmethod
    def from_key(cls, key: str) -> "BaseObject":
        tag, *args = key.split(":")
        return cls(tag, tuple(int(x) for x in args))

    @property
    def is_move(self) -> bool:
        return self.tag in MOVE_TAGS

    @property
    def arity(self) -> int:
        """Largest player arity the object mentions."""
        a = self.args
        if self.tag == "star":
            return 0
        if self.tag == "tau":
            return max(a[0], a[2])
        if self.tag == "nu":
            return a[0] + 1
        return a[0]

    def sort_key(self):
        return (_TAG_ORDER[self.tag], self.args)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return self.key


STAR = BaseObject("star")


def player(n: int) -> BaseObject:
    return BaseObject("player", (n,))


@dataclass(frozen=True)
class Generator:
    """A generating edge ``source -> target``; ``name`` is s, src, tgt, l, r, eps or rho."""

    name: str
    source: BaseObject
    target: BaseObject
    index: int = 0

    @property
    def key(self) -> str:
        if self.name == "s":
            return f"s:{self.target.args[0]}:{self.index}"
        return f"{self.name}:{self.target.key}"

    def sort_key(self):
        return (self.target.sort_key(), self.name, self.index, self.source.sort_key())

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return self.key


def generators_into(c: BaseObject) -> tuple:
    t, a = c.tag, c.args
    if t == "star":
        return ()
    if t == "player":
        return tuple(Generator("s", STAR, c, i) for i in range(1, a[0] + 1))
    if t in ("in", "out", "paral", "parar", "tick"):
        p = player(a[0])
        return (Generator("src", p, c), Generator("tgt", p, c))
    if t == "nu":
        return (Generator("src", player(a[0] + 1), c), Generator("tgt", player(a[0]), c))
    if t == "para":
        n = a[0]
        return (Generator("l", BaseObject("paral", (n,)), c),
                Generator("r", BaseObject("parar", (n,)), c))
    m, j, n, i = a
    return (Generator("eps", BaseObject("out", (m, j)), c),
            Generator("rho", BaseObject("in", (n, i)), c))


def generator_from_key(key: str) -> Generator:
    name, rest = key.split(":", 1)
    if name == "s":
        n, i = (int(x) for x in rest.split(":"))
        return Generator("s", STAR, player(n), i)
    target = BaseObject.from_key(rest)
    for g in generators_into(target):
        if g.name == name:
            return g
    raise ValueError(f"unknown generator {key}")


def _g(name, c, i=0):
    for g in generators_into(c):
        if g.name == name and g.index == i:
            return g
    raise KeyError((name, c, i))


def equations_into(c: BaseObject) -> tuple:
    """Base instances of the equation schemes whose common target is ``c``.

    Each equation is a pair of generator paths (listed source first).
    """
    t, a = c.tag, c.args
    if t in ("in", "out", "paral", "parar", "tick"):
        n = a[0]
        return tuple(((_g("s", player(n), i), _g("src", c)), (_g("s", player(n), i), _g("tgt", c)))
                     for i in range(1, n + 1))
    if t == "nu":
        n = a[0]
        return tuple(((_g("s", player(n + 1), i), _g("src", c)), (_g("s", player(n), i), _g("tgt", c)))
                     for i in range(1, n + 1))
    if t == "para":
        n = a[0]
        left, right = BaseObject("paral", (n,)), BaseObject("parar", (n,))
        return (((_g("tgt", left), _g("l", c)), (_g("tgt", right), _g("r", c))),)
    if t == "tau":
        m, j, n, i = a
        o, inp = BaseObject("out", (m, j)), BaseObject("in", (n, i))
        return (((_g("s", player(m), j), _g("tgt", o), _g("eps", c)),
                 (_g("s", player(n), i), _g("tgt", inp), _g("rho", c))),)
    return ()


def objects(max_arity: int) -> list:
    out = [STAR] + [player(n) for n in range(max_arity + 1)]
    for n in range(max_arity + 1):
        for i in range(1, n + 1):
            out += [BaseObject("in", (n, i)), BaseObject("out", (n, i))]
        if n + 1 <= max_arity:
            out.append(BaseObject("nu", (n,)))
        out += [BaseObject(t, (n,)) for t in ("paral", "parar", "para", "tick")]
    for m in range(1, max_arity + 1):
        for j in range(1, m + 1):
            for n in range(1, max_arity + 1):
                for i in range(1, n + 1):
                    out.append(BaseObject("tau", (m, j, n, i)))
    return out


@dataclass(frozen=True)
class Presentation:
    objects: tuple
    generators: tuple
    equations: tuple


def base_presentation(max_arity: int) -> Presentation:
    """Objects, generating edges and equation instances truncated at ``max_arity``."""
    obs = objects(max_arity)
    gens = tuple(g for c in obs for g in generators_into(c))
    eqs = tuple(e for c in obs for e in equations_into(c))
    return Presentation(tuple(obs), gens, eqs)


# --------------------------------------------------------------------------
# morphisms: paths modulo the equations
# --------------------------------------------------------------------------


def _paths_into(c: BaseObject):
    """All generator paths ending at ``c``, as ``(source, path)``; includes identity."""
    out = [(c, ())]
    for g in generators_into(c):
        for src, p in _paths_into(g.source):
            out.append((src, p + (g,)))
    return out


def _path_key(path):
    return tuple(g.sort_key() for g in path)


@lru_cache(maxsize=4096)
def hom_classes(c: BaseObject) -> dict:
    """Map each source ``d`` to the list of equivalence classes of paths ``d -> c``.

    Classes are sorted by their normal form (least path); each class is a
    sorted tuple of paths.
    """
    check_arity(c.arity)
    paths = _paths_into(c)
    index = {p: k for k, (_, p) in enumerate(paths)}
    parent = list(range(len(paths)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    rules = {}
    seen_targets = {g.target for _, p in paths for g in p} | {c}
    for t in seen_targets:
        for lhs, rhs in equations_into(t):
            rules.setdefault(lhs, []).append(rhs)
            rules.setdefault(rhs, []).append(lhs)
    for _, p in paths:
        for lo in range(len(p)):
            for hi in range(lo + 1, len(p) + 1):
                for alt in rules.get(p[lo:hi], ()):
                    q = p[:lo] + alt + p[hi:]
                    a, b = find(index[p]), find(index[q])
                    if a != b:
                        parent[a] = b
    groups = {}
    for src, p in paths:
        groups.setdefault((src, find(index[p])), []).append(p)
    out = {}
    for (src, _), ps in groups.items():
        out.setdefault(src, []).append(tuple(sorted(ps, key=_path_key)))
    for src in out:
        out[src].sort(key=lambda cls: _path_key(cls[0]))
    return out


@dataclass(frozen=True)
class BaseMorphism:
    """A morphism ``source -> target`` stored as a generator path (source first)."""

    source: BaseObject
    target: BaseObject
    path: tuple = ()

    def normalize(self) -> "BaseMorphism":
        for cls in hom_classes(self.target).get(self.source, ()):
            if self.path in cls:
                return BaseMorphism(self.source, self.target, cls[0])
        raise ValueError(f"not a path {self.source} -> {self.target}: {self.path}")

    def then(self, other: "BaseMorphism") -> "BaseMorphism":
        """Diagrammatic composite: first ``self``, then ``other``."""
        if self.target != other.source:
            raise ValueError("morphisms not composable")
        return BaseMorphism(self.source, other.target, self.path + other.path).normalize()

    def __str__(self):
        return " ; ".join(g.key for g in self.path) or f"id:{self.source.key}"


def identity(c: BaseObject) -> BaseMorphism:
    return BaseMorphism(c, c, ())


def hom(d: BaseObject, c: BaseObject) -> list:
    """Normal forms of all morphisms ``d -> c``."""
    return [BaseMorphism(d, c, cls[0]) for cls in hom_classes(c).get(d, ())]


# --------------------------------------------------------------------------
# finite presheaves
# --------------------------------------------------------------------------


class FinPresheaf:
    """A finite presheaf: carrier sizes on a finite support plus generator actions.

    Elements of ``F(c)`` are ``0..sizes[c]-1``.  Values are treated as
    immutable once built.
    """

    __slots__ = ("sizes", "actions")

    def __init__(self, sizes: dict, actions: dict):
        self.sizes = {c: k for c, k in sizes.items() if k}
        self.actions = {g: tuple(v) for g, v in actions.items()
                        if self.sizes.get(g.target, 0)}

    def size(self, c: BaseObject) -> int:
        return self.sizes.get(c, 0)

    @property
    def support(self) -> list:
        return sorted(self.sizes)

    def act(self, g: Generator, x: int) -> int:
        return self.actions[g][x]

    def act_path(self, path, x: int) -> int:
        """Apply the action of a generator path (listed source first) to ``x``."""
        for g in reversed(path):
            x = self.actions[g][x]
        return x

    def total(self) -> int:
        return sum(self.sizes.values())

    def __eq__(self, other):
        return (isinstance(other, FinPresheaf) and self.sizes == other.sizes
                and self.actions == other.actions)

    def __hash__(self):
        return hash((frozenset(self.sizes.items()), frozenset(self.actions.items())))

    def __repr__(self):
        inner = ", ".join(f"{c.key}:{k}" for c, k in sorted(self.sizes.items()))
        return f"FinPresheaf({inner})"

    def to_json(self) -> dict:
        out = {}
        for c in self.support:
            acts = {g.key: list(v) for g, v in sorted(self.actions.items()) if g.target == c}
            out[c.key] = {"size": self.sizes[c], "actions": acts}
        return out

    @classmethod
    def from_json(cls, d: dict) -> "FinPresheaf":
        sizes, actions = {}, {}
        for ck, body in d.items():
            sizes[BaseObject.from_key(ck)] = body["size"]
            for gk, v in body.get("actions", {}).items():
                actions[generator_from_key(gk)] = tuple(v)
        return cls(sizes, actions)


EMPTY = FinPresheaf({}, {})


def check_presheaf(F: FinPresheaf) -> bool:
    """True iff all actions are total functions and every equation instance commutes."""
    for c, k in F.sizes.items():
        for g in generators_into(c):
            act = F.actions.get(g)
            if act is None or len(act) != k:
                return False
            if any(not 0 <= y < F.size(g.source) for y in act):
                return False
        for lhs, rhs in equations_into(c):
            for x in range(k):
                if F.act_path(lhs, x) != F.act_path(rhs, x):
                    return False
    for g in F.actions:
        if g.target not in F.sizes:
            return False
    return True


@dataclass(frozen=True)
class ElementCategory:
    """Category of elements of a representable: objects ``(c, normal form)``."""

    presheaf: FinPresheaf
    elements: tuple  # (BaseObject, BaseMorphism) in index order per object
    arrows: tuple    # (Generator, source element, target element)

    def count(self, c: BaseObject) -> int:
        return self.presheaf.size(c)


@lru_cache(maxsize=4096)
def _representable(c: BaseObject) -> ElementCategory:
    classes = hom_classes(c)
    sizes = {d: len(cls) for d, cls in classes.items()}
    lookup = {d: {p: k for k, cl in enumerate(cls) for p in cl} for d, cls in classes.items()}
    actions = {}
    arrows = []
    for d, cls in classes.items():
        for g in generators_into(d):
            img = []
            for k, cl in enumerate(cls):
                y = lookup[g.source][(g,) + cl[0]]
                img.append(y)
                arrows.append((g, (g.source, y), (d, k)))
            actions[g] = tuple(img)
    elements = tuple((d, BaseMorphism(d, c, cl[0])) for d in sorted(classes) for cl in classes[d])
    return ElementCategory(FinPresheaf(sizes, actions), elements, tuple(arrows))


def elements_of_representable(c: BaseObject) -> ElementCategory:
    """The representable presheaf ``y(c)`` with its category of elements."""
    return _representable(c)


def representable(c: BaseObject) -> FinPresheaf:
    return _representable(c).presheaf


def element_of(c: BaseObject, path: tuple) -> tuple:
    """Locate the element of ``y(c)`` named by a path into ``c``: ``(object, index)``."""
    src = path[0].source if path else c
    for k, cl in enumerate(hom_classes(c)[src]):
        if path in cl:
            return src, k
    raise KeyError(path)


# --------------------------------------------------------------------------
# morphisms of presheaves
# --------------------------------------------------------------------------


class PresheafMorphism:
    __slots__ = ("dom", "cod", "components")

    def __init__(self, dom: FinPresheaf, cod: FinPresheaf, components: dict):
        self.dom, self.cod = dom, cod
        self.components = {c: tuple(v) for c, v in components.items() if dom.size(c)}

    def __call__(self, c: BaseObject, x: int) -> int:
        return self.components[c][x]

    def is_natural(self) -> bool:
        for c in self.dom.sizes:
            comp = self.components.get(c)
            if comp is None or len(comp) != self.dom.size(c):
                return False
            if any(not 0 <= y < self.cod.size(c) for y in comp):
                return False
        for g in self.dom.actions:
            c, d = g.target, g.source
            for x in range(self.dom.size(c)):
                if self.components[d][self.dom.act(g, x)] != self.cod.act(g, self.components[c][x]):
                    return False
        return True

    def then(self, other: "PresheafMorphism") -> "PresheafMorphism":
        return PresheafMorphism(self.dom, other.cod, {
            c: tuple(other.components[c][y] for y in v) for c, v in self.components.items()})

    def __repr__(self):
        return f"PresheafMorphism({self.dom!r} -> {self.cod!r})"


def identity_morphism(F: FinPresheaf) -> PresheafMorphism:
    return PresheafMorphism(F, F, {c: tuple(range(k)) for c, k in F.sizes.items()})


def is_mono(phi: PresheafMorphism) -> bool:
    return all(len(set(v)) == len(v) for v in phi.components.values())


@dataclass(frozen=True)
class Pushout:
    apex: FinPresheaf
    in_x: PresheafMorphism
    in_y: PresheafMorphism

    def mediate(self, p: PresheafMorphism, q: PresheafMorphism) -> PresheafMorphism:
        """The unique map out of the apex agreeing with ``p`` and ``q`` on the legs."""
        comps = {}
        for c, k in self.apex.sizes.items():
            out = [None] * k
            for leg, m in ((self.in_x, p), (self.in_y, q)):
                for x, z in enumerate(leg.components.get(c, ())):
                    w = m.components[c][x]
                    if out[z] is not None and out[z] != w:
                        raise ValueError("cocone does not commute")
                    out[z] = w
            comps[c] = tuple(out)
        return PresheafMorphism(self.apex, p.cod, comps)


def pushout(f: PresheafMorphism, g: PresheafMorphism) -> Pushout:
    """Pointwise pushout of ``X <-f- I -g-> Y``."""
    X, Y, I = f.cod, g.cod, f.dom
    if g.dom is not I and g.dom != I:
        raise ValueError("pushout legs must share their domain")
    sizes, cx, cy = {}, {}, {}
    for c in set(X.sizes) | set(Y.sizes):
        nx, ny = X.size(c), Y.size(c)
        parent = list(range(nx + ny))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i in range(I.size(c)):
            a, b = find(f.components[c][i]), find(nx + g.components[c][i])
            if a != b:
                parent[max(a, b)] = min(a, b)
        number = {}
        for a in range(nx + ny):
            number.setdefault(find(a), len(number))
        sizes[c] = len(number)
        cx[c] = tuple(number[find(a)] for a in range(nx))
        cy[c] = tuple(number[find(nx + b)] for b in range(ny))
    actions = {}
    for c, k in sizes.items():
        for gen in generators_into(c):
            d = gen.source
            img = [None] * k
            for src, comp, off in ((X, cx, 0), (Y, cy, 1)):
                for x in range(src.size(c)):
                    z = comp[c][x]
                    if img[z] is None:
                        img[z] = comp[d][src.act(gen, x)]
            actions[gen] = tuple(img)
    Z = FinPresheaf(sizes, actions)
    return Pushout(Z, PresheafMorphism(X, Z, cx), PresheafMorphism(Y, Z, cy))


def coproduct(X: FinPresheaf, Y: FinPresheaf) -> Pushout:
    return pushout(PresheafMorphism(EMPTY, X, {}), PresheafMorphism(EMPTY, Y, {}))


def isomorphic(F: FinPresheaf, G: FinPresheaf, limit: int = 200_000) -> bool:
    """Brute-force isomorphism test for small presheaves."""
    if F.sizes != {c: G.size(c) for c in F.sizes} or set(F.sizes) != set(G.sizes):
        return False
    obs = sorted(F.sizes, key=lambda c: -_TAG_ORDER[c.tag])  # moves first, star last
    tried = 0

    def search(k, comps):
        nonlocal tried
        if k == len(obs):
            return PresheafMorphism(F, G, comps).is_natural()
        c = obs[k]
        for perm in itertools.permutations(range(F.size(c))):
            tried += 1
            if tried > limit:
                raise RuntimeError("isomorphism search budget exhausted")
            comps[c] = perm
            if _consistent(F, G, comps) and search(k + 1, comps):
                return True
        del comps[c]
        return False

    return search(0, {})


def _consistent(F, G, comps):
    for g in F.actions:
        if g.target in comps and g.source in comps:
            for x in range(F.size(g.target)):
                if comps[g.source][F.act(g, x)] != G.act(g, comps[g.target][x]):
                    return False
    return True
