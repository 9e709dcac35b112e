"""CCS syntax, typing, parsing and the standard labelled transition system.

Channels are numbered ``1..ctx``.  A restriction ``new a. P`` under context
``ctx`` binds the fresh channel ``ctx + 1``; free channels keep their numbers
inside the binder, so no renumbering happens on the way in.  Recursion is
represented by guarded ``rec X. P`` / ``X`` pairs, which is enough to write
every regular infinite term.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Union


class CcsError(ValueError):
    """Base class for ill-formed CCS input."""


class CcsSyntaxError(CcsError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UnboundChannelError(CcsError):
    pass


class UnguardedRecursionError(CcsError):
    pass


# --------------------------------------------------------------------------
# prefixes and labels
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Prefix:
    """``kind`` is one of ``"in"``, ``"out"``, ``"tick"``; tick has channel 0."""

    kind: str
    channel: int = 0

    def __post_init__(self):
        if self.kind not in ("in", "out", "tick"):
            raise ValueError(f"bad prefix kind {self.kind!r}")
        if (self.kind == "tick") != (self.channel == 0):
            raise ValueError("tick prefixes carry no channel; others need one")

    def __str__(self) -> str:
        if self.kind == "tick":
            return "tick"
        return ("'" if self.kind == "out" else "") + f"a{self.channel}"


def In(channel: int) -> Prefix:
    return Prefix("in", channel)


def Out(channel: int) -> Prefix:
    return Prefix("out", channel)


TICK = Prefix("tick")


@dataclass(frozen=True, order=True)
class LabelA:
    """An edge of the CCS alphabet graph: an endo-edge on the context ``endpoint``.

    ``kind`` is ``"id"``, ``"tick"``, ``"in"`` or ``"out"``.
    """

    endpoint: int
    kind: str
    channel: int = 0

    def __post_init__(self):
        if self.kind not in ("id", "tick", "in", "out"):
            raise ValueError(f"bad label kind {self.kind!r}")
        if self.kind in ("in", "out") and not 1 <= self.channel <= self.endpoint:
            raise ValueError(f"channel {self.channel} outside 1..{self.endpoint}")

    @property
    def silent(self) -> bool:
        return self.kind == "id"

    def __str__(self) -> str:
        if self.kind == "id":
            return "id"
        if self.kind == "tick":
            return "♥"
        return f"{'~' if self.kind == 'out' else ''}a{self.channel}"

    def to_json(self):
        d = {"context": self.endpoint, "kind": self.kind}
        if self.kind in ("in", "out"):
            d["channel"] = self.channel
        return d


def label_of(prefix: Prefix, ctx: int) -> LabelA:
    return LabelA(ctx, prefix.kind, prefix.channel)


# --------------------------------------------------------------------------
# processes
# --------------------------------------------------------------------------


class _Node:
    """Immutable syntax node with a cached structural hash."""

    __slots__ = ()

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((type(self).__name__,) + self._fields())
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True, eq=True)
class Par(_Node):
    left: "Process"
    right: "Process"
    _hash: int = field(default=None, init=False, repr=False, compare=False)

    def _fields(self):
        return (self.left, self.right)

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Nu(_Node):
    body: "Process"
    _hash: int = field(default=None, init=False, repr=False, compare=False)

    def _fields(self):
        return (self.body,)

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Sum(_Node):
    branches: tuple = ()
    _hash: int = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple((p, q) for p, q in self.branches))

    def _fields(self):
        return (self.branches,)

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class RecVar(_Node):
    name: str
    _hash: int = field(default=None, init=False, repr=False, compare=False)

    def _fields(self):
        return (self.name,)

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class RecDef(_Node):
    name: str
    body: "Process"
    _hash: int = field(default=None, init=False, repr=False, compare=False)

    def _fields(self):
        return (self.name, self.body)

    __hash__ = _Node.__hash__


Process = Union[Par, Nu, Sum, RecVar, RecDef]

NIL = Sum(())


def prefixed(prefix: Prefix, cont: Process = NIL) -> Sum:
    return Sum(((prefix, cont),))


def choice(*summands: Sum) -> Sum:
    """Merge guarded sums into one."""
    out = []
    for s in summands:
        if not isinstance(s, Sum):
            raise TypeError("only guarded sums can be summed")
        out.extend(s.branches)
    return Sum(tuple(out))


def size(p: Process) -> int:
    """Syntactic size: 0 counts 1, each prefix, ``|``, ``new`` and ``rec`` count 1."""
    if isinstance(p, Sum):
        if not p.branches:
            return 1
        return sum(1 + size(q) for _, q in p.branches)
    if isinstance(p, Par):
        return 1 + size(p.left) + size(p.right)
    if isinstance(p, (Nu, RecDef)):
        return 1 + size(p.body)
    return 1


# --------------------------------------------------------------------------
# well-formedness
# --------------------------------------------------------------------------


def check(ctx: int, p: Process) -> None:
    """Raise a :class:`CcsError` unless ``p`` is well formed under ``ctx``."""
    if ctx < 0:
        raise CcsError("negative context")
    _check(ctx, p, {}, frozenset())


def _check(ctx, p, bound, unguarded):
    if isinstance(p, Par):
        _check(ctx, p.left, bound, unguarded)
        _check(ctx, p.right, bound, unguarded)
    elif isinstance(p, Nu):
        _check(ctx + 1, p.body, bound, unguarded)
    elif isinstance(p, Sum):
        for pre, q in p.branches:
            if pre.kind != "tick" and not 1 <= pre.channel <= ctx:
                raise UnboundChannelError(f"channel {pre.channel} not in 1..{ctx}")
            _check(ctx, q, bound, frozenset())
    elif isinstance(p, RecDef):
        _check(ctx, p.body, {**bound, p.name: ctx}, unguarded | {p.name})
    elif isinstance(p, RecVar):
        if p.name not in bound:
            raise CcsError(f"unbound recursion variable {p.name}")
        if p.name in unguarded:
            raise UnguardedRecursionError(f"unguarded occurrence of {p.name}")
    else:
        raise TypeError(f"not a process: {p!r}")


def wellformed(ctx: int, p: Process) -> bool:
    try:
        check(ctx, p)
    except (CcsError, TypeError):
        return False
    return True


# --------------------------------------------------------------------------
# recursion unfolding
# --------------------------------------------------------------------------


def shift(p: Process, cutoff: int, d: int) -> Process:
    """Renumber channels above ``cutoff`` by ``d`` (weakening past ``d`` binders)."""
    if d == 0:
        return p
    if isinstance(p, Sum):
        return Sum(tuple(
            (pre if pre.channel <= cutoff else Prefix(pre.kind, pre.channel + d),
             shift(q, cutoff, d))
            for pre, q in p.branches))
    if isinstance(p, Par):
        return Par(shift(p.left, cutoff, d), shift(p.right, cutoff, d))
    if isinstance(p, Nu):
        return Nu(shift(p.body, cutoff, d))
    if isinstance(p, RecDef):
        return RecDef(p.name, shift(p.body, cutoff, d))
    return p


def _subst(p, name, rec, ctx0, depth):
    if isinstance(p, RecVar):
        return shift(rec, ctx0, depth) if p.name == name else p
    if isinstance(p, Sum):
        return Sum(tuple((pre, _subst(q, name, rec, ctx0, depth)) for pre, q in p.branches))
    if isinstance(p, Par):
        return Par(_subst(p.left, name, rec, ctx0, depth),
                   _subst(p.right, name, rec, ctx0, depth))
    if isinstance(p, Nu):
        return Nu(_subst(p.body, name, rec, ctx0, depth + 1))
    if isinstance(p, RecDef):
        if p.name == name:
            return p
        return RecDef(p.name, _subst(p.body, name, rec, ctx0, depth))
    raise TypeError(p)


def unfold(ctx: int, p: Process) -> Process:
    """Unfold top-level ``rec`` binders until the head is not a ``RecDef``."""
    while isinstance(p, RecDef):
        p = _subst(p.body, p.name, p, ctx, 0)
    return p


# --------------------------------------------------------------------------
# the CCS transition system over the alphabet graph A
# --------------------------------------------------------------------------


@lru_cache(maxsize=200_000)
def ccs_transitions(ctx: int, p: Process) -> tuple:
    """All ``(LabelA, Process)`` transitions of ``p`` under ``ctx``, without repeats.

    The order is the order of generation: branches left to right, then the
    left component, the right one and their synchronisations.
    """
    if isinstance(p, RecDef):
        return ccs_transitions(ctx, unfold(ctx, p))
    if isinstance(p, Sum):
        return _dedup((label_of(pre, ctx), q) for pre, q in p.branches)
    if isinstance(p, Par):
        left = ccs_transitions(ctx, p.left)
        right = ccs_transitions(ctx, p.right)
        out = [(l, Par(q, p.right)) for l, q in left]
        out += [(l, Par(p.left, q)) for l, q in right]
        for l1, q1 in left:
            if l1.kind not in ("in", "out"):
                continue
            for l2, q2 in right:
                if l2.channel == l1.channel and {l1.kind, l2.kind} == {"in", "out"}:
                    out.append((LabelA(ctx, "id"), Par(q1, q2)))
        return _dedup(out)
    if isinstance(p, Nu):
        return _dedup((LabelA(ctx, l.kind, l.channel), Nu(q))
                      for l, q in ccs_transitions(ctx + 1, p.body) if l.channel != ctx + 1)
    raise CcsError(f"cannot compute transitions of free variable {p!r}")


def _dedup(items) -> tuple:
    return tuple(dict.fromkeys(items))


def sorted_transitions(ctx: int, p: Process) -> list:
    """Transitions ordered by label, ties in generation order."""
    return sorted(ccs_transitions(ctx, p), key=lambda t: t[0])


# --------------------------------------------------------------------------
# concrete syntax
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<out>'a(?P<outn>\d+))
  | (?P<chan>a(?P<chann>\d+))(?![A-Za-z0-9_])
  | (?P<tick>tick\b|♥)
  | (?P<new>new\b|ν)
  | (?P<rec>rec\b)
  | (?P<zero>0)(?![0-9])
  | (?P<num>\d+)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<punct>[\[\]|+.()])
""", re.VERBOSE)


def _tokens(text: str) -> list:
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise CcsSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind in ("outn", "chann"):  # pragma: no cover - inner groups
            kind = "out" if m.group("out") else "chan"
        if m.group("out"):
            toks.append(("out", int(m.group("outn")), pos))
        elif m.group("chan"):
            toks.append(("chan", int(m.group("chann")), pos))
        elif kind == "punct":
            toks.append((m.group(), None, pos))
        elif kind != "ws":
            toks.append((kind, m.group(), pos))
        pos = m.end()
    toks.append(("eof", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            want = kind if len(kind) > 1 else repr(kind)
            raise CcsSyntaxError(f"expected {want}, found {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def program(self):
        self.take("[")
        ctx = int(self.take("num")[1]) if self.peek()[0] == "num" else self._zero_ctx()
        self.take("]")
        body = self.par()
        self.take("eof")
        return ctx, body

    def _zero_ctx(self):
        self.take("zero")
        return 0

    def par(self):
        p = self.choice()
        while self.peek()[0] == "|":
            self.take()
            p = Par(p, self.choice())
        return p

    def binder(self):
        tok = self.take()
        if tok[0] == "new":
            if self.peek()[0] in ("ident", "chan"):
                self.take()
            self.take(".")
            return Nu(self.par())
        name = self.take("var")[1]
        self.take(".")
        return RecDef(name, self.par())

    def choice(self):
        if self.peek()[0] in ("new", "rec"):
            return self.binder()
        start = self.peek()[2]
        items = [self.summand()]
        while self.peek()[0] == "+":
            self.take()
            items.append(self.summand())
        if len(items) == 1:
            return items[0]
        if not all(isinstance(s, Sum) for s in items):
            raise CcsSyntaxError("only guarded sums may be combined with '+'", start)
        return choice(*items)

    def summand(self):
        kind, val, pos = self.peek()
        if kind == "zero":
            self.take()
            return NIL
        if kind == "var":
            self.take()
            return RecVar(val)
        if kind == "(":
            self.take()
            p = self.par()
            self.take(")")
            return p
        if kind in ("chan", "out", "tick"):
            self.take()
            pre = TICK if kind == "tick" else Prefix("in" if kind == "chan" else "out", val)
            if self.peek()[0] != ".":
                return prefixed(pre)
            self.take(".")
            if self.peek()[0] in ("new", "rec"):
                return prefixed(pre, self.binder())
            return prefixed(pre, self.summand())
        raise CcsSyntaxError(f"unexpected token {kind!r}", pos)


def parse_ccs(text: str) -> tuple:
    """Parse ``[ctx] body`` and return ``(ctx, process)``; raises on ill-formed input."""
    ctx, p = _Parser(text).program()
    check(ctx, p)
    return ctx, p


def parse_body(ctx: int, text: str) -> Process:
    return parse_ccs(f"[{ctx}] {text}")[1]


def _atom(p: Process) -> str:
    if isinstance(p, Sum) and len(p.branches) <= 1:
        return to_text_body(p)
    if isinstance(p, RecVar):
        return p.name
    return f"({to_text_body(p)})"


def to_text_body(p: Process) -> str:
    if isinstance(p, Sum):
        if not p.branches:
            return "0"
        return " + ".join(f"{pre}.{_atom(q)}" for pre, q in p.branches)
    if isinstance(p, Par):
        left = to_text_body(p.left) if isinstance(p.left, (Par, Sum, RecVar)) else _paren(p.left)
        right = _paren(p.right) if isinstance(p.right, (Par, Nu, RecDef)) else to_text_body(p.right)
        return f"{left} | {right}"
    if isinstance(p, Nu):
        return f"new a. {to_text_body(p.body)}"
    if isinstance(p, RecDef):
        return f"rec {p.name}. {to_text_body(p.body)}"
    if isinstance(p, RecVar):
        return p.name
    raise TypeError(p)


def _paren(p):
    return f"({to_text_body(p)})"


def to_text(ctx: int, p: Process) -> str:
    return f"[{ctx}] {to_text_body(p)}"


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------


def _prefix_json(pre: Prefix):
    return "tick" if pre.kind == "tick" else {pre.kind: pre.channel}


def process_to_json(p: Process):
    if isinstance(p, Sum):
        return {"sum": [{"prefix": _prefix_json(pre), "then": process_to_json(q)}
                        for pre, q in p.branches]}
    if isinstance(p, Par):
        return {"par": [process_to_json(p.left), process_to_json(p.right)]}
    if isinstance(p, Nu):
        return {"new": process_to_json(p.body)}
    if isinstance(p, RecDef):
        return {"rec": {"var": p.name, "body": process_to_json(p.body)}}
    if isinstance(p, RecVar):
        return {"var": p.name}
    raise TypeError(p)


def process_from_json(d) -> Process:
    if "sum" in d:
        branches = []
        for b in d["sum"]:
            pre = b["prefix"]
            pre = TICK if pre == "tick" else Prefix(*next(iter(pre.items())))
            branches.append((pre, process_from_json(b["then"])))
        return Sum(tuple(branches))
    if "par" in d:
        left, right = d["par"]
        return Par(process_from_json(left), process_from_json(right))
    if "new" in d:
        return Nu(process_from_json(d["new"]))
    if "rec" in d:
        return RecDef(d["rec"]["var"], process_from_json(d["rec"]["body"]))
    if "var" in d:
        return RecVar(d["var"])
    raise ValueError(f"unrecognised process JSON: {d!r}")


def to_json(ctx: int, p: Process):
    return {"context": ctx, "process": process_to_json(p)}


def from_json(d) -> tuple:
    ctx, p = d["context"], process_from_json(d["process"])
    check(ctx, p)
    return ctx, p


# --------------------------------------------------------------------------
# enumeration (used by tests and the acceptance suite)
# --------------------------------------------------------------------------


def prefixes(ctx: int) -> list:
    out = []
    for a in range(1, ctx + 1):
        out += [In(a), Out(a)]
    return out + [TICK]


def enumerate_processes(ctx: int, max_size: int) -> Iterator[Process]:
    """Every recursion-free process of size ``<= max_size`` under ``ctx``."""
    for n in range(1, max_size + 1):
        yield from _exactly(ctx, n)


@lru_cache(maxsize=None)
def _exactly(ctx: int, n: int) -> tuple:
    out = []
    if n == 1:
        out.append(NIL)
    out.extend(_sums(ctx, n))
    if n >= 3:
        for k in range(1, n - 1):
            for l in _exactly(ctx, k):
                for r in _exactly(ctx, n - 1 - k):
                    out.append(Par(l, r))
    if n >= 2:
        out.extend(Nu(b) for b in _exactly(ctx + 1, n - 1))
    return tuple(out)


@lru_cache(maxsize=None)
def _branches(ctx: int, n: int) -> tuple:
    """Single branches ``pre.P`` of size exactly ``n``."""
    return tuple((pre, q) for pre in prefixes(ctx) for q in _exactly(ctx, n - 1))


@lru_cache(maxsize=None)
def _sums(ctx: int, n: int) -> tuple:
    """Non-empty guarded sums of size exactly ``n`` (branch order significant)."""
    out = []
    for k in range(2, n + 1):
        for first in _branches(ctx, k):
            if k == n:
                out.append(Sum((first,)))
            else:
                for rest in _sums(ctx, n - k):
                    out.append(Sum((first,) + rest.branches))
    return tuple(out)


def random_process(rng, ctx: int, max_size: int, recursion: bool = True) -> Process:
    """A well-formed process of size at most ``max_size`` drawn with ``rng`` (a ``random.Random``)."""
    names = iter(f"X{i}" for i in itertools.count())

    def gen(ctx, budget, bound, unguarded):
        usable = [x for x in bound if x not in unguarded]
        if budget <= 1:
            if usable and rng.random() < 0.5:
                return RecVar(rng.choice(usable))
            return NIL
        kinds = ["sum", "sum", "sum", "par", "new"] + (["rec"] if recursion else [])
        kind = rng.choice(kinds)
        if kind == "par" and budget >= 3:
            left = rng.randint(1, budget - 2)
            return Par(gen(ctx, left, bound, unguarded),
                       gen(ctx, rng.randint(1, budget - 1 - left), bound, unguarded))
        if kind == "new":
            return Nu(gen(ctx + 1, budget - 1, bound, unguarded))
        if kind == "rec" and budget >= 3:
            name = next(names)
            return RecDef(name, gen(ctx, budget - 1, bound | {name}, unguarded | {name}))
        branches, left = [], budget
        while left >= 2 and (not branches or rng.random() < 0.4):
            cost = rng.randint(2, left)
            branches.append((rng.choice(prefixes(ctx)), gen(ctx, cost - 1, bound, frozenset())))
            left -= cost
        return Sum(tuple(branches))

    p = gen(ctx, rng.randint(1, max_size), frozenset(), frozenset())
    check(ctx, p)
    return p
