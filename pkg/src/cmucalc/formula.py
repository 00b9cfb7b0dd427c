"""Formula AST for the constructive modal mu-calculus.

Formulas are immutable, hashable values with structural equality.  The
binders :class:`Mu` and :class:`Nu` refuse to construct over a body in which
the bound variable is not positive, so every :class:`Formula` value denotes a
well-defined formula.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Iterator


class FormulaError(ValueError):
    """Base class for errors raised by formula operations."""


class PositivityError(FormulaError):
    """A fixed-point binder was applied to a body where its variable is not positive."""


class CaptureError(FormulaError):
    """Substitution would capture a free variable of the substituted formula."""


class NotWellNamedError(FormulaError):
    pass


class UnguardedError(FormulaError):
    pass


class Polarity(enum.Flag):
    """Status of a variable in a formula.

    ``BOTH`` means the variable is positive *and* negative (e.g. it does not
    occur free), ``NEITHER`` that it is neither.
    """

    NEITHER = 0
    POSITIVE = 1
    NEGATIVE = 2
    BOTH = 3

    def flip(self) -> "Polarity":
        out = Polarity.NEITHER
        if self & Polarity.POSITIVE:
            out |= Polarity.NEGATIVE
        if self & Polarity.NEGATIVE:
            out |= Polarity.POSITIVE
        return out

    @property
    def is_positive(self) -> bool:
        return bool(self & Polarity.POSITIVE)

    @property
    def is_negative(self) -> bool:
        return bool(self & Polarity.NEGATIVE)


@dataclass(frozen=True, eq=False)
class Formula:
    # Hash is cached at construction; formulas are used heavily as dict keys.
    def __post_init__(self):
        object.__setattr__(
            self, "_hash", hash((type(self).__name__, *self._fields()))
        )

    def _fields(self) -> tuple:
        return tuple(getattr(self, name) for name in self.__match_args__)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._fields() == other._fields()

    def __ne__(self, other) -> bool:
        return not self == other

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        from .syntax import to_text

        return to_text(self)

    @property
    def size(self) -> int:
        try:
            return self._size
        except AttributeError:
            size = 1 + sum(c.size for c in self.children())
            object.__setattr__(self, "_size", size)
            return size

    @property
    def free_vars(self) -> frozenset[str]:
        try:
            return self._free
        except AttributeError:
            free = _compute_free_vars(self)
            object.__setattr__(self, "_free", free)
            return free


@dataclass(frozen=True, eq=False)
class Prop(Formula):
    name: str


@dataclass(frozen=True, eq=False)
class Var(Formula):
    name: str


@dataclass(frozen=True, eq=False)
class Bot(Formula):
    pass


@dataclass(frozen=True, eq=False)
class Top(Formula):
    pass


@dataclass(frozen=True, eq=False)
class Neg(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=False)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Imp(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Box(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=False)
class Dia(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=False)
class Fixpoint(Formula):
    var: str
    body: Formula

    kind = ""

    def __post_init__(self):
        if not polarity(self.body, self.var).is_positive:
            raise PositivityError(
                f"{self.var} is not positive in the body of binder "
                f"'{self.kind} {self.var}'"
            )
        super().__post_init__()

    def children(self):
        return (self.body,)


@dataclass(frozen=True, eq=False)
class Mu(Fixpoint):
    kind = "mu"


@dataclass(frozen=True, eq=False)
class Nu(Fixpoint):
    kind = "nu"


BOT = Bot()
TOP = Top()

MODAL_TYPES = (Box, Dia)
BINARY_TYPES = (And, Or, Imp)


def binder(kind: str, var: str, body: Formula) -> Fixpoint:
    if kind == "mu":
        return Mu(var, body)
    if kind == "nu":
        return Nu(var, body)
    raise ValueError(f"unknown binder kind {kind!r}")


def rebuild(f: Formula, children: tuple[Formula, ...]) -> Formula:
    """Return a node of the same type as ``f`` with new children."""
    if isinstance(f, (Neg, Box, Dia)):
        return type(f)(children[0])
    if isinstance(f, BINARY_TYPES):
        return type(f)(children[0], children[1])
    if isinstance(f, Fixpoint):
        return type(f)(f.var, children[0])
    return f


def _compute_free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Var):
        return frozenset((f.name,))
    if isinstance(f, Fixpoint):
        return f.body.free_vars - {f.var}
    out: frozenset[str] = frozenset()
    for c in f.children():
        out |= c.free_vars
    return out


def is_closed(f: Formula) -> bool:
    return not f.free_vars


def is_modal(f: Formula) -> bool:
    """True when ``f`` contains no fixed-point operator."""
    return not any(isinstance(g, Fixpoint) for g in walk(f))


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal (node before children, left before right)."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def polarity(f: Formula, x: str) -> Polarity:
    if x not in f.free_vars:
        return Polarity.BOTH
    if isinstance(f, Var):
        return Polarity.POSITIVE if f.name == x else Polarity.BOTH
    if isinstance(f, (Prop, Bot, Top)):
        return Polarity.BOTH
    if isinstance(f, Neg):
        return polarity(f.arg, x).flip()
    if isinstance(f, Imp):
        return polarity(f.left, x).flip() & polarity(f.right, x)
    if isinstance(f, (And, Or)):
        return polarity(f.left, x) & polarity(f.right, x)
    if isinstance(f, (Box, Dia)):
        return polarity(f.arg, x)
    if isinstance(f, Fixpoint):
        return Polarity.BOTH if f.var == x else polarity(f.body, x)
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f: Formula) -> set[Formula]:
    return set(walk(f))


def substitute(f: Formula, x: str, replacement: Formula) -> Formula:
    """Replace every free occurrence of variable ``x`` in ``f``.

    Raises :class:`CaptureError` if a binder of ``f`` would capture a free
    variable of ``replacement``.
    """
    danger = replacement.free_vars

    def go(g: Formula) -> Formula:
        if x not in g.free_vars:
            return g
        if isinstance(g, Var):
            return replacement
        if isinstance(g, Fixpoint):
            if g.var in danger:
                raise CaptureError(
                    f"substituting for {x} under '{g.kind} {g.var}' captures {g.var}"
                )
            return type(g)(g.var, go(g.body))
        return rebuild(g, tuple(go(c) for c in g.children()))

    return go(f)


def occurrences(f: Formula, x: str) -> int:
    """Number of occurrences of variable name ``x`` (free or bound)."""
    return sum(1 for g in walk(f) if isinstance(g, Var) and g.name == x)


def _guarded_in(f: Formula, x: str, under_modality: bool = False) -> bool:
    if isinstance(f, Var):
        return f.name != x or under_modality
    if isinstance(f, Fixpoint) and f.var == x:
        return True
    if isinstance(f, MODAL_TYPES):
        return _guarded_in(f.arg, x, True)
    return all(_guarded_in(c, x, under_modality) for c in f.children())


def is_guarded(f: Formula) -> bool:
    return all(
        _guarded_in(g.body, g.var) for g in walk(f) if isinstance(g, Fixpoint)
    )


def is_well_bounded(f: Formula) -> bool:
    binders: dict[str, int] = {}
    uses: dict[str, int] = {}
    for g in walk(f):
        if isinstance(g, Fixpoint):
            binders[g.var] = binders.get(g.var, 0) + 1
        elif isinstance(g, Var):
            uses[g.name] = uses.get(g.name, 0) + 1
    # A vacuous binder (no occurrence of its variable) is accepted.
    return all(n == 1 and uses.get(v, 0) <= 1 for v, n in binders.items())


def is_well_named(f: Formula) -> bool:
    return is_guarded(f) and is_well_bounded(f)


@functools.lru_cache(maxsize=4096)
def prop_names(f: Formula) -> frozenset[str]:
    """Names of the propositions occurring in ``f``."""
    return frozenset(g.name for g in walk(f) if isinstance(g, Prop))


def well_name(f: Formula) -> Formula:
    """Return a well-named formula equivalent to the guarded formula ``f``.

    Binders sharing a name are alpha-renamed (``X``, ``X'``, ``X''``, ...).
    A binder ``eta X`` whose variable occurs k > 1 times is split into k
    nested binders of the same kind, one per occurrence, using the diagonal
    identity ``eta X. phi(X, X) = eta X. eta Y. phi(X, Y)``.
    """
    if not is_guarded(f):
        raise UnguardedError(f"formula is not guarded: {f}")
    forbidden = prop_names(f) | f.free_vars
    reserved = forbidden | {g.var for g in walk(f) if isinstance(g, Fixpoint)}
    claimed: set[str] = set()

    def fresh(base: str, keep: bool) -> str:
        if keep and base not in forbidden and base not in claimed:
            claimed.add(base)
            return base
        stem = base.rstrip("'") or base
        cand = stem
        while cand in reserved or cand in claimed:
            cand += "'"
        claimed.add(cand)
        return cand

    def go(g: Formula) -> Formula:
        if isinstance(g, Fixpoint):
            k = occurrences_free(g.body, g.var)
            names = [fresh(g.var, keep=(i == 0)) for i in range(max(k, 1))]
            body = go(_rename_occurrences(g.body, g.var, names))
            for n in reversed(names[1:]):
                body = binder(g.kind, n, body)
            return binder(g.kind, names[0], body)
        return rebuild(g, tuple(go(c) for c in g.children()))

    return go(f)


def occurrences_free(f: Formula, x: str) -> int:
    if isinstance(f, Var):
        return int(f.name == x)
    if isinstance(f, Fixpoint) and f.var == x:
        return 0
    return sum(occurrences_free(c, x) for c in f.children())


def _rename_occurrences(f: Formula, x: str, names: list[str]) -> Formula:
    """Rename the free occurrences of ``x`` in pre-order to ``names[0], names[1], ...``."""
    counter = iter(names)

    def go(g: Formula) -> Formula:
        if x not in g.free_vars:
            return g
        if isinstance(g, Var):
            return Var(next(counter))
        return rebuild(g, tuple(go(c) for c in g.children()))

    return go(f)


@dataclass(frozen=True)
class FixpointEntry:
    index: int
    formula: Fixpoint
    swap_parity: int

    @property
    def kind(self) -> str:
        return self.formula.kind

    @property
    def var(self) -> str:
        return self.formula.var

    @property
    def body(self) -> Formula:
        return self.formula.body


@dataclass(frozen=True)
class FixpointTable:
    """Fixed-point subformulas of a well-named formula, outermost first."""

    entries: tuple[FixpointEntry, ...]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def by_var(self, var: str) -> FixpointEntry:
        for e in self.entries:
            if e.var == var:
                return e
        raise KeyError(var)


def fixpoint_table(f: Formula) -> FixpointTable:
    if not is_well_named(f):
        raise NotWellNamedError(f"formula is not well-named: {f}")
    found: list[tuple[Fixpoint, int]] = []

    def go(g: Formula, parity: int):
        if isinstance(g, Fixpoint):
            found.append((g, parity))
        if isinstance(g, Neg):
            go(g.arg, parity ^ 1)
        elif isinstance(g, Imp):
            go(g.left, parity ^ 1)
            go(g.right, parity)
        else:
            for c in g.children():
                go(c, parity)

    go(f, 0)
    # Stable sort keeps pre-order among equal sizes; strict superformulas are larger.
    found.sort(key=lambda item: -item[0].size)
    return FixpointTable(
        tuple(FixpointEntry(i, fp, par) for i, (fp, par) in enumerate(found))
    )
