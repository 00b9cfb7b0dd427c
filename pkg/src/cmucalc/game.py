"""Evaluation-game arenas for the constructive modal mu-calculus.

Players are ``I`` (index 0) and ``II`` (index 1); roles are ``V`` (verifier)
and ``R`` (refuter).  A position records the role held by player I; the
other player always holds the dual role.  The game starts at
``<w, phi, V>`` with I as verifier.

Move rules, by the role that owns the position:

=================================  =====  ==========================================
position                           owner  moves
=================================  =====  ==========================================
main position at a fallible world  R      none
``<v, P>``, v in V(P) / not        R / V  none
``<v, top>``                       R      none
``<v, bot>`` (v not fallible)      V      none
``<v, a \\/ b>``                    V      ``<v, a>``, ``<v, b>``
``<v, a /\\ b>``                    R      ``<v, a>``, ``<v, b>``
``<v, ~a, Q>``                     R      ``<u, a, Q'>`` for v <= u (roles swap)
``<v, a -> b>``                    R      ``<u, a?b>`` for v <= u
``<v, a?b, Q>``                    V      ``<v, a, Q'>`` (roles swap), ``<v, b, Q>``
``<v, <>a>``                       R      ``<<u>, a>`` for v <= u
``<<v>, a>``                       V      ``<u, a>`` for v R u
``<v, []a>``                       R      ``<[u], a>`` for v <= u
``<[v], a>``                       R      ``<u, a>`` for v R u
``<v, mu X.a>`` / ``<v, X>``       R      ``<v, a>`` / ``<v, mu X.a>``
``<v, nu X.a>`` / ``<v, X>``       V      ``<v, a>`` / ``<v, nu X.a>``
=================================  =====  ==========================================

Successors are listed by world index, then by pre-order index of the
subformula; this order is part of the contract.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .formula import (
    And,
    Bot,
    Box,
    Dia,
    Fixpoint,
    FixpointTable,
    Formula,
    FormulaError,
    Imp,
    Neg,
    Nu,
    Or,
    Prop,
    Top,
    Var,
    fixpoint_table,
    is_well_named,
    prop_names,
)
from .kripke import KripkeModel, ModelError, bits, validate_ck
from .syntax import to_text

I, II = 0, 1
PLAYER_NAMES = ("I", "II")

MAIN, DIA_AUX, BOX_AUX, IMP_AUX = "main", "dia", "box", "imp"


class GameError(FormulaError):
    pass


class Position(NamedTuple):
    kind: str
    world: int
    formula: Formula
    role: str  # role held by player I: "V" or "R"


def dual(role: str) -> str:
    return "R" if role == "V" else "V"


def render(pos: Position, model: KripkeModel) -> str:
    w = model.worlds[pos.world]
    if pos.kind == MAIN:
        return f"⟨{w}, {to_text(pos.formula)}, {pos.role}⟩"
    if pos.kind == DIA_AUX:
        return f"⟨⟨{w}⟩, {to_text(pos.formula)}, {pos.role}⟩"
    if pos.kind == BOX_AUX:
        return f"⟨[{w}], {to_text(pos.formula)}, {pos.role}⟩"
    f = pos.formula
    return f"⟨{w}, {_operand(f.left)} ? {_operand(f.right)}, {pos.role}⟩"


def _operand(f: Formula) -> str:
    s = to_text(f)
    return s if isinstance(f, (Prop, Var, Top, Bot)) else f"({s})"


@dataclass(frozen=True)
class FixpointOwnership:
    owners: dict  # Fixpoint -> player

    def __getitem__(self, fp: Fixpoint) -> int:
        return self.owners[fp]

    def by_var(self, var: str) -> int:
        for fp, p in self.owners.items():
            if fp.var == var:
                return p
        raise KeyError(var)


def fixpoint_owner(phi: Formula, table: FixpointTable | None = None) -> FixpointOwnership:
    """Static owner of each fixed point.

    Player I holds role V at a binder reached through an even number of role
    swaps; I owns ``nu`` binders it reaches as V and ``mu`` binders it reaches
    as R.
    """
    table = table or fixpoint_table(phi)
    owners = {}
    for e in table:
        i_is_verifier = e.swap_parity == 0
        owned_by_i = i_is_verifier == isinstance(e.formula, Nu)
        owners[e.formula] = I if owned_by_i else II
    return FixpointOwnership(owners)


def assign_priorities(table: FixpointTable, own: FixpointOwnership) -> dict[Fixpoint, int]:
    """Max-parity priorities: the k-th innermost binder gets ``2k`` or ``2k - 1``.

    Even priorities go to fixed points owned by I, odd ones to II, and an
    outer binder always outranks every binder listed after it.
    """
    n = len(table)
    out = {}
    for e in table:
        level = n - e.index
        out[e.formula] = 2 * level if own[e.formula] == I else 2 * level - 1
    return out


@dataclass
class Arena:
    model: KripkeModel
    formula: Formula
    positions: list[Position]
    owner: list[int]
    moves: list[list[int]]
    priority: list[int]
    roots: tuple[int, ...]
    index: dict[Position, int]
    table: FixpointTable
    ownership: FixpointOwnership

    @property
    def initial(self) -> int:
        return self.roots[0]

    def __len__(self):
        return len(self.positions)

    def root_for(self, world: int | str) -> int:
        w = self.model.index[world] if isinstance(world, str) else world
        return self.index[Position(MAIN, w, self.formula, "V")]

    def render(self, i: int) -> str:
        return render(self.positions[i], self.model)

    def to_dot(self) -> str:
        lines = ["digraph arena {"]
        for i, pos in enumerate(self.positions):
            label = self.render(i)
            if self.priority[i]:
                label += f" [{self.priority[i]}]"
            shape = "box" if self.owner[i] == I else "diamond"
            extra = ", peripheries=2" if i in self.roots else ""
            lines.append(f'  n{i} [label="{_dot_escape(label)}", shape={shape}{extra}];')
        for i, succ in enumerate(self.moves):
            for j in succ:
                lines.append(f"  n{i} -> n{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def build_arena(model: KripkeModel, world: int | str, phi: Formula) -> Arena:
    """Arena of the game for ``world |= phi``, restricted to reachable positions."""
    return build_arena_multi(model, [world], phi)


def build_arena_multi(
    model: KripkeModel, worlds: Sequence[int | str] | None, phi: Formula, check_model: bool = True
) -> Arena:
    """One arena containing the games for every world in ``worlds``.

    The positions reachable from ``<w, phi, V>`` do not depend on where play
    started, so the games for several worlds share one graph; ``roots``
    holds the initial position of each.
    """
    table, own, prio, binders, props_used = _plan(phi)
    missing = sorted(props_used - set(model.props))
    if missing:
        raise GameError(f"model has no valuation for {', '.join(missing)}")
    if check_model:
        problems = validate_ck(model)
        if problems:
            raise ModelError("invalid CK-model: " + "; ".join(problems), problems)
    if worlds is None:
        worlds = range(model.n)
    starts = [model.index[w] if isinstance(w, str) else w for w in worlds]

    pre, modal, fall = model.pre, model.modal, model.fallible
    props = model.props

    positions: list[Position] = []
    index: dict[Position, int] = {}
    owner: list[int] = []
    moves: list[list[int]] = []
    priority: list[int] = []

    def add(pos: Position) -> int:
        i = index.get(pos)
        if i is None:
            i = len(positions)
            index[pos] = i
            positions.append(pos)
        return i

    roots = tuple(add(Position(MAIN, w, phi, "V")) for w in starts)
    k = 0
    while k < len(positions):
        pos = positions[k]
        k += 1
        role_owner, succ = _rule(pos, pre, modal, fall, props, binders)
        owner.append(I if role_owner == pos.role else II)
        priority.append(prio.get(pos.formula, 0) if pos.kind == MAIN else 0)
        moves.append([add(s) for s in succ])

    return Arena(model, phi, positions, owner, moves, priority, roots, index, table, own)


@functools.lru_cache(maxsize=1024)
def _plan(phi: Formula):
    """Model-independent data for arenas of ``phi``."""
    if phi.free_vars:
        raise GameError(f"formula has free variables: {sorted(phi.free_vars)}")
    if not is_well_named(phi):
        raise GameError(f"formula is not well-named: {to_text(phi)}")
    table = fixpoint_table(phi)
    own = fixpoint_owner(phi, table)
    prio = assign_priorities(table, own)
    binders = {e.var: e.formula for e in table}
    return table, own, prio, binders, prop_names(phi)


def _rule(pos, pre, modal, fall, props, binders):
    """Owning role and ordered successors of ``pos``."""
    kind, v, f, q = pos
    if kind == DIA_AUX:
        return "V", [Position(MAIN, u, f, q) for u in bits(modal[v])]
    if kind == BOX_AUX:
        return "R", [Position(MAIN, u, f, q) for u in bits(modal[v])]
    if kind == IMP_AUX:
        return "V", [Position(MAIN, v, f.left, dual(q)), Position(MAIN, v, f.right, q)]
    if fall >> v & 1:
        return "R", []
    if isinstance(f, Prop):
        return ("R" if props[f.name] >> v & 1 else "V"), []
    if isinstance(f, Top):
        return "R", []
    if isinstance(f, Bot):
        return "V", []
    if isinstance(f, Or):
        return "V", [Position(MAIN, v, f.left, q), Position(MAIN, v, f.right, q)]
    if isinstance(f, And):
        return "R", [Position(MAIN, v, f.left, q), Position(MAIN, v, f.right, q)]
    if isinstance(f, Neg):
        return "R", [Position(MAIN, u, f.arg, dual(q)) for u in bits(pre[v])]
    if isinstance(f, Imp):
        return "R", [Position(IMP_AUX, u, f, q) for u in bits(pre[v])]
    if isinstance(f, Dia):
        return "R", [Position(DIA_AUX, u, f.arg, q) for u in bits(pre[v])]
    if isinstance(f, Box):
        return "R", [Position(BOX_AUX, u, f.arg, q) for u in bits(pre[v])]
    if isinstance(f, Fixpoint):
        return ("V" if isinstance(f, Nu) else "R"), [Position(MAIN, v, f.body, q)]
    if isinstance(f, Var):
        fp = binders[f.name]
        return ("V" if isinstance(fp, Nu) else "R"), [Position(MAIN, v, fp, q)]
    raise TypeError(f"not a formula: {f!r}")
