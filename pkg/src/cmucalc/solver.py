"""Parity solving of evaluation games and the game/Kripke cross-check.

Winning condition: a player who cannot move loses; an infinite play is won
by player I iff the largest priority seen infinitely often is even.
Solving uses recursive attractor decomposition (Zielonka).  Dead ends are
handled by giving them a private self-loop whose priority favours the
opponent; the self-loops never appear in extracted strategies.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .formula import Formula
from .game import I, II, PLAYER_NAMES, Arena, build_arena_multi
from .kripke import KripkeModel
from .semantics import Evaluator


class StrategyError(ValueError):
    pass


@dataclass
class Strategy:
    player: int
    choice: dict[int, int] = field(default_factory=dict)

    def to_json(self, arena: Arena) -> dict[str, str]:
        return {arena.render(i): arena.render(j) for i, j in sorted(self.choice.items())}


@dataclass
class SolveResult:
    region: tuple[set[int], set[int]]
    strategy: tuple[Strategy, Strategy]

    @property
    def winner_region_I(self) -> set[int]:
        return self.region[I]

    @property
    def winner_region_II(self) -> set[int]:
        return self.region[II]

    @property
    def strategy_I(self) -> Strategy:
        return self.strategy[I]

    @property
    def strategy_II(self) -> Strategy:
        return self.strategy[II]

    def winner(self, pos: int) -> int:
        return I if pos in self.region[I] else II


@dataclass
class GameGraph:
    """The bare game graph: what solving and verification need from an arena."""

    owner: list[int]
    moves: list[list[int]]
    priority: list[int]
    roots: tuple[int, ...]
    labels: list[str] | None = None

    def __len__(self):
        return len(self.owner)

    def render(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)


def disjoint_union(arenas) -> tuple[GameGraph, list[int]]:
    """Place several arenas side by side; returns the graph and index offsets."""
    owner, moves, priority, roots, offsets = [], [], [], [], []
    for a in arenas:
        k = len(owner)
        offsets.append(k)
        owner.extend(a.owner)
        priority.extend(a.priority)
        moves.extend([k + j for j in ms] for ms in a.moves)
        roots.extend(k + r for r in a.roots)
    return GameGraph(owner, moves, priority, tuple(roots)), offsets


class _Game:
    """Dead-end-free view of a game graph used by the recursive solver."""

    def __init__(self, arena):
        n = len(arena)
        self.owner = arena.owner
        top = max(arena.priority, default=0) + 2
        top += top % 2
        self.priority = list(arena.priority)
        self.succ = []
        for v in range(n):
            if arena.moves[v]:
                self.succ.append(arena.moves[v])
            else:
                # Absorbing loop won by the opponent of the stuck owner.
                loser = arena.owner[v]
                self.priority[v] = top if loser == II else top + 1
                self.succ.append([v])
        self.pred: list[list[int]] = [[] for _ in range(n)]
        for v, ss in enumerate(self.succ):
            for u in ss:
                self.pred[u].append(v)

    def attractor(self, nodes: set[int], target: set[int], player: int):
        """Attractor of ``target`` for ``player`` inside subgame ``nodes``.

        Each attracted node of ``player`` picks its first successor (in move
        order) that entered the attractor earlier.
        """
        attr = set(target)
        strat: dict[int, int] = {}
        count: dict[int, int] = {}
        queue = list(target)
        owner, succ, pred = self.owner, self.succ, self.pred
        k = 0
        while k < len(queue):
            v = queue[k]
            k += 1
            for u in pred[v]:
                if u not in nodes or u in attr:
                    continue
                if owner[u] == player:
                    strat[u] = next(s for s in succ[u] if s in attr)
                    attr.add(u)
                    queue.append(u)
                else:
                    c = count.get(u)
                    if c is None:
                        c = sum(1 for s in succ[u] if s in nodes)
                    c -= 1
                    count[u] = c
                    if c == 0:
                        attr.add(u)
                        queue.append(u)
        return attr, strat

    def solve(self, nodes: set[int]):
        if not nodes:
            return (set(), set()), ({}, {})
        prio = self.priority
        d = max(prio[v] for v in nodes)
        p = d % 2
        o = 1 - p
        top = {v for v in nodes if prio[v] == d}
        a, sa = self.attractor(nodes, top, p)
        sub, ssub = self.solve(nodes - a)
        if not sub[o]:
            strat_p = dict(ssub[p])
            strat_p.update(sa)
            for v in top:
                if self.owner[v] == p:
                    strat_p[v] = next(s for s in self.succ[v] if s in nodes)
            region = [set(), set()]
            region[p] = set(nodes)
            strats = [{}, {}]
            strats[p] = strat_p
            return tuple(region), tuple(strats)
        b, sb = self.attractor(nodes, sub[o], o)
        rest, srest = self.solve(nodes - b)
        region = [set(), set()]
        region[p] = rest[p]
        region[o] = rest[o] | b
        strats = [{}, {}]
        strats[p] = dict(srest[p])
        strat_o = dict(srest[o])
        strat_o.update(ssub[o])
        strat_o.update(sb)
        strats[o] = strat_o
        return tuple(region), tuple(strats)


def solve(arena) -> SolveResult:
    """Winning regions and positional winning strategies for both players."""
    g = _Game(arena)
    region, strats = g.solve(set(range(len(arena))))
    out = []
    for p in (I, II):
        choice = {
            v: s
            for v, s in sorted(strats[p].items())
            if arena.moves[v] and arena.owner[v] == p and v in region[p]
        }
        out.append(Strategy(p, choice))
    return SolveResult((set(region[I]), set(region[II])), (out[I], out[II]))


def verify_strategy(arena, strategy: Strategy, start=None) -> bool:
    """Decide whether ``strategy`` wins every play from ``start``.

    ``start`` defaults to the arena's initial positions.  Plays are explored
    with the strategy's owner fixed to the strategy and the opponent free.
    The strategy wins iff no reachable dead end belongs to its owner, every
    reachable owned position with moves has a choice, and no reachable cycle
    has a maximal priority of the opponent's parity.
    """
    p = strategy.player
    for v, s in strategy.choice.items():
        if arena.owner[v] != p or s not in arena.moves[v]:
            raise StrategyError(f"illegal move {arena.render(v)} -> {arena.render(s)}")
    roots = arena.roots if start is None else start
    seen = set(roots)
    stack = list(roots)
    edges: list[tuple[int, int]] = []
    while stack:
        v = stack.pop()
        if arena.owner[v] == p:
            if not arena.moves[v]:
                return False
            if v not in strategy.choice:
                return False
            succ = [strategy.choice[v]]
        else:
            succ = arena.moves[v]
        for u in succ:
            edges.append((v, u))
            if u not in seen:
                seen.add(u)
                stack.append(u)
    prio = arena.priority
    succ: dict[int, list[int]] = {}
    for v, u in edges:
        succ.setdefault(v, []).append(u)
    # Every non-trivial SCC holds a cycle through its top-priority node.  If
    # that priority favours the opponent the strategy loses; otherwise drop
    # those nodes and look for cycles among the rest.
    pending = [seen]
    while pending:
        nodes = pending.pop()
        for comp in strongly_connected_components(nodes, succ):
            if len(comp) == 1:
                (v,) = comp
                if v not in succ.get(v, ()):
                    continue
            top = max(prio[v] for v in comp)
            if top % 2 != p:
                return False
            rest = {v for v in comp if prio[v] != top}
            if rest:
                pending.append(rest)
    return True


def strongly_connected_components(nodes: set[int], succ: dict[int, list[int]]):
    """Tarjan's algorithm, iterative, on the subgraph induced by ``nodes``."""
    adj = {v: [u for u in succ.get(v, ()) if u in nodes] for v in nodes}
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = 0
    for root in sorted(nodes):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            ws = adj[v]
            for j in range(i, len(ws)):
                u = ws[j]
                if u not in index:
                    work.append((v, j + 1))
                    work.append((u, 0))
                    break
                if u in on_stack:
                    low[v] = min(low[v], index[u])
            else:
                if low[v] == index[v]:
                    comp = set()
                    while True:
                        u = stack.pop()
                        on_stack.discard(u)
                        comp.add(u)
                        if u == v:
                            break
                    yield comp
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])


@dataclass
class XCheckRow:
    world: str
    kripke: bool
    winner: str

    @property
    def agree(self) -> bool:
        return self.kripke == (self.winner == "I")


@dataclass
class XCheckReport:
    formula: str
    rows: list[XCheckRow]
    artifacts: dict = field(default_factory=dict)

    @property
    def mismatches(self) -> list[XCheckRow]:
        return [r for r in self.rows if not r.agree]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "check": "xcheck",
            "formula": self.formula,
            "status": "ok" if self.ok else "mismatch",
            "rows": [
                {"world": r.world, "kripke": r.kripke, "winner": r.winner, "agree": r.agree}
                for r in self.rows
            ],
            **({"witness": self.artifacts} if self.artifacts else {}),
        }

    def to_text(self) -> str:
        lines = [f"formula: {self.formula}", "world\tkripke\twinner\tagree"]
        for r in self.rows:
            lines.append(f"{r.world}\t{str(r.kripke).lower()}\t{r.winner}\t{'yes' if r.agree else 'NO'}")
        lines.append("status: " + ("agree" if self.ok else f"{len(self.mismatches)} mismatch(es)"))
        return "\n".join(lines)


def xcheck(
    model: KripkeModel, phi: Formula, worlds=None, with_artifacts: bool = True
) -> XCheckReport:
    """Compare Kripke truth with the game winner at each world."""
    from .syntax import to_text

    arena = build_arena_multi(model, worlds, phi)
    result = solve(arena)
    ev = Evaluator(model)
    truth = ev.mask(phi)
    rows = []
    for r in arena.roots:
        w = arena.positions[r].world
        rows.append(
            XCheckRow(model.worlds[w], bool(truth >> w & 1), PLAYER_NAMES[result.winner(r)])
        )
    report = XCheckReport(to_text(phi), rows)
    if with_artifacts and not report.ok:
        chains = {}
        for e in arena.table:
            chains[to_text(e.formula)] = [
                model.world_set(a).names(model) for a in ev.approximants(e.formula)
            ] if not e.formula.free_vars else "depends on enclosing binders"
        report.artifacts = {"arena_dot": arena.to_dot(), "approximants": chains}
    return report


def strategy_file(arena: Arena, result: SolveResult, root: int | None = None) -> str:
    root = arena.initial if root is None else root
    w = result.winner(root)
    payload = {
        "winner": PLAYER_NAMES[w],
        "initial": arena.render(root),
        "strategy": result.strategy[w].to_json(arena),
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
