"""Finite bi-relational (CK / IS5) Kripke models.

Worlds are named by strings externally and by dense indices internally.  A
set of worlds is an ``int`` bitmask (bit ``i`` = world ``i``); relations are
tuples of successor masks, ``rel[i]`` being the successors of world ``i``.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping


class ModelError(ValueError):
    """Invalid or unrepairable model description."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []


def bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@dataclass(frozen=True)
class WorldSet:
    """A subset of the worlds ``0..n-1`` of some model."""

    mask: int
    n: int

    @classmethod
    def of(cls, model: "KripkeModel", names: Iterable[str]) -> "WorldSet":
        return cls(model.mask_of(names), len(model.worlds))

    def __contains__(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def __iter__(self):
        return bits(self.mask)

    def __len__(self):
        return bin(self.mask).count("1")

    def __or__(self, other: "WorldSet") -> "WorldSet":
        return WorldSet(self.mask | other.mask, self.n)

    def __and__(self, other: "WorldSet") -> "WorldSet":
        return WorldSet(self.mask & other.mask, self.n)

    def __sub__(self, other: "WorldSet") -> "WorldSet":
        return WorldSet(self.mask & ~other.mask, self.n)

    def __le__(self, other: "WorldSet") -> bool:
        return self.mask & ~other.mask == 0

    def complement(self) -> "WorldSet":
        return WorldSet(((1 << self.n) - 1) & ~self.mask, self.n)

    def names(self, model: "KripkeModel") -> list[str]:
        return [model.worlds[i] for i in self]


def _full(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class KripkeModel:
    """A finite model ``(W, W_bot, pre, R, V)``.

    ``pre[i]`` is the mask of worlds ``v`` with ``i <= v`` in the intuitionistic
    preorder, ``modal[i]`` the mask of ``R``-successors.  Construction does not
    validate; see :func:`validate_ck` and :func:`close_repair`.
    """

    worlds: tuple[str, ...]
    fallible: int
    pre: tuple[int, ...]
    modal: tuple[int, ...]
    valuation: tuple[tuple[str, int], ...]

    @classmethod
    def build(
        cls,
        worlds: Iterable[str],
        fallible: Iterable[str] = (),
        pre: Iterable[tuple[str, str]] = (),
        modal: Iterable[tuple[str, str]] = (),
        valuation: Mapping[str, Iterable[str]] | None = None,
    ) -> "KripkeModel":
        worlds = tuple(worlds)
        if len(set(worlds)) != len(worlds):
            raise ModelError("duplicate world names")
        idx = {w: i for i, w in enumerate(worlds)}

        def look(w):
            try:
                return idx[w]
            except KeyError:
                raise ModelError(f"unknown world {w!r}") from None

        def rel(pairs):
            succ = [0] * len(worlds)
            for a, b in pairs:
                succ[look(a)] |= 1 << look(b)
            return tuple(succ)

        fall = 0
        for w in fallible:
            fall |= 1 << look(w)
        val = []
        for p, ws in sorted((valuation or {}).items()):
            m = 0
            for w in ws:
                m |= 1 << look(w)
            val.append((p, m))
        return cls(worlds, fall, rel(pre), rel(modal), tuple(val))

    @property
    def n(self) -> int:
        return len(self.worlds)

    @property
    def full(self) -> int:
        return _full(len(self.worlds))

    @cached_property
    def index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.worlds)}

    @cached_property
    def props(self) -> dict[str, int]:
        return dict(self.valuation)

    @cached_property
    def pre_modal(self) -> tuple[int, ...]:
        """Successor masks of the composition ``pre ; R``."""
        out = []
        for i in range(self.n):
            m = 0
            for v in bits(self.pre[i]):
                m |= self.modal[v]
            out.append(m)
        return tuple(out)

    def mask_of(self, names: Iterable[str]) -> int:
        m = 0
        for w in names:
            try:
                m |= 1 << self.index[w]
            except KeyError:
                raise ModelError(f"unknown world {w!r}") from None
        return m

    def world_set(self, mask: int) -> WorldSet:
        return WorldSet(mask, self.n)

    def pairs(self, rel: tuple[int, ...]) -> set[tuple[str, str]]:
        return {(self.worlds[i], self.worlds[j]) for i in range(self.n) for j in bits(rel[i])}

    def to_dict(self) -> dict:
        return {
            "worlds": list(self.worlds),
            "fallible": [self.worlds[i] for i in bits(self.fallible)],
            "pre": sorted([a, b] for a, b in self.pairs(self.pre)),
            "modal": sorted([a, b] for a, b in self.pairs(self.modal)),
            "valuation": {p: [self.worlds[i] for i in bits(m)] for p, m in self.valuation},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "KripkeModel":
        expected = {"worlds", "fallible", "pre", "modal", "valuation"}
        if set(data) != expected:
            raise ModelError(f"model keys must be exactly {sorted(expected)}")
        return cls.build(
            data["worlds"],
            data["fallible"],
            [tuple(p) for p in data["pre"]],
            [tuple(p) for p in data["modal"]],
            data["valuation"],
        )


def _succ_pairs(rel: tuple[int, ...]) -> Iterator[tuple[int, int]]:
    for i, m in enumerate(rel):
        for j in bits(m):
            yield i, j


def validate_ck(m: KripkeModel) -> list[str]:
    """List every violated CK-model invariant; empty iff ``m`` is a CK-model."""
    w = m.worlds
    out = []
    if m.n == 0:
        out.append("model has no worlds")
    for i in range(m.n):
        if not m.pre[i] >> i & 1:
            out.append(f"pre not reflexive at {w[i]}")
    for i, j in _succ_pairs(m.pre):
        for k in bits(m.pre[j] & ~m.pre[i]):
            out.append(f"pre not transitive: {w[i]} <= {w[j]} <= {w[k]}")
    for p, val in m.valuation:
        for i in bits(m.fallible & ~val):
            out.append(f"fallible world {w[i]} not in V({p})")
        for i in bits(val):
            for j in bits(m.pre[i] & ~val):
                out.append(f"V({p}) not monotone: {w[i]} <= {w[j]}, {w[i]} in V({p}), {w[j]} not")
    for i in bits(m.fallible):
        for j in bits(m.pre[i] & ~m.fallible):
            out.append(f"fallible not pre-closed: {w[i]} <= {w[j]}")
        for j in bits(m.modal[i] & ~m.fallible):
            out.append(f"fallible not R-closed: {w[i]} R {w[j]}")
        if not m.modal[i]:
            out.append(f"fallible world {w[i]} has no R-successor")
    return out


def is_equivalence(rel: tuple[int, ...]) -> bool:
    n = len(rel)
    for i in range(n):
        if not rel[i] >> i & 1:
            return False
    for i, j in _succ_pairs(rel):
        if not rel[j] >> i & 1 or rel[j] & ~rel[i]:
            return False
    return True


def forward_confluence_failures(m: KripkeModel) -> list[tuple[int, int, int]]:
    """Triples (w, v, w') with w R v and w <= w' but no v' with v <= v' R^-1 w'."""
    out = []
    for w, v in _succ_pairs(m.modal):
        for w2 in bits(m.pre[w]):
            if not any(m.modal[w2] >> v2 & 1 for v2 in bits(m.pre[v])):
                out.append((w, v, w2))
    return out


def backward_confluence_failures(m: KripkeModel) -> list[tuple[int, int, int]]:
    """Triples (w, v, v') with w R v <= v' but no w' with w <= w' R v'."""
    out = []
    for w, v in _succ_pairs(m.modal):
        for v2 in bits(m.pre[v]):
            found = False
            for w2 in bits(m.pre[w]):
                if m.modal[w2] >> v2 & 1:
                    found = True
                    break
            if not found:
                out.append((w, v, v2))
    return out


def validate_is5(m: KripkeModel) -> list[str]:
    """CK violations plus the IS5 conditions; empty iff ``m`` is an IS5-model."""
    out = validate_ck(m)
    w = m.worlds
    for i in range(m.n):
        if not m.modal[i] >> i & 1:
            out.append(f"modal not reflexive at {w[i]}")
    for i, j in _succ_pairs(m.modal):
        if not m.modal[j] >> i & 1:
            out.append(f"modal not symmetric: {w[i]} R {w[j]}")
        for k in bits(m.modal[j] & ~m.modal[i]):
            out.append(f"modal not transitive: {w[i]} R {w[j]} R {w[k]}")
    if m.fallible:
        out.append("fallible set is not empty")
    for a, b, c in forward_confluence_failures(m):
        out.append(f"forward confluence fails at ({w[a]},{w[b]},{w[c]})")
    for a, b, c in backward_confluence_failures(m):
        out.append(f"backward confluence fails at ({w[a]},{w[b]},{w[c]})")
    return out


def compose_pre_modal(m: KripkeModel) -> set[tuple[str, str]]:
    """The relation ``{(w, u) | exists v. w <= v and v R u}`` as name pairs."""
    return m.pairs(m.pre_modal)


def is_transitive(rel: tuple[int, ...]) -> bool:
    return all(not (rel[j] & ~rel[i]) for i, j in _succ_pairs(rel))


def _rt_closure(rel: tuple[int, ...]) -> tuple[int, ...]:
    succ = [m | 1 << i for i, m in enumerate(rel)]
    changed = True
    while changed:
        changed = False
        for i in range(len(succ)):
            m = succ[i]
            for j in bits(m):
                m |= succ[j]
            if m != succ[i]:
                succ[i] = m
                changed = True
    return tuple(succ)


def close_repair(m: KripkeModel) -> KripkeModel:
    """Close a raw description into a CK-model.

    Takes the reflexive-transitive closure of ``pre``, closes the fallible
    set under ``pre`` and ``R``, adds fallible worlds to every valuation and
    propagates valuations up ``pre``.  A fallible world without an
    ``R``-successor cannot be repaired without inventing edges and raises
    :class:`ModelError`.
    """
    if m.n == 0:
        raise ModelError("model has no worlds")
    pre = _rt_closure(m.pre)
    fall = m.fallible
    while True:
        grown = fall
        for i in bits(fall):
            grown |= pre[i] | m.modal[i]
        if grown == fall:
            break
        fall = grown
    bad = [m.worlds[i] for i in bits(fall) if not m.modal[i]]
    if bad:
        msgs = [f"fallible world {w} has no R-successor" for w in bad]
        raise ModelError("; ".join(msgs), msgs)
    val = []
    for p, v in m.valuation:
        v |= fall
        up = v
        for i in bits(v):
            up |= pre[i]
        val.append((p, up))
    out = KripkeModel(m.worlds, fall, pre, m.modal, tuple(val))
    problems = validate_ck(out)
    if problems:
        raise ModelError("repair failed", problems)
    return out


def load_model(path: str | Path, repair: bool = False) -> KripkeModel:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    m = KripkeModel.from_dict(data)
    if repair:
        return close_repair(m)
    problems = validate_ck(m)
    if problems:
        raise ModelError("invalid CK-model: " + "; ".join(problems), problems)
    return m


def save_model(m: KripkeModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(m.to_dict(), fh, indent=2, sort_keys=False)
        fh.write("\n")


PROP_NAMES = ("P", "Q", "S", "T")


def _prop_names(props: int | Iterable[str]) -> tuple[str, ...]:
    if isinstance(props, int):
        if props > len(PROP_NAMES):
            raise ValueError(f"at most {len(PROP_NAMES)} generated propositions")
        return PROP_NAMES[:props]
    return tuple(props)


def gen_ck(seed: int, max_worlds: int = 4, props: int | Iterable[str] = 1) -> KripkeModel:
    """Random CK-model, deterministic in ``seed``."""
    rng = random.Random(f"ck:{seed}")
    n = rng.randint(1, max_worlds)
    names = tuple(f"w{i}" for i in range(n))
    p_pre = rng.choice((0.15, 0.3, 0.5))
    p_mod = rng.choice((0.2, 0.35, 0.6))
    pre = tuple(
        sum(1 << j for j in range(n) if j != i and rng.random() < p_pre) for i in range(n)
    )
    modal = [sum(1 << j for j in range(n) if rng.random() < p_mod) for i in range(n)]
    fall = 0
    if rng.random() < 0.3:
        fall = 1 << rng.randrange(n)
    # Fallible worlds are closed under pre and R and must stay R-serial.
    closed = _rt_closure(pre)
    while True:
        grown = fall
        for i in bits(fall):
            if not modal[i]:
                modal[i] = 1 << i
            grown |= closed[i] | modal[i]
        if grown == fall:
            break
        fall = grown
    val = tuple((p, sum(1 << i for i in range(n) if rng.random() < 0.4)) for p in _prop_names(props))
    m = close_repair(KripkeModel(names, fall, pre, tuple(modal), val))
    assert not validate_ck(m)
    return m


def gen_is5(seed: int, max_worlds: int = 4, props: int | Iterable[str] = 1) -> KripkeModel:
    """Random IS5-model, deterministic in ``seed``.

    Worlds are partitioned into modal equivalence classes; random preorder
    edges are added and the preorder is then saturated until both confluence
    squares commute (each missing square is completed by an edge into the
    required class).
    """
    rng = random.Random(f"is5:{seed}")
    n = rng.randint(1, max_worlds)
    names = tuple(f"w{i}" for i in range(n))
    k = rng.randint(1, n)
    cls = [rng.randrange(k) for _ in range(n)]
    members: dict[int, int] = {}
    for i, c in enumerate(cls):
        members[c] = members.get(c, 0) | 1 << i
    modal = tuple(members[cls[i]] for i in range(n))
    p_pre = rng.choice((0.1, 0.25, 0.4))
    pre = tuple(
        (1 << i) | sum(1 << j for j in range(n) if j != i and rng.random() < p_pre)
        for i in range(n)
    )
    while True:
        pre = _rt_closure(pre)
        m = KripkeModel(names, 0, pre, modal, ())
        fails = backward_confluence_failures(m)
        if not fails:
            break
        w, v, v2 = fails[0]
        targets = sorted(bits(modal[v2]))
        # Prefer targets already above w to keep the preorder sparse.
        above = [t for t in targets if pre[w] >> t & 1]
        t = above[0] if above else rng.choice(targets)
        pre = tuple(p | (1 << t) if i == w else p for i, p in enumerate(pre))
    val = tuple((p, sum(1 << i for i in range(n) if rng.random() < 0.4)) for p in _prop_names(props))
    m = close_repair(KripkeModel(names, 0, pre, modal, val))
    assert not validate_is5(m), validate_is5(m)
    return m


def _preorders(n: int) -> list[tuple[int, ...]]:
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    out = []
    for chosen in range(1 << len(off)):
        rel = [1 << i for i in range(n)]
        for b, (i, j) in enumerate(off):
            if chosen >> b & 1:
                rel[i] |= 1 << j
        rel = tuple(rel)
        if is_transitive(rel):
            out.append(rel)
    return out


def _upsets(pre: tuple[int, ...], base: int) -> list[int]:
    n = len(pre)
    return [
        s
        for s in range(1 << n)
        if s & base == base and all(not (pre[i] & ~s) for i in bits(s))
    ]


def _canonical_key(m: KripkeModel, perms) -> tuple:
    best = None
    n = m.n
    for perm in perms:
        def pm(mask):
            out = 0
            for i in bits(mask):
                out |= 1 << perm[i]
            return out

        pre = [0] * n
        mod = [0] * n
        for i in range(n):
            pre[perm[i]] = pm(m.pre[i])
            mod[perm[i]] = pm(m.modal[i])
        key = (tuple(pre), tuple(mod), pm(m.fallible), tuple(pm(v) for _, v in m.valuation))
        if best is None or key < best:
            best = key
    return best


def enumerate_models(
    max_worlds: int,
    props: int | Iterable[str] = 0,
    fallible: bool = True,
    is5_only: bool = False,
    up_to_iso: bool = False,
    min_worlds: int = 1,
) -> Iterator[KripkeModel]:
    """Exhaustively enumerate validated CK-models with at most ``max_worlds`` worlds.

    With ``up_to_iso`` only one representative per isomorphism class (world
    renaming) is produced.  Empty models are never produced.
    """
    names_p = _prop_names(props)
    for n in range(max(min_worlds, 1), max_worlds + 1):
        names = tuple(f"w{i}" for i in range(n))
        perms = list(itertools.permutations(range(n)))
        seen: set = set()
        for pre in _preorders(n):
            for modal in itertools.product(range(1 << n), repeat=n):
                fall_options = [0]
                if fallible and not is5_only:
                    fall_options = [
                        f
                        for f in range(1 << n)
                        if all(not ((pre[i] | modal[i]) & ~f) and modal[i] for i in bits(f))
                    ]
                for fall in fall_options:
                    ups = _upsets(pre, fall)
                    for vals in itertools.product(ups, repeat=len(names_p)):
                        m = KripkeModel(names, fall, pre, modal, tuple(zip(names_p, vals)))
                        if is5_only and (not is_equivalence(modal) or validate_is5(m)):
                            continue
                        if up_to_iso:
                            key = _canonical_key(m, perms)
                            if key in seen:
                                continue
                            seen.add(key)
                        yield m
