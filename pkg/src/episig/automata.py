"""Finite state machines over episode families.

Three machines are built here:

* the episode machine, one state per episode and an ``a``-labelled edge from
  ``G - n`` to ``G`` for every sink ``n`` of ``G`` labelled ``a``;
* the simple machine, a determinization of the reversed episode machine whose
  states are antichains of episodes, so that each state has at most one
  incoming edge per label;
* the co-coverage machine, whose final state for ``v`` is covered by ``s``
  exactly when both ``s[1, L-1]`` and ``s[2, L]`` cover ``v``.

All machines are DAGs rooted at a single initial state.  Edges carry an
``EdgeGuard`` so that the same coverage recursion works for all three.
"""
from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from .episodes import Episode, EpisodeFamily, remove_sink, sinks


class MachineError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeGuard:
    kind: str  # "label" | "set" | "complement" | "any"
    labels: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.kind not in ("label", "set", "complement", "any"):
            raise ValueError(f"unknown guard kind {self.kind!r}")
        if self.kind == "label" and len(self.labels) != 1:
            raise ValueError("label guard needs exactly one label")
        if self.kind == "set" and not self.labels:
            raise ValueError("set guard needs labels")

    @classmethod
    def label(cls, a: int) -> "EdgeGuard":
        return cls("label", frozenset((a,)))

    @classmethod
    def any(cls) -> "EdgeGuard":
        return cls("any")

    @classmethod
    def complement(cls, labels: Iterable[int]) -> "EdgeGuard":
        return cls("complement", frozenset(labels))

    def matches(self, a: int) -> bool:
        if self.kind == "any":
            return True
        if self.kind == "complement":
            return a not in self.labels
        return a in self.labels

    def __str__(self) -> str:
        if self.kind == "any":
            return "*"
        body = ",".join(str(x) for x in sorted(self.labels))
        return "-" + body if self.kind == "complement" else body


def guards_disjoint(guards: list[EdgeGuard]) -> bool:
    positive: set[int] = set()
    open_guards = []
    for g in guards:
        if g.kind in ("label", "set"):
            if positive & g.labels:
                return False
            positive |= g.labels
        else:
            open_guards.append(g)
    if len(open_guards) > 1:
        return False
    if open_guards:
        g = open_guards[0]
        if g.kind == "any" and (positive or len(guards) > 1):
            return False
        if g.kind == "complement" and not positive <= g.labels:
            return False
    return True


@dataclass
class LabeledMachine:
    """DAG machine with payload-carrying states and guarded edges."""

    payloads: list[Hashable]
    initial: int
    edges: list[tuple[int, int, EdgeGuard]]
    kind: str = "machine"
    index: dict[Hashable, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {p: i for i, p in enumerate(self.payloads)}
        self.incoming: list[list[tuple[int, EdgeGuard]]] = [[] for _ in self.payloads]
        self.outgoing: list[list[tuple[int, EdgeGuard]]] = [[] for _ in self.payloads]
        for src, dst, g in self.edges:
            self.incoming[dst].append((src, g))
            self.outgoing[src].append((dst, g))
        if self.incoming[self.initial]:
            raise MachineError("initial state has incoming edges")
        ts = graphlib.TopologicalSorter({v: [w for w, _ in self.incoming[v]] for v in range(len(self.payloads))})
        try:
            self.order: list[int] = list(ts.static_order())
        except graphlib.CycleError as exc:
            raise MachineError("machine is not acyclic") from exc

    def __len__(self) -> int:
        return len(self.payloads)

    def state(self, payload: Hashable) -> int:
        return self.index[payload]

    def is_simple(self) -> bool:
        return all(guards_disjoint([g for _, g in inc]) for inc in self.incoming)

    def dump(self, describe=None) -> str:
        """Plain-text adjacency listing, one state per line."""
        describe = describe or repr
        lines = [f"# {self.kind}: {len(self)} states, {len(self.edges)} edges, initial {self.initial}"]
        for v in range(len(self)):
            inc = " ".join(f"{w}:{g}" for w, g in sorted(self.incoming[v], key=lambda e: (e[0], str(e[1]))))
            lines.append(f"{v}\t{describe(self.payloads[v])}\t<- {inc}")
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------ episode machine


class EpisodeMachine(LabeledMachine):
    """Episode machine with ancestor bitsets and per-label parent lookup."""

    def __init__(self, episodes: list[Episode], edges):
        payloads = [G.key for G in episodes]
        empty = Episode.empty().key
        super().__init__(payloads, payloads.index(empty), edges, kind="episode")
        self.episodes = episodes
        self.parents_by_label: list[dict[int, tuple[int, ...]]] = []
        for v in range(len(self)):
            by: dict[int, list[int]] = {}
            for w, g in self.incoming[v]:
                (a,) = g.labels
                by.setdefault(a, []).append(w)
            self.parents_by_label.append({a: tuple(sorted(ws)) for a, ws in by.items()})
        self.ancestors = [0] * len(self)
        for v in self.order:
            bits = 0
            for w, _ in self.incoming[v]:
                bits |= self.ancestors[w] | (1 << w)
            self.ancestors[v] = bits

    def episode(self, v: int) -> Episode:
        return self.episodes[v]


def build_episode_machine(F: EpisodeFamily) -> EpisodeMachine:
    episodes = sorted(F, key=lambda G: (len(G), G.key))
    keys = {G.key: i for i, G in enumerate(episodes)}
    if Episode.empty().key not in keys:
        raise MachineError("family lacks the empty episode")
    edges = set()
    for y, G in enumerate(episodes):
        for n in sinks(G):
            x = keys.get(remove_sink(G, n).key)
            if x is None:
                raise MachineError(f"family not downward closed at {G.key}")
            edges.add((x, y, G.labels[n]))
    guarded = [(x, y, EdgeGuard.label(a)) for x, y, a in sorted(edges)]
    return EpisodeMachine(episodes, guarded)


# -------------------------------------------------------------- simple machine


def _minimal(M: EpisodeMachine, states: set[int]) -> frozenset[int]:
    mask = 0
    for v in states:
        mask |= 1 << v
    return frozenset(v for v in states if not (M.ancestors[v] & mask))


def inc(M: EpisodeMachine, V: frozenset[int]) -> set[int]:
    out: set[int] = set()
    for v in V:
        out.update(M.parents_by_label[v])
    return out


def parent_set(M: EpisodeMachine, V: frozenset[int], a: int) -> frozenset[int]:
    """Minimal elements of the ``a``-parents of ``V`` together with ``V``."""
    sub = set(V)
    for v in V:
        sub.update(M.parents_by_label[v].get(a, ()))
    return _minimal(M, sub)


class SimpleMachine(LabeledMachine):
    def __init__(self, base: EpisodeMachine, payloads, edges):
        init = payloads.index(frozenset((base.initial,)))
        super().__init__(payloads, init, edges, kind="simple")
        self.base = base
        self.inc = [inc(base, V) for V in payloads]
        self._parent_cache: dict[tuple[int, int], int] = {}
        for w, v, g in edges:
            (a,) = g.labels
            self._parent_cache[(v, a)] = w

    def parent(self, V: int, a: int) -> int:
        """State id of ``parent(V; a)``; ``V`` itself if ``a`` is not incoming."""
        return self._parent_cache.get((V, a), V)

    def singleton(self, v: int) -> int:
        return self.index[frozenset((v,))]

    def describe(self, V: frozenset[int]) -> str:
        return "{" + ", ".join(sorted(self.base.payloads[v] for v in V)) + "}"


def simplify(M: EpisodeMachine) -> SimpleMachine:
    states: dict[frozenset[int], None] = {}
    edges = []
    stack = [frozenset((v,)) for v in range(len(M))]
    seen = set(stack)
    while stack:
        V = stack.pop()
        states[V] = None
        for a in sorted(inc(M, V)):
            W = parent_set(M, V, a)
            edges.append((W, V, a))
            if W not in seen:
                seen.add(W)
                stack.append(W)
    payloads = sorted(states, key=lambda V: (max(len(M.episodes[v]) for v in V), sorted(V)))
    idx = {V: i for i, V in enumerate(payloads)}
    guarded = [(idx[W], idx[V], EdgeGuard.label(a)) for W, V, a in edges]
    return SimpleMachine(M, payloads, guarded)


# ----------------------------------------------------------------- co-machine

ETA = ("eta",)


class CoMachine(LabeledMachine):
    def __init__(self, simple: SimpleMachine, payloads, edges):
        super().__init__(payloads, payloads.index(ETA), edges, kind="co")
        self.simple = simple

    def final(self, v: int) -> int:
        """State covered iff both one-shifted sub-windows cover episode state ``v``."""
        return self.index[("final", v)]

    def pair(self, V1: int, V2: int) -> int:
        return self.index[("pair", V1, V2)]

    def describe(self, payload) -> str:
        if payload == ETA:
            return "eta"
        S = self.simple
        if payload[0] == "final":
            return "final " + S.base.payloads[payload[1]]
        return "(" + S.describe(S.payloads[payload[1]]) + ", " + S.describe(S.payloads[payload[2]]) + ")"


def build_co_machine(M: EpisodeMachine, S: SimpleMachine, targets: Iterable[int] | None = None) -> CoMachine:
    """Co-coverage machine; final states for ``targets`` (default: every non-initial state of ``M``)."""
    if targets is None:
        targets = [v for v in range(len(M)) if v != M.initial]
    targets = sorted(set(targets) - {M.initial})
    I = S.initial
    pair_edges: list[tuple[Hashable, Hashable, EdgeGuard]] = []
    seen: set[tuple[int, int]] = set()
    stack: list[tuple[int, int]] = []

    def push(V1, V2):
        if (V1, V2) not in seen:
            seen.add((V1, V2))
            stack.append((V1, V2))

    for v in targets:
        Vs = S.singleton(v)
        for a in S.inc[Vs]:
            push(Vs, S.parent(Vs, a))
        push(Vs, Vs)
    while stack:
        V1, V2 = stack.pop()
        for a in sorted(S.inc[V1] | S.inc[V2]):
            W1, W2 = S.parent(V1, a), S.parent(V2, a)
            if W1 == I and V2 == I:
                src: Hashable = ETA
            else:
                src = ("pair", W1, W2)
                push(W1, W2)
            pair_edges.append((src, ("pair", V1, V2), EdgeGuard.label(a)))
    if (I, I) in seen:
        pair_edges.append((ETA, ("pair", I, I), EdgeGuard.any()))
    for v in targets:
        Vs = S.singleton(v)
        fin = ("final", v)
        for a in sorted(S.inc[Vs]):
            pair_edges.append((("pair", Vs, S.parent(Vs, a)), fin, EdgeGuard.label(a)))
        pair_edges.append((("pair", Vs, Vs), fin, EdgeGuard.complement(S.inc[Vs])))
    payloads: list[Hashable] = [ETA] + sorted(("pair",) + p for p in seen) + [("final", v) for v in targets]
    idx = {p: i for i, p in enumerate(payloads)}
    edges = [(idx[a], idx[b], g) for a, b, g in pair_edges]
    return CoMachine(S, payloads, edges)


# ------------------------------------------------------- reference semantics


def reachable_states(machine: LabeledMachine, s) -> set[int]:
    """States reachable by feeding some subsequence of ``s`` from the initial state."""
    reach = {machine.initial}
    for a in s:
        a = int(a)
        new = set()
        for w in reach:
            for v, g in machine.outgoing[w]:
                if g.matches(a) and v not in reach:
                    new.add(v)
        reach |= new
    return reach


def interpret_covers(machine: LabeledMachine, state: int, s) -> bool:
    """Nondeterministic reference interpreter: is ``state`` reachable via a subsequence of ``s``?"""
    return state in reachable_states(machine, s)


def build_machines(F: EpisodeFamily, targets: Iterable[Episode] | None = None):
    """Convenience: episode machine, simple machine and co-machine for ``F``."""
    M = build_episode_machine(F)
    S = simplify(M)
    tv = None if targets is None else [M.state(G.key) for G in targets]
    return M, S, build_co_machine(M, S, tv)

