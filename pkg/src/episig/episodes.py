"""Episodes, symbol sequences and brute-force reference semantics.

An episode is a DAG whose nodes carry symbol labels.  A sequence covers an
episode if the nodes can be mapped injectively onto positions with matching
labels such that every edge points forward in time.

Sequences are indexed from 1 in everything that talks about windows
(``WindowSpan``), matching the usual ``s[i, j]`` notation.  Internally the
symbols live in 0-based numpy arrays.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_CANONICAL_NODES = 8


class EpisodeFormatError(ValueError):
    """Raised for malformed episode files."""


# ---------------------------------------------------------------- symbols


@dataclass(frozen=True)
class Symbol:
    id: int
    token: str


class Alphabet:
    """Dense bidirectional mapping between tokens and integer ids."""

    def __init__(self, tokens: Iterable[str] = ()):
        self._tokens: list[str] = []
        self._ids: dict[str, int] = {}
        for tok in tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        if not token:
            raise ValueError("empty token")
        sid = self._ids.get(token)
        if sid is None:
            sid = len(self._tokens)
            self._tokens.append(token)
            self._ids[token] = sid
        return sid

    def id(self, token: str) -> int:
        return self._ids[token]

    def token(self, sid: int) -> str:
        return self._tokens[sid]

    def symbol(self, sid: int) -> Symbol:
        return Symbol(sid, self._tokens[sid])

    @property
    def tokens(self) -> list[str]:
        return list(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def __len__(self) -> int:
        return len(self._tokens)

    def __repr__(self) -> str:
        return f"Alphabet({self._tokens!r})"


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """A sequence of symbol ids plus the alphabet that names them."""

    items: np.ndarray
    alphabet: Alphabet

    def __post_init__(self):
        items = np.asarray(self.items, dtype=np.int64)
        if items.ndim != 1:
            raise ValueError("sequence must be one-dimensional")
        if items.size and (items.min() < 0 or items.max() >= len(self.alphabet)):
            raise ValueError("symbol id outside alphabet")
        object.__setattr__(self, "items", items)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], alphabet: Alphabet | None = None) -> "SymbolSequence":
        alphabet = Alphabet() if alphabet is None else alphabet
        items = [alphabet.add(t) for t in tokens]
        return cls(np.asarray(items, dtype=np.int64), alphabet)

    @classmethod
    def from_chars(cls, text: str, alphabet: Alphabet | None = None) -> "SymbolSequence":
        """One symbol per character; handy for toy examples such as ``"accbabacb"``."""
        return cls.from_tokens(list(text), alphabet)

    def __len__(self) -> int:
        return int(self.items.size)

    def __getitem__(self, i: int) -> int:
        """1-based symbol access."""
        if not 1 <= i <= len(self):
            raise IndexError(i)
        return int(self.items[i - 1])

    def window(self, i: int, j: int) -> np.ndarray:
        """Sub-window ``s[i, j]`` (1-based, inclusive)."""
        if not 1 <= i <= j <= len(self):
            raise IndexError((i, j))
        return self.items[i - 1 : j]

    def split(self, fraction: float = 0.5) -> tuple["SymbolSequence", "SymbolSequence"]:
        cut = int(np.floor(fraction * len(self)))
        return (
            SymbolSequence(self.items[:cut], self.alphabet),
            SymbolSequence(self.items[cut:], self.alphabet),
        )

    def tokens(self) -> list[str]:
        return [self.alphabet.token(int(x)) for x in self.items]


def _as_array(s) -> np.ndarray:
    if isinstance(s, SymbolSequence):
        return s.items
    return np.asarray(s, dtype=np.int64)


@dataclass(frozen=True, order=True)
class WindowSpan:
    start: int
    end: int

    def __post_init__(self):
        if not 1 <= self.start <= self.end:
            raise ValueError(f"bad span [{self.start}, {self.end}]")

    def __len__(self) -> int:
        return self.end - self.start + 1

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "WindowSpan") -> bool:
        return self.start <= other.end and other.start <= self.end

    def __repr__(self) -> str:
        return f"[{self.start},{self.end}]"


# ---------------------------------------------------------------- episodes


@dataclass(frozen=True)
class Episode:
    """Labelled DAG.  Node ``k`` carries symbol id ``labels[k]``."""

    labels: tuple[int, ...]
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        n = len(labels)
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) outside node range")
            if a == b:
                raise ValueError("self-loop")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "edges", edges)
        if self._topological_order() is None:
            raise ValueError("episode graph has a cycle")

    @classmethod
    def empty(cls) -> "Episode":
        return cls(())

    @classmethod
    def serial(cls, labels: Sequence[int]) -> "Episode":
        return cls(tuple(labels), frozenset((k, k + 1) for k in range(len(labels) - 1)))

    @classmethod
    def parallel(cls, labels: Sequence[int]) -> "Episode":
        return cls(tuple(labels))

    def __len__(self) -> int:
        return len(self.labels)

    def _topological_order(self) -> list[int] | None:
        n = len(self.labels)
        indeg = [0] * n
        out: list[list[int]] = [[] for _ in range(n)]
        for a, b in self.edges:
            indeg[b] += 1
            out[a].append(b)
        stack = [v for v in range(n) if indeg[v] == 0]
        order = []
        while stack:
            v = stack.pop()
            order.append(v)
            for w in out[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    stack.append(w)
        return order if len(order) == n else None

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        return tuple(self._topological_order())

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        preds: list[list[int]] = [[] for _ in self.labels]
        for a, b in self.edges:
            preds[b].append(a)
        return tuple(tuple(sorted(p)) for p in preds)

    @cached_property
    def key(self) -> str:
        return canonical_key(self)

    @property
    def is_serial(self) -> bool:
        n = len(self.labels)
        return self.edges == frozenset((k, k + 1) for k in range(n - 1))

    @property
    def is_parallel(self) -> bool:
        return not self.edges

    def describe(self, alphabet: Alphabet | None = None) -> str:
        return describe(self, alphabet)


def sinks(G: Episode) -> set[int]:
    has_out = {a for a, _ in G.edges}
    return {v for v in range(len(G.labels)) if v not in has_out}


def remove_sink(G: Episode, v: int) -> Episode:
    if v not in sinks(G):
        raise ValueError(f"node {v} is not a sink")
    remap = {old: new for new, old in enumerate(k for k in range(len(G.labels)) if k != v)}
    labels = tuple(lab for k, lab in enumerate(G.labels) if k != v)
    edges = frozenset((remap[a], remap[b]) for a, b in G.edges if b != v)
    return Episode(labels, edges)


def canonical_key(G: Episode, max_nodes: int = MAX_CANONICAL_NODES) -> str:
    """Isomorphism-invariant key for a labelled DAG.

    Nodes are ordered by label; every permutation inside a same-label group
    is tried and the lexicographically smallest edge list wins.
    """
    n = len(G.labels)
    if n > max_nodes:
        raise ValueError(f"episode has {n} nodes, canonical form capped at {max_nodes}")
    base = sorted(range(n), key=lambda k: G.labels[k])
    labels = ".".join(str(G.labels[k]) for k in base)
    if not G.edges:
        return labels + "|"
    groups = [list(g) for _, g in itertools.groupby(base, key=lambda k: G.labels[k])]
    best = None
    for perms in itertools.product(*(itertools.permutations(g) for g in groups)):
        pos = {}
        for node in itertools.chain.from_iterable(perms):
            pos[node] = len(pos)
        ser = sorted((pos[a], pos[b]) for a, b in G.edges)
        if best is None or ser < best:
            best = ser
    return labels + "|" + ",".join(f"{a}>{b}" for a, b in best)


class EpisodeFamily:
    """A set of episodes keyed by canonical key."""

    def __init__(self, episodes: Iterable[Episode] = ()):
        self._members: dict[str, Episode] = {}
        for G in episodes:
            self._members.setdefault(G.key, G)

    def add(self, G: Episode) -> bool:
        if G.key in self._members:
            return False
        self._members[G.key] = G
        return True

    def __contains__(self, G) -> bool:
        key = G.key if isinstance(G, Episode) else G
        return key in self._members

    def __getitem__(self, key: str) -> Episode:
        return self._members[key]

    def __iter__(self) -> Iterator[Episode]:
        return iter(self._members.values())

    def __len__(self) -> int:
        return len(self._members)

    def keys(self) -> set[str]:
        return set(self._members)

    def is_downward_closed(self) -> bool:
        if Episode.empty().key not in self._members:
            return False
        for G in self._members.values():
            for v in sinks(G):
                if remove_sink(G, v).key not in self._members:
                    return False
        return True


def closure(F: Iterable[Episode]) -> EpisodeFamily:
    family = EpisodeFamily([Episode.empty()])
    stack = list(F)
    while stack:
        G = stack.pop()
        if not family.add(G):
            continue
        for v in sinks(G):
            H = remove_sink(G, v)
            if H not in family:
                stack.append(H)
    return family


# ------------------------------------------------------- reference coverage


def covers(s, G: Episode) -> bool:
    """Injective, order-respecting embedding test (backtracking)."""
    arr = _as_array(s)
    n = len(G.labels)
    if n == 0:
        return True
    if n > arr.size:
        return False
    positions = {lab: np.flatnonzero(arr == lab).tolist() for lab in set(G.labels)}
    order = G.topological_order
    preds = G.predecessors
    assign = [-1] * n
    used: set[int] = set()

    def place(depth: int) -> bool:
        if depth == n:
            return True
        v = order[depth]
        lo = max((assign[u] for u in preds[v]), default=-1)
        for pos in positions[G.labels[v]]:
            if pos <= lo or pos in used:
                continue
            assign[v] = pos
            used.add(pos)
            if place(depth + 1):
                return True
            used.discard(pos)
        assign[v] = -1
        return False

    return place(0)


def brute_minimal_windows(s, G: Episode, K: int) -> list[WindowSpan]:
    """All minimal windows of length at most ``K``, by direct coverage checks.

    For each start ``i`` only the shortest covering window ``s[i, j]`` can be
    minimal; it is minimal iff ``s[i+1, j]`` does not cover ``G``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    arr = _as_array(s)
    L = arr.size
    out = []
    if not covers(arr, G):
        return out
    for i in range(L):
        if not covers(arr[i:], G):
            break
        lo, hi = i, L - 1  # smallest j with arr[i:j+1] covering
        while lo < hi:
            mid = (lo + hi) // 2
            if covers(arr[i : mid + 1], G):
                hi = mid
            else:
                lo = mid + 1
        j = lo
        if covers(arr[i + 1 : j + 1], G):
            continue
        if j - i + 1 <= K:
            out.append(WindowSpan(i + 1, j + 1))
    return out


# ------------------------------------------------------------ text format


def describe(G: Episode, alphabet: Alphabet | None = None) -> str:
    """Human-readable form: ``a -> b``, ``(a, b)``, ``(a, b -> a)``."""
    name = (lambda x: alphabet.token(x)) if alphabet is not None else str
    n = len(G.labels)
    if n == 0:
        return "()"
    if G.is_serial and n > 1:
        return " -> ".join(name(G.labels[k]) for k in range(n))
    # weakly connected components, each written as a chain when possible
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in G.edges:
        parent[find(a)] = find(b)
    comps: dict[int, list[int]] = {}
    for v in range(n):
        comps.setdefault(find(v), []).append(v)
    parts = []
    for nodes in comps.values():
        sub = [(a, b) for a, b in G.edges if a in nodes]
        order = [v for v in G.topological_order if v in nodes]
        chain = {(order[k], order[k + 1]) for k in range(len(order) - 1)}
        if set(sub) == chain:
            parts.append(" -> ".join(name(G.labels[v]) for v in order))
        else:
            idx = {v: k for k, v in enumerate(order)}
            body = " ".join(f"{idx[v]}:{name(G.labels[v])}" for v in order)
            arcs = " ".join(f"{idx[a]}>{idx[b]}" for a, b in sorted(sub, key=lambda e: (idx[e[0]], idx[e[1]])))
            parts.append("{" + body + " | " + arcs + "}")
    parts.sort()
    return "(" + ", ".join(parts) + ")"


def read_episodes(lines: Iterable[str], alphabet: Alphabet) -> list[tuple[str, Episode]]:
    """Parse the line-based episode format.

    ``episode <id>`` / ``node <k> <label>`` / ``edge <i> <j>`` / ``end``.
    Blank lines and ``#`` comments are ignored.  Unknown labels are added to
    ``alphabet``.
    """
    out = []
    current = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "episode":
            if current is not None or len(parts) != 2:
                raise EpisodeFormatError(f"line {lineno}: unexpected 'episode'")
            current = (parts[1], {}, [])
        elif head == "node":
            if current is None or len(parts) != 3:
                raise EpisodeFormatError(f"line {lineno}: bad node line")
            try:
                k = int(parts[1])
            except ValueError:
                raise EpisodeFormatError(f"line {lineno}: bad node index") from None
            if k in current[1]:
                raise EpisodeFormatError(f"line {lineno}: duplicate node {k}")
            current[1][k] = alphabet.add(parts[2])
        elif head == "edge":
            if current is None or len(parts) != 3:
                raise EpisodeFormatError(f"line {lineno}: bad edge line")
            try:
                e = (int(parts[1]), int(parts[2]))
            except ValueError:
                raise EpisodeFormatError(f"line {lineno}: bad edge indices") from None
            if e in current[2]:
                raise EpisodeFormatError(f"line {lineno}: duplicate edge {e}")
            current[2].append(e)
        elif head == "end":
            if current is None:
                raise EpisodeFormatError(f"line {lineno}: 'end' outside episode")
            ident, nodes, edges = current
            order = sorted(nodes)
            pos = {k: i for i, k in enumerate(order)}
            try:
                G = Episode(tuple(nodes[k] for k in order), frozenset((pos[a], pos[b]) for a, b in edges))
            except (KeyError, ValueError) as exc:
                raise EpisodeFormatError(f"episode {ident}: {exc}") from None
            out.append((ident, G))
            current = None
        else:
            raise EpisodeFormatError(f"line {lineno}: unknown directive {head!r}")
    if current is not None:
        raise EpisodeFormatError("missing 'end'")
    return out


def format_episode(ident: str, G: Episode, alphabet: Alphabet, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"episode {ident}")
    lines += [f"node {k} {alphabet.token(lab)}" for k, lab in enumerate(G.labels)]
    lines += [f"edge {a} {b}" for a, b in sorted(G.edges)]
    lines.append("end")
    return "\n".join(lines) + "\n"
