"""Exact minimal-window length distributions under the independence model.

Every probability here is an exact rational.  Internally the dynamic
programs work on integers: with all symbol probabilities written over a
common denominator ``D``, the probability of any event on sequences of
length ``k`` is an integer multiple of ``D**-k``.  Tables therefore store
``P * D**k`` and only the public accessors build ``Fraction`` objects.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .automata import (
    CoMachine,
    EdgeGuard,
    LabeledMachine,
    MachineError,
    SimpleMachine,
    build_co_machine,
    build_episode_machine,
    simplify,
)
from .episodes import Alphabet, Episode, EpisodeFamily, closure

log = logging.getLogger(__name__)


class ModelError(ValueError):
    """Invalid symbol model (e.g. probabilities not summing to one)."""


class UnreachableEpisode(ValueError):
    """The episode has zero probability of a minimal window up to ``K``."""


class InconsistentDistribution(RuntimeError):
    """A joint probability came out negative; the machines are inconsistent."""


# --------------------------------------------------------------------- model


@dataclass(frozen=True)
class SymbolModel:
    """Independent symbol probabilities, indexed by symbol id."""

    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probs)
        if any(p < 0 or p > 1 for p in probs):
            raise ModelError("probability outside [0, 1]")
        if sum(probs) != 1:
            raise ModelError(f"probabilities sum to {sum(probs)}, not 1")
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return len(self.probs)

    def p(self, a: int) -> Fraction:
        return self.probs[a] if 0 <= a < len(self.probs) else Fraction(0)

    @property
    def denominator(self) -> int:
        return math.lcm(*(p.denominator for p in self.probs))

    def weights(self) -> tuple[int, list[int]]:
        """Common denominator ``D`` and integer weights with ``p(a) = w[a] / D``."""
        D = self.denominator
        return D, [p.numerator * (D // p.denominator) for p in self.probs]

    def floats(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])


def estimate_model(train, alphabet_size: int | None = None) -> SymbolModel:
    """Relative frequencies of the training sequence as exact rationals.

    Symbols of the alphabet that never occur get probability 0.
    """
    arr = np.asarray(getattr(train, "items", train), dtype=np.int64)
    if arr.size == 0:
        raise ModelError("cannot estimate a model from an empty sequence")
    if alphabet_size is None:
        alphabet_size = len(train.alphabet) if hasattr(train, "alphabet") else int(arr.max()) + 1
    counts = np.bincount(arr, minlength=alphabet_size)
    L = int(arr.size)
    return SymbolModel(tuple(Fraction(int(c), L) for c in counts))


def guard_mass(model: SymbolModel, g: EdgeGuard) -> Fraction:
    if g.kind == "any":
        return Fraction(1)
    inside = sum((model.p(a) for a in g.labels), Fraction(0))
    return 1 - inside if g.kind == "complement" else inside


def _guard_weight(g: EdgeGuard, D: int, w: Sequence[int]) -> int:
    if g.kind == "any":
        return D
    inside = sum(w[a] for a in g.labels if 0 <= a < len(w))
    return D - inside if g.kind == "complement" else inside


# --------------------------------------------------------------- cover table


class CoverTable:
    """``P(cover(k; v))`` for every state ``v`` and ``k = 0..K``."""

    def __init__(self, machine: LabeledMachine, D: int, K: int, scaled: list[list[int]]):
        self.machine = machine
        self.D = D
        self.K = K
        self.scaled = scaled  # scaled[v][k] == P(cover(k; v)) * D**k

    def value(self, v: int, k: int) -> Fraction:
        return Fraction(self.scaled[v][k], self.D**k)

    def row(self, v: int) -> list[Fraction]:
        return [self.value(v, k) for k in range(self.K + 1)]


def cover_table(machine: LabeledMachine, model: SymbolModel, K: int) -> CoverTable:
    """Coverage probabilities of a simple, monotonic machine.

    ``P(cover(k; v)) = P(cover(k-1; v)) + sum_e p(e) (P(cover(k-1; w)) - P(cover(k-1; v)))``
    over incoming edges ``e = (w, v)``, with the initial state always covered.
    """
    if not machine.is_simple():
        raise MachineError("coverage recursion needs a simple machine")
    D, w = model.weights()
    n = len(machine)
    scaled: list[list[int]] = [None] * n  # type: ignore[list-item]
    init_row = [D**k for k in range(K + 1)]
    for v in machine.order:
        if v == machine.initial:
            scaled[v] = init_row
            continue
        inc = [(scaled[u], _guard_weight(g, D, w)) for u, g in machine.incoming[v]]
        row = [0] * (K + 1)
        prev = 0
        for k in range(1, K + 1):
            acc = D * prev
            for urow, wt in inc:
                if wt:
                    acc += wt * (urow[k - 1] - prev)
            row[k] = acc
            prev = acc
        scaled[v] = row
    return CoverTable(machine, D, K, scaled)


# ------------------------------------------------- joint from coverage


def _check_nonnegative(scaled: list[int]) -> None:
    for k, x in enumerate(scaled, 1):
        if x < 0:
            raise InconsistentDistribution(f"negative minimal-window probability at length {k}")


def minwin_joint_scaled(cov_s: CoverTable, cov_co: CoverTable, v: int) -> list[int]:
    """``P(mw, |s| = k) * D**k`` for ``k = 1..K``; ``v`` is a state of the episode machine."""
    S: SimpleMachine = cov_s.machine  # type: ignore[assignment]
    co: CoMachine = cov_co.machine  # type: ignore[assignment]
    D = cov_s.D
    srow = cov_s.scaled[S.singleton(v)]
    crow = cov_co.scaled[co.final(v)]
    out = [srow[k] - 2 * D * srow[k - 1] + crow[k] for k in range(1, cov_s.K + 1)]
    _check_nonnegative(out)
    return out


def minwin_joint(cov_s: CoverTable, cov_co: CoverTable, G: Episode | int, K: int | None = None) -> list[Fraction]:
    """Joint probabilities ``P(s is a minimal window of G, |s| = k)``, ``k = 1..K``.

    Uses ``P(cover(s)) - P(cover(t)) - P(cover(u)) + P(cover(t), cover(u))``
    with ``t = s[1, k-1]`` and ``u = s[2, k]``; the last term is the coverage
    of the co-machine final state.
    """
    S: SimpleMachine = cov_s.machine  # type: ignore[assignment]
    v = S.base.state(G.key) if isinstance(G, Episode) else G
    K = cov_s.K if K is None else K
    scaled = minwin_joint_scaled(cov_s, cov_co, v)[:K]
    D = cov_s.D
    return [Fraction(x, D**k) for k, x in enumerate(scaled, 1)]


# -------------------------------------------------- independent recursion


class _DirectRecursion:
    """Coverage by appending symbols one at a time.

    With ``parent(V; a)`` taken as ``V`` for labels not entering ``V``,
    ``s + a`` covers ``V`` iff ``s`` covers ``parent(V; a)``.  The same rule
    applied to a pair of states gives the probability that ``s`` covers ``V1``
    while ``s[2, L]`` covers ``V2``.  Nothing here touches the co-machine or
    the difference recursion of ``cover_table``.
    """

    def __init__(self, S: SimpleMachine, model: SymbolModel):
        self.S = S
        self.D, self.w = model.weights()
        self._c: dict[tuple[int, int], int] = {}
        self._d: dict[tuple[int, int, int], int] = {}

    def _moves(self, states: Iterable[int]):
        labels = set()
        for V in states:
            labels |= self.S.inc[V]
        rest = self.D - sum(self.w[a] for a in labels if a < len(self.w))
        return [(a, self.w[a] if a < len(self.w) else 0) for a in sorted(labels)], rest

    def c(self, k: int, V: int) -> int:
        """``P(cover(k; V)) * D**k``."""
        if k == 0:
            return 1 if V == self.S.initial else 0
        key = (k, V)
        hit = self._c.get(key)
        if hit is not None:
            return hit
        moves, rest = self._moves((V,))
        val = rest * self.c(k - 1, V)
        for a, wa in moves:
            if wa:
                val += wa * self.c(k - 1, self.S.parent(V, a))
        self._c[key] = val
        return val

    def d(self, k: int, V1: int, V2: int) -> int:
        """``P(s covers V1 and s[2, k] covers V2) * D**k`` for ``k >= 1``."""
        if k == 1:
            return self.c(1, V1) if V2 == self.S.initial else 0
        key = (k, V1, V2)
        hit = self._d.get(key)
        if hit is not None:
            return hit
        moves, rest = self._moves((V1, V2))
        val = rest * self.d(k - 1, V1, V2)
        for a, wa in moves:
            if wa:
                val += wa * self.d(k - 1, self.S.parent(V1, a), self.S.parent(V2, a))
        self._d[key] = val
        return val

    def r(self, k: int, V: int) -> int:
        """``P(s covers V but s[2, k] does not) * D**k``; the empty sequence counts for the initial state."""
        if k == 0:
            return 1 if V == self.S.initial else 0
        return self.c(k, V) - self.D * self.c(k - 1, V)

    def mw(self, k: int, V: int) -> int:
        """``P(s is a minimal window of V, |s| = k) * D**k``.

        ``s = t + a`` is minimal iff, for the unique ``a``-edge ``(W, V)``,
        ``t`` covers ``W``, ``t[2, k-1]`` does not, and ``t`` does not cover
        ``V``.  Since covering ``V`` implies covering ``W``, that event has
        probability ``r(t; W) - P(cover(t; V)) + P(cover(t; V), cover(t[2:]; W))``.
        """
        if V == self.S.initial:
            return 0
        I = self.S.initial
        total = 0
        for a in self.S.inc[V]:
            wa = self.w[a] if a < len(self.w) else 0
            if not wa:
                continue
            W = self.S.parent(V, a)
            if k == 1:
                total += wa * (1 if W == I else 0)
            else:
                total += wa * (self.r(k - 1, W) - self.c(k - 1, V) + self.d(k - 1, V, W))
        return total

    def n(self, k: int, V: int) -> int:
        """``P(some prefix of s is a minimal window of V) * D**k`` for ``|s| = k``."""
        return sum(self.mw(i, V) * self.D ** (k - i) for i in range(1, k + 1))


def minwin_joint_direct(S: SimpleMachine, model: SymbolModel, K: int, G: Episode | int) -> list[Fraction]:
    """Same joint probabilities as ``minwin_joint``, by an independent recursion."""
    v = S.base.state(G.key) if isinstance(G, Episode) else G
    rec = _DirectRecursion(S, model)
    V = S.singleton(v)
    scaled = [rec.mw(k, V) for k in range(1, K + 1)]
    _check_nonnegative(scaled)
    return [Fraction(x, rec.D**k) for k, x in enumerate(scaled, 1)]


# -------------------------------------------------------------- distribution


@dataclass(frozen=True)
class WindowDistribution:
    """Truncated joint probabilities, their mass, and the normalized distribution."""

    joint: tuple[Fraction, ...]  # joint[k - 1] for k = 1..K

    @property
    def K(self) -> int:
        return len(self.joint)

    @cached_property
    def mass(self) -> Fraction:
        den = math.lcm(*(j.denominator for j in self.joint))
        return Fraction(sum(j.numerator * (den // j.denominator) for j in self.joint), den)

    @cached_property
    def normalized(self) -> tuple[Fraction, ...]:
        p = self.mass
        return tuple(j / p for j in self.joint)

    def pmf(self, k: int) -> Fraction:
        if not 1 <= k <= self.K:
            return Fraction(0)
        return self.joint[k - 1] / self.mass

    @property
    def support(self) -> list[int]:
        return [k for k, j in enumerate(self.joint, 1) if j]


def normalize(joint: Sequence[Fraction]) -> WindowDistribution:
    joint = tuple(Fraction(j) for j in joint)
    if any(j < 0 for j in joint):
        raise InconsistentDistribution("negative joint probability")
    if sum(joint) == 0:
        raise UnreachableEpisode("episode has no minimal window of length <= K under the model")
    return WindowDistribution(joint)


@dataclass(frozen=True)
class Moments:
    p: Fraction  # E[X]: probability that a minimal window starts at a position
    q: Fraction  # E[Y]: expected length contribution per position
    m: Fraction  # q / p: expected minimal-window length
    ey2: Fraction  # E[Y^2]

    def __iter__(self):
        return iter((self.p, self.q, self.m, self.ey2))


def moments(dist: WindowDistribution) -> Moments:
    den = math.lcm(*(j.denominator for j in dist.joint))
    nums = [j.numerator * (den // j.denominator) for j in dist.joint]
    p = sum(nums)
    if p == 0:
        raise UnreachableEpisode("zero mass")
    q = sum(k * x for k, x in enumerate(nums, 1))
    e2 = sum(k * k * x for k, x in enumerate(nums, 1))
    return Moments(Fraction(p, den), Fraction(q, den), Fraction(q, p), Fraction(e2, den))


# ---------------------------------------------------------------- batch API


@dataclass
class ModelComputation:
    """Distributions for a batch of episodes plus the sizes of the machines used."""

    distributions: dict[str, WindowDistribution]
    unreachable: set[str]
    episode_states: int
    simple_states: int
    co_states: int


def compute_distributions(
    episodes: Iterable[Episode],
    model: SymbolModel,
    K: int,
    method: str = "machine",
) -> ModelComputation:
    """Window distributions for every episode in ``episodes``.

    ``method="machine"`` runs the co-machine pipeline; ``"direct"`` uses the
    append recursion, which avoids building the co-machine.
    """
    targets = [G for G in episodes if len(G)]
    F: EpisodeFamily = closure(targets)
    M = build_episode_machine(F)
    S = simplify(M)
    vs = [M.state(G.key) for G in targets]
    dists: dict[str, WindowDistribution] = {}
    unreachable: set[str] = set()
    if method == "machine":
        co = build_co_machine(M, S, vs)
        cs = cover_table(S, model, K)
        cc = cover_table(co, model, K)
        D = cs.D
        joints = {G.key: [Fraction(x, D**k) for k, x in enumerate(minwin_joint_scaled(cs, cc, v), 1)] for G, v in zip(targets, vs)}
        co_size = len(co)
    elif method == "direct":
        rec = _DirectRecursion(S, model)
        joints = {}
        for G, v in zip(targets, vs):
            scaled = [rec.mw(k, S.singleton(v)) for k in range(1, K + 1)]
            _check_nonnegative(scaled)
            joints[G.key] = [Fraction(x, rec.D**k) for k, x in enumerate(scaled, 1)]
        co_size = 0
    else:
        raise ValueError(f"unknown method {method!r}")
    for key, joint in joints.items():
        try:
            dists[key] = normalize(joint)
        except UnreachableEpisode:
            log.warning("episode %s unreachable under the model; skipped", key)
            unreachable.add(key)
    return ModelComputation(dists, unreachable, len(M), len(S), co_size)


# ---------------------------------------------------------------------- I/O


def read_model(lines: Iterable[str], alphabet: Alphabet) -> SymbolModel:
    """Parse ``symbol<TAB>numerator<TAB>denominator`` lines.

    Symbols missing from the file get probability 0; unknown symbols are added
    to the alphabet.  The probabilities must sum to exactly 1.
    """
    probs: dict[int, Fraction] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ModelError(f"line {lineno}: expected 3 tab-separated fields")
        try:
            num, den = int(parts[1]), int(parts[2])
            value = Fraction(num, den)
        except (ValueError, ZeroDivisionError):
            raise ModelError(f"line {lineno}: bad rational") from None
        sid = alphabet.add(parts[0])
        if sid in probs:
            raise ModelError(f"line {lineno}: duplicate symbol {parts[0]!r}")
        probs[sid] = value
    return SymbolModel(tuple(probs.get(i, Fraction(0)) for i in range(len(alphabet))))


def format_model(model: SymbolModel, alphabet: Alphabet) -> str:
    return "".join(
        f"{alphabet.token(i)}\t{p.numerator}\t{p.denominator}\n" for i, p in enumerate(model.probs)
    )


def format_distribution(ident: str, dist: WindowDistribution) -> str:
    """Rows ``episode_id<TAB>k<TAB>rational<TAB>decimal`` of the normalized distribution."""
    rows = []
    for k, pk in enumerate(dist.normalized, 1):
        rows.append(f"{ident}\t{k}\t{pk.numerator}/{pk.denominator}\t{float(pk):.6g}\n")
    return "".join(rows)
