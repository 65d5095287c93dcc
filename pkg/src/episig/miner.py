"""Level-wise discovery of serial and parallel candidate episodes.

The support of an episode is the size of the greedy set of non-overlapping
minimal windows (length <= K).  It is antimonotone, so an APriori search
with subpattern pruning finds every episode whose support exceeds ``N``.

Serial episodes are label chains and parallel episodes label multisets; for
both, deleting any single node gives an episode covered whenever the
original is, which is what the pruning step relies on.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .episodes import Episode, EpisodeFamily, _as_array, closure
from .winscan import summarize

CLASSES = ("serial", "parallel")


@dataclass(frozen=True)
class MinerConfig:
    min_windows: int  # keep episodes with strictly more non-overlapping windows
    max_window: int
    classes: tuple[str, ...] = CLASSES
    max_nodes: int = 4

    def __post_init__(self):
        if self.min_windows < 1 or self.max_window < 1 or self.max_nodes < 1:
            raise ValueError("min_windows, max_window and max_nodes must be >= 1")
        bad = set(self.classes) - set(CLASSES)
        if bad or not self.classes:
            raise ValueError(f"unknown episode classes {sorted(bad)}")


@dataclass
class MiningResult:
    family: EpisodeFamily  # closure of the frequent episodes
    counts: dict[str, int]  # non-overlap counts of the frequent episodes
    levels: list[list[Episode]] = field(default_factory=list)

    @property
    def frequent(self) -> list[Episode]:
        return [G for level in self.levels for G in level]


def _make(cls: str, labels: tuple[int, ...]) -> Episode:
    return Episode.serial(labels) if cls == "serial" else Episode.parallel(labels)


def generate_level(frequent: Iterable[tuple[int, ...]], cls: str) -> list[tuple[int, ...]]:
    """Candidates with one more node, given the frequent label tuples of one level.

    Serial tuples are chains in order; parallel tuples are sorted multisets.
    A candidate survives only if every single-node deletion is frequent.
    """
    freq = set(frequent)
    if not freq:
        return []
    k = len(next(iter(freq)))
    cands: set[tuple[int, ...]] = set()
    if cls == "serial":
        by_prefix: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for B in freq:
            by_prefix.setdefault(B[:-1], []).append(B)
        for A in freq:
            for B in by_prefix.get(A[1:], ()):
                cands.add(A + B[-1:])
    elif cls == "parallel":
        by_head: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for B in freq:
            by_head.setdefault(B[:-1], []).append(B)
        for A in freq:
            for B in by_head.get(A[:-1], ()):
                if A[-1] <= B[-1]:
                    cands.add(A + B[-1:])
    else:
        raise ValueError(f"unknown class {cls!r}")
    out = []
    for C in sorted(cands):
        subs = (C[:i] + C[i + 1 :] for i in range(k + 1))
        if all(sub in freq for sub in subs):
            out.append(C)
    return out


def nonoverlap_counts(s, episodes: list[Episode], K: int) -> dict[str, int]:
    if not episodes:
        return {}
    summ = summarize(s, episodes, K)
    return {G.key: summ.nonoverlap_count(G.key) for G in episodes}


def mine(s, cfg: MinerConfig) -> MiningResult:
    arr = _as_array(s)
    counts: dict[str, int] = {}
    levels: list[list[Episode]] = []
    symbols = sorted(set(np.unique(arr).tolist())) if arr.size else []
    singles = [Episode((a,)) for a in symbols]
    c1 = nonoverlap_counts(arr, singles, cfg.max_window)
    freq1 = [(a,) for a in symbols if c1[Episode((a,)).key] > cfg.min_windows]
    level_eps = [Episode(t) for t in freq1]
    for G in level_eps:
        counts[G.key] = c1[G.key]
    if level_eps:
        levels.append(level_eps)
    frontier = {cls: freq1 for cls in cfg.classes}
    size = 1
    while size < cfg.max_nodes and any(frontier.values()):
        size += 1
        cand: dict[str, tuple[str, tuple[int, ...], Episode]] = {}
        for cls in cfg.classes:
            for t in generate_level(frontier[cls], cls):
                G = _make(cls, t)
                cand[cls + ":" + G.key] = (cls, t, G)
        eps = [G for _, _, G in cand.values()]
        c = nonoverlap_counts(arr, eps, cfg.max_window)
        frontier = {cls: [] for cls in cfg.classes}
        new_level = []
        for cls, t, G in cand.values():
            if c[G.key] > cfg.min_windows:
                frontier[cls].append(t)
                if G.key not in counts:
                    counts[G.key] = c[G.key]
                    new_level.append(G)
        if new_level:
            levels.append(new_level)
    family = closure(G for level in levels for G in level)
    return MiningResult(family, counts, levels)
