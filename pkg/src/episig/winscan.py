"""Single-pass discovery of minimal windows for a whole episode family.

For every episode ``X`` the scanner keeps ``ind(X)``, the start of the most
recent minimal window of ``X``.  When symbol ``s_i`` arrives, each episode
``Y`` with an incoming ``s_i``-edge from ``X`` takes ``max ind(X)``; if this
moves ``ind(Y)`` forward, ``[ind(Y), i]`` is a minimal window of ``Y``.
Targets are visited from the largest episodes down so that every parent
still holds its value from position ``i - 1``.

``scan`` is the readable reference and returns the windows themselves.
``summarize`` runs the same loop compiled with numba and only accumulates
per-episode statistics (counts, greedy selections, histograms, lag sums).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np

from .automata import build_episode_machine
from .episodes import Episode, EpisodeFamily, WindowSpan, _as_array, closure


class ScanPlan:
    """Edge lists of the episode machine grouped by label, in processing order."""

    def __init__(self, F: EpisodeFamily | Iterable[Episode]):
        if not isinstance(F, EpisodeFamily) or not F.is_downward_closed():
            F = closure(F)
        self.family = F
        M = build_episode_machine(F)
        self.machine = M
        self.keys = list(M.payloads)
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.initial = M.initial
        rank = {v: r for r, v in enumerate(M.order)}
        by_label: dict[int, dict[int, list[int]]] = {}
        for x, y, g in M.edges:
            (a,) = g.labels
            by_label.setdefault(a, {}).setdefault(y, []).append(x)
        self.by_label: dict[int, list[tuple[int, tuple[int, ...]]]] = {}
        for a, targets in by_label.items():
            order = sorted(targets, key=lambda y: -rank[y])
            self.by_label[a] = [(y, tuple(sorted(targets[y]))) for y in order]
        # flat arrays for the compiled kernel
        n_labels = max(by_label, default=-1) + 1
        lab_ptr = [0]
        tgt, src_ptr, srcs = [], [0], []
        for a in range(n_labels):
            for y, xs in self.by_label.get(a, ()):
                tgt.append(y)
                srcs.extend(xs)
                src_ptr.append(len(srcs))
            lab_ptr.append(len(tgt))
        self.lab_ptr = np.asarray(lab_ptr, dtype=np.int64)
        self.tgt = np.asarray(tgt, dtype=np.int64)
        self.src_ptr = np.asarray(src_ptr, dtype=np.int64)
        self.srcs = np.asarray(srcs, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.keys)


def scan(s, F: EpisodeFamily | Iterable[Episode] | ScanPlan, K: int) -> dict[str, list[WindowSpan]]:
    """All minimal windows of length at most ``K`` for every episode of ``F``.

    Returns a mapping from canonical key to the windows ordered by start.
    The empty episode is included with no windows.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    plan = F if isinstance(F, ScanPlan) else ScanPlan(F)
    arr = _as_array(s)
    ind = [0] * len(plan)
    found: list[list[WindowSpan]] = [[] for _ in range(len(plan))]
    init = plan.initial
    by_label = plan.by_label
    for i, a in enumerate(arr.tolist(), 1):
        ind[init] = i
        for y, xs in by_label.get(a, ()):
            best = max(ind[x] for x in xs)
            if best > ind[y]:
                ind[y] = best
                if i - best + 1 <= K:
                    found[y].append(WindowSpan(best, i))
    return {plan.keys[v]: found[v] for v in range(len(plan))}


def greedy_nonoverlap(windows: Sequence[WindowSpan]) -> list[WindowSpan]:
    """Keep the first window, drop everything overlapping it, repeat."""
    out: list[WindowSpan] = []
    last_end = 0
    prev_start = 0
    for w in windows:
        if w.start < prev_start:
            raise ValueError("windows must be ordered by start")
        prev_start = w.start
        if w.start > last_end:
            out.append(w)
            last_end = w.end
    return out


@dataclass(frozen=True)
class WindowStats:
    count: int
    total: int

    @property
    def mean(self) -> float | None:
        """Average window length; ``None`` when there are no windows."""
        return self.total / self.count if self.count else None


def stats(windows: Iterable[WindowSpan]) -> WindowStats:
    n = 0
    total = 0
    for w in windows:
        n += 1
        total += w.length
    return WindowStats(n, total)


# ------------------------------------------------------------- compiled path


@numba.njit(cache=True)
def _summary_kernel(seq, init, n_states, lab_ptr, tgt, src_ptr, srcs, K, lags):
    n_labels = lab_ptr.size - 1
    ind = np.zeros(n_states, dtype=np.int64)
    count = np.zeros(n_states, dtype=np.int64)
    total = np.zeros(n_states, dtype=np.int64)
    greedy = np.zeros(n_states, dtype=np.int64)
    last_sel = np.zeros(n_states, dtype=np.int64)
    hist = np.zeros((n_states, K + 1), dtype=np.int64)
    nb = K if lags else 1
    buf_start = np.zeros((n_states, nb), dtype=np.int64)
    buf_len = np.zeros((n_states, nb), dtype=np.int64)
    buf_head = np.zeros(n_states, dtype=np.int64)
    sxx = np.zeros((n_states, nb), dtype=np.int64)
    syy = np.zeros((n_states, nb), dtype=np.int64)
    sxy = np.zeros((n_states, nb), dtype=np.int64)
    syx = np.zeros((n_states, nb), dtype=np.int64)
    for pos in range(seq.size):
        i = pos + 1
        a = seq[pos]
        ind[init] = i
        if a < 0 or a >= n_labels:
            continue
        for t in range(lab_ptr[a], lab_ptr[a + 1]):
            y = tgt[t]
            best = 0
            for r in range(src_ptr[t], src_ptr[t + 1]):
                v = ind[srcs[r]]
                if v > best:
                    best = v
            if best > ind[y]:
                ind[y] = best
                length = i - best + 1
                if length <= K:
                    count[y] += 1
                    total[y] += length
                    hist[y, length] += 1
                    if best > last_sel[y]:
                        greedy[y] += 1
                        last_sel[y] = i
                    if lags:
                        for b in range(nb):
                            st = buf_start[y, b]
                            if st > 0:
                                lag = best - st
                                if lag < K:
                                    yl = buf_len[y, b]
                                    sxx[y, lag] += 1
                                    syy[y, lag] += yl * length
                                    sxy[y, lag] += length
                                    syx[y, lag] += yl
                        h = buf_head[y]
                        buf_start[y, h] = best
                        buf_len[y, h] = length
                        buf_head[y] = (h + 1) % nb
    return count, total, greedy, hist, sxx, syy, sxy, syx


@dataclass
class FamilySummary:
    """Per-episode window statistics from one pass over a sequence.

    Lag arrays are indexed by lag ``j`` (column 0 unused) and hold sums over
    pairs of minimal windows starting ``j`` positions apart: ``sxx`` counts
    pairs, ``syy`` sums products of lengths, ``sxy`` sums the later window's
    length and ``syx`` the earlier one's.
    """

    keys: list[str]
    index: dict[str, int]
    length: int
    K: int
    count: np.ndarray
    total: np.ndarray
    greedy: np.ndarray
    hist: np.ndarray
    sxx: np.ndarray | None = None
    syy: np.ndarray | None = None
    sxy: np.ndarray | None = None
    syx: np.ndarray | None = None

    def stats(self, key: str) -> WindowStats:
        v = self.index[key]
        return WindowStats(int(self.count[v]), int(self.total[v]))

    def nonoverlap_count(self, key: str) -> int:
        return int(self.greedy[self.index[key]])

    def histogram(self, key: str) -> np.ndarray:
        """Observed counts of window lengths ``0..K`` (index 0 is always 0)."""
        return self.hist[self.index[key]]


def summarize(s, F: EpisodeFamily | Iterable[Episode] | ScanPlan, K: int, lags: bool = False) -> FamilySummary:
    if K < 1:
        raise ValueError("K must be >= 1")
    plan = F if isinstance(F, ScanPlan) else ScanPlan(F)
    arr = np.ascontiguousarray(_as_array(s), dtype=np.int64)
    res = _summary_kernel(arr, plan.initial, len(plan), plan.lab_ptr, plan.tgt, plan.src_ptr, plan.srcs, K, lags)
    count, total, greedy, hist, sxx, syy, sxy, syx = res
    out = FamilySummary(plan.keys, plan.index, int(arr.size), K, count, total, greedy, hist)
    if lags:
        out.sxx, out.syy, out.sxy, out.syx = sxx, syy, sxy, syx
    return out
