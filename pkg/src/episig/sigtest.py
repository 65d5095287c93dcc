"""Z-test on the average minimal-window length.

Let ``X_i`` indicate that a minimal window (length <= K) starts at ``i`` and
``Y_i`` be its length (0 otherwise).  The observed average length is
``sum Y / sum X``.  Pairs ``(X_i, Y_i)`` further than ``K`` apart are
independent, so ``sqrt(L) * (mean Y, mean X)`` is asymptotically normal with
covariance ``C``; the delta method applied to ``y / x`` gives

    sigma^2 = (C_YY - 2 m C_XY + m^2 C_XX) / p^2

with ``p = E[X]``, ``q = E[Y]`` and ``m = q / p``.  Lag-0 terms of ``C`` are
exact; the lag 1..K-1 terms are estimated from a simulated sequence.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .datagen import sample_model
from .episodes import Episode, _as_array
from .probmodel import Moments, SymbolModel, WindowDistribution, compute_distributions, moments
from .winscan import WindowStats, summarize

log = logging.getLogger(__name__)

TESTED = "tested"
SKIPPED_FEW = "skipped-few-windows"
SKIPPED_ZERO_VAR = "skipped-zero-variance"
SKIPPED_UNREACHABLE = "skipped-unreachable"


@dataclass(frozen=True)
class LagCovariances:
    """Covariance sums over lags ``1..K-1`` plus the exact lag-0 terms."""

    c_yy: float
    c_xx: float
    c_xy: float  # sum_j Cov(X_1, Y_{1+j})
    c_yx: float  # sum_j Cov(Y_1, X_{1+j})
    var_y: float
    var_x: float
    cov_xy: float

    @property
    def C_YY(self) -> float:
        return self.var_y + 2.0 * self.c_yy

    @property
    def C_XX(self) -> float:
        return self.var_x + 2.0 * self.c_xx

    @property
    def C_XY(self) -> float:
        return self.cov_xy + self.c_xy + self.c_yx


def lag0_terms(mo: Moments) -> tuple[float, float, float]:
    """Exact ``Var(Y)``, ``Var(X)``, ``Cov(X, Y)`` for a single position."""
    p, q, _, ey2 = mo
    return float(ey2 - q * q), float(p - p * p), float(q - p * q)


def simulate_lag_terms(
    model: SymbolModel,
    episodes: Iterable[Episode],
    K: int,
    sim_length: int,
    seed: int | None,
    moments_by_key: dict[str, Moments],
) -> dict[str, LagCovariances]:
    """Estimate the lag covariance sums from one sequence sampled from ``model``."""
    if sim_length < 10 * K:
        raise ValueError("sim_length must be at least 10 * K")
    episodes = list(episodes)
    if not episodes:
        return {}
    seq = sample_model(model, sim_length, seed)
    summ = summarize(seq, episodes, K, lags=True)
    L = sim_length
    lags = np.arange(1, K)
    pairs = (L - lags).astype(float)
    out = {}
    for G in episodes:
        mo = moments_by_key[G.key]
        p, q = float(mo.p), float(mo.q)
        v = summ.index[G.key]
        exx = summ.sxx[v, 1:K] / pairs
        eyy = summ.syy[v, 1:K] / pairs
        exy = summ.sxy[v, 1:K] / pairs
        eyx = summ.syx[v, 1:K] / pairs
        var_y, var_x, cov_xy = lag0_terms(mo)
        out[G.key] = LagCovariances(
            c_yy=float(np.sum(eyy - q * q)),
            c_xx=float(np.sum(exx - p * p)),
            c_xy=float(np.sum(exy - p * q)),
            c_yx=float(np.sum(eyx - p * q)),
            var_y=var_y,
            var_x=var_x,
            cov_xy=cov_xy,
        )
    return out


def sigma2(mo: Moments, C: LagCovariances) -> float:
    """Asymptotic variance of ``sqrt(L) * (observed mean length)``; may be <= 0 from noise."""
    p = float(mo.p)
    if p <= 0:
        raise ValueError("p must be positive")
    m = float(mo.m)
    return (C.C_YY - 2.0 * m * C.C_XY + m * m * C.C_XX) / (p * p)


def z_statistic(obs: WindowStats, m: float, sigma: float, test_length: int, form: str = "ratio") -> float:
    """``sqrt(L) * (W / n - m) / sigma``; ``form="literal"`` gives ``(W - L m) / (sqrt(L) sigma)``."""
    if obs.count <= 0:
        raise ValueError("no windows")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    m = float(m)
    if form == "ratio":
        return math.sqrt(test_length) * (obs.total / obs.count - m) / sigma
    if form == "literal":
        return (obs.total - test_length * m) / (math.sqrt(test_length) * sigma)
    raise ValueError(f"unknown z form {form!r}")


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF through the complementary error function (stays accurate in both tails)."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def p_values(z: float) -> tuple[float, float]:
    """One-sided (lower tail, i.e. windows too short) and two-sided P-values."""
    return std_normal_cdf(z), min(1.0, 2.0 * std_normal_cdf(-abs(z)))


def bh_adjust(pvals: Sequence[float]) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted P-values, in input order.

    The step-up runs on exact rationals and is rounded once at the end, so
    ``adjusted >= raw`` and monotonicity hold without floating point slack.
    """
    p = np.asarray(pvals, dtype=float)
    if p.size == 0:
        return p.copy()
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("P-values must lie in [0, 1]")
    n = p.size
    order = np.argsort(p, kind="stable")
    out = np.empty(n)
    running = Fraction(1)
    for rank in range(n, 0, -1):
        idx = order[rank - 1]
        running = min(running, Fraction(float(p[idx])) * n / rank)
        out[idx] = float(running)
    return out


# ------------------------------------------------------------------- driver


@dataclass
class EpisodeTestResult:
    ident: str
    episode: Episode
    status: str
    n_windows: int = 0
    sum_len: int = 0
    avg_len: float | None = None
    m: float | None = None
    sigma: float | None = None
    z: float | None = None
    p_one: float | None = None
    p_two: float | None = None
    q_one: float | None = None
    q_two: float | None = None
    histogram: np.ndarray | None = field(default=None, repr=False)


@dataclass
class SignificanceRun:
    results: list[EpisodeTestResult]
    distributions: dict[str, WindowDistribution]
    simple_states: int
    co_states: int
    episode_states: int


def evaluate_episodes(
    episodes: Sequence[tuple[str, Episode]],
    model: SymbolModel,
    test_seq,
    K: int,
    min_windows: int = 0,
    sim_length: int = 1_000_000,
    seed: int | None = 0,
    adjust: str = "bh",
    z_form: str = "ratio",
    method: str = "machine",
) -> SignificanceRun:
    """Compute z and P-values for each episode against the test sequence.

    Episodes are skipped (with a status) when unreachable under the model,
    when their minimal-window length is deterministic, or when the test
    sequence has ``min_windows`` or fewer windows for them.
    """
    episodes = [(i, G) for i, G in episodes if len(G)]
    comp = compute_distributions([G for _, G in episodes], model, K, method=method)
    arr = _as_array(test_seq)
    L_t = int(arr.size)
    obs = summarize(arr, [G for _, G in episodes], K)
    results: list[EpisodeTestResult] = []
    pending: list[EpisodeTestResult] = []
    mo_by_key: dict[str, Moments] = {}
    for ident, G in episodes:
        st = obs.stats(G.key)
        r = EpisodeTestResult(ident, G, TESTED, st.count, st.total, st.mean, histogram=obs.histogram(G.key).copy())
        results.append(r)
        if G.key in comp.unreachable:
            r.status = SKIPPED_UNREACHABLE
            continue
        dist = comp.distributions[G.key]
        mo = moments(dist)
        mo_by_key[G.key] = mo
        r.m = float(mo.m)
        if len(dist.support) == 1:
            r.status = SKIPPED_ZERO_VAR
            r.sigma = 0.0
            continue
        if st.count <= min_windows or st.count == 0:
            r.status = SKIPPED_FEW
            continue
        pending.append(r)
    uniq = {r.episode.key: r.episode for r in pending}
    lagc = simulate_lag_terms(model, uniq.values(), K, sim_length, seed, mo_by_key)
    for r in pending:
        s2 = sigma2(mo_by_key[r.episode.key], lagc[r.episode.key])
        if not s2 > 0:
            log.warning("episode %s: non-positive variance estimate %g", r.ident, s2)
            r.status = SKIPPED_ZERO_VAR
            r.sigma = 0.0
            continue
        r.sigma = math.sqrt(s2)
        r.z = z_statistic(WindowStats(r.n_windows, r.sum_len), r.m, r.sigma, L_t, z_form)
        r.p_one, r.p_two = p_values(r.z)
    tested = [r for r in results if r.status == TESTED]
    if adjust == "bh":
        q1 = bh_adjust([r.p_one for r in tested])
        q2 = bh_adjust([r.p_two for r in tested])
    elif adjust == "none":
        q1 = [r.p_one for r in tested]
        q2 = [r.p_two for r in tested]
    else:
        raise ValueError(f"unknown adjustment {adjust!r}")
    for r, a, b in zip(tested, q1, q2):
        r.q_one, r.q_two = float(a), float(b)
    return SignificanceRun(results, comp.distributions, comp.simple_states, comp.co_states, comp.episode_states)
