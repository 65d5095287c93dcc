import itertools
from fractions import Fraction

import pytest

from episig.episodes import Episode, covers


def all_episodes(n_symbols: int, max_nodes: int) -> list[Episode]:
    """Every labelled DAG up to isomorphism with at most ``max_nodes`` nodes."""
    seen = {}
    for n in range(1, max_nodes + 1):
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for labels in itertools.product(range(n_symbols), repeat=n):
            for mask in range(1 << len(pairs)):
                edges = frozenset(p for b, p in enumerate(pairs) if mask >> b & 1)
                G = Episode(labels, edges)
                seen.setdefault(G.key, G)
    return list(seen.values())


def is_minimal_window(s, G) -> bool:
    return covers(s, G) and not covers(s[1:], G) and not covers(s[:-1], G)


def enumerate_joint(G: Episode, probs, K: int) -> list[Fraction]:
    """P(s[1..k] is a minimal window of G) by summing over all of Sigma^k."""
    out = []
    for k in range(1, K + 1):
        total = Fraction(0)
        for s in itertools.product(range(len(probs)), repeat=k):
            if is_minimal_window(s, G):
                w = Fraction(1)
                for a in s:
                    w *= probs[a]
                total += w
        out.append(total)
    return out


@pytest.fixture
def toy_model():
    from episig.probmodel import SymbolModel

    return SymbolModel((Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
