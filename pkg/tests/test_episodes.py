import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from episig.episodes import (
    Alphabet,
    Episode,
    EpisodeFamily,
    EpisodeFormatError,
    SymbolSequence,
    WindowSpan,
    brute_minimal_windows,
    canonical_key,
    closure,
    covers,
    format_episode,
    read_episodes,
    remove_sink,
    sinks,
)

A, B, C = 0, 1, 2
MIXED = Episode((A, B, A), frozenset({(1, 2)}))  # (a, b -> a)


def test_sinks():
    assert sinks(Episode.serial([A, B])) == {1}
    assert sinks(Episode.parallel([A, B])) == {0, 1}
    assert sinks(MIXED) == {0, 2}
    assert sinks(Episode.empty()) == set()


def test_remove_sink():
    assert remove_sink(Episode.serial([A, B]), 1).key == Episode((A,)).key
    assert remove_sink(MIXED, 0).key == Episode.serial([B, A]).key
    assert len(remove_sink(Episode((A,)), 0)) == 0
    with pytest.raises(ValueError):
        remove_sink(Episode.serial([A, B]), 0)


def test_episode_validation():
    with pytest.raises(ValueError):
        Episode((A, B), frozenset({(0, 1), (1, 0)}))
    with pytest.raises(ValueError):
        Episode((A,), frozenset({(0, 0)}))
    with pytest.raises(ValueError):
        Episode((A,), frozenset({(0, 3)}))


def test_canonical_key():
    assert canonical_key(Episode.parallel([A, B])) == canonical_key(Episode.parallel([B, A]))
    assert canonical_key(Episode.serial([A, B])) != canonical_key(Episode.serial([B, A]))
    assert canonical_key(Episode((A, B, A), frozenset({(1, 0)}))) == canonical_key(MIXED)
    with pytest.raises(ValueError):
        canonical_key(Episode.parallel([A] * 9))


def test_mixed_removals_deduplicate():
    G = Episode((A, A, B), frozenset({(2, 0), (2, 1)}))  # b -> a, b -> a
    assert remove_sink(G, 0).key == remove_sink(G, 1).key


@given(st.lists(st.integers(0, 2), min_size=1, max_size=4), st.data())
def test_key_invariant_under_relabelling(labels, data):
    n = len(labels)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = frozenset(p for p in pairs if data.draw(st.booleans()))
    perm = data.draw(st.permutations(range(n)))
    G = Episode(tuple(labels), edges)
    H = Episode(
        tuple(labels[perm.index(i)] for i in range(n)),
        frozenset((perm[a], perm[b]) for a, b in edges),
    )
    assert G.key == H.key


def test_closure_of_repeated_label_family():
    F = closure([MIXED, Episode.parallel([A, B])])
    expected = {
        Episode.empty().key, Episode((A,)).key, Episode((B,)).key,
        Episode.serial([B, A]).key, Episode.parallel([A, B]).key, MIXED.key,
    }
    assert F.keys() == expected
    assert F.is_downward_closed()
    assert not EpisodeFamily([MIXED]).is_downward_closed()


def test_covers():
    s = [A, C, C, B, A]
    assert covers(s, Episode.serial([A, B]))
    assert not covers(s, Episode.serial([B, C]))
    assert covers(s, MIXED)
    assert not covers([B, A], MIXED)
    assert covers([], Episode.empty())


def test_brute_minimal_windows_worked_example():
    s = SymbolSequence.from_chars("accbabacb")
    G = Episode.serial([s.alphabet.id("a"), s.alphabet.id("b")])
    assert brute_minimal_windows(s, G, 12) == [WindowSpan(1, 4), WindowSpan(5, 6), WindowSpan(7, 9)]
    assert brute_minimal_windows(s, G, 2) == [WindowSpan(5, 6)]


def test_minimal_windows_are_minimal():
    rng = random.Random(3)
    for _ in range(100):
        s = [rng.randrange(3) for _ in range(rng.randint(1, 15))]
        G = Episode.serial([rng.randrange(3) for _ in range(rng.randint(1, 3))])
        wins = brute_minimal_windows(s, G, 20)
        for w in wins:
            sub = s[w.start - 1 : w.end]
            assert covers(sub, G) and not covers(sub[1:], G) and not covers(sub[:-1], G)
        # no two minimal windows nest
        for u, v in itertools.combinations(wins, 2):
            assert not (u.start <= v.start and v.end <= u.end)
        assert wins == sorted(wins)


def test_sequence_basics():
    s = SymbolSequence.from_tokens("x y x z".split())
    assert len(s) == 4 and s[1] == s[3] and list(s.window(2, 3)) == [1, 0]
    assert len(s.alphabet) == 3
    train, test = SymbolSequence.from_chars("abcde").split(0.5)
    assert len(train) == 2 and len(test) == 3
    with pytest.raises(IndexError):
        s[0]
    with pytest.raises(ValueError):
        SymbolSequence(np.array([0, 5]), Alphabet(["a"]))


def test_window_span():
    w = WindowSpan(3, 5)
    assert w.length == 3 and repr(w) == "[3,5]"
    assert w.overlaps(WindowSpan(5, 7)) and not w.overlaps(WindowSpan(6, 7))
    with pytest.raises(ValueError):
        WindowSpan(4, 3)


def test_episode_file_round_trip():
    alpha = Alphabet(["a", "b"])
    text = format_episode("x1", MIXED, alpha, ["count 7"]) + format_episode("x2", Episode.serial([B, B]), alpha)
    parsed = read_episodes(text.splitlines(), alpha)
    assert [i for i, _ in parsed] == ["x1", "x2"]
    assert parsed[0][1].key == MIXED.key and parsed[1][1].key == Episode.serial([B, B]).key


@pytest.mark.parametrize(
    "text",
    [
        "node 0 a\n",
        "episode e\nnode 0 a\n",
        "episode e\nnode 0 a\nedge 0 0\nend\n",
        "episode e\nnode 0 a\nnode 1 b\nedge 0 1\nedge 1 0\nend\n",
        "episode e\nnode x a\nend\n",
        "episode e\nnode 0 a\nedge 0 4\nend\n",
        "bogus\n",
    ],
)
def test_malformed_episode_files(text):
    with pytest.raises(EpisodeFormatError):
        read_episodes(text.splitlines(), Alphabet())


def test_describe():
    alpha = Alphabet(["a", "b"])
    assert Episode.serial([A, B]).describe(alpha) == "a -> b"
    assert Episode.parallel([A, B]).describe(alpha) == "(a, b)"
    assert MIXED.describe(alpha) == "(a, b -> a)"
