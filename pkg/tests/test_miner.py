import itertools
import random

import pytest

from episig.episodes import Episode, SymbolSequence, brute_minimal_windows
from episig.miner import MinerConfig, generate_level, mine
from episig.winscan import greedy_nonoverlap


def brute_frequent(s, cfg):
    symbols = sorted(set(s))
    found = set()
    for n in range(1, cfg.max_nodes + 1):
        cands = []
        if "serial" in cfg.classes:
            cands += [Episode.serial(t) for t in itertools.product(symbols, repeat=n)]
        if "parallel" in cfg.classes:
            cands += [Episode.parallel(t) for t in itertools.combinations_with_replacement(symbols, n)]
        for G in cands:
            if len(greedy_nonoverlap(brute_minimal_windows(s, G, cfg.max_window))) > cfg.min_windows:
                found.add(G.key)
    return found


def test_abababab():
    s = SymbolSequence.from_chars("abababab")
    a, b = s.alphabet.id("a"), s.alphabet.id("b")
    res = mine(s, MinerConfig(2, 3, ("serial",), 3))
    keys = {G.key for G in res.frequent}
    for G in (Episode((a,)), Episode((b,)), Episode.serial([a, b]), Episode.serial([b, a])):
        assert G.key in keys
    assert res.family.is_downward_closed()


def test_aba_parallel_not_frequent():
    s = SymbolSequence.from_chars("aba")
    par = Episode.parallel([0, 1])
    res = mine(s, MinerConfig(1, 5, ("parallel",), 2))
    assert par.key not in {G.key for G in res.frequent}
    assert len(brute_minimal_windows(s, par, 5)) == 2


def test_threshold_above_length():
    res = mine(SymbolSequence.from_chars("abcabc"), MinerConfig(10, 4))
    assert res.frequent == [] and len(res.family) == 1


def test_generate_level():
    assert generate_level([(0, 1), (0, 2), (1, 2)], "parallel") == [(0, 1, 2)]
    assert generate_level([(0, 1), (1, 2), (0, 2)], "serial") == [(0, 1, 2)]
    assert generate_level([(0, 1), (1, 2)], "serial") == []  # 0 -> 2 missing
    assert (0, 0) in generate_level([(0,), (1,)], "parallel")
    assert (1, 0) in generate_level([(0,), (1,)], "serial")


def test_matches_brute_force():
    rng = random.Random(8)
    for _ in range(40):
        k = rng.randint(1, 3)
        s = [rng.randrange(k) for _ in range(rng.randint(5, 40))]
        classes = rng.choice([("serial",), ("parallel",), ("serial", "parallel")])
        cfg = MinerConfig(rng.randint(1, 4), rng.randint(2, 6), classes, 3)
        res = mine(s, cfg)
        assert {G.key for G in res.frequent} == brute_frequent(s, cfg)


def test_counts_monotone_on_mined_output():
    rng = random.Random(3)
    s = [rng.randrange(3) for _ in range(400)]
    res = mine(s, MinerConfig(5, 6, max_nodes=3))
    for G in res.frequent:
        n = len(G)
        if n < 2:
            continue
        labels = G.labels
        for i in range(n):
            sub = labels[:i] + labels[i + 1 :]
            H = Episode.serial(sub) if G.is_serial else Episode.parallel(sub)
            assert res.counts[H.key] >= res.counts[G.key]


def test_config_validation():
    with pytest.raises(ValueError):
        MinerConfig(0, 3)
    with pytest.raises(ValueError):
        MinerConfig(1, 3, ("general",))
