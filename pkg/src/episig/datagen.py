"""Seeded synthetic sequences.

All generators draw from ``numpy.random.Generator`` backed by PCG64
(``numpy.random.default_rng(seed)``), so a ``(generator, params, seed)``
triple always reproduces the same sequence.
"""
from __future__ import annotations

import re

import numpy as np

from .episodes import Alphabet, SymbolSequence
from .probmodel import SymbolModel


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def digit_alphabet(n: int = 10) -> Alphabet:
    return Alphabet(str(i) for i in range(n))


def gen_uniform(alphabet_size: int, length: int, seed: int | None = None) -> SymbolSequence:
    """I.i.d. uniform symbols ``0 .. alphabet_size - 1``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if alphabet_size < 1:
        raise ValueError("alphabet_size must be >= 1")
    items = make_rng(seed).integers(0, alphabet_size, size=length)
    return SymbolSequence(items, digit_alphabet(alphabet_size))


def gen_correlated(length: int, seed: int | None = None, decay: float = 0.5) -> SymbolSequence:
    """Digits where ``i + 5`` tends to follow ``i`` closely.

    Each position flips a fair coin.  Heads: a uniform digit from 0..4.
    Tails: digit ``d`` in 5..9 with weight ``decay ** x``, ``x`` being the
    distance from the current position back to the last ``d - 5``.  Digits
    whose partner has not occurred yet get weight 0; with all weights 0 the
    draw is uniform over 5..9.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    rng = make_rng(seed)
    coins = rng.random(length) < 0.5
    low = rng.integers(0, 5, size=length)
    u = rng.random(length)
    last = [-1] * 5
    out = np.empty(length, dtype=np.int64)
    for i in range(length):
        if coins[i]:
            d = int(low[i])
        else:
            w = [decay ** (i - p) if p >= 0 else 0.0 for p in last]
            tot = sum(w)
            if tot == 0.0:
                d = 5 + min(int(u[i] * 5), 4)
            else:
                target = u[i] * tot
                acc = 0.0
                d = 9
                for j in range(5):
                    acc += w[j]
                    if target < acc:
                        d = 5 + j
                        break
        out[i] = d
        if d < 5:
            last[d] = i
    return SymbolSequence(out, digit_alphabet(10))


def sample_model(model: SymbolModel, length: int, seed: int | None = None, alphabet: Alphabet | None = None) -> SymbolSequence:
    """I.i.d. draws using the model's exact probabilities.

    Uniform integers on ``[0, D)`` are mapped through the cumulative integer
    weights, so no floating point rounding enters the draw.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    rng = make_rng(seed)
    D, w = model.weights()
    if alphabet is None:
        alphabet = Alphabet(str(i) for i in range(len(model)))
    if D < 2**62:
        cum = np.cumsum(np.asarray(w, dtype=np.int64))
        u = rng.integers(0, D, size=length)
        items = np.searchsorted(cum, u, side="right")
    else:
        items = rng.choice(len(model), size=length, p=model.floats())
    return SymbolSequence(items.astype(np.int64), alphabet)


def write_sequence(seq: SymbolSequence, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(" ".join(seq.tokens()))
        fh.write("\n")


def read_sequence(path, stopwords: set[str] | None = None) -> SymbolSequence:
    with open(path, encoding="utf-8") as fh:
        tokens = [t for t in re.split(r"[ \t\n\r\f\v]+", fh.read()) if t]
    if stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    return SymbolSequence.from_tokens(tokens)
