"""Minimal windows of a -> b in a short sequence, and their exact length law.

Symbols are independent with p(a) = 1/2 and p(b) = p(c) = 1/4.  A minimal
window of a -> b is an a, then a run of non-b symbols that are not a, then b.
"""
from fractions import Fraction

from episig import Episode, SymbolModel, SymbolSequence, compute_distributions, moments, scan, stats

seq = SymbolSequence.from_chars("accbabacb")
a, b = seq.alphabet.id("a"), seq.alphabet.id("b")
ab = Episode.serial([a, b])

windows = scan(seq, [ab], K=12)[ab.key]
print("sequence       ", "".join(seq.tokens()))
print("minimal windows", windows, " mean length", stats(windows).mean)

model = SymbolModel((Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
dist = compute_distributions([ab], model, K=12).distributions[ab.key]
print("\nk  P(minimal window of length k at a position)   p_G(k)")
for k in range(1, 7):
    print(f"{k}  {str(dist.joint[k - 1]):>12}   {float(dist.normalized[k - 1]):.6f}")
mo = moments(dist)
print(f"\nmass p = {dist.mass} ~ {float(dist.mass):.6f}")
print(f"expected length m = {float(mo.m):.6f} (untruncated value 7/3 = {7 / 3:.6f})")
