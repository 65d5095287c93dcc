"""Check that z behaves like a standard normal when the model is true."""
from fractions import Fraction

import numpy as np

from episig import Episode, SymbolModel, sample_model
from episig.sigtest import evaluate_episodes

model = SymbolModel((Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
episodes = [Episode.serial([0, 1]), Episode.parallel([1, 2]), Episode.serial([2, 1, 0])]
zs = []
for r in range(150):
    G = episodes[r % len(episodes)]
    run = evaluate_episodes([("g", G)], model, sample_model(model, 20_000, seed=r), K=12, sim_length=200_000, seed=r)
    zs.append(run.results[0].z)
zs = np.array(zs)
print(f"{zs.size} replicates: mean {zs.mean():+.3f}, variance {zs.var(ddof=1):.3f}")
print("share with |z| > 1.96:", np.mean(np.abs(zs) > 1.96))
