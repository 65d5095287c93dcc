"""Build the three machines for a small family with repeated labels.

The episode machine is not simple: (a) is reached from both (a, b) and (a, a)
by removing an a-sink.  Determinizing over antichains of episodes fixes that,
and the co-machine tracks a sequence and its one-shifted suffix together.
"""
from episig import Episode, closure
from episig.automata import build_machines
from episig.episodes import Alphabet

alpha = Alphabet(["a", "b"])
A, B = 0, 1
family = closure([
    Episode((A, B, A), frozenset({(1, 2)})),  # (a, b -> a)
    Episode.parallel([A, B]),
    Episode.parallel([A, A]),
])
M, S, co = build_machines(family)


def show_episode(key):
    return M.episodes[M.index[key]].describe(alpha) if key != "|" else "{}"


print(M.dump(show_episode))
print("simple:", M.is_simple(), "->", S.is_simple())
print(S.dump(lambda V: "{" + ", ".join(show_episode(M.payloads[v]) for v in sorted(V)) + "}"))
print(f"co-machine: {len(co)} states, simple: {co.is_simple()}")
