"""
Merging ranked lists from several models
========================================

Fusion first interleaves each model's head (its top 5 lists for two models,
top 3 for three), skipping ids already taken, then keeps interleaving
further down until ten ids are collected. The best model goes first.
"""

from claimrank.fusion import fuse_three, fuse_two


def show(label, fused):
    print(f"{label:<22}" + " ".join(e.factcheck_id for e in fused))


best = ["p", "q", "r", "s", "t", "u", "a7", "a8", "a9", "a10"]
second = ["p", "w", "x", "y", "z", "v", "b7", "b8", "b9", "b10"]
show("one shared id", fuse_two(best, second))

a = [f"a{i}" for i in range(1, 11)]
b = [f"b{i}" for i in range(1, 11)]
c = [f"c{i}" for i in range(1, 11)]
show("two disjoint", fuse_two(a, b))
show("three disjoint", fuse_three(a, b, c))

# Agreement collapses to the shared list.
show("identical inputs", fuse_two(a, a))

# Same heads, different tails: the fill alternates below the head.
show("shared head", fuse_two(a, a[:5] + [f"b{i}" for i in range(6, 11)]))

# Scores are discarded; fused entries carry 1/rank.
print([round(e.score, 3) for e in fuse_two(a, b)][:4])
