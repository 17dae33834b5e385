"""Walk through the partition-tree primitives: building the coarsest
abstraction, looking up leaves, refining uniformly and along a learned
boundary, and round-tripping through the dump format.

Run:  python3 demos/01_partition_trees.py
"""

import numpy as np

from treeq import ActionSchema, StateTree, VariableSpec, svm_train

rng = np.random.default_rng(0)

# A 2-D state space and one action with a single distance parameter.
space = (VariableSpec("x", 0.0, 5.0), VariableSpec("y", 0.0, 5.0))
actions = (ActionSchema("move", (VariableSpec("d", 0.0, 0.5),)),)

tree = StateTree.universal(space, actions)
print(f"universal abstraction: {tree.n_leaves} state leaf, "
      f"{tree.apt_leaf_total()} parameter leaf")
print(f"every state maps to the root: leaf_of((1, 4)) = {tree.leaf_of((1.0, 4.0))}")

# Uniform refinement bisects the widest variables; a point exactly on the
# split midpoint lands in the upper child.
children = tree.refine_uniform(tree.root, variables_to_split=2)
print(f"\nafter one uniform split: {tree.n_leaves} leaves {children}")
leaf = tree.leaf_of((2.5, 2.5))
print(f"(2.5, 2.5) sits on both midpoints -> upper-right child {leaf}, "
      f"box lo={tree.nodes[leaf].lo}")

# Flexible refinement: cut one quadrant along a classifier boundary trained
# to separate the region around the diagonal.
target = tree.leaf_of((1.0, 1.0))
pts = np.column_stack([rng.uniform(0, 2.5, 300), rng.uniform(0, 2.5, 300)])
labels = (pts[:, 0] > pts[:, 1]).astype(int)
model = svm_train(pts, labels, kernel="linear")
cells = tree.refine_flexible(target, model)
print(f"\nflexible split of leaf {target} -> classifier cells {cells}")
for probe in [(1.5, 0.5), (0.5, 1.5)]:
    print(f"  {probe} -> leaf {tree.leaf_of(probe)}")

# The parameter tree of a leaf refines by bisecting every splittable
# dimension; sampling stays inside the chosen leaf's box.
apt = tree.apt(cells[0], "move")
apt.refine_uniform(apt.root)
fine = apt.leaf_of((0.4,))
draws = [apt.sample(fine, rng)[0] for _ in range(5)]
print(f"\nparameter tree leaves: {apt.leaf_ids}; draws from [0.25, 0.5): "
      f"{[round(d, 3) for d in draws]}")

# Serialization embeds boxes and classifier coefficients and round-trips.
data = tree.to_bytes()
clone = StateTree.from_bytes(data)
same = all(
    clone.leaf_of(p) == tree.leaf_of(p)
    for p in [(rng.uniform(0, 5), rng.uniform(0, 5)) for _ in range(1000)]
)
print(f"\ndump is {len(data)} bytes; reload agrees on 1000 random lookups: {same}")
