"""The statistical machinery behind flexible refinement: agglomerative
clustering with an adaptive distance threshold, and the SMO-trained
support-vector classifier that turns clusters into region boundaries.

Run:  python3 demos/02_clustering_and_classifier.py
"""

import numpy as np

from treeq import adaptive_cluster, agglomerate, svm_train

rng = np.random.default_rng(1)

# Three loose 1-D blobs, the kind of signal refinement clusters on.
points = np.concatenate([
    rng.normal(0.0, 0.02, 40),
    rng.normal(0.5, 0.02, 40),
    rng.normal(1.1, 0.02, 40),
])

res = agglomerate(points, threshold=0.1, linkage="ward")
print(f"fixed threshold 0.1: {res.n_clusters} clusters")

# The adaptive variant raises the threshold in 0.001 increments until the
# cluster count fits under the cap.
for cap in (5, 3, 2, 1):
    res = adaptive_cluster(points, start=0.1, step=0.001, max_clusters=cap)
    print(f"max_clusters={cap}: {res.n_clusters} clusters "
          f"at threshold {res.threshold_used:.3f}")

# XOR blobs: the canonical pattern a linear boundary cannot express.
centers = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)
X = np.vstack([c + rng.normal(scale=0.25, size=(100, 2)) for c in centers])
y = np.repeat([0, 0, 1, 1], 100)
for kernel in ("linear", "rbf"):
    model = svm_train(X, y, kernel=kernel)
    acc = (model.predict(X) == y).mean()
    print(f"XOR with {kernel} kernel: training accuracy {acc:.3f} (C={model.C})")

# Balanced class weights keep a 95:5 imbalance from swallowing the minority.
Xi = np.concatenate([np.linspace(-3, -1, 95), np.linspace(1, 1.5, 5)])[:, None]
yi = np.array([0] * 95 + [1] * 5)
model = svm_train(Xi, yi, kernel="linear")
pred = model.predict(Xi)
for c in (0, 1):
    recall = (pred[yi == c] == c).mean()
    print(f"imbalanced data, class {c}: recall {recall:.2f}")
