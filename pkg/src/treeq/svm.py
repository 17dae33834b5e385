"""Soft-margin support-vector classifier trained by sequential minimal
optimization on the dual, with linear and RBF kernels.

Features are standardized per dimension before training. Multiclass
problems are handled one-vs-rest with balanced class weights
(n_samples / (n_classes * n_class_samples)); the regularization constant is
picked from a candidate grid by stratified cross-validation scored with
balanced accuracy. Training and prediction are deterministic for a fixed
input order and seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SingleClass

DEFAULT_CANDIDATE_CS = (0.1, 1.0, 10.0, 100.0)
SMO_TOL = 1e-3
SMO_MAX_PASSES = 2
SMO_MAX_SWEEPS = 40


def _standardize_params(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


def _rbf_gamma(Z: np.ndarray) -> float:
    var = float(Z.var())
    if var <= 0.0:
        var = 1.0
    return 1.0 / (Z.shape[1] * var)


def _kernel_matrix(kernel: str, gamma: float, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        sq = (
            (A * A).sum(axis=1)[:, None]
            + (B * B).sum(axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-gamma * sq)
    raise ValueError(f"unknown kernel {kernel!r}")


def _smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C_per_sample: np.ndarray,
    rng: np.random.Generator,
    tol: float = SMO_TOL,
    max_passes: int = SMO_MAX_PASSES,
    max_sweeps: int = SMO_MAX_SWEEPS,
) -> tuple[np.ndarray, float]:
    """Solve the binary dual for labels y in {-1, +1} with a per-sample box
    constraint. Returns (alpha, bias). The error vector is cached and
    updated incrementally after every pair update; the partner index is the
    max-|E_i - E_j| heuristic with a seeded-order fallback scan."""
    n = len(y)
    alpha = np.zeros(n)
    b = 0.0
    E = -y.astype(float)  # decision value is identically 0 at the start
    fallback_order = rng.permutation(n)
    fb_pos = 0
    max_fallback = 8

    passes = 0
    sweeps = 0
    while passes < max_passes and sweeps < max_sweeps:
        changed = 0
        yE = y * E
        violating = np.flatnonzero(
            ((yE < -tol) & (alpha < C_per_sample)) | ((yE > tol) & (alpha > 0.0))
        )
        for i in violating:
            yEi = y[i] * E[i]
            if not (
                (yEi < -tol and alpha[i] < C_per_sample[i])
                or (yEi > tol and alpha[i] > 0.0)
            ):
                continue  # fixed by an earlier update this sweep
            j = int(np.argmax(np.abs(E - E[i])))
            b_new = None
            if j != i:
                b_new = _smo_step(K, y, C_per_sample, alpha, E, i, j, b)
            if b_new is None:
                # bounded scan through a fixed random order
                for _ in range(max_fallback):
                    j = int(fallback_order[fb_pos])
                    fb_pos = (fb_pos + 1) % n
                    if j == i:
                        continue
                    b_new = _smo_step(K, y, C_per_sample, alpha, E, i, j, b)
                    if b_new is not None:
                        break
            if b_new is None:
                continue
            b = b_new
            changed += 1
        sweeps += 1
        passes = passes + 1 if changed == 0 else 0
    return alpha, b


def _smo_step(K, y, C, alpha, E, i, j, b) -> float | None:
    """Try to optimize the (i, j) pair in place. Returns the new bias, or
    None when the pair cannot make progress."""
    ai, aj = alpha[i], alpha[j]
    if y[i] != y[j]:
        L = max(0.0, aj - ai)
        H = min(C[j], C[i] + aj - ai)
    else:
        L = max(0.0, ai + aj - C[i])
        H = min(C[j], ai + aj)
    if H - L < 1e-12:
        return None
    eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
    if eta >= 0.0:
        return None
    aj_new = aj - y[j] * (E[i] - E[j]) / eta
    aj_new = min(H, max(L, aj_new))
    if abs(aj_new - aj) < 1e-3 * (aj_new + aj + 1e-3):
        return None
    ai_new = ai + y[i] * y[j] * (aj - aj_new)

    dai = ai_new - ai
    daj = aj_new - aj
    b1 = b - E[i] - y[i] * dai * K[i, i] - y[j] * daj * K[i, j]
    b2 = b - E[j] - y[i] * dai * K[i, j] - y[j] * daj * K[j, j]
    if 0.0 < ai_new < C[i]:
        b_new = b1
    elif 0.0 < aj_new < C[j]:
        b_new = b2
    else:
        b_new = 0.5 * (b1 + b2)

    alpha[i] = ai_new
    alpha[j] = aj_new
    E += y[i] * dai * K[:, i] + y[j] * daj * K[:, j] + (b_new - b)
    return b_new


@dataclass
class _BinaryMachine:
    """One one-vs-rest machine: dual coefficients over its support vectors."""

    coef: np.ndarray  # alpha_i * y_i for support vectors
    support: np.ndarray  # support vectors, standardized space
    intercept: float
    weights: np.ndarray | None = None  # collapsed w for the linear kernel

    def decision(self, Z: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
        if self.weights is not None:
            return Z @ self.weights + self.intercept
        K = _kernel_matrix(kernel, gamma, Z, self.support)
        return K @ self.coef + self.intercept


@dataclass
class SvmClassifier:
    """Trained multiclass classifier. Predicts the argmax of the
    one-vs-rest decision values; exact ties go to the lowest class label."""

    kernel: str
    classes: list[int]
    mean: np.ndarray
    scale: np.ndarray
    gamma: float
    C: float
    machines: list[_BinaryMachine]
    train_pred_classes: list[int] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return len(self.mean)

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {X.shape[1]}"
            )
        Z = (X - self.mean) / self.scale
        return np.column_stack([m.decision(Z, self.kernel, self.gamma) for m in self.machines])

    def predict(self, X: np.ndarray) -> np.ndarray:
        D = self.decision_values(X)
        idx = np.argmax(D, axis=1)  # first max -> lowest class label on ties
        return np.asarray(self.classes)[idx]

    def predict_one(self, x) -> int:
        if self._w_stack is not None:
            z = (np.asarray(x, dtype=float) - self.mean) / self.scale
            d = self._w_stack @ z + self._b_stack
            return self.classes[int(np.argmax(d))]
        return int(self.predict(np.asarray(x, dtype=float)[None, :])[0])

    def __post_init__(self):
        # fast single-sample path when every machine is linear-collapsed
        if self.machines and all(m.weights is not None for m in self.machines):
            self._w_stack = np.vstack([m.weights for m in self.machines])
            self._b_stack = np.array([m.intercept for m in self.machines])
        else:
            self._w_stack = None
            self._b_stack = None

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "classes": self.classes,
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "gamma": self.gamma,
            "C": self.C,
            "train_pred_classes": self.train_pred_classes,
            "machines": [
                {
                    "coef": m.coef.tolist(),
                    "support": m.support.tolist(),
                    "intercept": m.intercept,
                    "weights": m.weights.tolist() if m.weights is not None else None,
                }
                for m in self.machines
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmClassifier":
        machines = [
            _BinaryMachine(
                np.asarray(m["coef"], dtype=float),
                np.asarray(m["support"], dtype=float).reshape(len(m["coef"]), -1),
                float(m["intercept"]),
                np.asarray(m["weights"], dtype=float) if m["weights"] is not None else None,
            )
            for m in d["machines"]
        ]
        return cls(
            kernel=d["kernel"],
            classes=[int(c) for c in d["classes"]],
            mean=np.asarray(d["mean"], dtype=float),
            scale=np.asarray(d["scale"], dtype=float),
            gamma=float(d["gamma"]),
            C=float(d["C"]),
            machines=machines,
            train_pred_classes=[int(c) for c in d["train_pred_classes"]],
        )


def _negate(m: _BinaryMachine) -> _BinaryMachine:
    return _BinaryMachine(
        -m.coef, m.support, -m.intercept,
        -m.weights if m.weights is not None else None,
    )


def _fit_machines(
    K: np.ndarray,
    Z: np.ndarray,
    y: np.ndarray,
    classes: np.ndarray,
    C: float,
    class_weight: dict[int, float],
    kernel: str,
    seed: int,
) -> list[_BinaryMachine]:
    """One one-vs-rest machine per class. With two classes the problems are
    mirror images, so only one is solved and the other is its negation."""
    machines = []
    sample_w = np.array([class_weight[int(c)] for c in y])
    fit_for = classes[1:] if len(classes) == 2 else classes
    for k, cls_label in enumerate(fit_for):
        ypm = np.where(y == cls_label, 1.0, -1.0)
        rng = np.random.default_rng(seed + 7 * k)
        alpha, b = _smo_solve(K, ypm, C * sample_w, rng)
        sv = alpha > 1e-8
        coef = alpha[sv] * ypm[sv]
        support = Z[sv]
        weights = support.T @ coef if kernel == "linear" else None
        machines.append(_BinaryMachine(coef, support, float(b), weights))
    if len(classes) == 2:
        machines.insert(0, _negate(machines[0]))
    return machines


def _balanced_accuracy(y_true: np.ndarray, y_pred: np.ndarray, classes: np.ndarray) -> float:
    recalls = []
    for c in classes:
        m = y_true == c
        if m.any():
            recalls.append(float((y_pred[m] == c).mean()))
    return float(np.mean(recalls))


def _stratified_folds(y: np.ndarray, classes: np.ndarray, k: int) -> np.ndarray:
    """Round-robin fold assignment within each class; deterministic in the
    input order."""
    fold = np.empty(len(y), dtype=int)
    for c in classes:
        idx = np.flatnonzero(y == c)
        fold[idx] = np.arange(len(idx)) % k
    return fold


def svm_train(
    features,
    labels,
    kernel: str = "linear",
    candidate_Cs=DEFAULT_CANDIDATE_CS,
    seed: int = 0,
) -> SvmClassifier:
    """Train a one-vs-rest soft-margin classifier.

    The regularization constant is chosen from `candidate_Cs` by stratified
    k-fold cross-validation with k = min(3, smallest class size), scored by
    balanced accuracy (ties prefer the smaller C). When the smallest class
    has a single sample, cross-validation is skipped and the lower-median
    candidate is used.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(labels, dtype=int)
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise SingleClass("need at least two distinct labels")

    mean, scale = _standardize_params(X)
    Z = (X - mean) / scale
    gamma = _rbf_gamma(Z) if kernel == "rbf" else 0.0
    K = _kernel_matrix(kernel, gamma, Z, Z)

    n = len(y)
    class_weight = {
        int(c): n / (len(classes) * int(cnt)) for c, cnt in zip(classes, counts)
    }
    candidates = sorted(float(c) for c in candidate_Cs)

    smallest = int(counts.min())
    if smallest < 2 or len(candidates) == 1:
        best_C = candidates[(len(candidates) - 1) // 2]
    else:
        k_folds = min(3, smallest)
        fold = _stratified_folds(y, classes, k_folds)
        best_C, best_score = candidates[0], -1.0
        for C in candidates:
            scores = []
            for f in range(k_folds):
                tr = fold != f
                va = ~tr
                machines = _fit_machines(
                    K[np.ix_(tr, tr)], Z[tr], y[tr], classes, C, class_weight, kernel, seed
                )
                D = np.column_stack(
                    [m.decision(Z[va], kernel, gamma) for m in machines]
                )
                pred = classes[np.argmax(D, axis=1)]
                scores.append(_balanced_accuracy(y[va], pred, classes))
            score = float(np.mean(scores))
            if score > best_score + 1e-12:
                best_score, best_C = score, C
            if best_score >= 1.0:
                break  # no larger C can win the smaller-C tie rule

    machines = _fit_machines(K, Z, y, classes, best_C, class_weight, kernel, seed)
    model = SvmClassifier(
        kernel=kernel,
        classes=[int(c) for c in classes],
        mean=mean,
        scale=scale,
        gamma=gamma,
        C=best_C,
        machines=machines,
    )
    model.train_pred_classes = sorted(set(int(c) for c in model.predict(X)))
    return model


def svm_predict(model: SvmClassifier, x) -> int:
    """Class label for a single feature vector."""
    return model.predict_one(x)
