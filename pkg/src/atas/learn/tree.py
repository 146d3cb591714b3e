"""Binary decision trees over 0/1 feature matrices.

Features are presence bits, so every split tests a single feature: rows with
bit 0 go left, bit 1 go right. Two growers share the node layout:

* `grow_gini` builds a classification tree (CART with Gini impurity); each
  leaf stores the Correct fraction of its training rows.
* `grow_newton` builds a regression tree for boosting: splits maximize the
  second-order gain and leaves store the Newton step -G/H.

Ties between equally good splits go to the lowest feature index, so trees
are a pure function of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_HESS_FLOOR = 1e-12


@dataclass(frozen=True)
class TreeArrays:
    feature: np.ndarray  # -1 at leaves
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] >= 0:
                stack += [(self.left[node], d + 1), (self.right[node], d + 1)]
        return best

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of X."""
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            feat = self.feature[node]
            inner = feat >= 0
            if not inner.any():
                return node
            r, f = rows[inner], feat[inner]
            bit = X[r, f] != 0
            node[inner] = np.where(bit, self.right[node[inner]], self.left[node[inner]])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_json(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("feature", "left", "right", "value")}

    @classmethod
    def from_json(cls, d: dict) -> "TreeArrays":
        return cls(np.asarray(d["feature"], dtype=np.int64), np.asarray(d["left"], dtype=np.int64),
                   np.asarray(d["right"], dtype=np.int64), np.asarray(d["value"], dtype=np.float64))


class _Builder:
    def __init__(self):
        self.feature, self.left, self.right, self.value = [], [], [], []

    def node(self, value: float) -> int:
        self.feature.append(-1)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        return len(self.feature) - 1

    def finish(self) -> TreeArrays:
        return TreeArrays(np.asarray(self.feature, dtype=np.int64), np.asarray(self.left, dtype=np.int64),
                          np.asarray(self.right, dtype=np.int64), np.asarray(self.value, dtype=np.float64))


def check_binary(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    if X.size and not np.isin(X, (0, 1)).all():
        raise ValueError("features must be 0/1 presence bits")
    return X.astype(np.float64)


def grow_gini(X: np.ndarray, y: np.ndarray, max_depth: int, min_samples_leaf: int) -> TreeArrays:
    """CART on binary features; y holds 1 for Correct and 0 for Incorrect."""
    X = check_binary(X)
    y = np.asarray(y, dtype=np.float64)
    b = _Builder()

    def grow(idx: np.ndarray, depth: int) -> int:
        n, pos = len(idx), float(y[idx].sum())
        me = b.node(pos / n)
        if depth >= max_depth or pos in (0.0, float(n)) or n < 2 * min_samples_leaf:
            return me
        Xs, ys = X[idx], y[idx]
        n1 = Xs.sum(axis=0)
        p1 = ys @ Xs
        n0, p0 = n - n1, pos - p1
        ok = (n1 >= min_samples_leaf) & (n0 >= min_samples_leaf)
        if not ok.any():
            return me
        with np.errstate(divide="ignore", invalid="ignore"):
            imp = np.where(n1 > 0, 2 * p1 * (n1 - p1) / n1, 0.0) + np.where(n0 > 0, 2 * p0 * (n0 - p0) / n0, 0.0)
        imp = np.where(ok, imp, np.inf)
        j = int(np.argmin(imp))
        if not imp[j] < 2 * pos * (n - pos) / n - 1e-12:
            return me
        bit = Xs[:, j] != 0
        b.feature[me] = j
        b.left[me] = grow(idx[~bit], depth + 1)
        b.right[me] = grow(idx[bit], depth + 1)
        return me

    grow(np.arange(len(y)), 0)
    return b.finish()


def grow_newton(X: np.ndarray, g: np.ndarray, h: np.ndarray, max_depth: int,
                min_samples_leaf: int = 1, reg_lambda: float = 0.0) -> TreeArrays:
    """Regression tree fit to gradients g and hessians h of a convex loss."""
    X = check_binary(X)
    b = _Builder()

    def score(G, H):
        return G * G / np.maximum(H + reg_lambda, _HESS_FLOOR)

    def grow(idx: np.ndarray, depth: int) -> int:
        G, H = float(g[idx].sum()), float(h[idx].sum())
        me = b.node(-G / max(H + reg_lambda, _HESS_FLOOR))
        n = len(idx)
        if depth >= max_depth or n < 2 * min_samples_leaf:
            return me
        Xs = X[idx]
        n1 = Xs.sum(axis=0)
        G1, H1 = g[idx] @ Xs, h[idx] @ Xs
        G0, H0 = G - G1, H - H1
        ok = (n1 >= min_samples_leaf) & (n - n1 >= min_samples_leaf)
        if not ok.any():
            return me
        gain = np.where(ok, score(G1, H1) + score(G0, H0) - score(G, H), -np.inf)
        j = int(np.argmax(gain))
        if not gain[j] > 1e-12:
            return me
        bit = Xs[:, j] != 0
        b.feature[me] = j
        b.left[me] = grow(idx[~bit], depth + 1)
        b.right[me] = grow(idx[bit], depth + 1)
        return me

    grow(np.arange(len(g)), 0)
    return b.finish()
