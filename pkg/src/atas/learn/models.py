"""k-NN, decision-tree and gradient-boosted-tree classifiers.

All models predict the probability that a submission is Correct. Training
is deterministic given the rng seed, and fitted models are immutable.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np

from ..labels import Label
from .tree import TreeArrays, check_binary, grow_gini, grow_newton

FORMAT_NAME = "atas-model"
FORMAT_VERSION = 1


class InsufficientData(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class LabeledSample:
    features: np.ndarray
    label: Label


@dataclass(frozen=True)
class ModelConfig:
    family: str = "gbt"  # knn | tree | gbt
    k: int = 6
    search_trials: int = 10
    depth_range: tuple = (2, 16)
    leaf_range: tuple = (1, 8)
    max_depth: int = 7
    n_estimators: int = 100
    learning_rate: float = 0.1

    def __post_init__(self):
        if self.family not in ("knn", "tree", "gbt"):
            raise ValueError(f"unknown classifier family {self.family!r}")
        if self.k < 1 or self.search_trials < 1 or self.max_depth < 1 or self.n_estimators < 1:
            raise ValueError("k, search_trials, max_depth and n_estimators must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        lo, hi = self.depth_range
        if not 1 <= lo <= hi:
            raise ValueError("bad depth_range")
        lo, hi = self.leaf_range
        if not 1 <= lo <= hi:
            raise ValueError("bad leaf_range")


@dataclass(frozen=True)
class KnnModel:
    k: int
    X: np.ndarray
    y: np.ndarray

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(len(X))
        for i, row in enumerate(X):
            dist = (self.X != row).sum(axis=1)
            nearest = np.argsort(dist, kind="stable")[: self.k]
            out[i] = self.y[nearest].sum() / self.k
        return out


@dataclass(frozen=True)
class TreeModel:
    tree: TreeArrays
    dim: int
    max_depth: int
    min_samples_leaf: int

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return self.tree.predict(X)


@dataclass(frozen=True)
class GbtModel:
    base_score: float
    trees: tuple
    steps: tuple  # effective step size per round, after line search
    dim: int
    loss_history: tuple = field(default=())  # training loss after round 0..n

    def margin(self, X: np.ndarray) -> np.ndarray:
        m = np.full(len(X), self.base_score)
        for tree, step in zip(self.trees, self.steps):
            if step:
                m += step * tree.predict(X)
        return m

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.margin(X))


Model = Union[KnnModel, TreeModel, GbtModel]


def _sigmoid(m: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * m))


def logistic_loss(y: np.ndarray, margin: np.ndarray) -> float:
    # log(1 + e^m) - y*m, summed stably and averaged
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


def _as_arrays(data: Sequence[LabeledSample]):
    if not data:
        return np.zeros((0, 0), dtype=np.uint8), np.zeros(0)
    dims = {len(s.features) for s in data}
    if len(dims) != 1:
        raise DimensionMismatch("samples have differing feature lengths")
    X = np.stack([np.asarray(s.features, dtype=np.uint8) for s in data])
    y = np.array([1.0 if s.label == Label.CORRECT else 0.0 for s in data])
    return X, y


def _stratified_split(y: np.ndarray, frac: float, rng: np.random.Generator):
    """Return (train_idx, val_idx); each class keeps >= 1 training row."""
    train, val = [], []
    for cls in (1.0, 0.0):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        n_val = min(int(math.floor(frac * len(idx) + 0.5)), max(len(idx) - 1, 0))
        val.append(idx[:n_val])
        train.append(idx[n_val:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(val))


def _fit_knn(cfg: ModelConfig, X, y) -> KnnModel:
    if len(y) < cfg.k:
        raise InsufficientData(f"k-NN with k={cfg.k} needs at least {cfg.k} samples, got {len(y)}")
    return KnnModel(cfg.k, X.copy(), y.copy())


def _fit_tree(cfg: ModelConfig, X, y, rng: np.random.Generator) -> TreeModel:
    tr, va = _stratified_split(y, 0.2, rng)
    if len(va) == 0:
        tr = va = np.arange(len(y))
    best = None
    for _ in range(cfg.search_trials):
        depth = int(rng.integers(cfg.depth_range[0], cfg.depth_range[1] + 1))
        leaf = int(rng.integers(cfg.leaf_range[0], cfg.leaf_range[1] + 1))
        tree = grow_gini(X[tr], y[tr], depth, leaf)
        acc = float(np.mean((tree.predict(X[va]) >= 0.5) == (y[va] == 1.0)))
        if best is None or acc > best[0]:
            best = (acc, depth, leaf)
    _, depth, leaf = best
    return TreeModel(grow_gini(X, y, depth, leaf), X.shape[1], depth, leaf)


def _fit_gbt(cfg: ModelConfig, X, y) -> GbtModel:
    check_binary(X)
    p0 = float(y.mean())
    base = math.log(p0 / (1.0 - p0))
    margin = np.full(len(y), base)
    loss = logistic_loss(y, margin)
    history, trees, steps = [loss], [], []
    for _ in range(cfg.n_estimators):
        p = _sigmoid(margin)
        tree = grow_newton(X, p - y, p * (1.0 - p), cfg.max_depth)
        update = tree.predict(X)
        step = cfg.learning_rate
        # halve until the loss does not go up; a zero step keeps it flat
        while step > 1e-12:
            trial = margin + step * update
            new_loss = logistic_loss(y, trial)
            if new_loss <= loss:
                break
            step /= 2.0
        else:
            step, trial, new_loss = 0.0, margin, loss
        margin, loss = trial, new_loss
        trees.append(tree)
        steps.append(step)
        history.append(loss)
    return GbtModel(base, tuple(trees), tuple(steps), X.shape[1], tuple(history))


def train_model(config: ModelConfig, data: Sequence[LabeledSample], rng_seed: int = 0) -> Model:
    X, y = _as_arrays(data)
    if config.family == "knn":
        return _fit_knn(config, X, y)
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        raise InsufficientData("training data must contain both Correct and Incorrect samples")
    if config.family == "tree":
        return _fit_tree(config, X, y, np.random.default_rng(rng_seed))
    return _fit_gbt(config, X, y)


def _check_dim(model: Model, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X))
    if X.shape[1] != model.dim:
        raise DimensionMismatch(f"model expects {model.dim} features, got {X.shape[1]}")
    return X


def predict_probability(model: Model, features) -> float:
    """Probability that the program behind `features` is Correct."""
    return float(model.predict_batch(_check_dim(model, features))[0])


def predict_batch(model: Model, X) -> np.ndarray:
    return model.predict_batch(_check_dim(model, X))


# -- serialization ---------------------------------------------------------------

def model_to_json(model: Model) -> dict:
    if isinstance(model, KnnModel):
        body = {"family": "knn", "k": model.k, "X": model.X.tolist(), "y": model.y.tolist()}
    elif isinstance(model, TreeModel):
        body = {"family": "tree", "dim": model.dim, "max_depth": model.max_depth,
                "min_samples_leaf": model.min_samples_leaf, "tree": model.tree.to_json()}
    else:
        body = {"family": "gbt", "dim": model.dim, "base_score": model.base_score,
                "steps": list(model.steps), "loss_history": list(model.loss_history),
                "trees": [t.to_json() for t in model.trees]}
    return {"format": FORMAT_NAME, "version": FORMAT_VERSION, **body}


def model_from_json(d: dict) -> Model:
    if d.get("format") != FORMAT_NAME or d.get("version") != FORMAT_VERSION:
        raise ValueError("not a supported model artifact")
    fam = d["family"]
    if fam == "knn":
        X = np.asarray(d["X"], dtype=np.uint8).reshape(len(d["y"]), -1)
        return KnnModel(d["k"], X, np.asarray(d["y"], dtype=np.float64))
    if fam == "tree":
        return TreeModel(TreeArrays.from_json(d["tree"]), d["dim"], d["max_depth"], d["min_samples_leaf"])
    if fam == "gbt":
        return GbtModel(d["base_score"], tuple(TreeArrays.from_json(t) for t in d["trees"]),
                        tuple(d["steps"]), d["dim"], tuple(d["loss_history"]))
    raise ValueError(f"unknown family {fam!r}")


def dumps_model(model: Model) -> str:
    return json.dumps(model_to_json(model), sort_keys=True)


def loads_model(text: str) -> Model:
    return model_from_json(json.loads(text))


def config_to_json(cfg: ModelConfig) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()}
