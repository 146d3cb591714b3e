"""Probability threshold selection under a false-positive-rate budget.

A false positive is an Incorrect sample whose predicted probability of
being Correct reaches the threshold. The chosen threshold is the least
candidate whose validation FPR is strictly below the budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .models import (
    InsufficientData, LabeledSample, Model, ModelConfig, _as_arrays, _stratified_split, predict_batch,
    train_model,
)

# a threshold above every probability: the classifier never accepts
NEVER = 1.0 + 1e-9


@dataclass(frozen=True)
class CalibratedModel:
    model: Model
    thresh: float
    calibration_fpr: Optional[float]  # None when validation had no Incorrect samples
    degenerate: bool = False
    val_probs: tuple = ()
    val_labels: tuple = ()

    def accepts(self, prob: float) -> bool:
        return prob >= self.thresh


def fpr_at(t: float, neg_probs: np.ndarray) -> float:
    return float(np.count_nonzero(neg_probs >= t)) / len(neg_probs)


def select_threshold(neg_probs: np.ndarray, all_probs: np.ndarray, F: float) -> tuple:
    """(thresh, fpr) for the least candidate with FPR < F."""
    candidates = np.unique(np.concatenate(([0.0], np.asarray(all_probs, dtype=np.float64), [NEVER])))
    for t in candidates:
        fpr = fpr_at(float(t), neg_probs)
        if fpr < F:
            return float(t), fpr
    return NEVER, 0.0  # unreachable: FPR(NEVER) = 0 < F


def train_and_get_thresh(config: ModelConfig, F: float, correct: Sequence[LabeledSample],
                         incorrect: Sequence[LabeledSample], rng_seed: int = 0) -> CalibratedModel:
    if not 0.0 < F < 1.0:
        raise ValueError("F must lie in (0, 1)")
    if not correct or not incorrect:
        raise InsufficientData("calibration needs Correct and Incorrect samples")
    data = list(correct) + list(incorrect)
    X, y = _as_arrays(data)
    rng = np.random.default_rng(rng_seed)
    tr, va = _stratified_split(y, 0.2, rng)
    train_rows = [data[i] for i in tr]
    model = train_model(config, train_rows, int(rng.integers(2**31)))
    probs = predict_batch(model, X[va]) if len(va) else np.zeros(0)
    labels = y[va]
    neg = probs[labels == 0.0]
    if len(neg) == 0:
        return CalibratedModel(model, NEVER, None, True, tuple(probs.tolist()), tuple(labels.tolist()))
    thresh, fpr = select_threshold(neg, probs, F)
    return CalibratedModel(model, thresh, fpr, False, tuple(probs.tolist()), tuple(labels.tolist()))


def recalibrate(cal: CalibratedModel, F: float) -> CalibratedModel:
    """Re-pick the threshold for a new F, keeping model and validation set."""
    if cal.degenerate:
        return cal
    probs = np.asarray(cal.val_probs)
    neg = probs[np.asarray(cal.val_labels) == 0.0]
    thresh, fpr = select_threshold(neg, probs, F)
    return CalibratedModel(cal.model, thresh, fpr, False, cal.val_probs, cal.val_labels)
