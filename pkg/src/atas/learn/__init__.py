from .calibrate import NEVER, CalibratedModel, fpr_at, recalibrate, select_threshold, train_and_get_thresh
from .models import (
    DimensionMismatch, GbtModel, InsufficientData, KnnModel, LabeledSample, Model, ModelConfig,
    TreeModel, config_to_json, dumps_model, loads_model, logistic_loss, model_from_json, model_to_json,
    predict_batch, predict_probability, train_model,
)

__all__ = [
    "NEVER", "CalibratedModel", "fpr_at", "recalibrate", "select_threshold", "train_and_get_thresh",
    "DimensionMismatch", "GbtModel", "InsufficientData", "KnnModel", "LabeledSample", "Model",
    "ModelConfig", "TreeModel", "config_to_json", "dumps_model", "loads_model", "logistic_loss",
    "model_from_json", "model_to_json", "predict_batch", "predict_probability", "train_model",
]
