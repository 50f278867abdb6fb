"""Multi-horizon forecasting detector: backbone, windowed temporal
cross-attention neck with relative position bias, dense head."""

from .config import ModelConfig
from .windows import WindowConfig, window_partition, window_reverse, window_grid
from .posbias import BiasTable, build_bias_table, project_coordinate, MASK_VALUE
from .backbone import extract_features
from .attention import cross_attention_layer
from .head import head_maps, decode_detections, run_head, nms
from .forecaster import forward_feature_maps, forward_detections
from .params import init_params, save_checkpoint, load_checkpoint, param_names
from .sampling import sample_mixed_horizons, PAST_RANGE, FUTURE_RANGE
from .training import TrainSample, SGD, build_targets, detection_loss, train_step

__all__ = [
    "ModelConfig", "WindowConfig", "window_partition", "window_reverse",
    "window_grid", "BiasTable", "build_bias_table", "project_coordinate",
    "MASK_VALUE", "extract_features", "cross_attention_layer", "head_maps",
    "decode_detections", "run_head", "nms", "forward_feature_maps",
    "forward_detections", "init_params", "save_checkpoint", "load_checkpoint",
    "param_names", "sample_mixed_horizons", "PAST_RANGE", "FUTURE_RANGE",
    "TrainSample", "SGD", "build_targets", "detection_loss", "train_step",
]
