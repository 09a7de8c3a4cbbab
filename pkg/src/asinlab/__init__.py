"""asinlab: application-specific instrumentation simulator.

Pipeline: synthetic scene ``e`` -> sensor ``s = P e (+ noise)`` ->
application-specific stage ``s' = P_asin s`` -> correlator score ->
interpreter decision, plus Neyman-Pearson and Cramer-Rao resolution
estimators.
"""
from .correlator import (
    CorrelatorKind,
    CorrelatorModel,
    SingleLayerCorrelator,
    TrainConfig,
    correlate,
    matched_filter,
    train_correlator,
)
from .interpreter import (
    DecisionLevel,
    NeymanPearsonInterpreter,
    ScalarCalibrator,
    ThresholdCal,
    calibrate_threshold,
    interpret_binary,
    interpret_scalar,
)
from .metrics import EvalSummary, accuracy_confusion, pearson_r, roc_auc
from .resolution import (
    Detector,
    FisherEstimate,
    FunctionChannel,
    ResolutionReport,
    ScenarioChannel,
    delta_cr,
    delta_np,
    estimate_pfp,
    fisher_information,
    log_likelihood,
)
from .scenegen import (
    EnvironmentScene,
    ScenarioConfig,
    gen_sludge_scene,
    gen_tumor_scene,
)
from .sensing import (
    AsinMatrix,
    AsinMethod,
    AsinProjector,
    MeasurementProcess,
    apply_asin,
    apply_measurement,
    design_asin_matrix,
)

__all__ = [
    "CorrelatorKind",
    "CorrelatorModel",
    "SingleLayerCorrelator",
    "TrainConfig",
    "correlate",
    "matched_filter",
    "train_correlator",
    "DecisionLevel",
    "NeymanPearsonInterpreter",
    "ScalarCalibrator",
    "ThresholdCal",
    "calibrate_threshold",
    "interpret_binary",
    "interpret_scalar",
    "EvalSummary",
    "accuracy_confusion",
    "pearson_r",
    "roc_auc",
    "Detector",
    "FisherEstimate",
    "FunctionChannel",
    "ResolutionReport",
    "ScenarioChannel",
    "delta_cr",
    "delta_np",
    "estimate_pfp",
    "fisher_information",
    "log_likelihood",
    "EnvironmentScene",
    "ScenarioConfig",
    "gen_sludge_scene",
    "gen_tumor_scene",
    "AsinMatrix",
    "AsinMethod",
    "AsinProjector",
    "MeasurementProcess",
    "apply_asin",
    "apply_measurement",
    "design_asin_matrix",
]

__version__ = "0.1.0"
