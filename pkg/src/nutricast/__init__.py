"""Southern Ocean nutrient regression with Monte-Carlo-dropout uncertainty.

Trains dropout-regularized feed-forward regressors on ship-based
hydrographic data to predict phosphate and silicate from temperature,
pressure, salinity, oxygen, nitrate and polar-stereographic position,
and applies them (with per-row uncertainty) to external ESM- and
float-style tables.
"""

from .errors import NutricastError
from .external import (
    ExternalRow,
    GridField,
    diff_grids,
    grid_bin_mean,
    parse_external_table,
    predict_external_table,
)
from .features import (
    COLUMNS,
    FeatureMatrix,
    SplitSpec,
    Standardizer,
    apply_standardizer,
    build_feature_matrix,
    fit_standardizer,
    kfold_split,
    split_train_test,
)
from .ingest import (
    HydroSample,
    QcPolicy,
    TableSchema,
    apply_qc_filter,
    filter_southern_ocean,
    parse_hydro_table,
    write_hydro_table,
)
from .network import (
    ForwardMode,
    MlpConfig,
    MlpModel,
    MlpRegressor,
    TrainParams,
    fit_mlp,
    forward,
    grad_step,
    gradient_check,
    init_mlp,
    loss_mse,
)
from .projection import ProjectedPoint, inverse_aps, project_aps
from .training import CvReport, cross_validate_train, evaluate_mse, train_linear_baseline
from .uncertainty import UncertaintySummary, mc_dropout_predict, summarize_interval

__version__ = "0.1.0"

__all__ = [
    "COLUMNS",
    "CvReport",
    "ExternalRow",
    "FeatureMatrix",
    "ForwardMode",
    "GridField",
    "HydroSample",
    "MlpConfig",
    "MlpModel",
    "MlpRegressor",
    "NutricastError",
    "ProjectedPoint",
    "QcPolicy",
    "SplitSpec",
    "Standardizer",
    "TableSchema",
    "TrainParams",
    "UncertaintySummary",
    "apply_qc_filter",
    "apply_standardizer",
    "build_feature_matrix",
    "cross_validate_train",
    "diff_grids",
    "evaluate_mse",
    "filter_southern_ocean",
    "fit_mlp",
    "fit_standardizer",
    "forward",
    "grad_step",
    "gradient_check",
    "grid_bin_mean",
    "init_mlp",
    "inverse_aps",
    "kfold_split",
    "loss_mse",
    "mc_dropout_predict",
    "parse_external_table",
    "parse_hydro_table",
    "predict_external_table",
    "project_aps",
    "split_train_test",
    "summarize_interval",
    "train_linear_baseline",
    "write_hydro_table",
]
