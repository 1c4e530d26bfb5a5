"""Online personalization of articulated-pose forecasts.

Per-dimension time-varying AR models, estimated by exponentially-weighted
recursive least squares, correct the residuals of any base predictor.
Includes the pose/rotation math, evaluation metrics, per-individual model
banks with oracle/learned selection, and a benchmark CLI.
"""

__version__ = "0.1.0"

from .ar import ArModel, ar_predict, bic_order_select, fit_ar_batch, lagged_design
from .bank import (
    ModelBank,
    oracle_classify,
    oracle_classify_per_dimension,
    oracle_refit,
    selection_error_matrix,
    train_bank,
)
from .classifier import LinearClassifier, extract_features
from .corrector import ResidualCorrector
from .errors import (
    ConfigError,
    DegenerateInputError,
    InvalidInputError,
    NumericalDegeneracyError,
    NumericalError,
    ParseError,
    PosecastError,
    RankDeficiencyError,
    SchemaError,
)
from .external import ForecastRecord, load_external_predictions, write_external_predictions
from .metrics import ErrorCurve, aggregate_objective, error_curve, mea, mpje
from .predictors import (
    Predictor,
    RidgePredictor,
    ScriptedPredictor,
    ZeroVelocityPredictor,
    ridge_regression_fit,
    ridge_regression_predict,
    zero_velocity_predict,
)
from .protocol import ProtocolConfig, RunResult, generate_records, run_protocol
from .rls import RlsState
from .rotations import (
    canonicalize_expmap,
    euler_to_rotmat,
    expmap_frames_to_euler,
    expmap_to_quat,
    quat_conjugate,
    quat_multiply,
    quat_rotate_vector,
    quat_to_expmap,
    quat_to_rotmat,
    rotmat_to_euler,
    rotmat_to_quat,
)
from .sequence import PoseSequence, unwrap_angles
from .skeleton import Skeleton, center_and_normalize, forward_kinematics
from .synth import SyntheticSpec, generate

__all__ = [name for name in dir() if not name.startswith("_")]
