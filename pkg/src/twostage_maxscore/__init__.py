"""Two-stage maximum score estimation with nonparametrically generated regressors."""

from .dataset import Dataset, Observation
from .errors import EstimationError
from .first_stage import FirstStageConfig, FirstStageFit, Method, fit_first_stage
from .kernels import KernelFamily, KernelSpec
from .maxscore import (
    DEFAULT_GRID,
    GridSpec,
    MaxScoreEstimate,
    ParameterPoint,
    ScoreProblem,
    maximize_score,
    score,
    single_stage_estimate,
    subsampling_ci,
    two_stage_estimate,
)
from .montecarlo import StudyConfig, Variant, run_study, summarize
from .simulation import Design, DgpConfig, draw_sample, true_G

__all__ = [
    "DEFAULT_GRID", "Dataset", "Design", "DgpConfig", "EstimationError",
    "FirstStageConfig", "FirstStageFit", "GridSpec", "KernelFamily", "KernelSpec",
    "MaxScoreEstimate", "Method", "Observation", "ParameterPoint", "ScoreProblem",
    "StudyConfig", "Variant", "draw_sample", "fit_first_stage", "maximize_score",
    "run_study", "score", "single_stage_estimate", "subsampling_ci", "summarize",
    "true_G", "two_stage_estimate",
]
__version__ = "0.1.0"
