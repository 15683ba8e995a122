"""Maximum-margin separators in polytopal Hilbert and Funk geometry."""
from hilbertsep.embed import NnModel, classify_nn, embed_point, embedded_distance, norm_sigma, train_nn
from hilbertsep.errors import *  # noqa: F401,F403
from hilbertsep.geometry import (
    Domain, Hyperplane, ball_contains, distance, distances, funk_ball, funk_distance, hilbert_ball,
    hilbert_distance, metric_ball, reverse_funk_distance, validate_domain,
)
from hilbertsep.kernels import BACKEND
from hilbertsep.lp import LinearProgram, LinearProgramBuilder, SimplexSolver, solve
from hilbertsep.svm import (
    SeparatorModel, classify, make_dataset, margin_upper_bound, predict, separable_at, train_hard,
    train_soft,
)

__version__ = "0.1.0"
