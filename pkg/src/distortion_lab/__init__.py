"""Linear distortion of diag(1, a, b) under rank-one perturbations and laminates."""
from .errors import *  # noqa: F401,F403
from .linalg3 import DiagonalMap, linear_distortion, distortion_report, singular_values

__version__ = "0.1.0"
