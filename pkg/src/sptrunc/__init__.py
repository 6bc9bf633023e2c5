"""Truncated Haar-symplectic matrices: sampling, exact Pfaffian-point-process
correlations, limiting laws and Monte Carlo validation."""
from . import asymptotics, harness, io, kernels, quadrature, quaternion, sampler, verify
from .asymptotics import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .harness import *  # noqa: F401,F403
from .kernels import *  # noqa: F401,F403
from .quaternion import *  # noqa: F401,F403
from .sampler import *  # noqa: F401,F403
from .io import OutputError
from .verify import CheckResult, run_checks

__version__ = "0.1.0"
