"""Determinantal point processes on the plane, sphere and hyperbolic disk.

Kernels, exact samplers and the fluctuation theory of linear statistics
for the three rotation- and translation-invariant projection models.
"""
__version__ = "0.1.0"

from .geometry import DomainError, Isometry, PointAtInfinity, SpaceKind  # noqa: E402
from .kernels import EnvelopeSpec, KernelSpec  # noqa: E402
from .numerics import QuadratureConfig, QuadResult, RngStream  # noqa: E402
from .sampler import PointSample, SampleConfig, SamplingError, TruncationError  # noqa: E402
from .testfunctions import TestFunction, builtin_test_functions  # noqa: E402

__all__ = [
    "DomainError", "EnvelopeSpec", "Isometry", "KernelSpec", "PointAtInfinity", "PointSample",
    "QuadResult", "QuadratureConfig", "RngStream", "SampleConfig", "SamplingError", "SpaceKind",
    "TestFunction", "TruncationError", "builtin_test_functions", "__version__",
]
