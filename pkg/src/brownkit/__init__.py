"""Brownian motion paths, path functionals and Monte Carlo checks against
closed-form laws."""

from brownkit._backend import BACKEND
from brownkit.errors import (BrownkitError, ConfigError, DomainError, PreconditionError,
                             SpecError)
from brownkit.functionals import Functional, HittingRecord, LocalTimeEstimate
from brownkit.generators import GeneratorSpec, Kind, generate
from brownkit.paths import Ensemble, Path, TimeGrid, restrict, value_at
from brownkit.rng import StreamKey, gaussian_stream, uniform_stream
from brownkit.stats import TestReport

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BrownkitError", "ConfigError", "DomainError", "PreconditionError", "SpecError",
    "Functional", "HittingRecord", "LocalTimeEstimate", "GeneratorSpec", "Kind", "generate",
    "Ensemble", "Path", "TimeGrid", "restrict", "value_at", "StreamKey", "gaussian_stream",
    "uniform_stream", "TestReport",
]
