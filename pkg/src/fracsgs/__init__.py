"""
fracsgs: growth-based sequential Gaussian simulation of 2-D fracture traces.

Fracture traces grow bilaterally from seed points, one segment per sweep.
Each new segment orientation is drawn from a kriged local Gaussian
conditioned on nearby known and simulated segments.
"""

from .geometry import Point, Segment, Trace, TraceKind
from .growth import ConfigError, FractureNetwork, RunReport, SimConfig, run_simulation
from .variogram import SphericalModel

__version__ = "0.1.0"

__all__ = [
    "Point", "Segment", "Trace", "TraceKind",
    "ConfigError", "FractureNetwork", "RunReport", "SimConfig", "run_simulation",
    "SphericalModel", "__version__",
]
