"""Manifolds of mappings on sampled boxes.

Hölder function spaces, target manifolds with local additions, the charts
of the mapping manifold built from them, and a verification harness.
"""
from .errors import *  # noqa: F401,F403
from .holder import (CornerGrid, GridMap, HolderExponent, SampledFunction, SmoothFn,
                     holder_norm, holder_seminorm, sup_norm)
from .manifolds import get_manifold, lie_local_addition, tangent_manifold
from .mapping import SampledMap, SampledSection, chart_apply, chart_at, chart_inverse, transition
from .numerics import FDConfig, QuadratureRule, VerificationReport, fd_directional, oracle_holder

__version__ = "0.1.0"
