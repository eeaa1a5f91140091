"""Numerical toolkit for energy-dissipation (EDP) convergence of gradient systems."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .core import (BipotentialClass, DissipationPotential, GradientSystem1D, PeriodicCoefficient,  # noqa: F401
                   SampledBipotential, ScalarFunction, classify_bipotential, tilt_system)
