"""Dyna-style REINFORCE optimizer for constrained parametric design."""

from ._dynaopt import *  # noqa: F401,F403
from ._dynaopt import __all__, __version__  # noqa: F401
