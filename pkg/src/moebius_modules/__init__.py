"""Moebius transformations of Fredholm modules and polarized modules."""

from .errors import *  # noqa: F401,F403
from .fredholm import *  # noqa: F401,F403
from .moebius import *  # noqa: F401,F403
from .numerics import *  # noqa: F401,F403
from .polarized import *  # noqa: F401,F403
from .projective import *  # noqa: F401,F403
from .report import Check, Report  # noqa: F401
from .sphere_geometry import *  # noqa: F401,F403
from .star_algebra import *  # noqa: F401,F403

__version__ = "0.1.0"
