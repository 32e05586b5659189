"""Finite phase response curves of planar relaxation oscillators.

Three routes to the same curve: the singular-limit geometry (``singular``),
the adjoint/convolution approximation and direct simulation (``numeric``),
all built on the fast-slow model description in ``model``.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import *  # noqa: F401,F403
from .singular import *  # noqa: F401,F403
from .numeric import *  # noqa: F401,F403
from .config import RunConfig, load_config, parse_config  # noqa: F401
