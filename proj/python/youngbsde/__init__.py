"""Young integration, exact p-variation and Monte-Carlo BSDE solvers with a Young drift term."""

from ._core import *  # noqa: F401,F403
from ._core import ValidationError, NumericalError  # noqa: F401

__version__ = "0.1.0"
