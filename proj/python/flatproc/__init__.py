"""Exact moments and Monte Carlo simulation of Poisson k-flat processes in a ball."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
