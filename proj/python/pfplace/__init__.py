"""Markov-operator contaminant tracking and sensor placement."""

from ._pfplace import *  # noqa: F401,F403
from ._pfplace import __version__, Error  # noqa: F401
