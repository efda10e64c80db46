"""Resilient continuum deformation coordination for multi-agent teams."""

from ._rcd import *  # noqa: F401,F403
from ._rcd import __doc__  # noqa: F401
