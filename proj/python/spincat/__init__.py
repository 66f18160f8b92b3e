"""Spin-F cat-state Ramsey magnetometry."""

from ._spincat import *  # noqa: F401,F403
from ._spincat import __doc__  # noqa: F401

__version__ = "1.0.0"
