"""Fock-space models of DV/CV entanglement swapping."""

from ._core import *  # noqa: F401,F403
from ._core import Error, __doc__  # noqa: F401
