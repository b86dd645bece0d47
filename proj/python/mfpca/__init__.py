"""Python bindings for the mfpca mortality forecasting library."""

from ._core import *  # noqa: F401,F403
from ._core import MfpcaError, ModelKind, __doc__  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
