"""Python access to the linear-combination, KAK, protocol and tomography routines."""

from ._rqc import *  # noqa: F401,F403
from ._rqc import __doc__  # noqa: F401
