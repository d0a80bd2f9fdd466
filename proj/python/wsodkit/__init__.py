"""Pseudo-ground-truth mining, refinement scheduling, proposal clustering,
VOC-2007 evaluation and detection loss kernels, backed by the C++ core."""

from wsodkit._core import *  # noqa: F401,F403
from wsodkit import _core as core  # noqa: F401

__version__ = "0.1.0"
