"""Involution-driven reversible kernels: laws, maps, and verification tools."""

__version__ = "0.1.0"

from .involutions import (  # noqa: F401
    CATALOG_NAMES, InvolutionPair, SpaceDescriptor, catalog_get,
    check_involution, sample_points,
)
from .laws import law_from_spec  # noqa: F401
from .reports import VerificationReport  # noqa: F401
from .rng import RandomStream  # noqa: F401
