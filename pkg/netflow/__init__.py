"""
netflow - curvature-driven evolution of planar networks with triple junctions.

Smooth elliptic anisotropies evolve by a parabolic flow with Herring junction
conditions; crystalline anisotropies evolve by an ODE on segment heights
driven by minimal Cahn-Hoffman fields.
"""

import logging

__version__ = "0.1.0"

from netflow.schema import SCHEMA_VERSION
from netflow.errors import (
    InvalidAnisotropyError,
    NetflowError,
    NetworkError,
    NotPhiRegularError,
    NumericalError,
    ParseError,
    SingularityEvent,
)
from netflow.anisotropy import CrystallinePolytope, SmoothAnisotropy, regular_polygon
from netflow.network import Curve, Junction, Network, validate
from netflow.config import RunConfig

logging.getLogger(__name__).addHandler(logging.NullHandler())
