"""Riemann-invariant constructions for first-order quasilinear systems."""

import logging
import os

__version__ = "0.1.0"

_level = os.environ.get("RIEMANN_KIT_LOG")
if _level:
    logging.basicConfig(level=getattr(logging, _level.upper(), logging.INFO))
