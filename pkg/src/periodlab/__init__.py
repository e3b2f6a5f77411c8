"""Exact and numeric checks for cohomological periods of automorphic forms on GL(2)."""
from __future__ import annotations

__version__ = "0.1.0"
