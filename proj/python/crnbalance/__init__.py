"""Detailed-balance analysis of bidirectional mass-action reaction networks."""

from ._core import System, nullspace

__all__ = ["System", "nullspace"]
