"""Python bindings for the rvm core: Neno compiler, Fhat machine and quad store."""

from ._core import RvmError, Store, canonical, compile

__all__ = ["RvmError", "Store", "canonical", "compile"]
