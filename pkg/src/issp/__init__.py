"""Exact landscape analysis of indicator-based subset selection."""
import os

# TBB in this ecosystem is often too old for numba; workqueue is always available
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

__version__ = "0.1.0"
