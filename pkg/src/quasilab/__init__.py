"""Numerical laboratory for harmonic measure, boundary rotation and multifractal spectra of quasidisks."""

import os

# the bundled TBB is too old for numba; the portable work-queue layer is enough here
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

__version__ = "0.1.0"
