"""Simulation toolkit for photon subtraction (PS) and generalized photon
subtraction (GPS) from squeezed light.

Submodules
----------
gaussian_core
    Covariance matrices, beam splitter, loss channel, Gaussian Wigner functions.
heralding
    Conditional states after an on/off or photon-number-resolving click.
tradeoff
    Quality versus click-probability curves and parameter solvers.
fock_oracle
    Independent truncated Fock-space computations used as ground truth.
tomography
    Temporal mode, synthetic homodyne data and MLE reconstruction.
cli
    ``photonsub`` command-line entry point.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .gaussian_core import SqueezingParameter, db_to_r, r_to_db  # noqa: E402
from .heralding import (  # noqa: E402
    HeraldSpec,
    LossBudget,
    PhaseSpaceGrid,
    SignedGaussianMixture,
    SqueezedFockState,
    herald_metrics,
    herald_onoff,
    herald_pnrd,
)

__all__ = [
    "__version__",
    "SqueezingParameter",
    "db_to_r",
    "r_to_db",
    "HeraldSpec",
    "LossBudget",
    "PhaseSpaceGrid",
    "SignedGaussianMixture",
    "SqueezedFockState",
    "herald_metrics",
    "herald_onoff",
    "herald_pnrd",
]
