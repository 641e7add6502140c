"""Functional-inequality laboratory on discretized path spaces.

Two halves, meant to be used together:

* ``transfer`` turns one functional inequality into another by explicit
  constant arithmetic (weighted log-Sobolev -> weak log-Sobolev ->
  Poincare / weak Poincare), with every intermediate constant recorded
  in an audit trail.
* ``samplers`` / ``estimators`` / ``hyperbolic`` produce Monte Carlo
  ensembles (Gaussian, Ornstein-Uhlenbeck, flat and hyperbolic Brownian
  bridges) and estimate variances, entropies, Dirichlet energies and
  tail bounds on them, so the inequalities can be checked at desk scale.
"""

from .profiles import AlphaProfile, BetaProfile, DomainError, ProfileError, TailBound
from .transfer import (
    DyadicParams,
    TransferError,
    TransferResult,
    WeightedLSICertificate,
    c1,
    c2,
    c3,
    entropy_inequality_check,
    optimize_dyadic_params,
    tail_to_weak_lsi,
    weak_lsi_to_poincare,
    weak_lsi_to_weak_poincare,
    weighted_lsi_to_weak_lsi,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaProfile",
    "BetaProfile",
    "DomainError",
    "DyadicParams",
    "ProfileError",
    "TailBound",
    "TransferError",
    "TransferResult",
    "WeightedLSICertificate",
    "c1",
    "c2",
    "c3",
    "entropy_inequality_check",
    "optimize_dyadic_params",
    "tail_to_weak_lsi",
    "weak_lsi_to_poincare",
    "weak_lsi_to_weak_poincare",
    "weighted_lsi_to_weak_lsi",
]
