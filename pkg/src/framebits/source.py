"""Photon-pair source statistics.

A source emits ``m`` entangled pairs per time-bin with probability ``P(m)``.
The two supported flavours are an analytic Poissonian source (a pulsed
down-conversion source well below saturation) and a generic finite PMF for
anything else.  The central object is the loss-decorated moment generating
function

    M(nu, xi) = sum_m P(m) (1 - eta_A*nu)^m (1 - eta_B*xi)^m

from which all single-bin click probabilities follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["SourceModel"]


def _check_unit_interval(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class SourceModel:
    """Immutable pair-number distribution for a single time-bin.

    ``kind`` is ``"poissonian"`` (parameterised by the mean ``lam``) or
    ``"generic"`` (parameterised by a finite PMF ``p_0..p_M``).  For generic
    models any probability mass beyond the stored support is treated as zero;
    supplying a sufficiently long PMF is the caller's job.  The mean of a
    generic model is always computed from the PMF, never user-supplied.
    """

    kind: str
    lam: float = 0.0
    probs: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind == "poissonian":
            if self.lam < 0:
                raise DomainError(f"mean pairs per bin must be >= 0, got {self.lam}")
        elif self.kind == "generic":
            p = np.asarray(self.probs, dtype=float)
            if p.size == 0:
                raise DomainError("generic source needs a non-empty PMF")
            if np.any(p < 0):
                raise DomainError("PMF entries must be non-negative")
            total = float(p.sum())
            if not (1.0 - 1e-12 <= total <= 1.0 + 1e-12):
                raise DomainError(f"PMF must sum to 1 within 1e-12, got {total!r}")
            object.__setattr__(self, "probs", tuple(float(v) for v in p))
            object.__setattr__(self, "lam", float(np.dot(np.arange(p.size), p)))
        else:
            raise DomainError(f"unknown source kind {self.kind!r}")

    @classmethod
    def poissonian(cls, lam: float) -> "SourceModel":
        """Poissonian source with mean ``lam`` pairs per time-bin."""
        return cls(kind="poissonian", lam=lam)

    @classmethod
    def generic(cls, probs) -> "SourceModel":
        """Finite PMF source; ``probs[m]`` is the chance of ``m`` pairs."""
        return cls(kind="generic", probs=tuple(probs))

    @classmethod
    def truncated_poissonian(cls, lam: float, tail: float = 1e-15) -> "SourceModel":
        """Poissonian PMF truncated once the remaining tail mass drops below ``tail``.

        Useful as an independent cross-check of the analytic Poissonian path.
        The dropped tail is bounded analytically by the geometric majorant of
        the term ratio, so the loop terminates for any mean.
        """
        if lam < 0:
            raise DomainError(f"mean pairs per bin must be >= 0, got {lam}")
        if not 0.0 < tail < 1.0:
            raise DomainError(f"tail must lie in (0, 1), got {tail!r}")
        probs = [math.exp(-lam)]
        term = probs[0]
        m = 0
        while True:
            ratio = lam / (m + 1)
            next_term = term * ratio
            if m + 2 > lam:
                # remaining mass <= next_term / (1 - lam/(m+2)), geometric bound
                bound = next_term / (1.0 - lam / (m + 2))
                if bound <= tail or next_term == 0.0:
                    break
            m += 1
            term = next_term
            probs.append(term)
        return cls(kind="generic", probs=tuple(probs))

    @property
    def mean(self) -> float:
        """Average number of pairs per time-bin."""
        return self.lam

    def pmf(self, m: int) -> float:
        """Probability of exactly ``m`` pairs in a bin (zero beyond stored support)."""
        if m < 0:
            raise DomainError(f"pair count must be >= 0, got {m}")
        if self.kind == "poissonian":
            if self.lam == 0.0:
                return 1.0 if m == 0 else 0.0
            return math.exp(-self.lam + m * math.log(self.lam) - math.lgamma(m + 1))
        return self.probs[m] if m < len(self.probs) else 0.0

    def mgf(self, nu: float, xi: float, eta_a: float, eta_b: float) -> float:
        """Loss-decorated moment generating function M(nu, xi).

        For the Poissonian kind this is the closed form
        ``exp(lam * (-eta_a*nu - eta_b*xi + eta_a*eta_b*nu*xi))``; for generic
        kinds the finite sum over the stored support (missing tail mass counts
        as zero).
        """
        _check_unit_interval("nu", nu)
        _check_unit_interval("xi", xi)
        _check_unit_interval("eta_a", eta_a)
        _check_unit_interval("eta_b", eta_b)
        if self.kind == "poissonian":
            return math.exp(self.lam * (-eta_a * nu - eta_b * xi + eta_a * eta_b * nu * xi))
        m = np.arange(len(self.probs))
        return float(np.dot(self.probs, (1.0 - eta_a * nu) ** m * (1.0 - eta_b * xi) ** m))
