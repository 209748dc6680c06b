"""Single time-bin click statistics for a pair of threshold detectors.

Everything downstream (frame classes, dead-time filters, jitter events) is
built from the four joint per-bin probabilities ``P_ij`` with i = Alice,
j = Bob and outcomes 0 (no click) / c (click).  Detectors are threshold
devices: any number of photons, or a dark count, produces one click.
After-pulsing is absorbed into an inflated per-bin dark-count probability by
the caller; no rate-to-probability conversion is done here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .source import SourceModel
import math

__all__ = [
    "ChannelConfig",
    "BinProbabilities",
    "bare_bin_probs",
    "apply_dark_counts",
    "poissonian_bin_probs",
]

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ChannelConfig:
    """Total efficiencies and per-bin dark-count probabilities for both arms.

    ``eta_a``/``eta_b`` each combine detector efficiency and channel
    transmission into one survival probability per photon.  ``q_a``/``q_b``
    are per-bin dark-count probabilities (inflate them to fold in
    after-pulsing).
    """

    eta_a: float
    eta_b: float
    q_a: float = 0.0
    q_b: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eta_a", "eta_b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
        for name in ("q_a", "q_b"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise DomainError(f"{name} must lie in [0, 1), got {v!r}")


@dataclass(frozen=True)
class BinProbabilities:
    """Joint single-bin click probabilities; first index Alice, second Bob."""

    p00: float
    p0c: float
    pc0: float
    pcc: float

    def __post_init__(self) -> None:
        vals = (self.p00, self.p0c, self.pc0, self.pcc)
        if any(not 0.0 <= v <= 1.0 for v in vals):
            raise DomainError(f"bin probabilities must lie in [0, 1], got {vals}")
        if abs(sum(vals) - 1.0) > _SUM_TOL:
            raise DomainError(f"bin probabilities must sum to 1 within {_SUM_TOL}, got {sum(vals)!r}")

    @property
    def pa0(self) -> float:
        """Alice sees no click."""
        return self.p00 + self.p0c

    @property
    def pac(self) -> float:
        """Alice sees a click."""
        return self.pc0 + self.pcc

    @property
    def pb0(self) -> float:
        """Bob sees no click."""
        return self.p00 + self.pc0

    @property
    def pbc(self) -> float:
        """Bob sees a click."""
        return self.p0c + self.pcc

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p00, self.p0c, self.pc0, self.pcc)


def bare_bin_probs(model: SourceModel, cfg: ChannelConfig) -> BinProbabilities:
    """Joint per-bin click probabilities from source plus loss, dark counts ignored.

    The no-click outcomes are plain MGF evaluations:

        pi_00 = M(1, 1)        (neither arm clicks)
        pi_c0 = M(0, 1) - M(1, 1)
        pi_0c = M(1, 0) - M(1, 1)

    and the coincidence term is the complementary series
    ``sum_m P(m) [1 - (1-eta_a)^m][1 - (1-eta_b)^m]``.  Poissonian sources use
    closed forms arranged so that no large-term cancellation occurs even for
    means around 1e-5; generic sources are summed term by term (each term is
    non-negative) with an early stop once a term falls below 1e-18 of the
    running sum.
    """
    ea, eb = cfg.eta_a, cfg.eta_b
    if model.kind == "poissonian":
        a, b, c = model.lam * ea, model.lam * eb, model.lam * ea * eb
        pi00 = math.exp(-a - b + c)
        # b - c = lam*eta_b*(1-eta_a) >= 0, so expm1(c-b) <= 0 and both
        # click/no-click products below are sums of non-negative terms.
        pi0c = -math.exp(-a) * math.expm1(c - b)
        pic0 = -math.exp(-b) * math.expm1(c - a)
        picc = math.expm1(-a) * math.expm1(-b) + math.exp(-a - b) * math.expm1(c)
    else:
        pi00 = pi0c = pic0 = picc = 0.0
        for m, p in enumerate(model.probs):
            if p == 0.0:
                continue
            sa = (1.0 - ea) ** m          # Alice misses all m photons
            sb = (1.0 - eb) ** m
            pi00 += p * sa * sb
            pic0 += p * (1.0 - sa) * sb
            pi0c += p * sa * (1.0 - sb)
            term = p * (1.0 - sa) * (1.0 - sb)
            picc += term
            if term != 0.0 and term < 1e-18 * picc:
                # remaining support adds relatively negligible coincidence mass
                break
    return BinProbabilities(p00=pi00, p0c=pi0c, pc0=pic0, pcc=picc)


def apply_dark_counts(pi: BinProbabilities, q_a: float, q_b: float) -> BinProbabilities:
    """Fold independent per-bin dark counts into bare click probabilities.

    A dark count converts a no-click outcome into a click on that arm and is
    independent between arms; the per-arm probabilities may differ.
    """
    if not 0.0 <= q_a < 1.0 or not 0.0 <= q_b < 1.0:
        raise DomainError(f"dark-count probabilities must lie in [0, 1), got {(q_a, q_b)}")
    p00 = (1.0 - q_a) * (1.0 - q_b) * pi.p00
    p0c = (1.0 - q_a) * pi.p0c + (1.0 - q_a) * q_b * pi.p00
    pc0 = (1.0 - q_b) * pi.pc0 + q_a * (1.0 - q_b) * pi.p00
    pcc = pi.pcc + q_a * pi.p0c + q_b * pi.pc0 + q_a * q_b * pi.p00
    return BinProbabilities(p00=p00, p0c=p0c, pc0=pc0, pcc=pcc)


def poissonian_bin_probs(lam: float, eta_a: float, eta_b: float,
                         q_a: float = 0.0, q_b: float = 0.0) -> BinProbabilities:
    """Closed-form per-bin probabilities for a Poissonian source with dark counts.

    Mathematically identical to ``apply_dark_counts(bare_bin_probs(...))`` but
    assembled via the marginal no-click forms
    ``P^A_0 = (1-q_a) exp(-lam*eta_a)`` (and the Bob analogue), rearranged so
    the tiny click probabilities are computed without subtracting
    near-equal numbers.
    """
    cfg = ChannelConfig(eta_a=eta_a, eta_b=eta_b, q_a=q_a, q_b=q_b)
    if lam < 0:
        raise DomainError(f"mean pairs per bin must be >= 0, got {lam}")
    a, b, c = lam * eta_a, lam * eta_b, lam * eta_a * eta_b
    pi00 = math.exp(-a - b + c)
    pi0c = -math.exp(-a) * math.expm1(c - b)
    pic0 = -math.exp(-b) * math.expm1(c - a)
    picc = math.expm1(-a) * math.expm1(-b) + math.exp(-a - b) * math.expm1(c)
    p00 = (1.0 - q_a) * (1.0 - q_b) * pi00
    # P_0c = P^A_0 - P_00 expanded to avoid cancellation: the bracket is
    # (1 - (1-q_b) e^{-(b-c)}) = -expm1(c-b) + q_b e^{c-b}, both terms >= 0.
    p0c = (1.0 - q_a) * math.exp(-a) * (-math.expm1(c - b) + q_b * math.exp(c - b))
    pc0 = (1.0 - q_b) * math.exp(-b) * (-math.expm1(c - a) + q_a * math.exp(c - a))
    pcc = picc + q_a * pi0c + q_b * pic0 + q_a * q_b * pi00
    _ = cfg  # validation only
    return BinProbabilities(p00=p00, p0c=p0c, pc0=pc0, pcc=pcc)
