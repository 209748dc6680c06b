"""Detector dead-time as a pattern filter.

A click blinds its detector for ``md`` whole time-bins, so patterns with two
clicks separated by fewer than ``md`` empty bins never occur.  The surviving
pattern probabilities keep their no-dead-time values up to a normalisation:
bins inside a dead window are silent for free, so each click removes ``md``
no-click factors, i.e. joint pattern probabilities are divided by
``p00^(2*md)`` and per-side ones by the marginal no-click probability to the
same power (two-click patterns).  Clicks in the trailing bins of a frame see a
truncated window, and clicks early in a frame can be eaten by the previous
frame's dead-time; the two effects pull in opposite directions and are both
neglected here.  The Monte Carlo module, which models the stream exactly,
quantifies the residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .detection import BinProbabilities
from .errors import DomainError
from .frames import PairInfo, _pair_denominators, _xlogp, class_cond_mi

__all__ = [
    "DeadTimeConfig",
    "pattern_allowed",
    "allowed_two_click_count",
    "filtered_joint_pattern_prob",
    "filtered_marginal_pattern_prob",
    "TwoClickPairCounts",
    "two_click_pair_counts",
    "class_cond_mi_22_deadtime",
    "pair_info_22_deadtime",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class DeadTimeConfig:
    """Dead-time length in whole time-bins; 0 disables the filter."""

    md: int = 0

    def __post_init__(self) -> None:
        if self.md < 0:
            raise DomainError(f"dead-time must be >= 0 bins, got {self.md}")


def pattern_allowed(pattern: int, n: int, md: int) -> bool:
    """True if no two clicks in the n-bit pattern sit within ``md`` bins.

    Consecutive clicks must be separated by at least ``md`` empty bins, i.e.
    positions must differ by more than ``md``.  For example with md=1 the
    pattern 1010 survives but 1100 does not.
    """
    if md < 0:
        raise DomainError(f"dead-time must be >= 0 bins, got {md}")
    if pattern < 0 or pattern >> n:
        raise DomainError(f"pattern {pattern:#x} does not fit in {n} bins")
    if md == 0:
        return True
    last = None
    for i in range(n):
        if pattern >> i & 1:
            if last is not None and i - last <= md:
                return False
            last = i
    return True


def allowed_two_click_count(n: int, md: int) -> int:
    """Number of two-click patterns that survive the dead-time filter."""
    if md < 0:
        raise DomainError(f"dead-time must be >= 0 bins, got {md}")
    if n <= md + 1:
        return 0
    return (n - md) * (n - md - 1) // 2


def filtered_joint_pattern_prob(base_prob: float, pattern_a: int, pattern_b: int,
                                n: int, md: int, p00: float) -> float:
    """Dead-time-adjusted joint probability of one two-click pattern pair."""
    if md == 0:
        return base_prob
    if p00 <= 0.0:
        raise DomainError("joint no-click probability must be positive under dead-time")
    if not (pattern_allowed(pattern_a, n, md) and pattern_allowed(pattern_b, n, md)):
        return 0.0
    return base_prob / p00 ** (2 * md)


def filtered_marginal_pattern_prob(base_prob: float, pattern: int, n: int, md: int,
                                   p0: float) -> float:
    """Dead-time-adjusted per-side probability of one two-click pattern."""
    if md == 0:
        return base_prob
    if p0 <= 0.0:
        raise DomainError("marginal no-click probability must be positive under dead-time")
    if not pattern_allowed(pattern, n, md):
        return 0.0
    return base_prob / p0 ** (2 * md)


class TwoClickPairCounts(NamedTuple):
    """Counts of surviving two-click pattern pairs by overlap."""

    both: int      # identical click positions (overlap 2)
    one: int       # exactly one shared position
    none: int      # disjoint click positions


def two_click_pair_counts(n: int, md: int) -> TwoClickPairCounts:
    """Count surviving (Alice, Bob) two-click pattern pairs per overlap class.

    For each position p, ``m_p`` partners are far enough away to pair with it;
    summing m_p and m_p^2 gives all three counts in O(n) exact integer
    arithmetic.  With md=0 these reduce to the unfiltered multiplicities.
    """
    if md < 0:
        raise DomainError(f"dead-time must be >= 0 bins, got {md}")
    if n <= md + 1:
        return TwoClickPairCounts(0, 0, 0)
    m = [n - 1 - min(p, md) - min(n - 1 - p, md) for p in range(n)]
    total = sum(m) // 2                      # valid patterns
    sum_sq = sum(v * v for v in m)
    one = sum_sq - 2 * total
    none = total * total - total - one
    return TwoClickPairCounts(both=total, one=one, none=none)


def class_cond_mi_22_deadtime(n: int, bins: BinProbabilities, md: int) -> float:
    """Shared bits per frame from (2, 2)-frames under a dead-time filter.

    Only the pattern-pair multiplicities change relative to the unfiltered
    class: surviving pairs keep probabilities set by their overlap, and the
    per-side conditional distribution is uniform over surviving patterns.
    """
    if md < 0:
        raise DomainError(f"dead-time must be >= 0 bins, got {md}")
    if md == 0:
        return class_cond_mi(n, 2, 2, bins)
    if n <= 2 * (md + 1):
        raise DomainError(f"no (2,2) patterns survive: need n > 2*(md+1), got n={n}, md={md}")
    counts = two_click_pair_counts(n, md)
    p00, p0c, pc0, pcc = bins.as_tuple()
    log_p = [
        _xlogp(2, pc0) + _xlogp(2, p0c) + _xlogp(n - 4, p00),   # overlap 0
        _xlogp(1, pcc) + _xlogp(1, pc0) + _xlogp(1, p0c) + _xlogp(n - 3, p00),
        _xlogp(2, pcc) + _xlogp(n - 2, p00),                    # overlap 2
    ]
    weights = [counts.none, counts.one, counts.both]
    terms = [math.log(w) + lp for w, lp in zip(weights, log_p) if w > 0 and lp > -math.inf]
    if not terms:
        raise DomainError("filtered (2,2) class has zero probability")
    m = max(terms)
    log_w_total = m + math.log(sum(math.exp(t - m) for t in terms))
    log_alpha = 2.0 * math.log(counts.both)    # uniform over surviving patterns
    mi = 0.0
    for w, lp in zip(weights, log_p):
        if w == 0 or lp == -math.inf:
            continue
        weight = math.exp(math.log(w) + lp - log_w_total)
        mi += weight * ((lp - log_w_total) + log_alpha) / _LN2
    return mi


def pair_info_22_deadtime(n: int, bins: BinProbabilities, lam: float, eta_a: float,
                          eta_b: float, q: float, md: int) -> PairInfo:
    """Shared bits per photon pair from (2, 2)-frames with dead-time applied."""
    det, gen = _pair_denominators(n, lam, eta_a, eta_b, q)
    if md == 0:
        from .frames import pair_info
        return pair_info(n, 2, 2, bins, lam, eta_a, eta_b, q)
    if n <= 2 * (md + 1):
        raise DomainError(f"no (2,2) patterns survive: need n > 2*(md+1), got n={n}, md={md}")
    counts = two_click_pair_counts(n, md)
    p00, p0c, pc0, pcc = bins.as_tuple()
    if p00 <= 0.0:
        raise DomainError("joint no-click probability must be positive under dead-time")
    log_p = [
        _xlogp(2, pc0) + _xlogp(2, p0c) + _xlogp(n - 4, p00),
        _xlogp(1, pcc) + _xlogp(1, pc0) + _xlogp(1, p0c) + _xlogp(n - 3, p00),
        _xlogp(2, pcc) + _xlogp(n - 2, p00),
    ]
    weights = [counts.none, counts.one, counts.both]
    terms = [math.log(w) + lp for w, lp in zip(weights, log_p) if w > 0 and lp > -math.inf]
    if not terms:
        return PairInfo(detected=0.0, generated=0.0)
    m = max(terms)
    log_w_total = m + math.log(sum(math.exp(t - m) for t in terms))
    # each click hides md bins whose no-click factors are certain, not P_00
    log_p_class = log_w_total - 2 * md * math.log(p00)
    h = math.exp(log_p_class) * class_cond_mi_22_deadtime(n, bins, md)
    return PairInfo(detected=h / (n * det), generated=h / (n * gen))
