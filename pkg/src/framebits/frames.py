"""Frame-level combinatorics and shared-information budgets.

A frame is ``n`` contiguous time-bins; each side announces how many bins
clicked (``x`` for Alice, ``y`` for Bob), which sorts frames into
``(x, y)`` classes.  Within a class the joint pattern probability depends on
the patterns only through the number ``l`` of bins where both sides clicked,
so every class-level quantity reduces to a short sum over the valid overlap
range.  All probabilities are assembled in log space (log-gamma for the
combinatorics) so that frame sizes of 1e5 with per-bin click probabilities of
1e-5 stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.special import gammaln
from scipy.stats import binom

from .detection import BinProbabilities
from .errors import DomainError

__all__ = [
    "FrameQuery",
    "valid_overlap_range",
    "overlap_pattern_count",
    "log_overlap_pattern_count",
    "log_binom",
    "click_count_prob",
    "joint_click_count_prob",
    "class_cond_mi",
    "lossless_class_mi",
    "PairInfo",
    "pair_info",
    "pair_info_11",
    "pair_info_22",
    "per_bin_mi",
    "EntropyResult",
    "click_count_entropy",
    "click_count_mutual_information",
    "cond_mi_weighted_sum",
    "InfoReport",
    "frame_info",
]

_LN2 = math.log(2.0)


def valid_overlap_range(n: int, x: int, y: int) -> range:
    """Valid values of the both-clicked bin count ``l`` for an (x, y) class."""
    if n < 1 or not (0 <= x <= n) or not (0 <= y <= n):
        raise DomainError(f"invalid frame class n={n}, x={x}, y={y}")
    return range(max(0, x + y - n), min(x, y) + 1)


@dataclass(frozen=True)
class FrameQuery:
    """A frame size together with one announced click-count class."""

    n: int
    x: int
    y: int

    def __post_init__(self) -> None:
        valid_overlap_range(self.n, self.x, self.y)

    @property
    def overlap_range(self) -> range:
        return valid_overlap_range(self.n, self.x, self.y)


def overlap_pattern_count(n: int, x: int, y: int, l: int) -> int:
    """Number of joint pattern pairs with x, y clicks overlapping in l bins.

    Exact integer value of ``n! / (l! (x-l)! (y-l)! (n-x-y+l)!)``; use the log
    variant when a float is all that is needed.
    """
    if l not in valid_overlap_range(n, x, y):
        raise DomainError(f"overlap l={l} outside the valid range for n={n}, x={x}, y={y}")
    return math.comb(n, x) * math.comb(x, l) * math.comb(n - x, y - l)


def log_overlap_pattern_count(n: int, x: int, y: int, l: int) -> float:
    """Natural log of :func:`overlap_pattern_count`, safe for large frames."""
    if l not in valid_overlap_range(n, x, y):
        raise DomainError(f"overlap l={l} outside the valid range for n={n}, x={x}, y={y}")
    return float(
        gammaln(n + 1) - gammaln(l + 1) - gammaln(x - l + 1)
        - gammaln(y - l + 1) - gammaln(n - x - y + l + 1)
    )


def log_binom(n: int, k: int) -> float:
    """Natural log of the binomial coefficient C(n, k)."""
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def _xlogp(exponent: float, p: float) -> float:
    """exponent * ln(p) with the 0 * ln(0) := 0 convention; -inf if impossible."""
    if exponent == 0:
        return 0.0
    if p <= 0.0:
        return -math.inf
    return exponent * math.log(p)


def click_count_prob(n: int, x: int, p0: float, pc: float) -> float:
    """Probability of seeing exactly ``x`` clicked bins out of ``n``.

    Binomial in the per-bin click probability, evaluated in log space.
    """
    if not 0 <= x <= n:
        raise DomainError(f"click count x={x} outside [0, {n}]")
    lg = log_binom(n, x) + _xlogp(x, pc) + _xlogp(n - x, p0)
    return math.exp(lg) if lg > -math.inf else 0.0


def _log_class_terms(n: int, x: int, y: int, bins: BinProbabilities) -> tuple[list[int], list[float], list[float]]:
    """Per-overlap log pattern probability and log multiplicity for a class."""
    ls, logw, logp = [], [], []
    for l in valid_overlap_range(n, x, y):
        lp = (
            _xlogp(l, bins.pcc)
            + _xlogp(x - l, bins.pc0)
            + _xlogp(y - l, bins.p0c)
            + _xlogp(n - x - y + l, bins.p00)
        )
        if lp == -math.inf:
            continue
        ls.append(l)
        logw.append(log_overlap_pattern_count(n, x, y, l))
        logp.append(lp)
    return ls, logw, logp


def _logsumexp(values: list[float]) -> float:
    if not values:
        return -math.inf
    m = max(values)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in values))


def log_joint_click_count_prob(n: int, x: int, y: int, bins: BinProbabilities) -> float:
    """Natural log of the probability of the (x, y) click-count class."""
    _, logw, logp = _log_class_terms(n, x, y, bins)
    return _logsumexp([w + p for w, p in zip(logw, logp)])


def joint_click_count_prob(n: int, x: int, y: int, bins: BinProbabilities) -> float:
    """Probability that Alice announces ``x`` clicked bins and Bob ``y``."""
    lg = log_joint_click_count_prob(n, x, y, bins)
    return math.exp(lg) if lg > -math.inf else 0.0


def class_cond_mi(n: int, x: int, y: int, bins: BinProbabilities) -> float:
    """Shared bits per frame available from (x, y)-frames.

    Conditional mutual information between the two measurement patterns given
    both announced counts.  Patterns with equal overlap are equiprobable and
    the per-side conditional pattern distributions are uniform, so the sum
    collapses to O(min(x, y)) overlap terms.  Zero-probability patterns are
    skipped (0 log 0 := 0).
    """
    _, logw, logp = _log_class_terms(n, x, y, bins)
    log_pxy = _logsumexp([w + p for w, p in zip(logw, logp)])
    if log_pxy == -math.inf:
        raise DomainError(f"class (x={x}, y={y}) has zero probability for n={n}")
    log_alpha = log_binom(n, x) + log_binom(n, y)
    mi = 0.0
    for w, p in zip(logw, logp):
        weight = math.exp(w + p - log_pxy)
        mi += weight * ((p - log_pxy) + log_alpha) / _LN2
    return mi


def lossless_class_mi(n: int, x: int) -> float:
    """Shared bits per frame when both arms are lossless and dark-count free.

    Both sides then see identical patterns, so a frame with ``x`` clicks
    carries log2 C(n, x) bits.
    """
    if not 0 <= x <= n:
        raise DomainError(f"click count x={x} outside [0, {n}]")
    return log_binom(n, x) / _LN2


class PairInfo(NamedTuple):
    """Shared bits normalised per photon pair."""

    detected: float
    generated: float


def _pair_denominators(n: int, lam: float, eta_a: float, eta_b: float, q: float) -> tuple[float, float]:
    det = eta_a * eta_b * lam + q * q
    if det <= 0.0:
        raise DomainError("no detected pairs: eta_a*eta_b*lam + q^2 must be positive")
    if lam <= 0.0:
        raise DomainError("no generated pairs: lam must be positive")
    return det, lam


def pair_info_11(n: int, bins: BinProbabilities, lam: float,
                 eta_a: float, eta_b: float, q: float) -> PairInfo:
    """Closed-form shared bits per photon pair from (1, 1)-frames.

    The class has only two pattern geometries (same bin / different bins);
    with G = (n-1) P_c0 P_0c + P_cc P_00 the per-detected-pair information is

        P_00^{n-2} [ G log2(n/G) + P_cc P_00 log2(P_cc P_00)
                     + (n-1) P_c0 P_0c log2(P_c0 P_0c) ] / (eta_a eta_b lam + q^2)

    and the per-generated-pair variant divides by ``lam`` instead.
    """
    if n < 2:
        raise DomainError(f"(1,1)-frames need n >= 2, got {n}")
    det, gen = _pair_denominators(n, lam, eta_a, eta_b, q)
    p00, p0c, pc0, pcc = bins.as_tuple()
    same = pcc * p00
    diff = pc0 * p0c
    g = (n - 1) * diff + same
    if g <= 0.0:
        raise DomainError("class (1,1) has zero probability")
    bracket = g * math.log2(n / g)
    if same > 0.0:
        bracket += same * math.log2(same)
    if diff > 0.0:
        bracket += (n - 1) * diff * math.log2(diff)
    scale = math.exp(_xlogp(n - 2, p00)) if p00 > 0.0 or n == 2 else 0.0
    return PairInfo(detected=scale * bracket / det, generated=scale * bracket / gen)


def pair_info_22(n: int, bins: BinProbabilities, lam: float,
                 eta_a: float, eta_b: float, q: float) -> PairInfo:
    """Closed-form shared bits per photon pair from (2, 2)-frames.

    Three pattern geometries contribute (both clicks shared, one shared, none
    shared).  With

        W = (P_00 P_cc)^2 / 2 + (n-2) P_cc P_c0 P_0c P_00
            + (n-2)(n-3) (P_c0 P_0c)^2 / 4

    the per-detected-pair information is ``(n-1) P_00^{n-4} [ W log2(n(n-1)/(4W))
    + (P_cc P_00)^2 log2(P_cc P_00) + (n-2)(n-3)/2 (P_c0 P_0c)^2 log2(P_c0 P_0c)
    + (n-2) P_cc P_c0 P_0c P_00 log2(P_cc P_c0 P_0c P_00) ] / (eta_a eta_b lam + q^2)``.
    """
    if n < 4:
        raise DomainError(f"(2,2)-frames need n >= 4, got {n}")
    det, gen = _pair_denominators(n, lam, eta_a, eta_b, q)
    p00, p0c, pc0, pcc = bins.as_tuple()
    same2 = (pcc * p00) ** 2
    mixed = pcc * pc0 * p0c * p00
    diff2 = (pc0 * p0c) ** 2
    w = 0.5 * same2 + (n - 2) * mixed + 0.25 * (n - 2) * (n - 3) * diff2
    if w <= 0.0:
        raise DomainError("class (2,2) has zero probability")
    bracket = w * math.log2(n * (n - 1) / (4.0 * w))
    if same2 > 0.0:
        bracket += same2 * math.log2(pcc * p00)
    if diff2 > 0.0:
        bracket += 0.5 * (n - 2) * (n - 3) * diff2 * math.log2(pc0 * p0c)
    if mixed > 0.0:
        bracket += (n - 2) * mixed * math.log2(mixed)
    scale = (n - 1) * (math.exp(_xlogp(n - 4, p00)) if p00 > 0.0 or n == 4 else 0.0)
    return PairInfo(detected=scale * bracket / det, generated=scale * bracket / gen)


def pair_info(n: int, x: int, y: int, bins: BinProbabilities, lam: float,
              eta_a: float, eta_b: float, q: float) -> PairInfo:
    """Shared bits per photon pair from an arbitrary (x, y) class.

    General route: class probability times the class conditional information,
    divided by the mean pairs per frame.  (1,1) and (2,2) also have dedicated
    closed forms, kept as independent implementations.
    """
    det, gen = _pair_denominators(n, lam, eta_a, eta_b, q)
    p_class = joint_click_count_prob(n, x, y, bins)
    if p_class == 0.0:
        return PairInfo(detected=0.0, generated=0.0)
    h = p_class * class_cond_mi(n, x, y, bins)
    return PairInfo(detected=h / (n * det), generated=h / (n * gen))


def per_bin_mi(bins: BinProbabilities) -> float:
    """Mutual information carried by a single time-bin, in bits."""
    mi = 0.0
    for pj, pa, pb in (
        (bins.p00, bins.pa0, bins.pb0),
        (bins.p0c, bins.pa0, bins.pbc),
        (bins.pc0, bins.pac, bins.pb0),
        (bins.pcc, bins.pac, bins.pbc),
    ):
        if pj > 0.0:
            mi += pj * math.log2(pj / (pa * pb))
    return mi


def _marginal_window(n: int, p: float, tol: float) -> tuple[int, int, float]:
    """[lo, hi] covering a Binomial(n, p) up to tail mass ``tol``, plus the bound."""
    if p <= 0.0:
        return 0, 0, 0.0
    if p >= 1.0:
        return n, n, 0.0
    lo = int(binom.ppf(tol / 2, n, p))
    hi = int(binom.isf(tol / 2, n, p))
    lo = max(0, lo - 2)
    hi = min(n, hi + 2)
    excluded = 0.0
    if lo > 0:
        excluded += float(binom.cdf(lo - 1, n, p))
    if hi < n:
        excluded += float(binom.sf(hi, n, p))
    return lo, hi, excluded


class EntropyResult(NamedTuple):
    bits: float
    tail_bound: float


def click_count_entropy(n: int, bins: BinProbabilities, tol_tail: float = 1e-12) -> EntropyResult:
    """Joint entropy of the announced click counts, in bits.

    The (x, y) table is truncated to a window around both marginal binomial
    modes once the excluded marginal tail mass falls below ``tol_tail``; the
    returned bound caps the entropy the excluded cells could contribute.
    """
    if not 0.0 < tol_tail <= 1e-6:
        raise DomainError(f"tol_tail must lie in (0, 1e-6], got {tol_tail!r}")
    xlo, xhi, eps_a = _marginal_window(n, bins.pac, tol_tail)
    ylo, yhi, eps_b = _marginal_window(n, bins.pbc, tol_tail)
    h = 0.0
    for x in range(xlo, xhi + 1):
        for y in range(ylo, yhi + 1):
            lg = log_joint_click_count_prob(n, x, y, bins)
            if lg > -math.inf:
                h -= math.exp(lg) * lg / _LN2
    eps = eps_a + eps_b
    cells = (n + 1) ** 2 - (xhi - xlo + 1) * (yhi - ylo + 1)
    bound = eps * math.log2(max(cells, 2) / eps) if eps > 0.0 and cells > 0 else 0.0
    return EntropyResult(bits=h, tail_bound=bound)


def click_count_mutual_information(n: int, bins: BinProbabilities, tol_tail: float = 1e-12) -> float:
    """Mutual information between the two announced click counts, in bits.

    This is the exact amount of shared randomness given up by announcing the
    counts: per-frame information splits as
    ``n * per_bin_mi = sum_xy P(x,y) class_cond_mi(x,y) + count MI``.
    """
    if not 0.0 < tol_tail <= 1e-6:
        raise DomainError(f"tol_tail must lie in (0, 1e-6], got {tol_tail!r}")
    xlo, xhi, _ = _marginal_window(n, bins.pac, tol_tail)
    ylo, yhi, _ = _marginal_window(n, bins.pbc, tol_tail)
    mi = 0.0
    for x in range(xlo, xhi + 1):
        lpx = log_binom(n, x) + _xlogp(x, bins.pac) + _xlogp(n - x, bins.pa0)
        for y in range(ylo, yhi + 1):
            lpy = log_binom(n, y) + _xlogp(y, bins.pbc) + _xlogp(n - y, bins.pb0)
            lg = log_joint_click_count_prob(n, x, y, bins)
            if lg > -math.inf:
                mi += math.exp(lg) * (lg - lpx - lpy) / _LN2
    return mi


def cond_mi_weighted_sum(n: int, bins: BinProbabilities, tol_tail: float = 1e-12) -> float:
    """Class-probability-weighted conditional information, summed over classes."""
    if not 0.0 < tol_tail <= 1e-6:
        raise DomainError(f"tol_tail must lie in (0, 1e-6], got {tol_tail!r}")
    xlo, xhi, _ = _marginal_window(n, bins.pac, tol_tail)
    ylo, yhi, _ = _marginal_window(n, bins.pbc, tol_tail)
    total = 0.0
    for x in range(xlo, xhi + 1):
        for y in range(ylo, yhi + 1):
            lg = log_joint_click_count_prob(n, x, y, bins)
            if lg == -math.inf:
                continue
            total += math.exp(lg) * class_cond_mi(n, x, y, bins)
    return total


@dataclass(frozen=True)
class InfoReport:
    """Information budget for one frame class (or the all-class aggregate)."""

    n: int
    frame_class: tuple[int, int] | None
    h_cond_per_frame: float
    bits_per_detected_pair: float
    bits_per_generated_pair: float
    p_class: float
    h_kk: float
    count_mi: float
    h_frame_per_frame: float

    def __post_init__(self) -> None:
        if self.h_cond_per_frame < -1e-12 or self.h_kk < -1e-12:
            raise DomainError("entropies must be non-negative")
        if not -1e-12 <= self.p_class <= 1.0 + 1e-12:
            raise DomainError(f"class probability out of range: {self.p_class!r}")


def frame_info(n: int, bins: BinProbabilities, lam: float, eta_a: float, eta_b: float,
               q: float, frame_class: tuple[int, int] | None = None,
               tol_tail: float = 1e-12) -> InfoReport:
    """Assemble the information budget for a frame size and class.

    With ``frame_class=None`` the conditional information is weighted over all
    classes.  The exactly lossless, dark-count-free case (both efficiencies
    equal to one and q == 0) is detected exactly and routed to the
    log2-binomial form, where only equal-count classes exist.
    """
    det, gen = _pair_denominators(n, lam, eta_a, eta_b, q)
    lossless = (eta_a == 1.0 and eta_b == 1.0 and q == 0.0)
    h_kk = click_count_entropy(n, bins, tol_tail).bits
    kmi = click_count_mutual_information(n, bins, tol_tail)
    h_frame = n * per_bin_mi(bins)
    if frame_class is None:
        if lossless:
            h_cond = sum(
                click_count_prob(n, x, bins.pa0, bins.pac) * lossless_class_mi(n, x)
                for x in range(n + 1)
            )
        else:
            h_cond = cond_mi_weighted_sum(n, bins, tol_tail)
        p_class = 1.0
        bits = h_cond
    else:
        x, y = frame_class
        if lossless:
            if x != y:
                raise DomainError("lossless frames always have equal click counts")
            h_cond = lossless_class_mi(n, x)
            p_class = click_count_prob(n, x, bins.pa0, bins.pac)
        else:
            p_class = joint_click_count_prob(n, x, y, bins)
            h_cond = class_cond_mi(n, x, y, bins)
        bits = p_class * h_cond
    return InfoReport(
        n=n,
        frame_class=frame_class,
        h_cond_per_frame=h_cond,
        bits_per_detected_pair=bits / (n * det),
        bits_per_generated_pair=bits / (n * gen),
        p_class=p_class,
        h_kk=h_kk,
        count_mi=kmi,
        h_frame_per_frame=h_frame,
    )
