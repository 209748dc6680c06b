"""Detector timing jitter for single-click frames.

Jitter makes a detection register ``k`` bins after the photon's true bin with
probability ``J_k``.  For frames where both sides announce exactly one click,
each joint pattern decomposes into a handful of few-bin events:

* ``p11``   both clicks in the same bin (two-bin event: a click can have
            jumped in from the bin before),
* ``p00e``  neither side clicks in the last bin of the frame (a photon there
            may leak into the next frame),
* ``p1star``/``pstar1``  adjacent clicks, Alice's respectively one bin before
            or after Bob's (three-bin events),
* ``p10``/``p01``  an isolated click on one side with nothing nearby on the
            other (two-bin events),
* ``p1``/``pe``  the per-side one-click and empty-last-bin events.

Pattern probabilities are products of these with the right number of joint
no-click factors: same-bin cells pair the two-bin event with ``p00^(n-3)``,
adjacent cells pair a three-bin event with ``p00^(n-4)``, and far cells pair
two isolated-click events with ``p00^(n-5)`` (interior cells; frame-edge cells
differ and are tabulated separately).  The edge-neglecting forms need
``n >= 6``.  Only jumps of at most one bin are handled in closed form; an
extension of the marginal events to two-bin jumps is provided, and the Monte
Carlo module covers arbitrary jump profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .detection import BinProbabilities
from .errors import DomainError
from .frames import _pair_denominators, _xlogp

__all__ = [
    "JitterProfile",
    "JitterEvents",
    "click_events",
    "ApproxPatternProbs",
    "single_click_pattern_probs",
    "ExactPatternTable",
    "exact_pattern_table",
    "detected_info_11",
    "JitterComparison",
    "exact_vs_approx",
    "jitter_compare",
    "ExtendedMarginalEvents",
    "extended_click_events",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class JitterProfile:
    """Discrete jump probabilities; ``j[k]`` moves a detection k bins late."""

    j: tuple[float, ...]

    def __post_init__(self) -> None:
        j = tuple(float(v) for v in self.j)
        if not j:
            raise DomainError("jump profile must not be empty")
        if any(v < 0 for v in j):
            raise DomainError("jump probabilities must be non-negative")
        if abs(sum(j) - 1.0) > 1e-12:
            raise DomainError(f"jump probabilities must sum to 1 within 1e-12, got {sum(j)!r}")
        object.__setattr__(self, "j", j)

    @classmethod
    def from_j0(cls, j0: float) -> "JitterProfile":
        """Single-bin profile: stay with probability j0, move one bin late otherwise."""
        return cls(j=(j0, 1.0 - j0)) if j0 < 1.0 else cls(j=(1.0,))

    @property
    def j0(self) -> float:
        return self.j[0]

    def prob(self, k: int) -> float:
        return self.j[k] if 0 <= k < len(self.j) else 0.0

    @property
    def max_jump(self) -> int:
        return len(self.j) - 1


@dataclass(frozen=True)
class JitterEvents:
    """Few-bin event probabilities for single-click frames."""

    p1: float
    pe: float
    p11: float
    p00e: float
    p1star: float
    pstar1: float
    p10: float
    p01: float

    def __post_init__(self) -> None:
        for name in ("p1", "pe", "p11", "p00e", "p1star", "pstar1", "p10", "p01"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"event probability {name} out of [0, 1]: {v!r}")


def click_events(bins: BinProbabilities, profile: JitterProfile,
                 symmetric: bool = False) -> JitterEvents:
    """Event probabilities for one-bin jitter on top of per-bin click statistics.

    Dark counts are shift-invariant, so the jump probabilities act directly on
    the dressed per-bin probabilities.  With ``symmetric=True`` the
    symmetric-loss expressions are used (requiring matching cross terms);
    otherwise the general two-sided forms, which reduce to the symmetric ones
    when the channel is symmetric.
    """
    if profile.max_jump > 1:
        raise DomainError("closed-form events support jumps of at most one bin")
    j0 = profile.prob(0)
    j1 = profile.prob(1)
    p00, p0c, pc0, pcc = bins.as_tuple()
    pa0, pac, pb0, pbc = bins.pa0, bins.pac, bins.pb0, bins.pbc
    if symmetric:
        if abs(pc0 - p0c) > 1e-12 * max(pc0, p0c, 1e-300):
            raise DomainError("symmetric forms need matching cross probabilities")
        p0, pc = pa0, pac
        p11 = j0 * j0 * p00 * pcc + 2.0 * j0 * j1 * p0c * pc0 + j1 * j1 * pcc
        p00e = p00 + j1 * j1 * pcc + 2.0 * j1 * p0c
        adj = (j0 * j0 * p00 * pc0 * p0c + j1 * j1 * pc * p0 * pc0
               + j0 * j1 * p0 * (p00 * pcc + p0c * pc0))
        iso = j0 * p00 * pc0 + j1 * pc0 * p0 + j0 * j1 * p00 * pcc + j1 * j1 * pc0 * pc
        p1 = j0 * pc * p0 + j1 * pc
        pe = p0 + j1 * pc
        return JitterEvents(p1=p1, pe=pe, p11=p11, p00e=p00e,
                            p1star=adj, pstar1=adj, p10=iso, p01=iso)
    p11 = j0 * j0 * p00 * pcc + 2.0 * j0 * j1 * p0c * pc0 + j1 * j1 * pcc
    p00e = p00 + j1 * j1 * pcc + j1 * (p0c + pc0)
    p1star = (j0 * j0 * p00 * pc0 * p0c + j1 * j1 * pbc * pa0 * pc0
              + j0 * j1 * (pa0 * p00 * pcc + pb0 * p0c * pc0))
    pstar1 = (j0 * j0 * p00 * pc0 * p0c + j1 * j1 * pac * pb0 * p0c
              + j0 * j1 * (pb0 * p00 * pcc + pa0 * p0c * pc0))
    p10 = j0 * p00 * pc0 + j1 * pc0 * pb0 + j0 * j1 * p00 * pcc + j1 * j1 * pc0 * pbc
    p01 = j0 * p00 * p0c + j1 * p0c * pa0 + j0 * j1 * p00 * pcc + j1 * j1 * p0c * pac
    p1 = j0 * pac * pa0 + j1 * pac
    pe = pa0 + j1 * pac
    return JitterEvents(p1=p1, pe=pe, p11=p11, p00e=p00e,
                        p1star=p1star, pstar1=pstar1, p10=p10, p01=p01)


class ApproxPatternProbs(NamedTuple):
    """Edge-neglecting single-click joint pattern probabilities."""

    same: float        # both clicks in the same bin
    adj_ab: float      # Alice's click one bin before Bob's
    adj_ba: float      # Bob's click one bin before Alice's
    far: float         # clicks more than one bin apart
    class_prob: float  # probability of the whole (1, 1) class


def _exp_or_zero(lg: float) -> float:
    return math.exp(lg) if lg > -math.inf else 0.0


def single_click_pattern_probs(n: int, events: JitterEvents,
                               bins: BinProbabilities) -> ApproxPatternProbs:
    """Interior-cell pattern probabilities with frame edges neglected.

    Valid for ``n >= 6`` (smaller frames cannot hold the widest event plus an
    independent last bin).  The class probability sums the three geometries
    with multiplicities n, 2(n-1) and (n-1)(n-2).
    """
    if n < 6:
        raise DomainError(f"edge-neglecting pattern probabilities need n >= 6, got {n}")
    lp00 = _xlogp(1, bins.p00)
    same = _exp_or_zero(_xlogp(1, events.p11) + _xlogp(1, events.p00e) + (n - 3) * lp00)
    adj_ab = _exp_or_zero(_xlogp(1, events.p1star) + _xlogp(1, events.p00e) + (n - 4) * lp00)
    adj_ba = _exp_or_zero(_xlogp(1, events.pstar1) + _xlogp(1, events.p00e) + (n - 4) * lp00)
    far = _exp_or_zero(_xlogp(1, events.p10) + _xlogp(1, events.p01)
                       + _xlogp(1, events.p00e) + (n - 5) * lp00)
    class_prob = n * same + (n - 1) * (adj_ab + adj_ba) + (n - 1) * (n - 2) * far
    return ApproxPatternProbs(same=same, adj_ab=adj_ab, adj_ba=adj_ba, far=far,
                              class_prob=class_prob)


class _CellGroup(NamedTuple):
    label: str
    log_prob: float
    multiplicity: int


@dataclass(frozen=True)
class ExactPatternTable:
    """Edge-aware single-click joint pattern probabilities, grouped by geometry.

    Cells sharing a formula are stored once with their multiplicity; the
    groups cover all n^2 (row, column) cells of the class.  Symmetric channels
    only (the adjacent events must agree in both directions).
    """

    n: int
    groups: tuple[_CellGroup, ...]

    @property
    def total(self) -> float:
        """Probability of the (1, 1) class, edges included."""
        return sum(m * _exp_or_zero(lp) for _, lp, m in self.groups)

    def cell_count(self) -> int:
        return sum(m for _, _, m in self.groups)

    def dense(self) -> np.ndarray:
        """Full n x n table of cell probabilities (row = Alice's click bin)."""
        n = self.n
        vals = {label: _exp_or_zero(lp) for label, lp, _ in self.groups}
        t = np.full((n, n), vals["far_mid"])
        for i in range(n):
            t[i, i] = vals["diag_mid"]
            if i + 1 < n:
                t[i, i + 1] = t[i + 1, i] = vals["adj_mid"]
        t[0, 2:n - 1] = t[2:n - 1, 0] = vals["far_first"]
        t[n - 1, 1:n - 2] = t[1:n - 2, n - 1] = vals["far_last"]
        t[0, n - 1] = t[n - 1, 0] = vals["far_corner"]
        t[0, 1] = t[1, 0] = vals["adj_first"]
        t[n - 2, n - 1] = t[n - 1, n - 2] = vals["adj_last"]
        t[0, 0] = vals["diag_first"]
        t[n - 1, n - 1] = vals["diag_last"]
        return t

    def mutual_information(self) -> float:
        """Plug-in conditional mutual information of the table, in bits.

        Uses the table's own row/column marginals, which is what an empirical
        estimator converges to; the uniform-marginal variant used for
        information budgets lives in :func:`detected_info_11`.
        """
        t = self.dense()
        w = t.sum()
        if w <= 0.0:
            raise DomainError("single-click class has zero probability")
        p = t / w
        r = p.sum(axis=1)
        c = p.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.log2(p / np.outer(r, c))
        return float(np.sum(np.where(p > 0, p * ratio, 0.0)))


def exact_pattern_table(n: int, events: JitterEvents,
                        bins: BinProbabilities) -> ExactPatternTable:
    """Build the edge-aware cell groups for the (1, 1) class.

    First-bin clicks keep the full two/three-bin event (the extra bin belongs
    to the previous frame), last-bin clicks drop the empty-last-bin factor.
    """
    if n < 6:
        raise DomainError(f"edge-aware pattern table needs n >= 6, got {n}")
    if not math.isclose(events.p1star, events.pstar1, rel_tol=1e-9, abs_tol=1e-300):
        raise DomainError("edge-aware table requires symmetric adjacency events")
    lp00 = _xlogp(1, bins.p00)
    l11 = _xlogp(1, events.p11)
    le = _xlogp(1, events.p00e)
    ladj = _xlogp(1, events.p1star)
    liso2 = _xlogp(1, events.p10) + _xlogp(1, events.p01)
    groups = (
        _CellGroup("diag_first", l11 + le + (n - 2) * lp00, 1),
        _CellGroup("diag_mid", l11 + le + (n - 3) * lp00, n - 2),
        _CellGroup("diag_last", l11 + (n - 2) * lp00, 1),
        _CellGroup("adj_first", ladj + le + (n - 3) * lp00, 2),
        _CellGroup("adj_mid", ladj + le + (n - 4) * lp00, 2 * (n - 3)),
        _CellGroup("adj_last", ladj + (n - 3) * lp00, 2),
        _CellGroup("far_first", liso2 + le + (n - 4) * lp00, 2 * (n - 3)),
        _CellGroup("far_last", liso2 + (n - 4) * lp00, 2 * (n - 3)),
        _CellGroup("far_corner", liso2 + (n - 3) * lp00, 2),
        _CellGroup("far_mid", liso2 + le + (n - 5) * lp00, (n - 3) * (n - 4)),
    )
    return ExactPatternTable(n=n, groups=groups)


def detected_info_11(n: int, events: JitterEvents, bins: BinProbabilities, lam: float,
                     eta_a: float, eta_b: float, q_a: float, q_b: float,
                     exact: bool = False) -> float:
    """Shared bits per detected pair from single-click frames with jitter.

    Post-selected information with uniform per-side conditional pattern
    distributions; the detected-pair denominator is
    ``n * (eta_a * eta_b * lam + q_a * q_b)``.  ``exact=True`` swaps the
    edge-neglecting cell probabilities for the edge-aware table.
    """
    denom = eta_a * eta_b * lam + q_a * q_b
    if denom <= 0.0:
        raise DomainError("no detected pairs: eta_a*eta_b*lam + q_a*q_b must be positive")
    if exact:
        table = exact_pattern_table(n, events, bins)
        cells = [(m, _exp_or_zero(lp), lp) for _, lp, m in table.groups]
    else:
        probs = single_click_pattern_probs(n, events, bins)
        cells = [
            (n, probs.same, _xlogp(1, probs.same)),
            (n - 1, probs.adj_ab, _xlogp(1, probs.adj_ab)),
            (n - 1, probs.adj_ba, _xlogp(1, probs.adj_ba)),
            ((n - 1) * (n - 2), probs.far, _xlogp(1, probs.far)),
        ]
    w = sum(m * v for m, v, _ in cells)
    if w <= 0.0:
        raise DomainError("single-click class has zero probability")
    total = w * (2.0 * math.log2(n) - math.log2(w))
    for m, v, lv in cells:
        if v > 0.0:
            total += m * v * lv / _LN2
    return total / (n * denom)


class JitterComparison(NamedTuple):
    n: int
    exact: float
    approx: float
    pct_diff: float


def exact_vs_approx(n: int, events: JitterEvents, bins: BinProbabilities, lam: float,
                    eta_a: float, eta_b: float, q_a: float, q_b: float) -> JitterComparison:
    """Edge-aware versus edge-neglecting information for one frame size."""
    exact = detected_info_11(n, events, bins, lam, eta_a, eta_b, q_a, q_b, exact=True)
    approx = detected_info_11(n, events, bins, lam, eta_a, eta_b, q_a, q_b, exact=False)
    pct = 100.0 * abs(exact - approx) / exact if exact != 0.0 else math.inf
    return JitterComparison(n=n, exact=exact, approx=approx, pct_diff=pct)


def jitter_compare(n_values, events: JitterEvents, bins: BinProbabilities, lam: float,
                   eta_a: float, eta_b: float, q_a: float, q_b: float) -> list[JitterComparison]:
    """Exact/approximate comparison over a range of frame sizes."""
    return [exact_vs_approx(int(n), events, bins, lam, eta_a, eta_b, q_a, q_b)
            for n in n_values]


class ExtendedMarginalEvents(NamedTuple):
    """Marginal events and same-bin coincidence for jumps of up to two bins."""

    p1: float
    pe: float
    p11: float


def extended_click_events(bins: BinProbabilities, profile: JitterProfile) -> ExtendedMarginalEvents:
    """Three-bin-window events when two-bin jumps are possible.

    Covers the per-side one-click and empty-last-bin events plus the same-bin
    coincidence; the remaining joint events follow the same construction but
    are not provided in closed form (use the Monte Carlo module for full
    information estimates with two-bin jumps).  Symmetric channels assumed.
    """
    if profile.max_jump > 2:
        raise DomainError("closed-form extended events support jumps of at most two bins")
    j0, j1, j2 = profile.prob(0), profile.prob(1), profile.prob(2)
    p00, p0c, pc0, pcc = bins.as_tuple()
    p0, pc = bins.pa0, bins.pac
    p1 = pc * (j2 + j1 * p0 + j0 * p0 * p0)
    pe = j2 * pc + j1 * p0 * pc + p0 * p0
    p11 = (j0 * j0 * p00 * p00 * pcc + j1 * j1 * p00 * pcc + j2 * j2 * pcc
           + 2.0 * j0 * j1 * p00 * pc0 * pcc + 2.0 * j0 * j2 * pc0 * p0 * pc
           + 2.0 * j1 * j2 * pc0 * pc)
    return ExtendedMarginalEvents(p1=p1, pe=pe, p11=p11)
