"""Independent brute-force references used by the test suite.

Everything here enumerates joint measurement patterns explicitly, building
probabilities from per-bin products, so none of the closed-form combinatorics
under test is reused.  Feasible up to frame sizes around 10 (2^n x 2^n pattern
pairs).
"""

import math

import numpy as np

from framebits.detection import BinProbabilities
from framebits.jitter import JitterEvents


def joint_pattern_table(n: int, bins: BinProbabilities) -> np.ndarray:
    """2^n x 2^n joint pattern probabilities from independent per-bin draws.

    Index bit k of the row (column) is Alice's (Bob's) outcome in bin k.
    """
    m = np.array([[bins.p00, bins.p0c], [bins.pc0, bins.pcc]])
    table = np.array([[1.0]])
    for _ in range(n):
        table = np.kron(table, m)
    return table


def popcounts(n: int) -> np.ndarray:
    return np.array([bin(i).count("1") for i in range(2 ** n)])


def marginal_pattern_probs(n: int, p0: float, pc: float) -> np.ndarray:
    """Per-pattern probability for one side, from per-bin marginals."""
    pc_counts = popcounts(n)
    return pc ** pc_counts * p0 ** (n - pc_counts)


def class_prob_table(n: int, bins: BinProbabilities) -> np.ndarray:
    """(n+1) x (n+1) table of click-count class probabilities."""
    table = joint_pattern_table(n, bins)
    counts = popcounts(n)
    out = np.zeros((n + 1, n + 1))
    np.add.at(out, (counts[:, None], counts[None, :]), table)
    return out


def brute_cond_mi(n: int, x: int, y: int, bins: BinProbabilities) -> float:
    """Conditional mutual information by full pattern-pair enumeration."""
    table = joint_pattern_table(n, bins)
    counts = popcounts(n)
    pr = marginal_pattern_probs(n, bins.pa0, bins.pac)
    ps = marginal_pattern_probs(n, bins.pb0, bins.pbc)
    rows = np.flatnonzero(counts == x)
    cols = np.flatnonzero(counts == y)
    block = table[np.ix_(rows, cols)]
    pxy = block.sum()
    if pxy <= 0:
        raise ValueError("empty class")
    px = pr[rows].sum()
    py = ps[cols].sum()
    cond = block / pxy
    denom = np.outer(pr[rows] / px, ps[cols] / py)
    nz = cond > 0
    return float(np.sum(cond[nz] * np.log2(cond[nz] / denom[nz])))


def brute_count_entropy(n: int, bins: BinProbabilities) -> float:
    t = class_prob_table(n, bins)
    nz = t > 0
    return float(-np.sum(t[nz] * np.log2(t[nz])))


def brute_count_mi(n: int, bins: BinProbabilities) -> float:
    t = class_prob_table(n, bins)
    pa = t.sum(axis=1)
    pb = t.sum(axis=0)
    nz = t > 0
    return float(np.sum(t[nz] * np.log2((t / np.outer(pa, pb))[nz])))


def brute_weighted_cond_mi(n: int, bins: BinProbabilities) -> float:
    t = class_prob_table(n, bins)
    total = 0.0
    for x in range(n + 1):
        for y in range(n + 1):
            if t[x, y] > 0:
                total += t[x, y] * brute_cond_mi(n, x, y, bins)
    return total


def brute_bin_mi(bins: BinProbabilities) -> float:
    mi = 0.0
    for pj, pa, pb in ((bins.p00, bins.pa0, bins.pb0), (bins.p0c, bins.pa0, bins.pbc),
                       (bins.pc0, bins.pac, bins.pb0), (bins.pcc, bins.pac, bins.pbc)):
        if pj > 0:
            mi += pj * math.log2(pj / (pa * pb))
    return mi


# --- dead-time -------------------------------------------------------------

def deadtime_mask(n: int, md: int) -> np.ndarray:
    """Boolean allowed-pattern mask over all 2^n patterns."""
    ok = np.ones(2 ** n, dtype=bool)
    for pattern in range(2 ** n):
        positions = [i for i in range(n) if pattern >> i & 1]
        ok[pattern] = all(b - a > md for a, b in zip(positions, positions[1:]))
    return ok


def brute_deadtime_class_total(n: int, bins: BinProbabilities, md: int,
                               x: int = 2, y: int = 2) -> float:
    """Filtered class probability: sum of adjusted surviving pattern pairs."""
    table = joint_pattern_table(n, bins)
    counts = popcounts(n)
    ok = deadtime_mask(n, md)
    rows = np.flatnonzero((counts == x) & ok)
    cols = np.flatnonzero((counts == y) & ok)
    return float(table[np.ix_(rows, cols)].sum() / bins.p00 ** (2 * md))


def brute_deadtime_cond_mi_22(n: int, bins: BinProbabilities, md: int) -> float:
    """Conditional information of the filtered (2,2) class by enumeration.

    Marginal conditionals come from the filtered per-side pattern
    probabilities, not from an assumed uniform law.
    """
    table = joint_pattern_table(n, bins)
    counts = popcounts(n)
    ok = deadtime_mask(n, md)
    rows = np.flatnonzero((counts == 2) & ok)
    cols = np.flatnonzero((counts == 2) & ok)
    block = table[np.ix_(rows, cols)]
    w = block.sum()
    pr = marginal_pattern_probs(n, bins.pa0, bins.pac)[rows]
    ps = marginal_pattern_probs(n, bins.pb0, bins.pbc)[cols]
    cond = block / w
    denom = np.outer(pr / pr.sum(), ps / ps.sum())
    nz = cond > 0
    return float(np.sum(cond[nz] * np.log2(cond[nz] / denom[nz])))


# --- jitter ----------------------------------------------------------------

def dense_jitter_table(n: int, events: JitterEvents, bins: BinProbabilities) -> np.ndarray:
    """Edge-aware single-click cell probabilities, assigned cell by cell.

    Independent of the grouped representation: every (i, j) is classified
    directly.  Zero-based indices; requires symmetric adjacency events.
    """
    p00 = bins.p00
    same, e, adj = events.p11, events.p00e, events.p1star
    iso2 = events.p10 * events.p01
    t = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            first = 0 in (i, j)
            last = (n - 1) in (i, j)
            if i == j:
                if i == 0:
                    v = same * e * p00 ** (n - 2)
                elif i == n - 1:
                    v = same * p00 ** (n - 2)
                else:
                    v = same * e * p00 ** (n - 3)
            elif abs(i - j) == 1:
                if first:
                    v = adj * e * p00 ** (n - 3)
                elif last:
                    v = adj * p00 ** (n - 3)
                else:
                    v = adj * e * p00 ** (n - 4)
            else:
                if first and last:
                    v = iso2 * p00 ** (n - 3)
                elif first:
                    v = iso2 * e * p00 ** (n - 4)
                elif last:
                    v = iso2 * p00 ** (n - 4)
                else:
                    v = iso2 * e * p00 ** (n - 5)
            t[i, j] = v
    return t


def brute_jitter_hd(n: int, table: np.ndarray, lam: float, eta_a: float, eta_b: float,
                    q_a: float, q_b: float) -> float:
    """Post-selected bits per detected pair from a dense cell table.

    Uses uniform per-side conditional pattern distributions, matching the
    closed-form budget definition.
    """
    w = table.sum()
    nz = table > 0
    s = float(np.sum(table[nz] * np.log2(table[nz])))
    total = w * (2 * math.log2(n) - math.log2(w)) + s
    return total / (n * (eta_a * eta_b * lam + q_a * q_b))


class PatternUniverse:
    """One fully enumerated frame: reusable pattern table plus reductions.

    Builds the 2^n x 2^n joint table once and answers every class-level
    question from it, so a scan over many classes or dead-times does not
    re-enumerate.
    """

    def __init__(self, n: int, bins: BinProbabilities):
        self.n = n
        self.bins = bins
        self.table = joint_pattern_table(n, bins)
        self.counts = popcounts(n)
        self.pr = marginal_pattern_probs(n, bins.pa0, bins.pac)
        self.ps = marginal_pattern_probs(n, bins.pb0, bins.pbc)
        key = self.counts[:, None] * (n + 1) + self.counts[None, :]
        flat = np.bincount(key.ravel(), weights=self.table.ravel(),
                           minlength=(n + 1) ** 2)
        self.class_table = flat.reshape(n + 1, n + 1)

    def class_prob(self, x: int, y: int) -> float:
        return float(self.class_table[x, y])

    def count_prob(self, x: int) -> float:
        return float(self.class_table[x, :].sum())

    def cond_mi(self, x: int, y: int) -> float:
        rows = np.flatnonzero(self.counts == x)
        cols = np.flatnonzero(self.counts == y)
        block = self.table[np.ix_(rows, cols)]
        pxy = block.sum()
        if pxy <= 0:
            raise ValueError("empty class")
        cond = block / pxy
        denom = np.outer(self.pr[rows] / self.pr[rows].sum(),
                         self.ps[cols] / self.ps[cols].sum())
        nz = cond > 0
        return float(np.sum(cond[nz] * np.log2(cond[nz] / denom[nz])))

    def count_entropy(self) -> float:
        t = self.class_table
        nz = t > 0
        return float(-np.sum(t[nz] * np.log2(t[nz])))

    def deadtime_block_22(self, md: int):
        ok = deadtime_mask(self.n, md)
        rows = np.flatnonzero((self.counts == 2) & ok)
        return self.table[np.ix_(rows, rows)], rows

    def deadtime_class_total_22(self, md: int) -> float:
        block, _ = self.deadtime_block_22(md)
        return float(block.sum() / self.bins.p00 ** (2 * md))

    def deadtime_cond_mi_22(self, md: int) -> float:
        block, rows = self.deadtime_block_22(md)
        w = block.sum()
        pr = self.pr[rows]
        cond = block / w
        denom = np.outer(pr / pr.sum(), self.ps[rows] / self.ps[rows].sum())
        nz = cond > 0
        return float(np.sum(cond[nz] * np.log2(cond[nz] / denom[nz])))
