"""Stochastic oracle: simulate the photon stream bin by bin.

The simulator draws pair counts per time-bin, thins each photon through its
arm's efficiency, shifts each surviving detection by a random jump, adds dark
counts, thresholds to clicks and finally applies non-paralysable dead-time by
scanning the stream left to right.  Frames are cut from a contiguous stream
(with warm-up bins in front) so cross-frame jitter leakage and dead-time occur
naturally.  Everything is deterministic given the seed and the chunk layout;
chunks use independently spawned generator streams and merge by integer
addition, so results do not depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .deadtime import DeadTimeConfig
from .detection import ChannelConfig
from .errors import DomainError, InsufficientSamplesError
from .jitter import JitterProfile
from .source import SourceModel

__all__ = [
    "SimConfig",
    "SimResult",
    "simulate",
    "CondMIEstimate",
    "estimate_cond_mi",
    "write_tag_stream",
]

_NO_JITTER = JitterProfile(j=(1.0,))
_MIN_CLASS_FRAMES = 1000


@dataclass(frozen=True)
class SimConfig:
    """Full description of one simulation run, including the chunk layout."""

    source: SourceModel
    channel: ChannelConfig
    frame_size: int
    n_frames: int
    seed: int = 0
    jitter: JitterProfile = field(default=_NO_JITTER)
    deadtime: DeadTimeConfig = field(default=DeadTimeConfig(0))
    chunk_frames: int = 250_000
    track_classes: tuple[tuple[int, int], ...] = ((1, 1),)

    def __post_init__(self) -> None:
        if self.frame_size < 1:
            raise DomainError(f"frame size must be >= 1, got {self.frame_size}")
        if self.n_frames < 1:
            raise DomainError(f"frame count must be >= 1, got {self.n_frames}")
        if self.chunk_frames < 1:
            raise DomainError(f"chunk size must be >= 1, got {self.chunk_frames}")
        if self.track_classes and self.frame_size > 62:
            raise DomainError("pattern tracking encodes patterns in 64-bit words; "
                              "frame size must be <= 62 when track_classes is set")

    @property
    def n_chunks(self) -> int:
        return -(-self.n_frames // self.chunk_frames)


class SimResult(NamedTuple):
    """Counts accumulated over all simulated frames."""

    frame_size: int
    n_frames: int
    class_counts: dict[tuple[int, int], int]
    bin_joint_counts: np.ndarray          # [both silent, Bob only, Alice only, both click]
    pattern_pair_counts: dict[tuple[int, int], dict[tuple[int, int], int]]
    click_positions: tuple[np.ndarray, np.ndarray] | None = None

    def single_click_cells(self) -> np.ndarray:
        """(i, j) click-position count matrix over (1, 1)-frames."""
        n = self.frame_size
        cells = np.zeros((n, n), dtype=np.int64)
        for (r, s), c in self.pattern_pair_counts.get((1, 1), {}).items():
            cells[int(r).bit_length() - 1, int(s).bit_length() - 1] += c
        return cells

    def single_click_group_counts(self) -> dict[str, int]:
        """(1, 1) pattern counts aggregated into the edge-aware cell groups."""
        n = self.frame_size
        cells = self.single_click_cells()
        out: dict[str, int] = {}

        def add(label, value):
            out[label] = out.get(label, 0) + int(value)

        add("diag_first", cells[0, 0])
        add("diag_last", cells[n - 1, n - 1])
        add("diag_mid", np.trace(cells) - cells[0, 0] - cells[n - 1, n - 1])
        adj = sum(cells[i, i + 1] + cells[i + 1, i] for i in range(n - 1))
        add("adj_first", cells[0, 1] + cells[1, 0])
        add("adj_last", cells[n - 2, n - 1] + cells[n - 1, n - 2])
        add("adj_mid", adj - out["adj_first"] - out["adj_last"])
        add("far_first", cells[0, 2:n - 1].sum() + cells[2:n - 1, 0].sum())
        add("far_last", cells[n - 1, 1:n - 2].sum() + cells[1:n - 2, n - 1].sum())
        add("far_corner", cells[0, n - 1] + cells[n - 1, 0])
        far_total = int(cells.sum()) - sum(
            out[k] for k in ("diag_first", "diag_last", "diag_mid",
                             "adj_first", "adj_last", "adj_mid",
                             "far_first", "far_last", "far_corner")
        )
        add("far_mid", far_total)
        return out


def _apply_jitter(rng, landed_len, idx, counts, profile: JitterProfile) -> np.ndarray:
    landed = np.zeros(landed_len, dtype=np.int64)
    if idx.size == 0:
        return landed
    if profile.max_jump == 0:
        np.add.at(landed, idx, counts)
        return landed
    jumps = rng.multinomial(counts, profile.j)
    for k in range(len(profile.j)):
        col = jumps[:, k]
        if col.any():
            np.add.at(landed, idx + k, col)
    return landed


def _apply_deadtime(click: np.ndarray, md: int) -> np.ndarray:
    if md == 0:
        return click
    pos = np.flatnonzero(click)
    keep = np.zeros(pos.size, dtype=bool)
    last = -md - 1
    for k, p in enumerate(pos):
        if p - last > md:
            keep[k] = True
            last = p
    out = np.zeros_like(click)
    out[pos[keep]] = True
    kept = pos[keep]
    if kept.size > 1:
        assert int(np.diff(kept).min()) > md, "dead-time filter left clicks too close"
    return out


def _simulate_chunk(cfg: SimConfig, chunk_index: int, seed_entropy,
                    keep_positions: bool):
    n, n_chunk = cfg.frame_size, min(cfg.chunk_frames, cfg.n_frames - chunk_index * cfg.chunk_frames)
    rng = np.random.Generator(np.random.Philox(seed_entropy))
    warmup = cfg.jitter.max_jump + cfg.deadtime.md
    nbins = warmup + n_chunk * n
    pad = cfg.jitter.max_jump

    if cfg.source.kind == "poissonian":
        pairs = rng.poisson(cfg.source.lam, nbins)
    else:
        pairs = rng.choice(len(cfg.source.probs), size=nbins, p=np.asarray(cfg.source.probs))
    idx = np.flatnonzero(pairs)

    clicks = []
    for eta, q in ((cfg.channel.eta_a, cfg.channel.q_a), (cfg.channel.eta_b, cfg.channel.q_b)):
        surv = rng.binomial(pairs[idx], eta) if idx.size else np.zeros(0, dtype=np.int64)
        nz = surv > 0
        landed = _apply_jitter(rng, nbins + pad, idx[nz], surv[nz], cfg.jitter)
        click = landed[:nbins] > 0
        if q > 0.0:
            click |= rng.random(nbins) < q
        clicks.append(_apply_deadtime(click, cfg.deadtime.md))

    frames_a = clicks[0][warmup:].reshape(n_chunk, n)
    frames_b = clicks[1][warmup:].reshape(n_chunk, n)
    ka = frames_a.sum(axis=1)
    kb = frames_b.sum(axis=1)
    class_counts = np.bincount(ka * (n + 1) + kb, minlength=(n + 1) ** 2)
    bin_joint = np.bincount((2 * frames_a + frames_b).ravel(), minlength=4)

    pattern_counts: dict[tuple[int, int], dict[tuple[int, int], int]] = {}
    if cfg.track_classes:
        powers = (1 << np.arange(n, dtype=np.uint64))
        for x, y in cfg.track_classes:
            sel = (ka == x) & (kb == y)
            if not sel.any():
                pattern_counts[(x, y)] = {}
                continue
            r = (frames_a[sel].astype(np.uint64) * powers).sum(axis=1)
            s = (frames_b[sel].astype(np.uint64) * powers).sum(axis=1)
            uniq, cnt = np.unique(np.stack([r, s], axis=1), axis=0, return_counts=True)
            pattern_counts[(x, y)] = {
                (int(k[0]), int(k[1])): int(c) for k, c in zip(uniq, cnt)
            }

    positions = None
    if keep_positions:
        offset = chunk_index * cfg.chunk_frames * n
        positions = tuple(
            (np.flatnonzero(clicks[side][warmup:]).astype(np.uint64) + offset)
            for side in (0, 1)
        )
    return class_counts, bin_joint, pattern_counts, positions, n_chunk


def _merge_pattern_counts(into, part) -> None:
    for cls, d in part.items():
        tgt = into.setdefault(cls, {})
        for k, v in d.items():
            tgt[k] = tgt.get(k, 0) + v


def simulate(cfg: SimConfig, max_workers: int | None = None,
             keep_click_positions: bool = False) -> SimResult:
    """Run the frame simulation described by ``cfg``.

    ``max_workers`` defaults to the FRAMEBITS_MAX_WORKERS environment variable
    (or 1).  Results are identical for any worker count because each chunk has
    its own spawned generator stream and merging is plain integer addition.
    """
    if max_workers is None:
        max_workers = int(os.environ.get("FRAMEBITS_MAX_WORKERS", "1"))
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_chunks)
    jobs = [(cfg, i, seeds[i], keep_click_positions) for i in range(cfg.n_chunks)]
    if max_workers > 1 and cfg.n_chunks > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            parts = list(pool.map(_simulate_chunk_star, jobs))
    else:
        parts = [_simulate_chunk(*job) for job in jobs]

    n = cfg.frame_size
    class_counts = np.zeros((n + 1) ** 2, dtype=np.int64)
    bin_joint = np.zeros(4, dtype=np.int64)
    pattern_counts: dict[tuple[int, int], dict[tuple[int, int], int]] = {}
    pos_a, pos_b = [], []
    for cc, bj, pc, pos, _ in parts:
        class_counts += cc
        bin_joint += bj
        _merge_pattern_counts(pattern_counts, pc)
        if pos is not None:
            pos_a.append(pos[0])
            pos_b.append(pos[1])
    class_dict = {
        (k // (n + 1), k % (n + 1)): int(v)
        for k, v in enumerate(class_counts) if v > 0
    }
    positions = None
    if keep_click_positions:
        positions = (np.concatenate(pos_a) if pos_a else np.zeros(0, np.uint64),
                     np.concatenate(pos_b) if pos_b else np.zeros(0, np.uint64))
    return SimResult(
        frame_size=n,
        n_frames=cfg.n_frames,
        class_counts=class_dict,
        bin_joint_counts=bin_joint,
        pattern_pair_counts=pattern_counts,
        click_positions=positions,
    )


def _simulate_chunk_star(args):
    return _simulate_chunk(*args)


class CondMIEstimate(NamedTuple):
    bits: float
    stderr: float
    miller_madow_bias: float
    n_class_frames: int


def _plugin_mi(counts: np.ndarray, r_index: np.ndarray, s_index: np.ndarray,
               n_r: int, n_s: int) -> float:
    total = counts.sum()
    p = counts / total
    pr = np.bincount(r_index, weights=p, minlength=n_r)
    ps = np.bincount(s_index, weights=p, minlength=n_s)
    nz = p > 0
    return float(np.sum(p[nz] * np.log2(p[nz] / (pr[r_index[nz]] * ps[s_index[nz]]))))


def estimate_cond_mi(result: SimResult, x: int, y: int, n_boot: int = 200,
                     boot_seed: int = 12345) -> CondMIEstimate:
    """Plug-in conditional mutual information for one tracked frame class.

    The standard error is a multinomial bootstrap over the class's frames
    (``n_boot`` resamples); the Miller-Madow first-order bias of the plug-in
    estimate is attached for reference, not subtracted.
    """
    if (x, y) not in result.pattern_pair_counts:
        raise DomainError(f"class {(x, y)} was not tracked during simulation")
    pairs = result.pattern_pair_counts[(x, y)]
    n_cls = sum(pairs.values())
    if n_cls < _MIN_CLASS_FRAMES:
        raise InsufficientSamplesError(
            f"class {(x, y)} has {n_cls} frames; need at least {_MIN_CLASS_FRAMES} "
            "for a meaningful plug-in estimate")
    keys = list(pairs.keys())
    counts = np.array([pairs[k] for k in keys], dtype=np.int64)
    r_vals = sorted({k[0] for k in keys})
    s_vals = sorted({k[1] for k in keys})
    r_map = {v: i for i, v in enumerate(r_vals)}
    s_map = {v: i for i, v in enumerate(s_vals)}
    r_index = np.array([r_map[k[0]] for k in keys])
    s_index = np.array([s_map[k[1]] for k in keys])

    mi = _plugin_mi(counts, r_index, s_index, len(r_vals), len(s_vals))
    k_joint = int((counts > 0).sum())
    k_r = len(r_vals)
    k_s = len(s_vals)
    bias = (k_joint - k_r - k_s + 1) / (2.0 * n_cls * np.log(2.0))

    rng = np.random.Generator(np.random.Philox(boot_seed))
    p_hat = counts / n_cls
    boots = rng.multinomial(n_cls, p_hat, size=n_boot)
    vals = np.array([
        _plugin_mi(boots[b], r_index, s_index, len(r_vals), len(s_vals))
        for b in range(n_boot)
    ])
    return CondMIEstimate(bits=mi, stderr=float(vals.std(ddof=1)),
                          miller_madow_bias=float(bias), n_class_frames=n_cls)


def write_tag_stream(result: SimResult, path: str, fmt: str = "bin") -> int:
    """Write one record per click: arm tag (A/B) plus absolute bin index.

    ``fmt="bin"`` writes little-endian records of one ASCII side byte followed
    by an unsigned 64-bit bin index; ``fmt="csv"`` writes ``side,bin`` rows.
    Records are sorted by bin index, ties A before B.  Returns the record
    count.  Requires the simulation to have been run with
    ``keep_click_positions=True``.
    """
    if result.click_positions is None:
        raise DomainError("simulation was run without keep_click_positions=True")
    pos_a, pos_b = result.click_positions
    sides = np.concatenate([np.zeros(pos_a.size, np.uint8), np.ones(pos_b.size, np.uint8)])
    bins_ = np.concatenate([pos_a, pos_b])
    order = np.lexsort((sides, bins_))
    sides, bins_ = sides[order], bins_[order]
    if fmt == "bin":
        rec = np.empty(sides.size, dtype=[("side", "S1"), ("bin", "<u8")])
        rec["side"] = np.where(sides == 0, b"A", b"B")
        rec["bin"] = bins_
        with open(path, "wb") as fh:
            fh.write(rec.tobytes())
    elif fmt == "csv":
        with open(path, "w", encoding="ascii") as fh:
            fh.write("side,bin\n")
            for s, b in zip(sides, bins_):
                fh.write(f"{'A' if s == 0 else 'B'},{int(b)}\n")
    else:
        raise DomainError(f"unknown tag stream format {fmt!r}")
    return int(sides.size)
