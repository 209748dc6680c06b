"""Command-line front end.

Subcommands compute per-bin click probabilities, frame-size sweeps,
frame-size optimisation, edge-aware versus edge-neglecting jitter
comparisons, and Monte Carlo validation runs.  Results are emitted as CSV
(RFC-4180 style, header row first, floats with 15 significant digits) or as a
JSON object carrying the effective config plus a ``rows`` array; with a fixed
seed every run is byte-identical.

Exit codes: 0 success, 2 configuration error, 3 numerical domain error,
4 insufficient Monte Carlo samples.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .deadtime import (DeadTimeConfig, class_cond_mi_22_deadtime,
                       pair_info_22_deadtime, two_click_pair_counts)
from .detection import BinProbabilities, ChannelConfig, poissonian_bin_probs
from .errors import DomainError, InsufficientSamplesError
from .frames import (class_cond_mi, click_count_entropy, frame_info,
                     joint_click_count_prob, pair_info, pair_info_11,
                     pair_info_22)
from .jitter import JitterProfile, click_events, exact_vs_approx
from .montecarlo import SimConfig, estimate_cond_mi, simulate, write_tag_stream
from .presets import PRESETS
from .source import SourceModel

__all__ = ["main"]

_FLOAT_FMT = ".17g"   # full float64 round-trip; well above the 12-digit contract

_PARAM_KEYS = {
    "preset": str, "lam": float, "eta": float, "eta_a": float, "eta_b": float,
    "q": float, "q_a": float, "q_b": float, "j0": float, "jitter": list,
    "md": int, "n": int, "classes": list, "sweep_start": int, "sweep_stop": int,
    "sweep_points": int, "sweep_step": int, "frames": int, "seed": int,
    "chunk_frames": int, "objective": str, "output": str, "format": str,
}


class ConfigError(Exception):
    """Bad configuration file or flag combination."""


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with flat parameter keys; flags override")
    parser.add_argument("--preset", choices=sorted(PRESETS),
                        help="named detector preset supplying eta, q, j0 and dead-time")
    parser.add_argument("--lam", type=float, help="mean photon pairs per time-bin")
    parser.add_argument("--eta", type=float, help="total efficiency for both arms")
    parser.add_argument("--eta-a", dest="eta_a", type=float, help="Alice's total efficiency")
    parser.add_argument("--eta-b", dest="eta_b", type=float, help="Bob's total efficiency")
    parser.add_argument("--q", type=float, help="per-bin dark-count probability, both arms")
    parser.add_argument("--q-a", dest="q_a", type=float)
    parser.add_argument("--q-b", dest="q_b", type=float)
    parser.add_argument("--j0", type=float,
                        help="probability a detection stays in its bin; note a measured "
                             "heralded efficiency w folds jitter in (w = eta*J0), so pass "
                             "the deconvolved eta alongside")
    parser.add_argument("--md", type=int, help="dead-time in whole bins")
    parser.add_argument("--output", help="output path (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framebits",
        description="Information budgets for frame-encoded time-bin photon pairs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bin-probs", help="joint per-bin click probabilities")
    _add_common(p)

    p = sub.add_parser("frame-info", help="information budget at one frame size")
    _add_common(p)
    p.add_argument("--n", type=int, help="frame size in bins")
    p.add_argument("--classes", nargs="*", help="frame classes, e.g. 1,1 2,2")

    p = sub.add_parser("sweep", help="bits per detected pair versus frame size")
    _add_common(p)
    p.add_argument("--sweep-start", dest="sweep_start", type=int)
    p.add_argument("--sweep-stop", dest="sweep_stop", type=int)
    p.add_argument("--sweep-points", dest="sweep_points", type=int,
                   help="log-spaced point count (alternative to --sweep-step)")
    p.add_argument("--sweep-step", dest="sweep_step", type=int, help="linear step")
    p.add_argument("--classes", nargs="*", help="frame classes, e.g. 1,1 2,2")

    p = sub.add_parser("optimize", help="frame size maximising bits per detected pair")
    _add_common(p)
    p.add_argument("--sweep-start", dest="sweep_start", type=int)
    p.add_argument("--sweep-stop", dest="sweep_stop", type=int)
    p.add_argument("--sweep-points", dest="sweep_points", type=int)
    p.add_argument("--objective", choices=("11", "22", "total"), help="class objective")

    p = sub.add_parser("jitter-compare", help="edge-aware vs edge-neglecting jitter information")
    _add_common(p)
    p.add_argument("--sweep-start", dest="sweep_start", type=int)
    p.add_argument("--sweep-stop", dest="sweep_stop", type=int)
    p.add_argument("--sweep-points", dest="sweep_points", type=int)
    p.add_argument("--sweep-step", dest="sweep_step", type=int)

    p = sub.add_parser("simulate", help="Monte Carlo run with analytic side-by-side")
    _add_common(p)
    p.add_argument("--n", type=int, help="frame size in bins")
    p.add_argument("--frames", type=int, help="number of frames to simulate")
    p.add_argument("--seed", type=int, help="RNG seed")
    p.add_argument("--chunk-frames", dest="chunk_frames", type=int, help="frames per chunk")
    p.add_argument("--jitter", help="comma-separated jump probabilities, e.g. 0.9,0.1")
    p.add_argument("--track", nargs="*", help="classes to track patterns for, e.g. 1,1")
    p.add_argument("--estimate-mi", dest="estimate_mi",
                   help="class to estimate conditional information for (errors if undersampled)")
    p.add_argument("--tag-out", dest="tag_out", help="write a click tag stream to this path")
    p.add_argument("--tag-format", dest="tag_format", choices=("bin", "csv"), default="bin")
    return parser


def _parse_class(text: str) -> tuple[int, int]:
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad frame class {text!r}; expected 'x,y'") from exc
    return x, y


def _load_params(args: argparse.Namespace) -> dict:
    params: dict = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            with open(cfg_path, encoding="utf-8") as fh:
                file_params = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {cfg_path}: {exc}") from exc
        if not isinstance(file_params, dict):
            raise ConfigError("config file must hold a JSON object of flat keys")
        for key, value in file_params.items():
            if key not in _PARAM_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            params[key] = value
    for key in _PARAM_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            params[key] = flag
    # expand the preset, then collapse symmetric shorthands
    preset = params.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        det = PRESETS[preset]
        params.setdefault("eta", det.eta)
        params.setdefault("q", det.q)
        params.setdefault("j0", det.j0)
        # the preset's dead-time is opt-in: pass --md explicitly (dead-time
        # filters only the (2,2) closed form and would invalidate short-frame
        # sweeps otherwise)
    if "eta" in params:
        params.setdefault("eta_a", params["eta"])
        params.setdefault("eta_b", params["eta"])
    if "q" in params:
        params.setdefault("q_a", params["q"])
        params.setdefault("q_b", params["q"])
    if isinstance(params.get("classes"), list):
        params["classes"] = [
            _parse_class(c) if isinstance(c, str) else (int(c[0]), int(c[1]))
            for c in params["classes"]
        ]
    return params


def _require(params: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in params]
    if missing:
        raise ConfigError(f"missing required parameter(s): {', '.join(missing)}")


def _physics(params: dict):
    _require(params, "lam", "eta_a", "eta_b")
    lam = float(params["lam"])
    eta_a, eta_b = float(params["eta_a"]), float(params["eta_b"])
    q_a = float(params.get("q_a", 0.0))
    q_b = float(params.get("q_b", 0.0))
    bins = poissonian_bin_probs(lam, eta_a, eta_b, q_a, q_b)
    return bins, lam, eta_a, eta_b, q_a, q_b


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, _FLOAT_FMT)
    return str(value)


def _emit(header: list[str], rows: list[list], params: dict, args) -> None:
    fmt = params.get("format", "csv")
    out_path = params.get("output")
    if fmt == "json":
        payload = {
            "config": {k: params[k] for k in sorted(params) if k not in ("output", "format")},
            "rows": [dict(zip(header, row)) for row in rows],
        }
        text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    else:
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\r\n".join(lines) + "\r\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bin_probs(args) -> int:
    params = _load_params(args)
    bins, *_ = _physics(params)
    header = ["p00", "p0c", "pc0", "pcc", "pa0", "pac", "pb0", "pbc"]
    row = [bins.p00, bins.p0c, bins.pc0, bins.pcc, bins.pa0, bins.pac, bins.pb0, bins.pbc]
    _emit(header, [row], params, args)
    return 0


_SWEEP_HEADER = ["N", "bits_11_detected", "bits_22_detected", "bits_total",
                 "h_kk", "pClass_11", "pClass_22"]


def _effective_q(q_a: float, q_b: float) -> float:
    # frames formulas take one dark-count number; the accidental-coincidence
    # rate per bin is q_a*q_b, so pass its geometric mean
    return math.sqrt(q_a * q_b)


def _class_budget(n: int, cls: tuple[int, int], bins: BinProbabilities, lam: float,
                  eta_a: float, eta_b: float, q: float, md: int) -> tuple[float, float, float]:
    """(bits per detected pair, class probability, per-frame bits) for one class.

    Dead-time is a pattern filter: with md > 0 the (2, 2) class uses the
    filtered multiplicities, the (1, 1) class is unaffected as long as the
    frame outlasts the dead window, and other classes have no filtered closed
    form.
    """
    x, y = cls
    if md > 0:
        if cls == (1, 1):
            if n <= md:
                raise DomainError(f"(1,1) closed form under dead-time needs n > md, "
                                  f"got n={n}, md={md}")
            bits = pair_info_11(n, bins, lam, eta_a, eta_b, q).detected
            return bits, joint_click_count_prob(n, 1, 1, bins), class_cond_mi(n, 1, 1, bins)
        if cls == (2, 2):
            bits = pair_info_22_deadtime(n, bins, lam, eta_a, eta_b, q, md).detected
            counts = two_click_pair_counts(n, md)
            p00, p0c, pc0, pcc = bins.as_tuple()
            w = (counts.none * (pc0 * p0c) ** 2 * p00 ** (n - 4)
                 + counts.one * pcc * pc0 * p0c * p00 ** (n - 3)
                 + counts.both * pcc * pcc * p00 ** (n - 2))
            p_class = w / p00 ** (2 * md) if p00 > 0 else 0.0
            return bits, p_class, class_cond_mi_22_deadtime(n, bins, md)
        raise DomainError(f"dead-time closed forms cover classes (1,1) and (2,2) only, "
                          f"got {cls}")
    if cls == (1, 1):
        bits = pair_info_11(n, bins, lam, eta_a, eta_b, q).detected
    elif cls == (2, 2):
        if n < 4:
            return 0.0, 0.0, 0.0
        bits = pair_info_22(n, bins, lam, eta_a, eta_b, q).detected
    else:
        bits = pair_info(n, x, y, bins, lam, eta_a, eta_b, q).detected
    p_class = joint_click_count_prob(n, x, y, bins)
    h_cond = class_cond_mi(n, x, y, bins) if p_class > 0 else 0.0
    return bits, p_class, h_cond


def _sweep_row(n: int, bins: BinProbabilities, lam: float, eta_a: float, eta_b: float,
               q_a: float, q_b: float, classes: list[tuple[int, int]], md: int) -> list:
    q = _effective_q(q_a, q_b)
    bits11 = bits22 = p11 = p22 = 0.0
    extra = []
    total = 0.0
    for cls in classes:
        bits, p_class, _ = _class_budget(n, cls, bins, lam, eta_a, eta_b, q, md)
        total += bits
        if cls == (1, 1):
            bits11, p11 = bits, p_class
        elif cls == (2, 2):
            bits22, p22 = bits, p_class
        else:
            extra += [bits, p_class]
    hkk = click_count_entropy(n, bins).bits
    return [n, bits11, bits22, total, hkk, p11, p22] + extra


def _sweep_values(params: dict) -> list[int]:
    _require(params, "sweep_start", "sweep_stop")
    start, stop = int(params["sweep_start"]), int(params["sweep_stop"])
    if start < 1 or stop < start:
        raise ConfigError(f"bad sweep range [{start}, {stop}]")
    if params.get("sweep_step"):
        return list(range(start, stop + 1, int(params["sweep_step"])))
    points = int(params.get("sweep_points", 50))
    grid = np.unique(np.round(np.logspace(math.log10(start), math.log10(stop), points)).astype(int))
    return [int(v) for v in grid]


def _sweep_classes(params: dict) -> list[tuple[int, int]]:
    classes = params.get("classes") or [(1, 1), (2, 2)]
    return [tuple(c) for c in classes]


def cmd_sweep(args) -> int:
    params = _load_params(args)
    bins, lam, eta_a, eta_b, q_a, q_b = _physics(params)
    classes = _sweep_classes(params)
    md = int(params.get("md", 0))
    ns = _sweep_values(params)
    header = list(_SWEEP_HEADER)
    for cls in classes:
        if cls not in ((1, 1), (2, 2)):
            header += [f"bits_{cls[0]}{cls[1]}_detected", f"pClass_{cls[0]}{cls[1]}"]
    workers = int(os.environ.get("FRAMEBITS_MAX_WORKERS", "1"))
    job = _SweepJob(bins, lam, eta_a, eta_b, q_a, q_b, classes, md)
    if workers > 1 and len(ns) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, ns))
    else:
        rows = [job(n) for n in ns]
    _emit(header, rows, params, args)
    return 0


class _SweepJob:
    """Picklable per-N sweep evaluation."""

    def __init__(self, bins, lam, eta_a, eta_b, q_a, q_b, classes, md):
        self.args = (bins, lam, eta_a, eta_b, q_a, q_b, classes, md)

    def __call__(self, n: int) -> list:
        return _sweep_row(n, *self.args)


def cmd_frame_info(args) -> int:
    params = _load_params(args)
    _require(params, "n")
    bins, lam, eta_a, eta_b, q_a, q_b = _physics(params)
    n = int(params["n"])
    md = int(params.get("md", 0))
    q = _effective_q(q_a, q_b)
    header = ["N", "x", "y", "h_cond", "bits_detected", "bits_generated",
              "p_class", "h_kk", "count_mi", "h_frame"]
    rows = []
    budget_rep = frame_info(n, bins, lam, eta_a, eta_b, q)  # class-independent columns
    for cls in _sweep_classes(params):
        bits, p_class, h_cond = _class_budget(n, cls, bins, lam, eta_a, eta_b, q, md)
        gen = bits * (eta_a * eta_b * lam + q * q) / lam
        rows.append([n, cls[0], cls[1], h_cond, bits, gen, p_class,
                     budget_rep.h_kk, budget_rep.count_mi, budget_rep.h_frame_per_frame])
    _emit(header, rows, params, args)
    return 0


def _objective_fn(objective: str, bins, lam, eta_a, eta_b, q, md):
    classes = {"11": [(1, 1)], "22": [(2, 2)], "total": [(1, 1), (2, 2)]}[objective]

    def value(n: int) -> float:
        return sum(_class_budget(n, cls, bins, lam, eta_a, eta_b, q, md)[0]
                   for cls in classes)
    return value


def cmd_optimize(args) -> int:
    params = _load_params(args)
    bins, lam, eta_a, eta_b, q_a, q_b = _physics(params)
    objective = params.get("objective", "11")
    fn = _objective_fn(objective, bins, lam, eta_a, eta_b, _effective_q(q_a, q_b),
                       int(params.get("md", 0)))
    grid = _sweep_values(params)
    vals = [fn(n) for n in grid]
    best_idx = max(range(len(grid)), key=lambda i: (vals[i], -grid[i]))
    if best_idx in (0, len(grid) - 1):
        sys.stderr.write("warning: objective maximised at the sweep boundary; "
                         "no interior maximum in range\n")
        n_star, bits = grid[best_idx], vals[best_idx]
    else:
        lo, hi = grid[best_idx - 1], grid[best_idx + 1]
        while hi - lo > 2:
            step = max(1, (hi - lo) // 16)
            cand = list(range(lo, hi + 1, step))
            cvals = [fn(n) for n in cand]
            k = max(range(len(cand)), key=lambda i: (cvals[i], -cand[i]))
            lo = cand[max(0, k - 1)]
            hi = cand[min(len(cand) - 1, k + 1)]
        cand = list(range(lo, hi + 1))
        cvals = [fn(n) for n in cand]
        k = max(range(len(cand)), key=lambda i: (cvals[i], -cand[i]))
        n_star, bits = cand[k], cvals[k]
    _emit(["Nstar", "bits"], [[n_star, bits]], params, args)
    return 0


def cmd_jitter_compare(args) -> int:
    params = _load_params(args)
    bins, lam, eta_a, eta_b, q_a, q_b = _physics(params)
    j0 = float(params.get("j0", 1.0))
    profile = JitterProfile.from_j0(j0)
    events = click_events(bins, profile)
    rows = []
    for n in _sweep_values(params):
        cmp_ = exact_vs_approx(n, events, bins, lam, eta_a, eta_b, q_a, q_b)
        rows.append([cmp_.n, cmp_.exact, cmp_.approx, cmp_.pct_diff])
    _emit(["N", "H_exact", "H_approx", "pct_diff"], rows, params, args)
    return 0


def _simulate_config(params: dict, args) -> SimConfig:
    _require(params, "lam", "eta_a", "eta_b", "n", "frames")
    channel = ChannelConfig(eta_a=float(params["eta_a"]), eta_b=float(params["eta_b"]),
                            q_a=float(params.get("q_a", 0.0)), q_b=float(params.get("q_b", 0.0)))
    jitter_text = getattr(args, "jitter", None) or params.get("jitter")
    if jitter_text:
        if isinstance(jitter_text, str):
            j = tuple(float(v) for v in jitter_text.split(","))
        else:
            j = tuple(float(v) for v in jitter_text)
        profile = JitterProfile(j=j)
    elif "j0" in params:
        profile = JitterProfile.from_j0(float(params["j0"]))
    else:
        profile = JitterProfile(j=(1.0,))
    track = [(1, 1)]
    if getattr(args, "track", None):
        track = [_parse_class(c) for c in args.track]
    return SimConfig(
        source=SourceModel.poissonian(float(params["lam"])),
        channel=channel,
        frame_size=int(params["n"]),
        n_frames=int(params["frames"]),
        seed=int(params.get("seed", 0)),
        jitter=profile,
        deadtime=DeadTimeConfig(int(params.get("md", 0))),
        chunk_frames=int(params.get("chunk_frames", 250_000)),
        track_classes=tuple(track),
    )


def cmd_simulate(args) -> int:
    params = _load_params(args)
    cfg = _simulate_config(params, args)
    keep = bool(getattr(args, "tag_out", None))
    result = simulate(cfg, keep_click_positions=keep)
    if keep:
        write_tag_stream(result, args.tag_out, fmt=args.tag_format)

    n, frames = cfg.frame_size, cfg.n_frames
    rows: list[list] = []

    def add_z(name: str, analytic: float, observed: int, trials: int) -> None:
        mean = trials * analytic
        var = trials * analytic * (1.0 - analytic)
        z = (observed - mean) / math.sqrt(var) if var > 0 else math.nan
        rows.append([name, analytic, observed / trials, z])

    plain = cfg.jitter.max_jump == 0 and cfg.deadtime.md == 0
    bins = poissonian_bin_probs(cfg.source.lam, cfg.channel.eta_a, cfg.channel.eta_b,
                                cfg.channel.q_a, cfg.channel.q_b)
    if plain:
        total_bins = n * frames
        for label, analytic, idx in (("P_00", bins.p00, 0), ("P_0c", bins.p0c, 1),
                                     ("P_c0", bins.pc0, 2), ("P_cc", bins.pcc, 3)):
            add_z(label, analytic, int(result.bin_joint_counts[idx]), total_bins)
        for (x, y), count in sorted(result.class_counts.items()):
            analytic = joint_click_count_prob(n, x, y, bins)
            add_z(f"P_class_{x}_{y}", analytic, count, frames)
    elif cfg.jitter.max_jump == 1 and cfg.deadtime.md == 0 and n >= 6:
        from .jitter import exact_pattern_table
        events = click_events(bins, cfg.jitter)
        table = exact_pattern_table(n, events, bins)
        counts = result.single_click_group_counts()
        for label, lp, mult in table.groups:
            analytic = mult * (math.exp(lp) if lp > -math.inf else 0.0)
            add_z(f"P11_{label}", analytic, counts.get(label, 0), frames)

    mi_request = getattr(args, "estimate_mi", None)
    mi_classes = [_parse_class(mi_request)] if mi_request else list(cfg.track_classes)
    for cls in mi_classes:
        try:
            est = estimate_cond_mi(result, *cls)
        except InsufficientSamplesError as exc:
            if mi_request:
                raise
            rows.append([f"cond_mi_{cls[0]}_{cls[1]}", math.nan, math.nan, math.nan])
            sys.stderr.write(f"note: {exc}\n")
            continue
        if plain:
            analytic = _analytic_cond_mi_or_nan(n, cls, bins)
            z = (est.bits - analytic) / est.stderr if est.stderr > 0 else math.nan
        else:
            analytic, z = math.nan, math.nan
        rows.append([f"cond_mi_{cls[0]}_{cls[1]}", analytic, est.bits, z])
    _emit(["quantity", "analytic", "empirical", "z_score"], rows, params, args)
    return 0


def _analytic_cond_mi_or_nan(n: int, cls: tuple[int, int], bins) -> float:
    from .frames import class_cond_mi
    try:
        return class_cond_mi(n, cls[0], cls[1], bins)
    except DomainError:
        return math.nan


_COMMANDS = {
    "bin-probs": cmd_bin_probs,
    "frame-info": cmd_frame_info,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "jitter-compare": cmd_jitter_compare,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except DomainError as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return 3
    except InsufficientSamplesError as exc:
        sys.stderr.write(f"insufficient samples: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
