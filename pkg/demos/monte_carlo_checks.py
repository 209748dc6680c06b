"""Validate the closed forms against the stream simulator.

Runs two quick simulations at inflated pair rates (so a laptop-scale run has
statistics) and prints analytic-versus-empirical tables with z-scores: per-bin
click probabilities, frame-class probabilities, the plug-in conditional
information of (1,1)-frames, and with jitter switched on the edge-aware cell
group frequencies.

Run:  python demos/monte_carlo_checks.py [n_frames]
"""

import math
import sys

from framebits import (ChannelConfig, JitterProfile, SimConfig, SourceModel,
                       class_cond_mi, click_events, estimate_cond_mi,
                       exact_pattern_table, joint_click_count_prob,
                       poissonian_bin_probs, simulate)

FRAMES = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000


def zline(name, analytic, observed, trials):
    mean = trials * analytic
    sd = math.sqrt(mean * (1.0 - analytic))
    z = (observed - mean) / sd if sd > 0 else float("nan")
    print(f"  {name:14s} analytic={analytic:.6e} empirical={observed / trials:.6e} z={z:+.2f}")


def main():
    lam, eta, q, n = 1e-2, 0.5, 1e-3, 8
    print(f"plain run: lam={lam}, eta={eta}, q={q}, N={n}, frames={FRAMES}")
    cfg = SimConfig(source=SourceModel.poissonian(lam),
                    channel=ChannelConfig(eta_a=eta, eta_b=eta, q_a=q, q_b=q),
                    frame_size=n, n_frames=FRAMES, seed=1)
    res = simulate(cfg)
    bins = poissonian_bin_probs(lam, eta, eta, q, q)
    for idx, (name, p) in enumerate((("P_00", bins.p00), ("P_0c", bins.p0c),
                                     ("P_c0", bins.pc0), ("P_cc", bins.pcc))):
        zline(name, p, int(res.bin_joint_counts[idx]), FRAMES * n)
    for (x, y) in ((0, 0), (1, 0), (1, 1), (2, 1), (2, 2)):
        zline(f"class ({x},{y})", joint_click_count_prob(n, x, y, bins),
              res.class_counts.get((x, y), 0), FRAMES)
    est = estimate_cond_mi(res, 1, 1)
    want = class_cond_mi(n, 1, 1, bins)
    print(f"  (1,1) cond MI: empirical {est.bits:.4f} +- {est.stderr:.4f} bits "
          f"(plug-in bias ~{est.miller_madow_bias:.1e}), analytic {want:.4f}")

    lam = 1e-3
    profile = JitterProfile(j=(0.8, 0.2))
    print(f"\njitter run: lam={lam}, J={profile.j}, N={n}, frames={FRAMES}")
    cfg = SimConfig(source=SourceModel.poissonian(lam),
                    channel=ChannelConfig(eta_a=eta, eta_b=eta, q_a=q, q_b=q),
                    jitter=profile, frame_size=n, n_frames=FRAMES, seed=2)
    res = simulate(cfg)
    bins = poissonian_bin_probs(lam, eta, eta, q, q)
    table = exact_pattern_table(n, click_events(bins, profile), bins)
    counts = res.single_click_group_counts()
    for label, lp, mult in table.groups:
        zline(label, mult * math.exp(lp), counts.get(label, 0), FRAMES)


if __name__ == "__main__":
    main()
