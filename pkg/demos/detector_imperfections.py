"""Dead-time and timing-jitter studies.

Left: (2,2)-frame information with and without the detector dead window (the
filter removes close click pairs, costing most at small frames).  Right:
single-click information for jittery detectors, with the 10-bit threshold
line; even a 10% chance of landing one bin late leaves >10 bits per pair at
the right frame size.

Run:  python demos/detector_imperfections.py [out_dir]
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from framebits import (NANOWIRE, SPAD, JitterProfile, click_events,
                       detected_info_11, pair_info_22, pair_info_22_deadtime,
                       poissonian_bin_probs)

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    fig, (ax_dt, ax_j) = plt.subplots(1, 2, figsize=(10, 4))

    lam = 5.33e-5
    for det, style in ((SPAD, "b--"), (NANOWIRE, "k-")):
        bins = poissonian_bin_probs(lam, det.eta, det.eta, det.q, det.q)
        md = det.deadtime_bins
        ns = np.unique(np.round(np.logspace(np.log10(2 * md + 3), 4, 60)).astype(int))
        plain = [pair_info_22(int(n), bins, lam, det.eta, det.eta, det.q).detected
                 for n in ns]
        gated = [pair_info_22_deadtime(int(n), bins, lam, det.eta, det.eta,
                                       det.q, md).detected for n in ns]
        ax_dt.semilogx(ns, plain, style, alpha=0.35)
        ax_dt.semilogx(ns, gated, style, label=f"{det.name} (dead {md} bins)")
    ax_dt.set_xlabel("frame size N")
    ax_dt.set_ylabel("(2,2) bits per detected pair")
    ax_dt.set_title("dead-time filter (faint: no dead-time)")
    ax_dt.legend()
    ax_dt.grid(alpha=0.3)

    lam = 2.0e-5
    ns = np.unique(np.round(np.logspace(2, 4.5, 80)).astype(int))
    for det, style in ((SPAD, "k-"), (NANOWIRE, "b--")):
        bins = poissonian_bin_probs(lam, det.eta, det.eta, det.q, det.q)
        ev = click_events(bins, JitterProfile.from_j0(det.j0))
        vals = [detected_info_11(int(n), ev, bins, lam, det.eta, det.eta, det.q, det.q)
                for n in ns]
        ax_j.semilogx(ns, vals, style, label=f"{det.name} (J0={det.j0})")
    ax_j.axhline(10.0, color="r", linestyle="-.", label="10 bits per pair")
    ax_j.set_xlabel("frame size N")
    ax_j.set_ylabel("(1,1) bits per detected pair")
    ax_j.set_title("timing jitter")
    ax_j.legend()
    ax_j.grid(alpha=0.3)

    fig.tight_layout()
    path = OUT / "detector_imperfections.png"
    fig.savefig(path, dpi=150)
    print(f"wrote {path}")

    bins = poissonian_bin_probs(lam, SPAD.eta, SPAD.eta, SPAD.q, SPAD.q)
    for j0 in (1.0, 0.9):
        ev = click_events(bins, JitterProfile.from_j0(j0))
        v = detected_info_11(4000, ev, bins, lam, SPAD.eta, SPAD.eta, SPAD.q, SPAD.q)
        print(f"spad, J0={j0}: {v:.2f} bits per detected pair at N=4000")


if __name__ == "__main__":
    main()
