"""Named detector presets for one-line studies.

Both presets assume 130 ps time-bins.  The dark-count probabilities are
effective per-bin values with after-pulsing already folded in (0.5% for the
avalanche detector, negligible for the nanowire), and the dead-times (30 ns
and 20 ns) are expressed in whole bins.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["DetectorPreset", "PRESETS", "SPAD", "NANOWIRE"]


@dataclass(frozen=True)
class DetectorPreset:
    name: str
    eta: float          # total efficiency per arm
    q: float            # effective per-bin dark-count probability
    j0: float           # probability a detection lands in the correct bin
    deadtime_bins: int


SPAD = DetectorPreset(name="spad", eta=0.7, q=6.53e-8, j0=0.9, deadtime_bins=230)
NANOWIRE = DetectorPreset(name="nanowire", eta=0.9, q=1.3e-10, j0=0.97, deadtime_bins=154)

PRESETS = {p.name: p for p in (SPAD, NANOWIRE)}
