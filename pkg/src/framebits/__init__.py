"""Shared-information budgets for frame-encoded time-bin photon pairs.

The package models a photon-pair source feeding two threshold detectors
through lossy channels, groups time-bins into frames, and computes how many
shared bits each announced frame class can yield under loss, dark counts,
after-pulsing (as an inflated dark-count probability), detector dead-time and
timing jitter.  A seeded Monte Carlo simulator provides an independent check
of every closed form.

Sub-modules:

- ``source``      pair-number distributions and their loss-decorated
                  moment generating function
- ``detection``   joint per-bin click probabilities
- ``frames``      frame classes, conditional information, per-pair budgets
- ``deadtime``    dead-time pattern filtering
- ``jitter``      timing-jitter events and edge-aware pattern tables
- ``montecarlo``  stream-level stochastic oracle
- ``presets``     named detector parameter sets
- ``cli``         command-line front end (``framebits ...``)
"""

from .deadtime import (DeadTimeConfig, allowed_two_click_count,
                       class_cond_mi_22_deadtime, filtered_joint_pattern_prob,
                       filtered_marginal_pattern_prob, pair_info_22_deadtime,
                       pattern_allowed, two_click_pair_counts)
from .detection import (BinProbabilities, ChannelConfig, apply_dark_counts,
                        bare_bin_probs, poissonian_bin_probs)
from .errors import DomainError, InsufficientSamplesError
from .frames import (FrameQuery, InfoReport, PairInfo, class_cond_mi,
                     click_count_entropy, click_count_mutual_information,
                     click_count_prob, cond_mi_weighted_sum, frame_info,
                     joint_click_count_prob, log_overlap_pattern_count,
                     lossless_class_mi, overlap_pattern_count, pair_info,
                     pair_info_11, pair_info_22, per_bin_mi,
                     valid_overlap_range)
from .jitter import (ExactPatternTable, JitterEvents, JitterProfile,
                     click_events, detected_info_11, exact_pattern_table,
                     exact_vs_approx, extended_click_events, jitter_compare,
                     single_click_pattern_probs)
from .montecarlo import (SimConfig, SimResult, estimate_cond_mi, simulate,
                         write_tag_stream)
from .presets import NANOWIRE, PRESETS, SPAD
from .source import SourceModel

__version__ = "0.1.0"
