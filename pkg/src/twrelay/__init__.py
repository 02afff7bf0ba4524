"""Capacity bounds and amplify-and-forward rates for the MIMO two-way relay channel."""

from .capacity import (
    BoundPair,
    WaterfillResult,
    broadcast_cut_bound,
    coherent_upper_bound,
    mac_cut_bound,
    mimo_mutual_information,
    noncoherent_mac_bound,
    waterfill,
)
from .channel import (
    ChannelRealization,
    FadingLaw,
    RngStream,
    SystemConfig,
    ensemble_mean_check,
    sample_realization,
)
from .harness import SweepSpec, fit_scaling, rate_region, run_point, run_sweep
from .strategies import (
    EffectiveLink,
    PowerAllocation,
    RatePair,
    achievable_rates,
    equal_power_allocation,
    simulate_slot,
)

__version__ = "0.1.0"
