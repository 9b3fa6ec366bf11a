"""Variance-based and max-SNR scheduling for relay-enhanced OFDMA downlinks."""
from .channel import ChannelParams, ChannelRealization, draw_channel, link_capacity, snr_gap
from .engine import ScenarioConfig, run, run_batch, sweep
from .metrics import RunSummary, jain_index, summarize_run
from .model import CommMode, ConfigError, SystemConfig, Topology, validate_config
from .rates import RateState, SlotRates, compute_slot_rates, frame_objective, update_average
from .scheduler import (Allocation, Assignment, SchedulerPolicy, allocation_violations,
                        best_subchannel, maxsnr_select, schedule_slot, select_mode,
                        select_relay, select_user, variance_metric)

__version__ = "0.1.0"
