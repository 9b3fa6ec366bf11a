"""Per-slot rate accounting and the per-user moving-average rate."""
from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, snr_gap
from .model import SystemConfig, Topology
from .scheduler import Allocation


@dataclass(frozen=True, eq=False)
class SlotRates:
    """Rates in bit/s for one slot, indexed by user / relay id.

    relay_user_hop1/hop2 are (K, M); zero for pairs that carried nothing.
    """

    direct_rate: np.ndarray  # (M,)
    relay_hop1_rate: np.ndarray  # (K,)
    relay_hop2_rate: np.ndarray  # (K,)
    relay_user_hop2: np.ndarray  # (K, M)
    relay_user_hop1: np.ndarray  # (K, M)
    effective_rate: np.ndarray  # (M,)
    system_capacity: float

    @property
    def user_rate(self) -> np.ndarray:
        """Rate each user actually received: direct plus relay-effective."""
        return self.direct_rate + self.effective_rate

    @property
    def relay_effective_rate(self) -> np.ndarray:
        """Effective rate routed through each relay, (K,)."""
        return np.minimum(self.relay_user_hop1, self.relay_user_hop2).sum(axis=1)

    @property
    def direct_total(self) -> float:
        return float(self.direct_rate.sum())

    @property
    def relay_total(self) -> float:
        return float(self.effective_rate.sum())


def compute_slot_rates(alloc: Allocation, realization: ChannelRealization,
                       cfg: SystemConfig, topo: Topology) -> SlotRates:
    realization.check_dims(cfg, topo)
    N, M, K = cfg.num_subchannels, topo.num_users, topo.num_relays
    width, gap = cfg.subchannel_bandwidth_hz, snr_gap(cfg.ber_target)

    def capacity(snr):
        # Same formula as channel.link_capacity; realization SNRs are already validated.
        return width * np.log2(1.0 + snr / gap)

    direct = np.zeros(M)
    if alloc.alpha_direct:
        n, m, tau = _indices(alloc.alpha_direct, (N, M, 2), "direct")
        np.add.at(direct, m, capacity(realization.snr_direct[n, m, tau]))

    hop1 = np.zeros(K)
    if alloc.alpha_relay_hop1:
        n, k = _indices(alloc.alpha_relay_hop1, (N, K), "hop-1")
        np.add.at(hop1, k, capacity(realization.snr_first_hop[n, k]))

    user_hop2 = np.zeros((K, M))
    if alloc.beta_hop2:
        n, k, m = _indices(alloc.beta_hop2, (N, K, M), "hop-2")
        np.add.at(user_hop2, (k, m), capacity(realization.snr_second_hop[n, k, m]))
    hop2 = user_hop2.sum(axis=1)

    # Hop-1 capacity of a relay is shared in proportion to hop-2 shares.
    ratio = np.divide(hop1, hop2, out=np.zeros(K), where=hop2 > 0)
    user_hop1 = ratio[:, None] * user_hop2
    effective = np.minimum(user_hop1, user_hop2).sum(axis=0)

    return SlotRates(
        direct_rate=direct,
        relay_hop1_rate=hop1,
        relay_hop2_rate=hop2,
        relay_user_hop2=user_hop2,
        relay_user_hop1=user_hop1,
        effective_rate=effective,
        system_capacity=float(direct.sum() + effective.sum()),
    )


def _indices(entries, bounds, what):
    idx = np.array(sorted(entries), dtype=int).T
    if np.any(idx < 0) or np.any(idx >= np.array(bounds)[:, None]):
        raise ValueError(f"{what} indicator out of range for dims {bounds}")
    return tuple(idx)


def update_average(prev, achieved, window: int):
    """Moving-average update ``(1 - 1/T) * prev + achieved / T``.

    Works elementwise on arrays.
    """
    if window < 1:
        raise ValueError(f"window must be ≥ 1, got {window}")
    return (1.0 - 1.0 / window) * prev + achieved / window


def frame_objective(slot_capacities: Iterable[float]) -> float:
    """Total system capacity over a sequence of slots."""
    return float(sum(slot_capacities))


@dataclass
class RateState:
    avg_rate: np.ndarray  # (M,) bit/s
    cumulative_relay_throughput: np.ndarray  # (K,) sum of per-slot effective rates

    @classmethod
    def zeros(cls, topo: Topology) -> "RateState":
        return cls(np.zeros(topo.num_users), np.zeros(topo.num_relays))

    def update(self, rates: SlotRates, window: int) -> None:
        """Fold one slot in; users that got nothing are averaged with zero."""
        self.avg_rate = update_average(self.avg_rate, rates.user_rate, window)
        self.cumulative_relay_throughput = self.cumulative_relay_throughput + rates.relay_effective_rate
