"""Configuration, topology and identifier types shared by the simulator.

Symbols: N subchannels, M users (mobile stations), K relay stations.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Optional

# Zero-based dense indices.
UserId = int
RelayId = int
SubchannelId = int


class ConfigError(ValueError):
    """Raised when a configuration or topology violates an invariant."""


@dataclass(frozen=True)
class SystemConfig:
    bandwidth_hz: float = 10e6
    num_subchannels: int = 128
    total_power_w: float = 1.0
    relay_power_w: Optional[float] = None  # None -> same as total_power_w
    ber_target: float = 1e-3
    noise_psd: float = 1e-20  # W/Hz
    avg_window: int = 100  # slots
    symbols_per_subframe: int = 48  # stored only; does not enter any rate

    @property
    def subchannel_bandwidth_hz(self) -> float:
        return self.bandwidth_hz / self.num_subchannels

    @property
    def subchannel_power_w(self) -> float:
        return self.total_power_w / self.num_subchannels

    @property
    def relay_subchannel_power_w(self) -> float:
        p = self.total_power_w if self.relay_power_w is None else self.relay_power_w
        return p / self.num_subchannels

    @property
    def noise_power_w(self) -> float:
        """Per-subchannel noise power n0 * W / N."""
        return self.noise_psd * self.subchannel_bandwidth_hz


@dataclass(frozen=True)
class Topology:
    num_users: int = 10
    num_relays: int = 6


@dataclass(frozen=True)
class CommMode:
    """Direct link (``relay is None``) or relayed through ``relay``."""

    relay: Optional[RelayId] = None

    @classmethod
    def direct(cls) -> "CommMode":
        return cls(None)

    @classmethod
    def relayed(cls, relay: RelayId) -> "CommMode":
        return cls(int(relay))

    @property
    def is_direct(self) -> bool:
        return self.relay is None

    def __str__(self) -> str:
        return "direct" if self.relay is None else f"relay{self.relay}"


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def validate_config(cfg: SystemConfig, topo: Topology) -> None:
    """Raise :class:`ConfigError` naming the first violated invariant."""
    _check(_finite(cfg.bandwidth_hz) and cfg.bandwidth_hz > 0, "bandwidth_hz must be > 0")
    _check(_is_int(cfg.num_subchannels) and cfg.num_subchannels >= 1, "num_subchannels must be ≥ 1")
    _check(_finite(cfg.total_power_w) and cfg.total_power_w > 0, "total_power_w must be > 0")
    if cfg.relay_power_w is not None:
        _check(_finite(cfg.relay_power_w) and cfg.relay_power_w > 0, "relay_power_w must be > 0")
    _check(_finite(cfg.ber_target) and 0 < cfg.ber_target < 0.2, "ber_target out of range (0, 0.2)")
    _check(_finite(cfg.noise_psd) and cfg.noise_psd > 0, "noise_psd must be > 0")
    _check(_is_int(cfg.avg_window) and cfg.avg_window >= 1, "avg_window must be ≥ 1")
    _check(_is_int(cfg.symbols_per_subframe) and cfg.symbols_per_subframe >= 1,
           "symbols_per_subframe must be ≥ 1")
    _check(_is_int(topo.num_users) and topo.num_users >= 1, "num_users must be ≥ 1")
    _check(_is_int(topo.num_relays) and topo.num_relays >= 0, "num_relays must be ≥ 0")


def _finite(x) -> bool:
    return isinstance(x, numbers.Real) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x) -> bool:
    return isinstance(x, numbers.Integral) and not isinstance(x, bool)
