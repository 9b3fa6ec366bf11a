"""Per-slot channel state and SNR-gap Shannon capacity.

The exponential variate drawn for each link is the composite SNR
``p * |h|^2 / sigma^2`` (Rayleigh fading under power control); the SNR gap
is applied only inside :func:`link_capacity`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SystemConfig, Topology

# Stream tags keep the three link classes statistically independent.
_TAG_DIRECT = 0
_TAG_FIRST_HOP = 1
_TAG_SECOND_HOP = 2


@dataclass(frozen=True)
class ChannelParams:
    mean_snr_direct: float = 10.0
    mean_snr_first_hop: float = 10.0
    mean_snr_second_hop: float = 10.0
    seed: int = 0

    def __post_init__(self):
        for name in ("mean_snr_direct", "mean_snr_first_hop", "mean_snr_second_hop"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be > 0, got {v!r}")
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Linear SNRs for one slot.

    snr_direct      (N, M, 2)  BS -> user, per sub-slot
    snr_first_hop   (N, K)     BS -> relay, sub-slot 1
    snr_second_hop  (N, K, M)  relay -> user, sub-slot 2
    """

    snr_direct: np.ndarray
    snr_first_hop: np.ndarray
    snr_second_hop: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("snr_direct", "snr_first_hop", "snr_second_hop"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        d, h1, h2 = arrays["snr_direct"], arrays["snr_first_hop"], arrays["snr_second_hop"]
        if d.ndim != 3 or d.shape[2] != 2:
            raise ValueError(f"snr_direct must have shape (N, M, 2), got {d.shape}")
        n, m = d.shape[:2]
        if h1.shape[:1] != (n,) or h1.ndim != 2:
            raise ValueError(f"snr_first_hop must have shape ({n}, K), got {h1.shape}")
        k = h1.shape[1]
        if h2.shape != (n, k, m):
            raise ValueError(f"snr_second_hop must have shape {(n, k, m)}, got {h2.shape}")
        for a in (d, h1, h2):
            if a.size and (not np.all(np.isfinite(a)) or a.min() < 0):
                raise ValueError("SNR entries must be finite and ≥ 0")

    @property
    def num_subchannels(self) -> int:
        return self.snr_direct.shape[0]

    @property
    def num_users(self) -> int:
        return self.snr_direct.shape[1]

    @property
    def num_relays(self) -> int:
        return self.snr_first_hop.shape[1]

    def check_dims(self, cfg: SystemConfig, topo: Topology) -> None:
        expected = (cfg.num_subchannels, topo.num_users, topo.num_relays)
        got = (self.num_subchannels, self.num_users, self.num_relays)
        if got != expected:
            raise ValueError(f"realization dims (N, M, K)={got} do not match configuration {expected}")

    @classmethod
    def direct_only(cls, table, *, num_relays: int = 0) -> "ChannelRealization":
        """Build a realization from a users x subchannels SNR table.

        Both sub-slots share the table; relay links (if any) get zero SNR.
        """
        t = np.asarray(table, dtype=float)
        m, n = t.shape
        direct = np.repeat(t.T[:, :, None], 2, axis=2)
        return cls(direct, np.zeros((n, num_relays)), np.zeros((n, num_relays, m)))


def _stream(seed: int, slot_index: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, slot_index, tag])))


def draw_channel(params: ChannelParams, cfg: SystemConfig, topo: Topology,
                 slot_index: int) -> ChannelRealization:
    """Draw i.i.d. exponential SNRs for every link, subchannel and sub-slot.

    Output depends only on ``(params, cfg, topo, slot_index)``, so slots can be
    generated in any order.
    """
    if slot_index < 0:
        raise ValueError("slot_index must be ≥ 0")
    n, m, k = cfg.num_subchannels, topo.num_users, topo.num_relays
    direct = _stream(params.seed, slot_index, _TAG_DIRECT).exponential(
        params.mean_snr_direct, size=(n, m, 2))
    hop1 = _stream(params.seed, slot_index, _TAG_FIRST_HOP).exponential(
        params.mean_snr_first_hop, size=(n, k))
    hop2 = _stream(params.seed, slot_index, _TAG_SECOND_HOP).exponential(
        params.mean_snr_second_hop, size=(n, k, m))
    return ChannelRealization(direct, hop1, hop2)


def snr_gap(ber_target: float) -> float:
    """SNR gap for a target bit-error rate: ``-ln(5 * BER) / 1.6``."""
    if not (0 < ber_target < 0.2):
        raise ValueError(f"ber_target must lie in (0, 0.2), got {ber_target!r}")
    return -math.log(5.0 * ber_target) / 1.6


def link_capacity(snr, cfg: SystemConfig):
    """Rate in bit/s of one subchannel at linear SNR ``snr``.

    ``(W / N) * log2(1 + snr / gap)``. Accepts scalars or arrays.
    """
    gap = snr_gap(cfg.ber_target)
    a = np.asarray(snr, dtype=float)
    if np.any(a < 0) or np.any(np.isnan(a)):
        raise ValueError("snr must be ≥ 0")
    out = cfg.subchannel_bandwidth_hz * np.log2(1.0 + a / gap)
    return float(out) if out.ndim == 0 else out


def snr_from_gain(gain, cfg: SystemConfig, *, relay: bool = False):
    """Composite SNR ``p_n * |h|^2 / sigma^2`` for a channel power gain.

    Uses the uniform per-subchannel split of the BS (or relay) power budget.
    The simulator draws this quantity directly; the helper is for callers
    holding physical gains.
    """
    p = cfg.relay_subchannel_power_w if relay else cfg.subchannel_power_w
    return np.asarray(gain, dtype=float) * p / cfg.noise_power_w
