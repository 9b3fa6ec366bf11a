"""Fairness and throughput summaries."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .rates import frame_objective


def jain_index(values) -> float:
    """Jain's fairness index ``(sum x)^2 / (n * sum x^2)``."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("jain_index needs at least one value")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("jain_index needs finite nonnegative values")
    sq = float(np.dot(x, x))
    if sq == 0.0:
        raise ValueError("jain_index undefined for an all-zero vector")
    s = float(x.sum())
    return s * s / (x.size * sq)


def jain_or_none(values) -> Optional[float]:
    """Jain index, or None when it is undefined (empty or all zero)."""
    x = np.asarray(values, dtype=float)
    if x.size == 0 or not np.any(x > 0):
        return None
    return jain_index(x)


@dataclass(frozen=True)
class RunSummary:
    mean_system_capacity: float  # bit/s
    cumulative_capacity: float  # sum over slots of per-slot capacity
    jain_users: Optional[float]  # over final moving-average rates
    jain_relays: Optional[float]  # over cumulative per-relay effective rate; None if no relay traffic
    per_slot_capacity: tuple

    SCALARS = ("mean_system_capacity", "cumulative_capacity", "jain_users", "jain_relays")


def summarize_run(per_slot_capacity: Sequence[float], final_avg_rate,
                  cumulative_relay_throughput) -> RunSummary:
    caps = tuple(float(c) for c in per_slot_capacity)
    if not caps:
        raise ValueError("cannot summarize an empty run")
    return RunSummary(
        mean_system_capacity=float(np.mean(caps)),
        cumulative_capacity=frame_objective(caps),
        jain_users=jain_or_none(final_avg_rate),
        jain_relays=jain_or_none(cumulative_relay_throughput),
        per_slot_capacity=caps,
    )
