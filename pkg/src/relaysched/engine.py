"""Slot-by-slot simulation driver, multi-seed batches and parameter sweeps."""
from __future__ import annotations

import contextlib
import dataclasses
import gc
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import ChannelParams, ChannelRealization, draw_channel
from .metrics import RunSummary, jain_or_none, summarize_run
from .model import ConfigError, SystemConfig, Topology, validate_config
from .rates import RateState, SlotRates, compute_slot_rates
from .scheduler import Allocation, SchedulerPolicy, allocation_violations, schedule_slot

BOTH_POLICIES = (SchedulerPolicy.RELAY_VARIANCE, SchedulerPolicy.RELAY_MAXSNR)
SWEEP_AXES = ("num_relays", "num_users")


@dataclass(frozen=True)
class ScenarioConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    topology: Topology = field(default_factory=Topology)
    channel: ChannelParams = field(default_factory=ChannelParams)
    policies: tuple = BOTH_POLICIES
    num_slots: int = 1000
    seeds: tuple = tuple(range(1, 21))
    multi_round: bool = False

    def validate(self) -> None:
        validate_config(self.system, self.topology)
        if not self.policies:
            raise ConfigError("at least one policy is required")
        for p in self.policies:
            try:
                SchedulerPolicy(p)
            except ValueError:
                raise ConfigError(f"unknown policy {p!r}") from None
        if not (isinstance(self.num_slots, int) and self.num_slots >= 1):
            raise ConfigError("num_slots must be ≥ 1")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        for s in self.seeds:
            if not (isinstance(s, int) and 0 <= s < 2**64):
                raise ConfigError(f"seed {s!r} is not a 64-bit unsigned integer")

    def _policy(self, policy: Optional[SchedulerPolicy]) -> SchedulerPolicy:
        if policy is not None:
            return SchedulerPolicy(policy)
        if len(self.policies) != 1:
            raise ValueError("scenario has several policies; pass one explicitly")
        return self.policies[0]


@dataclass(frozen=True, eq=False)
class SlotRecord:
    slot: int
    allocation: Allocation
    rates: SlotRates
    jain_users_inst: float  # over moving averages after this slot; nan if undefined


@dataclass(eq=False)
class RunResult:
    policy: SchedulerPolicy
    seed: int
    records: list
    final_state: RateState
    summary: RunSummary


@contextlib.contextmanager
def _gc_paused():
    # The slot loop builds many small acyclic records; letting the cyclic
    # collector rescan them as they pile up costs about a third of run time.
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def run(scenario: ScenarioConfig, seed: int, policy: Optional[SchedulerPolicy] = None, *,
        realization: Optional[ChannelRealization] = None, verify: bool = False) -> RunResult:
    """Simulate ``scenario.num_slots`` slots for one seed.

    ``realization``, when given, replaces the random channel in every slot.
    ``verify`` checks every allocation against the scheduling constraints.
    """
    scenario.validate()
    policy = scenario._policy(policy)
    cfg, topo = scenario.system, scenario.topology
    params = dataclasses.replace(scenario.channel, seed=seed)
    if realization is not None:
        realization.check_dims(cfg, topo)

    state = RateState.zeros(topo)
    records = []
    with _gc_paused():
        for t in range(scenario.num_slots):
            chan = realization if realization is not None else draw_channel(params, cfg, topo, t)
            alloc = schedule_slot(policy, chan, multi_round=scenario.multi_round)
            if verify:
                errs = allocation_violations(alloc, cfg.num_subchannels, topo.num_users,
                                             topo.num_relays, multi_round=scenario.multi_round)
                if errs:
                    raise AssertionError(f"slot {t}: " + "; ".join(errs))
            rates = compute_slot_rates(alloc, chan, cfg, topo)
            state.update(rates, cfg.avg_window)
            inst = jain_or_none(state.avg_rate)
            records.append(SlotRecord(t, alloc, rates, math.nan if inst is None else inst))

    summary = summarize_run([r.rates.system_capacity for r in records], state.avg_rate,
                            state.cumulative_relay_throughput)
    return RunResult(policy, seed, records, state, summary)


def aggregate(summaries: Sequence[RunSummary]) -> dict:
    """Across-seed mean and population stddev of each scalar summary field.

    Undefined values (None) are skipped; a field with no defined value
    aggregates to None.
    """
    out = {}
    for name in RunSummary.SCALARS:
        vals = [getattr(s, name) for s in summaries if getattr(s, name) is not None]
        if vals:
            out[name] = {"mean": float(np.mean(vals)), "stddev": float(np.std(vals))}
        else:
            out[name] = {"mean": None, "stddev": None}
    return out


@dataclass(eq=False)
class BatchResult:
    policy: SchedulerPolicy
    results: list
    aggregate: dict


def run_batch(scenario: ScenarioConfig, policy: Optional[SchedulerPolicy] = None, *,
              verify: bool = False) -> BatchResult:
    scenario.validate()
    policy = scenario._policy(policy)
    results = [run(scenario, s, policy, verify=verify) for s in scenario.seeds]
    return BatchResult(policy, results, aggregate([r.summary for r in results]))


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: int
    policy: SchedulerPolicy
    aggregate: dict


def sweep(scenario: ScenarioConfig, axis: str, values: Sequence[int], *,
          verify: bool = False) -> list[SweepRow]:
    """Run every policy of ``scenario`` at each value of a topology axis."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    if not values:
        raise ValueError("sweep needs at least one value")
    variants = []
    for v in values:
        topo = dataclasses.replace(scenario.topology, **{axis: v})
        sc = dataclasses.replace(scenario, topology=topo)
        try:
            sc.validate()
        except ConfigError as e:
            raise ConfigError(f"invalid {axis} value {v!r}: {e}") from None
        variants.append((v, sc))
    rows = []
    for v, sc in variants:
        for p in map(SchedulerPolicy, sc.policies):
            rows.append(SweepRow(axis, v, p, run_batch(sc, p, verify=verify).aggregate))
    return rows
