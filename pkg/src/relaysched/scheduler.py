"""Per-slot subchannel assignment for a relay-enhanced OFDMA downlink.

Two policies are provided:

* ``RELAY_VARIANCE``: the user whose direct-link SNR is most dispersed over
  the still-unassigned subchannels is served first; its relay is the one
  whose relay->user SNRs are most dispersed; direct vs relayed mode is
  ``argmax{direct, min(hop1, hop2)}``.
* ``RELAY_MAXSNR``: the (user, path) with the highest end-to-end SNR is
  served first.

Sub-slot indices are zero-based: 0 carries BS->user and BS->relay traffic,
1 carries relay->user traffic. All ties break toward the lowest index.
"""
from __future__ import annotations

import enum
from collections.abc import Collection, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .channel import ChannelRealization
from .model import CommMode, SystemConfig, Topology


class SchedulerPolicy(enum.Enum):
    RELAY_VARIANCE = "variance"
    RELAY_MAXSNR = "maxsnr"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Assignment:
    """One committed scheduling decision.

    For a direct user ``subchannel`` is used by the BS in ``sub_slot``. For
    a relayed user ``subchannel`` carries BS->relay in sub-slot 0 and
    ``hop2_subchannel`` carries relay->user in sub-slot 1. ``snr`` is the
    end-to-end SNR the decision was ranked by.
    """

    user: int
    mode: CommMode
    subchannel: int
    sub_slot: int = 0
    hop2_subchannel: Optional[int] = None
    snr: float = 0.0


@dataclass
class Allocation:
    alpha_direct: set = field(default_factory=set)  # {(n, m, sub_slot)}
    alpha_relay_hop1: set = field(default_factory=set)  # {(n, k)}
    beta_hop2: set = field(default_factory=set)  # {(n, k, m)}
    mode_of: dict = field(default_factory=dict)  # m -> CommMode | None
    assignments: tuple = ()

    @classmethod
    def from_assignments(cls, assignments: Iterable[Assignment], num_users: int) -> "Allocation":
        alloc = cls(mode_of={m: None for m in range(num_users)})
        log = []
        for a in assignments:
            if a.mode.is_direct:
                alloc.alpha_direct.add((a.subchannel, a.user, a.sub_slot))
            else:
                alloc.alpha_relay_hop1.add((a.subchannel, a.mode.relay))
                alloc.beta_hop2.add((a.hop2_subchannel, a.mode.relay, a.user))
            if alloc.mode_of.get(a.user) is None:
                alloc.mode_of[a.user] = a.mode
            log.append(a)
        alloc.assignments = tuple(log)
        return alloc

    @property
    def snr_sum(self) -> float:
        """Sum of the end-to-end SNRs of every committed assignment."""
        return float(sum(a.snr for a in self.assignments))

    def served_users(self) -> set:
        return {m for m, mode in self.mode_of.items() if mode is not None}


def allocation_violations(alloc: Allocation, num_subchannels: int, num_users: int,
                          num_relays: int, *, multi_round: bool = False) -> list[str]:
    """List every violated allocation constraint (empty when valid).

    Checks index ranges (binary indicators), per-sub-slot subchannel
    exclusivity, one assignment per user per slot (skipped when
    ``multi_round``), and relay hop bookkeeping.
    """
    errs = []
    N, M, K = num_subchannels, num_users, num_relays

    def _in(i, hi):
        return isinstance(i, (int, np.integer)) and 0 <= i < hi

    for n, m, tau in alloc.alpha_direct:
        if not (_in(n, N) and _in(m, M) and tau in (0, 1)):
            errs.append(f"C1: bad direct indicator {(n, m, tau)}")
        if not multi_round and tau != 0:
            errs.append(f"direct transmission in sub-slot {tau} without multi_round")
    for n, k in alloc.alpha_relay_hop1:
        if not (_in(n, N) and _in(k, K)):
            errs.append(f"C1: bad hop-1 indicator {(n, k)}")
    for n, k, m in alloc.beta_hop2:
        if not (_in(n, N) and _in(k, K) and _in(m, M)):
            errs.append(f"C1: bad hop-2 indicator {(n, k, m)}")

    slot0 = [n for n, _, tau in alloc.alpha_direct if tau == 0] + [n for n, _ in alloc.alpha_relay_hop1]
    slot1 = [n for n, _, tau in alloc.alpha_direct if tau == 1] + [n for n, _, _ in alloc.beta_hop2]
    for tau, used in ((0, slot0), (1, slot1)):
        if len(used) != len(set(used)):
            dup = sorted({n for n in used if used.count(n) > 1})
            errs.append(f"C2: subchannels {dup} reused in sub-slot {tau}")

    per_user = [m for _, m, _ in alloc.alpha_direct] + [m for _, _, m in alloc.beta_hop2]
    if not multi_round and len(per_user) != len(set(per_user)):
        dup = sorted({m for m in per_user if per_user.count(m) > 1})
        errs.append(f"C3: users {dup} hold more than one assignment")

    for k in range(K):
        h1 = sum(1 for _, kk in alloc.alpha_relay_hop1 if kk == k)
        h2 = sum(1 for _, kk, _ in alloc.beta_hop2 if kk == k)
        if h1 != h2:
            errs.append(f"relay {k}: {h1} hop-1 subchannels but {h2} hop-2 users")
    if not multi_round:
        for _, m, _ in alloc.alpha_direct:
            if alloc.mode_of.get(m) != CommMode.direct():
                errs.append(f"user {m} has a direct indicator but mode {alloc.mode_of.get(m)}")
        for _, k, m in alloc.beta_hop2:
            if alloc.mode_of.get(m) != CommMode.relayed(k):
                errs.append(f"user {m} relayed via {k} but mode {alloc.mode_of.get(m)}")
    return errs


# ---------------------------------------------------------------- primitives

def _pool_variances(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Column-wise population variance over the rows with weight 1.

    Evaluated in two passes, which equals mean(x^2) - mean(x)^2 without the
    cancellation error.
    """
    c = weights.sum()
    dev = values - (weights @ values) / c
    return (weights @ (dev * dev)) / c


def _masked_argmax(values: np.ndarray, mask: np.ndarray) -> int:
    return int(np.argmax(np.where(mask, values, -np.inf)))


def _as_mask(indices: Collection[int], size: int) -> np.ndarray:
    mask = np.zeros(size, dtype=bool)
    idx = np.fromiter((int(i) for i in indices), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= size):
        raise ValueError(f"index out of range [0, {size})")
    mask[idx] = True
    return mask


def variance_metric(snrs, ddof: int = 0) -> float:
    """Dispersion of a user's SNRs: ``sum(d^2)/n - (sum(d)/n)^2``.

    ``ddof=1`` rescales to the ``n - 1`` divisor; the ranking of users is the
    same under either divisor for equal-length vectors.
    """
    x = np.asarray(snrs, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise ValueError("variance_metric needs at least one SNR value")
    if n - ddof <= 0:
        raise ValueError(f"ddof={ddof} too large for {n} values")
    v = _pool_variances(x[:, None], np.ones(n))[0]
    return float(v * n / (n - ddof))


def select_user(candidates: Collection[int], variance_of: Mapping[int, float]) -> int:
    """User with the largest variance; lowest index on ties."""
    if not candidates:
        raise ValueError("no candidate users")
    return min(candidates, key=lambda m: (-variance_of[m], m))


def best_subchannel(snrs, unassigned: Collection[int]) -> int:
    """Unassigned subchannel with the highest SNR; lowest index on ties."""
    if not unassigned:
        raise ValueError("no unassigned subchannels")
    x = np.asarray(snrs, dtype=float)
    return _masked_argmax(x, _as_mask(unassigned, x.size))


def select_relay(user: int, realization: ChannelRealization, unassigned_hop2: Collection[int],
                 eligible_relays: Collection[int]) -> int:
    """Relay whose relay->user SNRs over the unassigned sub-slot-1 pool vary most."""
    if not eligible_relays:
        raise ValueError("no eligible relays")
    if not unassigned_hop2:
        raise ValueError("no unassigned hop-2 subchannels")
    pool = _as_mask(unassigned_hop2, realization.num_subchannels)
    rel = np.asarray(sorted(eligible_relays), dtype=int)
    x = realization.snr_second_hop[:, rel, user]
    v = _pool_variances(x, pool.astype(float))
    return int(rel[np.argmax(v)])


def select_mode(delta_direct_best: float, delta_hop1_best: float,
                delta_hop2_best: float) -> Literal["direct", "relayed"]:
    """Relayed only if the two-hop bottleneck SNR strictly beats the direct SNR."""
    if min(delta_hop1_best, delta_hop2_best) > delta_direct_best:
        return "relayed"
    return "direct"


# ---------------------------------------------------------------- slot state

def _refresh(work: np.ndarray, arg: np.ndarray, best: np.ndarray, col: int) -> None:
    arg, best = arg.reshape(-1), best.reshape(-1)
    stale = np.flatnonzero(arg == col)
    if stale.size:
        rows = work.reshape(-1, work.shape[-1])[stale]
        a = rows.argmax(axis=1)
        arg[stale] = a
        best[stale] = rows[np.arange(stale.size), a]


class _SlotState:
    """Unassigned pools for one slot.

    SNR arrays are stored subchannel-last so per-user scans are contiguous;
    working copies hold -inf on consumed subchannels so pool maxima are plain
    reductions. Running sums of x and x^2 over each pool give the variance
    ranking without rescanning the pool.
    """

    def __init__(self, realization: ChannelRealization, multi_round: bool,
                 pool1: Optional[np.ndarray] = None, pool2: Optional[np.ndarray] = None):
        self.r = realization
        self.N = N = realization.num_subchannels
        self.K = realization.num_relays
        self.multi_round = multi_round
        self.pool1 = np.ones(N, dtype=bool) if pool1 is None else pool1.copy()
        self.pool2 = np.ones(N, dtype=bool) if pool2 is None else pool2.copy()
        self.free1 = int(self.pool1.sum())
        self.free2 = int(self.pool2.sum())

        d = realization.snr_direct
        # Direct options of user m sit in row m at column tau * N + n.
        self.direct = np.concatenate([d[:, :, 0].T, d[:, :, 1].T], axis=1)
        in_var = np.concatenate([self.pool1, self.pool2 if multi_round else np.zeros(N, bool)])
        self.direct_w = np.where(in_var, self.direct, -np.inf)
        self.hop1 = np.ascontiguousarray(realization.snr_first_hop.T)  # (K, N)
        self.hop1_w = np.where(self.pool1, self.hop1, -np.inf)
        self.hop2 = np.ascontiguousarray(realization.snr_second_hop.transpose(1, 2, 0))  # (K, M, N)
        self.hop2_w = np.where(self.pool2, self.hop2, -np.inf)

        dv = np.where(in_var, self.direct, 0.0)
        self.d_count = int(in_var.sum())
        self.d_sum, self.d_sq = dv.sum(axis=1), (dv * dv).sum(axis=1)
        hv = np.where(self.pool2, self.hop2, 0.0)
        self.h2_sum, self.h2_sq = hv.sum(axis=2), (hv * hv).sum(axis=2)

        # Cached best subchannel per row; refreshed only where it gets consumed.
        self.d_arg, self.d_max = self.direct_w.argmax(axis=1), self.direct_w.max(axis=1)
        self.h1_arg, self.h1_max = self.hop1_w.argmax(axis=1), self.hop1_w.max(axis=1)
        self.h2_arg, self.h2_max = self.hop2_w.argmax(axis=2), self.hop2_w.max(axis=2)

    def direct_scores(self, cols) -> np.ndarray:
        """count^2 times the pool variance of each user's direct SNRs."""
        c = self.d_count
        return np.maximum(c * self.d_sq[cols] - self.d_sum[cols] ** 2, 0.0)

    def relay_scores(self, user: int) -> np.ndarray:
        """count^2 times the pool variance of each relay's SNRs towards ``user``."""
        c = self.free2
        return np.maximum(c * self.h2_sq[:, user] - self.h2_sum[:, user] ** 2, 0.0)

    def can_relay(self) -> bool:
        return self.K > 0 and self.free1 > 0 and self.free2 > 0

    def can_continue(self) -> bool:
        if self.multi_round:
            return self.free1 > 0 or self.free2 > 0
        return self.free1 > 0 and self.free2 > 0

    def _take(self, n: int, tau: int) -> None:
        col = tau * self.N + n
        if tau == 0 or self.multi_round:
            x = self.direct[:, col]
            self.d_sum -= x
            self.d_sq -= x * x
            self.d_count -= 1
            self.direct_w[:, col] = -np.inf
            _refresh(self.direct_w, self.d_arg, self.d_max, col)
        if tau == 0:
            self.pool1[n] = False
            self.free1 -= 1
            self.hop1_w[:, n] = -np.inf
            _refresh(self.hop1_w, self.h1_arg, self.h1_max, n)
        else:
            self.pool2[n] = False
            self.free2 -= 1
            x = self.hop2[:, :, n]
            self.h2_sum -= x
            self.h2_sq -= x * x
            self.hop2_w[:, :, n] = -np.inf
            _refresh(self.hop2_w, self.h2_arg, self.h2_max, n)

    def commit(self, a: Assignment) -> None:
        if a.mode.is_direct:
            self._take(a.subchannel, a.sub_slot)
        else:
            self._take(a.subchannel, 0)
            self._take(a.hop2_subchannel, 1)


def _variance_step(st: _SlotState, unserved: list[int]) -> Assignment:
    # Scores are variances scaled by the common factor count^2; same argmax.
    scores = st.direct_scores(unserved)
    user = select_user(unserved, dict(zip(unserved, scores.tolist())))
    col = int(st.d_arg[user])
    tau, n = divmod(col, st.N)
    d_snr = float(st.direct[user, col])
    direct = Assignment(user, CommMode.direct(), n, tau, None, d_snr)
    if not st.can_relay():
        return direct
    k = int(np.argmax(st.relay_scores(user)))
    n1, n2 = int(st.h1_arg[k]), int(st.h2_arg[k, user])
    hop1, hop2 = float(st.hop1[k, n1]), float(st.hop2[k, user, n2])
    if select_mode(d_snr, hop1, hop2) == "relayed":
        return Assignment(user, CommMode.relayed(k), n1, 0, n2, min(hop1, hop2))
    return direct


def _maxsnr_pick(st: _SlotState, users: list[int]) -> Assignment:
    """Best end-to-end option over ``users`` (ascending) under the current pools."""
    d_best = st.d_max[users]
    best = d_best
    relay = st.can_relay()
    if relay:
        e2e = np.minimum(st.h1_max[:, None], st.h2_max[:, users])  # (K, U)
        relay_k = e2e.argmax(axis=0)
        relay_best = e2e.max(axis=0)
        best = np.maximum(relay_best, d_best)
    i = int(np.argmax(best))
    m = users[i]
    if relay and relay_best[i] > d_best[i]:
        k = int(relay_k[i])
        n1, n2 = int(st.h1_arg[k]), int(st.h2_arg[k, m])
        return Assignment(m, CommMode.relayed(k), n1, 0, n2, float(relay_best[i]))
    tau, n = divmod(int(st.d_arg[m]), st.N)
    return Assignment(m, CommMode.direct(), n, tau, None, float(d_best[i]))


def maxsnr_select(candidates: Collection[int], realization: ChannelRealization,
                  unassigned_hop1: Collection[int], unassigned_hop2: Collection[int],
                  *, multi_round: bool = False) -> tuple[int, Assignment]:
    """Candidate with the largest best-available end-to-end SNR, with that option.

    Direct options come from the sub-slot-0 pool (plus the sub-slot-1 pool
    when ``multi_round``); relayed options pair the best BS->relay subchannel
    with the best relay->user subchannel. Ties: lowest user, direct before
    relayed, lowest relay, lowest subchannel.
    """
    if not candidates:
        raise ValueError("no candidate users")
    N = realization.num_subchannels
    st = _SlotState(realization, multi_round, _as_mask(unassigned_hop1, N),
                    _as_mask(unassigned_hop2, N))
    if not st.free1 and not (multi_round and st.free2):
        raise ValueError("no unassigned subchannels for a direct option")
    best = _maxsnr_pick(st, sorted(candidates))
    return best.user, best


# ---------------------------------------------------------------- slot loop

def iter_assignments(policy: SchedulerPolicy, realization: ChannelRealization, *,
                     multi_round: bool = False) -> Iterator[Assignment]:
    """Yield the committed assignments of one slot in decision order.

    Default: every user is served at most once and the loop stops when users
    or either subchannel pool run out. With ``multi_round`` a new round over
    all users starts whenever everyone has been served, direct links may
    also use sub-slot 1, and the loop runs until both pools are empty.
    """
    M = realization.num_users
    policy = SchedulerPolicy(policy)
    st = _SlotState(realization, multi_round)
    unserved = list(range(M))
    while M and st.can_continue():
        if not unserved:
            if not multi_round:
                break
            unserved = list(range(M))
        if policy is SchedulerPolicy.RELAY_VARIANCE:
            a = _variance_step(st, unserved)
        else:
            a = _maxsnr_pick(st, unserved)
        st.commit(a)
        unserved.remove(a.user)
        yield a


def schedule_slot(policy: SchedulerPolicy, realization: ChannelRealization,
                  topo: Optional[Topology] = None, cfg: Optional[SystemConfig] = None, *,
                  multi_round: bool = False) -> Allocation:
    if topo is not None and cfg is not None:
        realization.check_dims(cfg, topo)
    return Allocation.from_assignments(
        iter_assignments(policy, realization, multi_round=multi_round), realization.num_users)
