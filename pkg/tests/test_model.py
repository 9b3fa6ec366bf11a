import pytest
from hypothesis import given
from hypothesis import strategies as st

from relaysched import ConfigError, SystemConfig, Topology, validate_config
from relaysched.model import CommMode


def test_paper_defaults_valid():
    cfg = SystemConfig(bandwidth_hz=10e6, num_subchannels=128)
    validate_config(cfg, Topology(num_users=10, num_relays=6))


@pytest.mark.parametrize("cfg,topo,msg", [
    (SystemConfig(num_subchannels=0), Topology(), "num_subchannels must be ≥ 1"),
    (SystemConfig(ber_target=0.5), Topology(), "ber_target out of range"),
    (SystemConfig(ber_target=0.2), Topology(), "ber_target out of range"),
    (SystemConfig(bandwidth_hz=0.0), Topology(), "bandwidth_hz"),
    (SystemConfig(avg_window=0), Topology(), "avg_window"),
    (SystemConfig(), Topology(num_users=0), "num_users"),
    (SystemConfig(), Topology(num_relays=-1), "num_relays"),
])
def test_rejects(cfg, topo, msg):
    with pytest.raises(ConfigError, match=msg):
        validate_config(cfg, topo)


def test_zero_relays_allowed():
    validate_config(SystemConfig(), Topology(num_users=3, num_relays=0))


@given(
    w=st.floats(-1e7, 1e8, allow_nan=False),
    n=st.integers(-2, 300),
    p=st.floats(-1.0, 10.0, allow_nan=False),
    ber=st.floats(-0.1, 0.6, allow_nan=False),
    t=st.integers(-2, 500),
    m=st.integers(-1, 20),
    k=st.integers(-1, 8),
)
def test_accepts_iff_invariants_hold(w, n, p, ber, t, m, k):
    cfg = SystemConfig(bandwidth_hz=w, num_subchannels=n, total_power_w=p, ber_target=ber,
                       avg_window=t)
    ok = w > 0 and n >= 1 and p > 0 and 0 < ber < 0.2 and t >= 1 and m >= 1 and k >= 0
    try:
        validate_config(cfg, Topology(m, k))
        accepted = True
    except ConfigError:
        accepted = False
    assert accepted == ok


def test_comm_mode():
    assert CommMode.direct().is_direct
    assert CommMode.relayed(3).relay == 3
    assert CommMode.relayed(1) == CommMode.relayed(1) != CommMode.direct()
