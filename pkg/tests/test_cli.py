import csv
import json
import subprocess
import sys
from collections import defaultdict

import numpy as np
import pytest

from relaysched import cli
from relaysched.engine import BOTH_POLICIES, ScenarioConfig
from relaysched.scheduler import SchedulerPolicy


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def test_parse_empty_gives_defaults():
    sc = cli.parse_scenario("")
    assert sc == ScenarioConfig()
    assert (sc.system.bandwidth_hz, sc.system.num_subchannels) == (10e6, 128)
    assert (sc.topology.num_users, sc.topology.num_relays) == (10, 6)
    assert sc.system.ber_target == 1e-3 and sc.system.avg_window == 100
    assert sc.channel.mean_snr_direct == sc.channel.mean_snr_second_hop == 10.0
    assert sc.num_slots == 1000 and sc.seeds == tuple(range(1, 21))
    assert sc.policies == BOTH_POLICIES


def test_parse_full_document():
    text = """
[system]
num_subchannels = 32
ber_target = 0.01
relay_power_w = 2.5
[topology]
num_users = 4
num_relays = 2
[channel]
mean_snr_direct = 3.5
[run]
policy = variance
seeds = 1..3, 9
num_slots = 50
multi_round = true
"""
    sc = cli.parse_scenario(text)
    assert sc.system.num_subchannels == 32 and sc.system.relay_power_w == 2.5
    assert sc.topology.num_users == 4 and sc.channel.mean_snr_direct == 3.5
    assert sc.policies == (SchedulerPolicy.RELAY_VARIANCE,)
    assert sc.seeds == (1, 2, 3, 9) and sc.num_slots == 50 and sc.multi_round


@pytest.mark.parametrize("text,match", [
    ("[system]\nnum_subchannels = 0\n", "num_subchannels must be ≥ 1"),
    ("[system]\n\nbogus = 1\n", "line 3, \\[system\\] bogus: unknown key"),
    ("[extra]\nx = 1\n", "unknown section"),
    ("[topology]\nnum_users = ten\n", "line 2, \\[topology\\] num_users: cannot parse"),
    ("[run]\npolicy = fair\n", "policy"),
    ("[run]\nseeds = 5..1\n", "seed"),
    ("num_users = 3\n", "malformed"),
])
def test_parse_errors(text, match):
    with pytest.raises(cli.ScenarioParseError, match=match):
        cli.parse_scenario(text)


def test_parse_seeds():
    assert cli.parse_seeds("1..3") == (1, 2, 3)
    assert cli.parse_seeds("4, 2,7") == (4, 2, 7)
    with pytest.raises(ValueError):
        cli.parse_seeds("1,,2")


def test_run_cardinality_and_summary(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", "--slots", "10", "--seeds", "1", "--out", str(out)]) == 0
    rows = read_csv(out / cli.PER_SLOT_FILE)
    assert list(rows[0]) == cli.PER_SLOT_HEADER
    per_policy = defaultdict(int)
    for r in rows:
        per_policy[r["policy"]] += 1
    assert per_policy == {"variance": 10, "maxsnr": 10}
    doc = json.loads((out / cli.SUMMARY_FILE).read_text())
    ratio = doc["comparison"]["capacity_ratio_variance_over_maxsnr"]
    assert ratio == pytest.approx(doc["variance"]["cumulative_capacity"] / doc["maxsnr"]["cumulative_capacity"])


def test_csv_round_trip_reproduces_summary(tmp_path):
    out = tmp_path / "o"
    cfg = tmp_path / "s.ini"
    cfg.write_text("[system]\nnum_subchannels = 24\n[topology]\nnum_users = 6\nnum_relays = 3\n")
    assert cli.main(["run", "--config", str(cfg), "--slots", "15", "--seeds", "1..3",
                     "--out", str(out), "--verify"]) == 0
    doc = json.loads((out / cli.SUMMARY_FILE).read_text())
    series = defaultdict(list)
    for r in read_csv(out / cli.PER_SLOT_FILE):
        series[(r["policy"], int(r["seed"]))].append(float(r["system_capacity_bps"]))
        assert float(r["system_capacity_bps"]) == pytest.approx(
            float(r["direct_bps"]) + float(r["relay_bps"]), rel=1e-12)
    for p in ("variance", "maxsnr"):
        per_seed = [np.mean(series[(p, s)]) for s in (1, 2, 3)]
        cum = [sum(series[(p, s)]) for s in (1, 2, 3)]
        assert np.mean(per_seed) == pytest.approx(doc[p]["mean_system_capacity"], rel=1e-9)
        assert np.std(per_seed) == pytest.approx(doc[p]["mean_system_capacity_stddev"], rel=1e-9)
        assert np.mean(cum) == pytest.approx(doc[p]["cumulative_capacity"], rel=1e-9)


def test_single_policy_has_no_comparison(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", "--policy", "maxsnr", "--slots", "2", "--seeds", "1", "--out", str(out)]) == 0
    doc = json.loads((out / cli.SUMMARY_FILE).read_text())
    assert set(doc) == {"maxsnr"}


def test_seed_offset_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SIM_SEED_OFFSET", "100")
    out = tmp_path / "o"
    assert cli.main(["run", "--policy", "variance", "--slots", "1", "--seeds", "1,2", "--out", str(out)]) == 0
    assert {r["seed"] for r in read_csv(out / cli.PER_SLOT_FILE)} == {"101", "102"}
    monkeypatch.setenv("SIM_SEED_OFFSET", "x")
    assert cli.main(["run", "--slots", "1", "--seeds", "1", "--out", str(out)]) == 2


def test_unwritable_out_leaves_nothing(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    out = blocker / "sub"
    assert cli.main(["run", "--slots", "2", "--seeds", "1", "--out", str(out)]) != 0
    assert "error" in capsys.readouterr().err
    assert not out.exists()


def test_failed_write_cleans_temporaries(tmp_path, monkeypatch):
    out = tmp_path / "o"
    real = cli.os.fdopen
    calls = []

    def flaky(fd, *a, **kw):
        calls.append(fd)
        if len(calls) == 2:
            raise OSError("disk full")
        return real(fd, *a, **kw)

    monkeypatch.setattr(cli.os, "fdopen", flaky)
    assert cli.main(["run", "--slots", "2", "--seeds", "1", "--out", str(out)]) == 1
    assert list(out.iterdir()) == []


def test_validation_error_exit(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[system]\nnum_subchannels = 0\n")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path / "o")]) == 1


def test_sweep_relays(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["sweep", "--axis", "relays", "--values", "1,2,3,4,5,6", "--slots", "2",
                     "--seeds", "1", "--out", str(out)]) == 0
    rows = read_csv(out / cli.SWEEP_FILE)
    assert list(rows[0]) == cli.SWEEP_HEADER
    assert len(rows) == 12
    assert {r["axis"] for r in rows} == {"relays"}


def test_sweep_users(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["sweep", "--axis", "users", "--values", "2,4,6,8,10", "--slots", "2",
                     "--seeds", "1", "--out", str(out)]) == 0
    rows = read_csv(out / cli.SWEEP_FILE)
    assert [int(r["value"]) for r in rows] == [2, 2, 4, 4, 6, 6, 8, 8, 10, 10]
    assert all(0 < float(r["jain_users"]) <= 1 for r in rows)


@pytest.mark.parametrize("values", ["", "1,,2", "a"])
def test_sweep_bad_values_is_usage_error(values, tmp_path):
    with pytest.raises(SystemExit) as e:
        cli.main(["sweep", "--axis", "relays", "--values", values, "--out", str(tmp_path)])
    assert e.value.code == 2


def test_sweep_invalid_topology(tmp_path):
    assert cli.main(["sweep", "--axis", "users", "--values", "0", "--slots", "1", "--seeds", "1",
                     "--out", str(tmp_path / "o")]) == 2


def test_oracle_output(capsys):
    assert cli.main(["oracle"]) == 0
    first = capsys.readouterr().out
    assert first.strip() == "variance: 130, maxsnr: 90"
    assert cli.main(["oracle"]) == 0
    assert capsys.readouterr().out == first


def test_oracle_detects_corrupted_scheduler(monkeypatch, capsys):
    from relaysched import scheduler

    def lowest_variance_first(candidates, variance_of):
        return min(candidates, key=lambda m: (variance_of[m], m))

    monkeypatch.setattr(scheduler, "select_user", lowest_variance_first)
    assert cli.main(["oracle"]) == 1
    assert "expected 130" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "relaysched", "oracle"], capture_output=True, text=True)
    assert res.returncode == 0 and "variance: 130" in res.stdout
