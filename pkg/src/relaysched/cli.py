"""Command-line front end: ``relaysched {run,sweep,oracle}``.

Config files are INI-style with sections [system], [topology], [channel]
and [run]; see README for the key table. Every missing key takes the
default of the corresponding dataclass field.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import math
import os
import re
import sys
import tempfile
from pathlib import Path
from typing import Optional

from .channel import ChannelParams, ChannelRealization
from .engine import BOTH_POLICIES, ScenarioConfig, run, run_batch, sweep
from .model import ConfigError, SystemConfig, Topology
from .scheduler import SchedulerPolicy

PER_SLOT_HEADER = ["slot", "policy", "seed", "system_capacity_bps", "direct_bps", "relay_bps",
                   "jain_users_inst"]
SWEEP_HEADER = ["axis", "value", "policy", "mean_capacity_bps", "jain_users", "jain_relays",
                "stddev_capacity"]
PER_SLOT_FILE = "per_slot.csv"
SUMMARY_FILE = "summary.json"
SWEEP_FILE = "sweep.csv"

TABLE1_SNR = [[60, 10], [80, 70]]  # users x subchannels
TABLE1_EXPECTED = {SchedulerPolicy.RELAY_VARIANCE: 130.0, SchedulerPolicy.RELAY_MAXSNR: 90.0}


class ScenarioParseError(ConfigError):
    pass


# ------------------------------------------------------------------ parsing

def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    return int(text.strip())


def _parse_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


def parse_seeds(text: str) -> tuple:
    """Parse ``"1..5,9"`` style seed lists (ranges are inclusive)."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ValueError(f"empty item in seed list {text!r}")
        if ".." in part:
            lo, hi = (int(x) for x in part.split("..", 1))
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    return tuple(seeds)


def parse_policy(text: str) -> tuple:
    t = text.strip().lower()
    if t == "both":
        return BOTH_POLICIES
    try:
        return (SchedulerPolicy(t),)
    except ValueError:
        raise ValueError(f"policy must be variance, maxsnr or both, got {text!r}") from None


_KEYS = {
    "system": {
        "bandwidth_hz": float, "num_subchannels": _parse_int, "total_power_w": float,
        "relay_power_w": _parse_optional_float, "ber_target": float, "noise_psd": float,
        "avg_window": _parse_int, "symbols_per_subframe": _parse_int,
    },
    "topology": {"num_users": _parse_int, "num_relays": _parse_int},
    "channel": {"mean_snr_direct": float, "mean_snr_first_hop": float,
                "mean_snr_second_hop": float},
    "run": {"policy": parse_policy, "num_slots": _parse_int, "seeds": parse_seeds,
            "multi_round": _parse_bool},
}


def _key_lines(text: str) -> dict:
    """Map (section, key) to its 1-based line number for error messages."""
    lines, section = {}, None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            continue
        m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), i)
    return lines


def parse_scenario(config_text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(config_text)
    except configparser.Error as e:
        raise ScenarioParseError(f"malformed config: {e}") from None
    lines = _key_lines(config_text)

    def where(section, key=None):
        ln = lines.get((section, key)) if key else None
        loc = f"[{section}]" + (f" {key}" if key else "")
        return f"line {ln}, {loc}" if ln else loc

    values = {s: {} for s in _KEYS}
    for section in parser.sections():
        if section not in _KEYS:
            raise ScenarioParseError(f"{where(section)}: unknown section")
        for key, raw in parser.items(section):
            conv = _KEYS[section].get(key)
            if conv is None:
                raise ScenarioParseError(f"{where(section, key)}: unknown key")
            try:
                values[section][key] = conv(raw)
            except ValueError as e:
                raise ScenarioParseError(f"{where(section, key)}: cannot parse {raw!r} ({e})") from None

    run_vals = dict(values["run"])
    if "policy" in run_vals:
        run_vals["policies"] = run_vals.pop("policy")
    try:
        scenario = ScenarioConfig(
            system=SystemConfig(**values["system"]),
            topology=Topology(**values["topology"]),
            channel=ChannelParams(**values["channel"]),
            **run_vals,
        )
        scenario.validate()
    except (ConfigError, ValueError) as e:
        raise ScenarioParseError(f"invalid scenario: {e}") from None
    return scenario


# ------------------------------------------------------------------ output

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_outputs(out_dir: Path, files: dict) -> None:
    """Write ``{name: text}`` into ``out_dir``; all files appear or none do."""
    out_dir.mkdir(parents=True, exist_ok=True)
    temps = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            temps.append((tmp, out_dir / name))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        for tmp, dest in temps:
            os.replace(tmp, dest)
    except BaseException:
        for tmp, _ in temps:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def per_slot_rows(batches) -> list:
    rows = []
    for b in batches:
        for res in b.results:
            for rec in res.records:
                r = rec.rates
                rows.append([rec.slot, b.policy.value, res.seed, r.system_capacity,
                             r.direct_total, r.relay_total, rec.jain_users_inst])
    return rows


def summary_document(batches) -> dict:
    doc = {}
    for b in batches:
        entry = {"seeds": [r.seed for r in b.results], "num_slots": len(b.results[0].records)}
        for name, agg in b.aggregate.items():
            entry[name] = agg["mean"]
            entry[f"{name}_stddev"] = agg["stddev"]
        doc[b.policy.value] = entry
    by_policy = {b.policy: b for b in batches}
    var = by_policy.get(SchedulerPolicy.RELAY_VARIANCE)
    mx = by_policy.get(SchedulerPolicy.RELAY_MAXSNR)
    if var is not None and mx is not None:
        paired = [a.summary.cumulative_capacity / b.summary.cumulative_capacity
                  for a, b in zip(var.results, mx.results)]
        doc["comparison"] = {
            "capacity_ratio_variance_over_maxsnr":
                var.aggregate["cumulative_capacity"]["mean"] / mx.aggregate["cumulative_capacity"]["mean"],
            "paired_capacity_ratios": paired,
            "jain_users_variance_wins": sum(
                a.summary.jain_users > b.summary.jain_users
                for a, b in zip(var.results, mx.results)),
        }
    return doc


def sweep_rows(rows) -> list:
    out = []
    for r in rows:
        a = r.aggregate
        out.append([r.axis, r.value, r.policy.value, a["mean_system_capacity"]["mean"],
                    a["jain_users"]["mean"], a["jain_relays"]["mean"],
                    a["mean_system_capacity"]["stddev"]])
    return out


# ------------------------------------------------------------------ commands

def _load_scenario(args) -> ScenarioConfig:
    text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    sc = parse_scenario(text)
    changes = {}
    if args.policy:
        changes["policies"] = parse_policy(args.policy)
    if args.slots is not None:
        changes["num_slots"] = args.slots
    seeds = parse_seeds(args.seeds) if args.seeds else sc.seeds
    offset = os.environ.get("SIM_SEED_OFFSET", "0")
    try:
        offset = int(offset)
    except ValueError:
        raise ConfigError(f"SIM_SEED_OFFSET must be an integer, got {offset!r}") from None
    changes["seeds"] = tuple(s + offset for s in seeds)
    sc = dataclasses.replace(sc, **changes)
    sc.validate()
    return sc


def cmd_run(args) -> int:
    sc = _load_scenario(args)
    batches = [run_batch(sc, p, verify=args.verify) for p in sc.policies]
    write_outputs(Path(args.out), {
        PER_SLOT_FILE: _csv_text(PER_SLOT_HEADER, per_slot_rows(batches)),
        SUMMARY_FILE: json.dumps(summary_document(batches), indent=2) + "\n",
    })
    print(f"wrote {PER_SLOT_FILE} and {SUMMARY_FILE} to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    sc = _load_scenario(args)
    values = [int(v) for v in args.values.split(",")]
    axis = {"relays": "num_relays", "users": "num_users"}[args.axis]
    rows = sweep(sc, axis, values, verify=args.verify)
    text = _csv_text(SWEEP_HEADER, [[args.axis, *r[1:]] for r in sweep_rows(rows)])
    write_outputs(Path(args.out), {SWEEP_FILE: text})
    print(f"wrote {SWEEP_FILE} to {args.out}")
    return 0


def table1_scenario() -> tuple:
    realization = ChannelRealization.direct_only(TABLE1_SNR)
    sc = ScenarioConfig(system=SystemConfig(num_subchannels=2), topology=Topology(2, 0),
                        num_slots=1, seeds=(0,))
    return sc, realization


def oracle_sums() -> dict:
    sc, realization = table1_scenario()
    return {p: run(sc, 0, p, realization=realization, verify=True).records[0].allocation.snr_sum
            for p in BOTH_POLICIES}


def cmd_oracle(args=None) -> int:
    sums = oracle_sums()
    print(", ".join(f"{p.value}: {sums[p]:g}" for p in BOTH_POLICIES))
    bad = [p for p in BOTH_POLICIES if sums[p] != TABLE1_EXPECTED[p]]
    for p in bad:
        print(f"mismatch for {p.value}: expected {TABLE1_EXPECTED[p]:g}, got {sums[p]:g}",
              file=sys.stderr)
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaysched",
                                     description="Relay-enhanced OFDMA downlink scheduling simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario config file (INI)")
    common.add_argument("--policy", choices=["variance", "maxsnr", "both"])
    common.add_argument("--slots", type=int, help="slots per run")
    common.add_argument("--seeds", help="seed list, e.g. 1..20 or 1,5,9")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--verify", action="store_true",
                        help="assert scheduling constraints in every slot")

    p = sub.add_parser("run", parents=[common], help="simulate and write per-slot and summary data")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", parents=[common], help="sweep relay or user count")
    p.add_argument("--axis", choices=["relays", "users"], required=True)
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("oracle", help="check the two-user two-subchannel example")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep":
        try:
            vals = [v for v in args.values.split(",")]
            if not args.values.strip() or any(not v.strip() for v in vals):
                raise ValueError
            [int(v) for v in vals]
        except ValueError:
            parser.error(f"--values must be a comma-separated list of integers, got {args.values!r}")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
