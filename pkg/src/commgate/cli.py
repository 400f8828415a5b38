"""Reproducible experiment runner.

Subcommands
-----------
fit        ratings CSV -> empirical reward prior (r,cdf CSV + metadata JSON)
optimize   schedule / sharing-slot optimization for a given prior
simulate   Monte-Carlo run from a JSON config file
sweep      mechanism-vs-centralized gain across horizons and reward modes

Exit codes: 0 success, 2 validation error, 3 solver failure.  All outputs are
pure functions of (arguments, config, seed): no timestamps, sorted JSON keys,
fixed float formatting.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import dataset, myopic, nonmyopic, svg
from .distributions import RewardDistribution
from .errors import (
    CommgateError,
    ConfigError,
    DatasetError,
    DistributionError,
    HorizonTooLargeError,
    QuadratureError,
    ScheduleError,
    SolverError,
)
from .schedules import CommSchedule
from .simulate import SimConfig, run, trajectory_compare

CONFIG_SCHEMA_VERSION = 1


def parse_dist(spec: str) -> RewardDistribution:
    """``uniform``, ``beta:a,b``, or a path to an ``r,cdf`` CSV."""
    if spec == "uniform":
        return RewardDistribution.uniform()
    if spec.startswith("beta:"):
        try:
            a, b = (float(v) for v in spec[5:].split(","))
        except ValueError as exc:
            raise DistributionError(f"bad beta spec {spec!r}, expected beta:a,b") from exc
        return RewardDistribution.beta(a, b)
    if Path(spec).exists():
        return RewardDistribution.from_csv(spec)
    raise DistributionError(f"distribution {spec!r} is not uniform, beta:a,b, or an existing CSV")


def cmd_fit(args) -> int:
    table = dataset.load_ratings(args.dataset, None)
    bandwidth = args.bandwidth if args.bandwidth is not None else dataset.silverman_bandwidth(table.normalized)
    d = dataset.fit_reward_cdf(table, bandwidth)
    d.to_csv(args.out)
    meta = {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "source": str(args.dataset),
        "rows": len(table),
        "bandwidth": bandwidth,
        "boundary": "reflect[0,1]",
        "kernel": "gaussian",
        "grid_points": len(d.grid),
        "mean": d.mean(),
    }
    Path(str(args.out) + ".meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    print(f"fitted {len(table)} rows -> {args.out} (mean {d.mean():.4f}, bandwidth {bandwidth:.5f})")
    return 0


def cmd_optimize(args) -> int:
    d = parse_dist(args.dist)
    N, T = args.n_agents, args.horizon
    rows = []
    if args.mode == "myopic-approx":
        base = myopic.welfare_centralized(d, N, T)
        sched, welfare = myopic.optimize_single_window(d, N, T)
        rows = [("window_len", "welfare")] + [(L, w) for L, w in myopic.scan_single_window(d, N, T)]
        if sched.is_centralized:
            print("centralized optimal (window condition fails)")
        else:
            print(f"best single window: first {sched.windows[0][1]} slots closed")
        print(f"welfare {welfare:.6f} vs centralized {base.total_welfare:.6f} "
              f"(gain {welfare - base.total_welfare:+.6f})")
    elif args.mode == "myopic-exact":
        base = myopic.welfare_centralized(d, N, T)
        sched, welfare = myopic.optimize_exact(d, N, T, max_T_for_exact=args.max_exact)
        print(f"exact windows: {list(sched.windows)}")
        print(f"welfare {welfare:.6f} vs centralized {base.total_welfare:.6f} "
              f"(gain {welfare - base.total_welfare:+.6f})")
        rows = [("window_layout", "welfare"), (json.dumps(list(sched.windows)), welfare)]
    else:  # nonmyopic
        scan = nonmyopic.scan_comm_times(d, N, T)
        seq_c = nonmyopic.solve_centralized_nonmyopic(d, N, T)
        base_w, _ = nonmyopic.welfare_one_time(d, N, T, seq_c)
        ok = [(t1, w) for t1, w, s in scan if s is not None]
        failed = [t1 for t1, _, s in scan if s is None]
        if not ok:
            raise SolverError("every sharing-slot candidate failed", diagnostics={"failed": failed})
        t1_star, welfare = max(ok, key=lambda p: (p[1], -p[0]))
        print(f"best sharing slot T1* = {t1_star}")
        print(f"welfare {welfare:.6f} vs centralized {base_w:.6f} "
              f"(gain {(welfare / base_w - 1) * 100:+.2f}%)")
        if failed:
            print(f"skipped candidates (solver failure): {failed}", file=sys.stderr)
        rows = [("T1", "welfare")] + ok
    if args.out:
        with open(args.out, "w", newline="") as fh:
            for row in rows:
                fh.write(",".join(f"{v:.12g}" if isinstance(v, float) else str(v) for v in row) + "\n")
    return 0


def _schedule_from_config(obj, T) -> CommSchedule:
    if obj == "centralized":
        return CommSchedule.centralized(T)
    if isinstance(obj, dict) and "one_time" in obj:
        return CommSchedule.one_time(T, int(obj["one_time"]))
    if isinstance(obj, dict) and "windows" in obj:
        wins = tuple((int(w["start"]), int(w["len"])) for w in obj["windows"])
        return CommSchedule(T, wins)
    raise ConfigError(f"schedule: expected 'centralized', {{'one_time': t}}, or {{'windows': [...]}}, got {obj!r}")


def load_sim_config(path, overrides: dict | None = None) -> tuple[SimConfig, dict]:
    """Build a SimConfig from a JSON file; ``overrides`` beat file values."""
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if obj.get("schema_version") != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"{path}: schema_version must be {CONFIG_SCHEMA_VERSION}, got {obj.get('schema_version')!r}"
        )
    obj.update(overrides or {})
    for key in ("dist", "n_agents", "horizon", "schedule", "agent_kind"):
        if key not in obj:
            raise ConfigError(f"{path}: missing field '{key}'")
    if isinstance(obj["dist"], dict):
        if "csv" not in obj["dist"]:
            raise ConfigError(f"{path}: dist object must carry 'csv'")
        d = RewardDistribution.from_csv(obj["dist"]["csv"])
    else:
        d = parse_dist(str(obj["dist"]))
    T = int(obj["horizon"])
    schedule = _schedule_from_config(obj["schedule"], T)
    kind = str(obj["agent_kind"])
    thresholds = None
    if kind == "nonmyopic":
        open_slots = [t for t in schedule.open_slots() if t <= T - 1]
        if not open_slots:
            raise ConfigError(f"{path}: nonmyopic runs need an open slot before the horizon")
        t1 = open_slots[-1]
        thresholds = (
            nonmyopic.solve_centralized_nonmyopic(d, int(obj["n_agents"]), T)
            if t1 == T - 1
            else nonmyopic.solve_one_time(d, int(obj["n_agents"]), T, t1)
        )
    cfg = SimConfig(
        dist=d,
        n_agents=int(obj["n_agents"]),
        horizon=T,
        schedule=schedule,
        agent_kind=kind,
        thresholds=thresholds,
        reward_mode=str(obj.get("reward_mode", "deterministic")),
        noise_sd=float(obj.get("noise_sd", 0.1)),
        pref_sd=float(obj.get("pref_sd", 0.1)),
        replications=int(obj.get("replications", 1)),
        master_seed=int(obj.get("master_seed", 0)),
        noise_per_option=bool(obj.get("noise_per_option", False)),
    )
    return cfg, obj


def cmd_simulate(args) -> int:
    overrides = {}
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    cfg, obj = load_sim_config(args.config, overrides)
    result = run(cfg)
    out = args.out or obj.get("out")
    if not out:
        raise ConfigError("no output path: pass --out or set 'out' in the config")
    result.to_csv(out)
    print(f"welfare {result.total_welfare_mean:.6f} +- {result.total_welfare_stderr:.6f}, "
          f"exploration slots {result.exploration_slots_mean:.4f} -> {out}")
    if args.svg:
        chart = svg.polyline_chart(
            [("mean reward/agent", list(range(cfg.horizon + 1)), list(result.per_slot_mean_reward))],
            title="per-slot mean reward",
        )
        Path(args.svg).write_text(chart)
        print(f"chart -> {args.svg}")
    return 0


def cmd_sweep(args) -> int:
    d = parse_dist(args.dist)
    N = args.n_agents
    horizons = list(range(args.t_start, args.t_stop + 1, args.t_step))
    modes = args.modes.split(",")
    lines = ["T,mode,T1_star,mechanism_welfare,centralized_welfare,gain_per_agent"]
    for T in horizons:
        t1_star, seq, _ = nonmyopic.optimize_comm_time(d, N, T)
        seq_c = nonmyopic.solve_centralized_nonmyopic(d, N, T)
        for mode in modes:
            mech = SimConfig(
                dist=d, n_agents=N, horizon=T,
                schedule=CommSchedule.one_time(T, t1_star),
                agent_kind="nonmyopic", thresholds=seq,
                reward_mode=mode, noise_sd=args.noise_sd, pref_sd=args.pref_sd,
                replications=args.replications, master_seed=args.seed,
            )
            cent = replace(mech, schedule=CommSchedule.centralized(T), thresholds=seq_c)
            r_mech, r_cent = trajectory_compare(mech, cent)
            gain = (r_mech.total_welfare_mean - r_cent.total_welfare_mean) / N
            lines.append(
                f"{T},{mode},{t1_star},{r_mech.total_welfare_mean:.12g},"
                f"{r_cent.total_welfare_mean:.12g},{gain:.12g}"
            )
            print(lines[-1])
    Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="commgate", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit an empirical reward prior from a ratings CSV")
    f.add_argument("dataset", help="ratings CSV (hotel_id,avg_rating,rating_scale_max,n_reviews[,rating_sd])")
    f.add_argument("out", help="output r,cdf CSV path")
    f.add_argument("--bandwidth", type=float, default=None, help="kernel bandwidth (default: Silverman)")
    f.set_defaults(func=cmd_fit)

    o = sub.add_parser("optimize", help="optimize the communication mechanism for a prior")
    o.add_argument("--dist", required=True, help="uniform | beta:a,b | r,cdf CSV path")
    o.add_argument("--n-agents", type=int, required=True)
    o.add_argument("--horizon", type=int, required=True)
    o.add_argument("--mode", choices=["myopic-approx", "myopic-exact", "nonmyopic"], required=True)
    o.add_argument("--max-exact", type=int, default=14, help="horizon cap for the exact search")
    o.add_argument("--out", default=None, help="CSV of the full candidate scan")
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("simulate", help="run a Monte-Carlo experiment from a JSON config")
    s.add_argument("config", help="JSON config file (schema_version 1)")
    s.add_argument("--out", default=None, help="override the config's output CSV path")
    s.add_argument("--replications", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--svg", default=None, help="also write a per-slot SVG chart here")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="mechanism-vs-centralized gain across horizons")
    w.add_argument("--dist", required=True)
    w.add_argument("--n-agents", type=int, required=True)
    w.add_argument("--t-start", type=int, default=10)
    w.add_argument("--t-stop", type=int, default=80)
    w.add_argument("--t-step", type=int, default=10)
    w.add_argument("--modes", default="deterministic",
                   help="comma list of deterministic,stochastic,heterogeneous")
    w.add_argument("--noise-sd", type=float, default=0.1)
    w.add_argument("--pref-sd", type=float, default=0.1)
    w.add_argument("--replications", type=int, default=500)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DatasetError, ScheduleError, DistributionError, HorizonTooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, QuadratureError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except CommgateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
