"""Command-line interface: run, sweep, predict, fit, scenarios."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from . import analysis, runner
from .config import ExperimentConfig, parse_config, parse_config_file
from .errors import ConfigError, QrelaxError


def bundled_scenarios() -> list[str]:
    root = resources.files("qrelax") / "scenarios"
    return sorted(p.name[:-len(".toml")] for p in root.iterdir()
                  if p.name.endswith(".toml"))


def load_config(ref: str) -> ExperimentConfig:
    """Resolve a config path or a bundled scenario name."""
    path = Path(ref)
    if path.exists():
        return parse_config_file(path)
    name = ref[:-len(".toml")] if ref.endswith(".toml") else ref
    candidate = resources.files("qrelax") / "scenarios" / f"{name}.toml"
    if candidate.is_file():
        return parse_config(candidate.read_text(), name=name)
    raise ConfigError(
        f"no config file at {ref!r} and no bundled scenario of that name "
        f"(bundled: {', '.join(bundled_scenarios())})")


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg = replace(cfg, seeds=(args.seed,))
    if args.t_max is not None:
        cfg = replace(cfg, t_max=args.t_max)
    if args.dt is not None:
        cfg = replace(cfg, dt=args.dt)
    if args.window_start is not None:
        cfg = replace(cfg, window_start=args.window_start)
    if args.dump_matrices:
        cfg = replace(cfg, dump_matrices=True)
    if cfg.dt <= 0 or cfg.t_max < cfg.dt or not 0 <= cfg.window_start < cfg.t_max:
        raise ConfigError("overrides violate 0 < dt <= t_max and "
                          "0 <= window_start < t_max")
    return cfg


def _add_common(sub) -> None:
    sub.add_argument("config", help="config file path or bundled scenario name")
    sub.add_argument("--seed", type=int, default=None, help="override the seed list")
    sub.add_argument("--out-dir", default=None, help="override the output directory")
    sub.add_argument("--t-max", type=float, default=None)
    sub.add_argument("--dt", type=float, default=None)
    sub.add_argument("--window-start", type=float, default=None)
    sub.add_argument("--dump-matrices", action="store_true",
                     help="dump interaction and diagonal matrices per run")


def cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    artifacts = runner.run_experiment(cfg, out_dir=args.out_dir)
    print(artifacts.trajectory_path)
    print(artifacts.summary_path)
    return 0


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    result = runner.run_sweep(cfg, out_dir=args.out_dir, jobs=args.jobs)
    print(result.csv_path)
    if result.n_failed:
        print(f"{result.n_failed} of {len(result.rows)} runs failed",
              file=sys.stderr)
        return 1
    return 0


def cmd_predict(args) -> int:
    cfg = load_config(args.config)
    variants = cfg.expand() if cfg.is_sweep else [(cfg.name, cfg)]
    out = {}
    for config_id, variant in variants:
        out[config_id] = runner._prediction_block(variant)
    doc = out if len(out) > 1 else next(iter(out.values()))
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _read_fit_points(path: Path, kind: str) -> tuple[str, list[tuple[float, float]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise QrelaxError(f"{path}: empty csv")
    header = rows[0]
    if kind == "auto":
        kind = "invsize" if any("var" in h for h in header) else "exp"
    if "n_c_1" in header and "var_rho_0_0" in header:
        ni, vi = header.index("n_c_1"), header.index("var_rho_0_0")
        status = header.index("status") if "status" in header else None
        pts = [(float(r[ni]), float(r[vi])) for r in rows[1:]
               if status is None or r[status] == "ok"]
    else:
        body = rows[1:] if any(not _is_number(x) for x in header) else rows
        pts = [(float(r[0]), float(r[1])) for r in body if len(r) >= 2]
    return kind, pts


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def cmd_fit(args) -> int:
    kind, pts = _read_fit_points(Path(args.csv), args.kind)
    fit = analysis.fit_inverse_size(pts) if kind == "invsize" \
        else analysis.fit_exponential(pts)
    print(json.dumps({"model": fit.model, "params": fit.params,
                      "residual": fit.residual, "n_points": len(pts)},
                     indent=2, sort_keys=True))
    return 0


def cmd_scenarios(_args) -> int:
    for name in bundled_scenarios():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrelax",
        description="Unitary relaxation experiments on a gas-container system")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one run of a config")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="execute a sweep of runs")
    _add_common(p_sweep)
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="parallel worker processes")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_pred = sub.add_parser("predict",
                            help="equilibrium prediction only, no dynamics")
    p_pred.add_argument("config")
    p_pred.set_defaults(fn=cmd_predict)

    p_fit = sub.add_parser("fit", help="least-squares fit over a csv")
    p_fit.add_argument("csv")
    p_fit.add_argument("--kind", choices=["auto", "exp", "invsize"], default="auto")
    p_fit.set_defaults(fn=cmd_fit)

    p_list = sub.add_parser("scenarios", help="list bundled scenario configs")
    p_list.set_defaults(fn=cmd_scenarios)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QrelaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
