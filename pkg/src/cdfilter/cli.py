"""Batch command-line front end.

Three subcommands: ``convergence`` (moment-convergence tables),
``radar`` (Monte-Carlo tracking grid), ``appendix-a`` (center-velocity
variant comparison on the transport flow).  Every run writes a manifest
first, then deterministic CSV result files; re-running from the manifest
alone reproduces the result files bitwise.  Wall-clock timings go to a
separate ``timing.json`` sidecar so the result files stay deterministic.

Configuration can come from a flat INI-style file (section = subcommand,
keys = long flag names); explicit flags override file values.  The
environment variable ``CDFILTER_SEED`` overrides ``--seed``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BenchConfig, convergence_study, run_grid
from .linalg import cholesky_lower
from .lskf import lskf_time_update
from .models import GaussianBelief
from .ode import SolverSpec
from .scenarios import transport_scenario

RADAR_CSV_COLUMNS = ("filter", "variant", "omega_deg", "interval_s", "m",
                     "trials", "divergent", "rmse_pos_m", "rmse_vel_mps",
                     "rmse_turn_radps", "rhs_evals_mean")
CONV_CSV_COLUMNS = ("method", "steps", "dt", "err_mean_l2", "err_cov_fro")
APPA_CSV_COLUMNS = ("variant", "factorizations", "mean_l2_err", "cov_entry_std")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def read_csv(path) -> list[dict]:
    """Parse a result CSV back into typed rows (exact round-trip)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        out = []
        for raw in reader:
            row = {}
            for key, text in raw.items():
                for cast in (int, float):
                    try:
                        row[key] = cast(text)
                        break
                    except ValueError:
                        continue
                else:
                    row[key] = text
            out.append(row)
    return out


def _floats(text: str):
    return tuple(float(v) for v in text.split(","))


def _ints(text: str):
    return tuple(int(v) for v in text.split(","))


def _names(text: str):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdfilter",
        description="Continuous-discrete filtering benchmarks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", default=None,
                        help="INI config file; flags override its values")
    sub = parser.add_subparsers(dest="command", required=True)

    conv = sub.add_parser("convergence", help="time-update convergence table")
    conv.add_argument("problem", choices=("linear-fp", "oscillator"))
    conv.add_argument("--methods", type=_names,
                      default=("lskf-rk1", "lskf-rk2", "lskf-rk4", "cdckf",
                               "cdckf-proper"))
    conv.add_argument("--steps", type=_ints,
                      default=(4, 8, 16, 32, 64, 128, 256, 512, 1024))
    conv.add_argument("--out", default="out")

    radar = sub.add_parser("radar", help="Monte-Carlo radar tracking grid")
    radar.add_argument("--omega-deg", type=_floats, default=(6.0, 12.0, 24.0))
    radar.add_argument("--interval-s", type=_floats,
                       default=(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0))
    radar.add_argument("--m", type=_ints, default=(1,))
    radar.add_argument("--filters", type=_names,
                       default=("lskf-adaptive", "cdckf"))
    radar.add_argument("--trials", type=int, default=100)
    radar.add_argument("--seed", type=int, default=20210001)
    radar.add_argument("--variant", choices=("standard", "averaged", "partial"),
                       default="averaged")
    radar.add_argument("--tol-abs", type=float, default=1e-8)
    radar.add_argument("--tol-rel", type=float, default=1e-8)
    radar.add_argument("--sigma2", type=float, default=7e-4)
    radar.add_argument("--jobs", type=int, default=1)
    radar.add_argument("--out", default="out")

    appa = sub.add_parser("appendix-a", help="center-velocity variant comparison")
    appa.add_argument("--factorizations", type=int, default=1024)
    appa.add_argument("--seed", type=int, default=20210001)
    appa.add_argument("--a", type=float, default=0.5)
    appa.add_argument("--b", type=float, default=1.0)
    appa.add_argument("--t-end", type=float, default=1.0)
    appa.add_argument("--out", default="out")
    return parser


def _apply_config_file(parser, argv):
    """Pull defaults from --config before the real parse."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return
    ini = configparser.ConfigParser()
    with open(known.config) as fh:
        ini.read_file(fh)
    for action in parser._subparsers._group_actions[0].choices.items():
        name, sp = action
        if ini.has_section(name):
            overrides = {}
            for key, value in ini.items(name):
                dest = key.replace("-", "_")
                for act in sp._actions:
                    if act.dest == dest:
                        caster = act.type or str
                        overrides[dest] = caster(value)
            sp.set_defaults(**overrides)


def _manifest(args, command: str, result_files: dict, extra: dict) -> dict:
    settings = {k: v for k, v in vars(args).items()
                if k not in ("command", "config")}
    return {
        "tool": "cdfilter",
        "version": __version__,
        "command": command,
        "settings": settings,
        "result_files": result_files,
        "decisions": extra,
    }


class _Json(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, tuple):
            return list(o)
        return super().default(o)


def _write_manifest(out: Path, manifest: dict):
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, cls=_Json)
        fh.write("\n")


def cmd_convergence(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fname = f"convergence_{args.problem}.csv"
    _write_manifest(out, _manifest(args, "convergence", {"table": fname}, {
        "reference": "adaptive Lyapunov integration at tolerance 1e-13",
        "lskf_variant": "averaged",
    }))
    rows = convergence_study(args.problem, args.methods, args.steps)
    _write_csv(out / fname, CONV_CSV_COLUMNS, rows)
    return 0


def cmd_radar(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = int(os.environ.get("CDFILTER_SEED", args.seed))
    config = BenchConfig(
        omega_deg=args.omega_deg,
        intervals=args.interval_s,
        m_values=args.m,
        filters=args.filters,
        variant=args.variant,
        trials=args.trials,
        base_seed=seed,
        abs_tol=args.tol_abs,
        rel_tol=args.tol_rel,
        sigma2=args.sigma2,
    )
    from .bench import _metadata

    _write_manifest(out, _manifest(args, "radar", {"table": "radar.csv"},
                                   dict(_metadata(config), seed=seed)))
    t0 = time.perf_counter()
    report = run_grid(config, jobs=args.jobs)
    _write_csv(out / "radar.csv", RADAR_CSV_COLUMNS, report.rows)
    # timings are non-deterministic; they live outside the result files
    timing = {
        "total_s": time.perf_counter() - t0,
        "wall_ms_per_trial": {
            f"{r['filter']}/omega{r['omega_deg']:g}/T{r['interval_s']:g}/m{r['m']}":
                r["wall_ms_per_trial"] for r in report.rows
        },
    }
    with open(out / "timing.json", "w") as fh:
        json.dump(timing, fh, indent=2)
    return 0


def run_appendix_a(factorizations: int, seed: int, a: float, b: float,
                   t_end: float):
    """Compare center-velocity variants over random covariance factors."""
    ts = transport_scenario(a, b)
    model = ts.sde_model()
    base_factor = cholesky_lower(ts.sigma0())
    rng = np.random.default_rng(seed)
    spec = SolverSpec("fixed-rk4", steps=32)
    variants = ("standard", "averaged", "partial")
    errors = {v: [] for v in variants}
    covs = {v: [] for v in variants}
    for _ in range(factorizations):
        q, _r = np.linalg.qr(rng.standard_normal((2, 2)))
        belief0 = GaussianBelief(mean=np.zeros(2), factor=base_factor @ q)
        for v in variants:
            b1 = lskf_time_update(belief0, model, v, t_end, spec)
            errors[v].append(ts.l2_error(b1.mean, b1.covariance(), t_end))
            covs[v].append(b1.covariance())
    rows = []
    for v in variants:
        rows.append({
            "variant": v,
            "factorizations": factorizations,
            "mean_l2_err": float(np.mean(errors[v])),
            "cov_entry_std": float(np.mean(np.std(np.array(covs[v]), axis=0))),
        })
    return rows


def cmd_appendix_a(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_manifest(out, _manifest(args, "appendix-a", {"table": "appendix_a.csv"}, {
        "flow": "v(x, y) = (0, x^2), volume-preserving characteristics oracle",
        "error_metric": "grid L2 distance between estimate density and exact pushforward",
    }))
    rows = run_appendix_a(args.factorizations, args.seed, args.a, args.b,
                          args.t_end)
    _write_csv(out / "appendix_a.csv", APPA_CSV_COLUMNS, rows)
    return 0


_COMMANDS = {
    "convergence": cmd_convergence,
    "radar": cmd_radar,
    "appendix-a": cmd_appendix_a,
}


def run_from_manifest(manifest_path, out_dir=None) -> int:
    """Re-execute a recorded run; reproduces its result files bitwise."""
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    args = argparse.Namespace(**{
        k: tuple(v) if isinstance(v, list) else v
        for k, v in manifest["settings"].items()
    })
    if out_dir is not None:
        args.out = str(out_dir)
    return _COMMANDS[manifest["command"]](args)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"cdfilter: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
