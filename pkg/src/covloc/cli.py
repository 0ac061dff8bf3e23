"""Command-line harness wiring all modules into one executable.

Subcommands: simulate, cov, bounds, localize, figure, models.
Exit codes: 0 success, 2 configuration error, 3 numerical blowup,
4 unknown figure or preset.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import bound_inputs_from_model, covariance_bound, local_coefficient
from .config import ConfigError, ExperimentConfig, parse_config
from .estimators import monte_carlo_pair_covariance, shifted_pair_covariance
from .figures import DEFAULT_SEED, FIGURES, UnknownFigureError, run_figure
from .integrator import IntegratorConfig, NumericalBlowupError, simulate_ensemble
from .lattice import ContractViolationError
from .localization import localization_error_bound, localize
from .models import REGIMES, PresetNotFoundError
from .storage import (
    FormatError,
    read_covariance,
    read_covariance_csv,
    write_covariance,
    write_covariance_csv,
    write_csv,
    write_ensemble,
    write_ensemble_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_UNKNOWN = 4


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    cfg = parse_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.threads is not None:
        overrides["threads"] = args.threads
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _write_run_metadata(out_dir: Path, name: str, cfg: ExperimentConfig, extra=None):
    payload = {
        "library_version": __version__,
        "command": name,
        "config": cfg.as_dict(),
    }
    if extra:
        payload.update(extra)
    path = out_dir / f"{name}_metadata.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _run_ensemble(cfg: ExperimentConfig):
    model = cfg.build_model()
    run = IntegratorConfig(
        step_size=cfg.resolved_step_size(), t_end=cfg.t_end, master_seed=cfg.master_seed
    )
    return model, simulate_ensemble(model, run, cfg.n_samples, n_workers=cfg.threads)


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _, ensemble = _run_ensemble(cfg)
    write_ensemble(out_dir / "ensemble.cvl", ensemble)
    write_ensemble_csv(out_dir / "ensemble.csv", ensemble)
    _write_run_metadata(out_dir, "simulate", cfg)
    print(f"wrote {out_dir / 'ensemble.cvl'} and {out_dir / 'ensemble.csv'}")
    return EXIT_OK


def _cmd_cov(args) -> int:
    cfg = _load_config(args)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _, ensemble = _run_ensemble(cfg)
    max_lag = args.max_lag if args.max_lag is not None else cfg.n_blocks // 2
    max_lag = min(max_lag, cfg.n_blocks // 2)
    rows = []
    for lag in range(max_lag + 1):
        sa = shifted_pair_covariance(ensemble, lag)
        rows.append((lag, sa.estimate, sa.std_error, sa.method))
    if ensemble.n_samples >= 2:
        for lag in range(max_lag + 1):
            mc = monte_carlo_pair_covariance(ensemble, lag)
            rows.append((lag, mc.estimate, mc.std_error, mc.method))
    path = out_dir / "cov_curve.csv"
    write_csv(path, ["lag", "estimate", "std_error", "method"], rows)
    # pooled-mean convention: the shift estimator centers with one mean over
    # all samples and positions
    _write_run_metadata(out_dir, "cov", cfg, {"mean_convention": "pooled", "max_lag": max_lag})
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    cfg = _load_config(args)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = cfg.build_model()
    t = cfg.bounds_t if cfg.bounds_t is not None else cfg.t_end
    inputs = bound_inputs_from_model(model, t, grad_g_sup=cfg.grad_g_sup)
    rows = []
    vacuous = False
    for beta in cfg.betas:
        for j in range(1, cfg.n_blocks + 1):
            ev = covariance_bound(1, j, beta, inputs)
            vacuous = vacuous or ev.vacuous
            rows.append((1, j, beta, ev.local_term, ev.global_term, ev.total))
    path = out_dir / "bounds.csv"
    write_csv(path, ["i", "j", "beta", "local", "global", "total"], rows)
    _write_run_metadata(out_dir, "bounds", cfg, {"t": t, "any_vacuous": vacuous})
    if vacuous:
        print("warning: some bound evaluations overflowed and were capped (vacuous)", file=sys.stderr)
    print(f"wrote {path}")
    return EXIT_OK


def _read_covariance_any(path: str, block_dim: int):
    if path.endswith(".csv"):
        return read_covariance_csv(path, block_dim)
    cov, _ = read_covariance(path, block_dim)
    return cov


def _cmd_localize(args) -> int:
    if args.input is None:
        raise ConfigError("--input covariance file is required")
    cov = _read_covariance_any(args.input, args.block_dim)
    if args.bandwidth is not None:
        bandwidth = args.bandwidth
        bound = None
        if args.beta is not None and args.coefficient is not None:
            bound = localization_error_bound(bandwidth, args.beta, args.coefficient)
    else:
        if args.epsilon is None or args.beta is None or args.coefficient is None:
            raise ConfigError(
                "either --bandwidth or all of --epsilon/--beta/--coefficient are required"
            )
        from .localization import choose_bandwidth

        bandwidth = choose_bandwidth(args.epsilon, args.beta, args.coefficient, cov.n_blocks)
        bound = localization_error_bound(bandwidth, args.beta, args.coefficient)
    truncated = localize(cov, bandwidth)

    out_dir = Path(args.out or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    write_covariance(out_dir / "localized.cvl", truncated)
    write_covariance_csv(out_dir / "localized.csv", truncated)

    measured = None
    if args.reference:
        reference = _read_covariance_any(args.reference, args.block_dim)
        measured = float(np.linalg.norm(reference.data - truncated.data, ord=2))
    report = {
        "bandwidth": bandwidth,
        "error_bound": bound,
        "measured_error": measured,
        "note": "sample-size rule's universal constant is user-set, not theory-derived",
    }
    with open(out_dir / "localize_report.jsonl", "w") as fh:
        fh.write(json.dumps(report, sort_keys=True) + "\n")
    meta = {
        "library_version": __version__,
        "command": "localize",
        "input": str(args.input),
        "block_dim": args.block_dim,
        "bandwidth": bandwidth,
    }
    (out_dir / "localize_metadata.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {out_dir / 'localized.csv'} (bandwidth {bandwidth})")
    return EXIT_OK


def _cmd_figure(args) -> int:
    files = run_figure(
        args.figure_id,
        scale=args.scale,
        seed=args.seed if args.seed is not None else DEFAULT_SEED,
        out_dir=args.out or "figures",
        threads=args.threads or 1,
    )
    if args.svg:
        _render_svgs(args.figure_id, files)
    for path in files:
        print(f"wrote {path}")
    return EXIT_OK


def _render_svgs(figure_id: str, files) -> None:
    import csv as _csv

    from .svgplot import write_line_plot

    for path in files:
        path = Path(path)
        if path.suffix != ".csv":
            continue
        with open(path, newline="") as fh:
            rows = list(_csv.DictReader(fh))
        if not rows:
            continue
        header = rows[0].keys()
        x_key = next((k for k in ("k", "i", "n", "lag") if k in header), None)
        y_keys = [k for k in header if k not in (x_key,) and _is_float_col(rows, k)]
        if x_key is None or not y_keys:
            continue
        xs = [float(r[x_key]) for r in rows]
        series = {k: [float(r[k]) for r in rows] for k in y_keys[:4]}
        write_line_plot(path.with_suffix(".svg"), xs, series, title=path.stem)


def _is_float_col(rows, key) -> bool:
    try:
        for r in rows[:5]:
            float(r[key])
        return True
    except (TypeError, ValueError):
        return False


def _cmd_models(args) -> int:
    if not args.list:
        raise ConfigError("models requires --list")
    print("name,epsilon,a,d_u,w,delta1,delta2,description")
    for name in sorted(REGIMES):
        p = REGIMES[name].params
        print(
            f"{name},{p.epsilon!r},{p.a!r},{p.d_u!r},{p.w!r},{p.delta1!r},{p.delta2!r},"
            f"{REGIMES[name].description}"
        )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covloc",
        description="Simulate coupled lattice SDEs, estimate covariances, "
        "evaluate decay bounds, and localize covariance matrices.",
    )
    parser.add_argument("--version", action="version", version=f"covloc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment config file (INI sections)")
        p.add_argument("--seed", type=int, help="override run.master_seed")
        p.add_argument("--out", help="override output directory")
        p.add_argument("--threads", type=int, help="ensemble worker threads")

    p = sub.add_parser("simulate", help="run an ensemble and write the snapshot")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("cov", help="lag-covariance curves from an ensemble")
    common(p)
    p.add_argument("--max-lag", type=int, help="largest ring lag to estimate")
    p.set_defaults(func=_cmd_cov)

    p = sub.add_parser("bounds", help="evaluate the covariance decay bounds")
    common(p)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("localize", help="band-truncate a covariance matrix")
    p.add_argument("--input", help="covariance file (.csv or CVL1 binary)")
    p.add_argument("--block-dim", type=int, default=1)
    p.add_argument("--bandwidth", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--coefficient", type=float, help="local decay coefficient")
    p.add_argument("--reference", help="reference covariance for measured error")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_localize)

    p = sub.add_parser("figure", help="regenerate data for one figure")
    p.add_argument("figure_id", help=f"one of {', '.join(sorted(FIGURES))}")
    p.add_argument("--scale", choices=("paper", "desk"), default="desk")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--threads", type=int)
    p.add_argument("--svg", action="store_true", help="also write quick-look SVG plots")
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("models", help="list the regime presets")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=_cmd_models)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, ContractViolationError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBlowupError as exc:
        report = {
            "error": "numerical-blowup",
            "time": exc.time,
            "block_index": exc.block_index,
            "sample_index": exc.sample_index,
        }
        print(json.dumps(report), file=sys.stderr)
        return EXIT_BLOWUP
    except (UnknownFigureError, PresetNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN


if __name__ == "__main__":
    sys.exit(main())
