"""Command line interface.

Subcommands: simulate, estimate, forecast, experiment, weights.  Each
file-writing subcommand reads a JSON config, writes its outputs plus a
manifest.json with the fully resolved configuration under --output-dir,
and is bit-identical when rerun from that manifest.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical
runtime failure.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import ConfigError, NumericalError
from .estimator import (
    Alignment,
    bias_reduced_estimate,
    empirical_yule_walker,
    romberg_weights_exact,
    tapered_autocovariance,
)
from .experiment import (
    ExperimentConfig,
    run_experiment,
    write_results,
)
from .predict import mean_squared_error, rolling_forecast, write_records_csv
from .series import read_series_csv, write_series_csv
from .taper import get as get_taper
from .tvar import DEFAULT_BURN_IN, TvarModel, random_model, simulate

log = logging.getLogger("tvyw")

#: Largest denominator for which the weights subcommand prints exact fractions.
_MAX_PRINTED_DENOMINATOR = 10**6


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain a JSON object")
    return data


def _check_keys(cfg: dict, required: set[str], optional: set[str], command: str) -> None:
    missing = required - set(cfg)
    if missing:
        raise ConfigError(f"{command} config missing fields: {sorted(missing)}")
    unknown = set(cfg) - required - optional
    if unknown:
        raise ConfigError(f"{command} config has unknown fields: {sorted(unknown)}")


def _write_json(obj, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: Path, command: str, config: dict, seed) -> None:
    _write_json(
        {
            "command": command,
            "config": config,
            "seed": seed,
            "version": __version__,
        },
        out_dir / "manifest.json",
    )


def _out_dir(args) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_series_path(config_path: str, series_path: str) -> Path:
    path = Path(series_path)
    if not path.is_absolute():
        path = Path(config_path).resolve().parent / path
    return path


def _model_from_config(model_cfg: dict) -> TvarModel:
    if not isinstance(model_cfg, dict):
        raise ConfigError("model must be a JSON object")
    _check_keys(
        model_cfg,
        required={"p", "F", "delta"},
        optional={"a", "sigma", "seed"},
        command="model",
    )
    sigma = float(model_cfg.get("sigma", 1.0))
    seed = int(model_cfg.get("seed", 0))
    if "a" in model_cfg:
        return TvarModel.from_dict(
            {
                "p": model_cfg["p"],
                "F": model_cfg["F"],
                "delta": model_cfg["delta"],
                "a": model_cfg["a"],
                "sigma": sigma,
                "seed": seed,
            }
        )
    return random_model(
        p=int(model_cfg["p"]),
        F=int(model_cfg["F"]),
        delta=float(model_cfg["delta"]),
        sigma=sigma,
        seed=seed,
    )


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        required={"model", "T", "t_range"},
        optional={"burn_in", "seed"},
        command="simulate",
    )
    model = _model_from_config(cfg["model"])
    T = int(cfg["T"])
    t_range = tuple(int(v) for v in cfg["t_range"])
    if len(t_range) != 2:
        raise ConfigError("t_range must be [first, last]")
    burn_in = int(cfg.get("burn_in", DEFAULT_BURN_IN))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))

    series = simulate(model, T, t_range, burn_in=burn_in, seed=seed)

    out = _out_dir(args)
    write_series_csv(series, out / "series.csv")
    _write_json(model.to_dict(), out / "model.json")
    resolved = {
        "model": model.to_dict(),
        "T": T,
        "t_range": list(t_range),
        "burn_in": burn_in,
        "seed": seed,
    }
    _write_manifest(out, "simulate", resolved, seed)
    log.info("wrote %d samples to %s", len(series), out / "series.csv")
    return 0


def _estimate_config(args):
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        required={"series", "T", "d", "M"},
        optional={"taper", "alignment", "t_center", "u", "bias_reduction", "beta"},
        command="estimate",
    )
    T = int(cfg["T"])
    if "t_center" in cfg:
        t_center = int(cfg["t_center"])
    elif "u" in cfg:
        t_center = int(math.floor(float(cfg["u"]) * T))
    else:
        raise ConfigError("estimate config needs t_center or u")
    resolved = {
        "series": str(_resolve_series_path(args.config, cfg["series"])),
        "T": T,
        "d": int(cfg["d"]),
        "M": int(cfg["M"]),
        "taper": str(cfg.get("taper", "rectangular")),
        "alignment": str(cfg.get("alignment", "centered")),
        "t_center": t_center,
        "bias_reduction": bool(cfg.get("bias_reduction", False)),
        "beta": float(cfg.get("beta", 1.0)),
    }
    return resolved


def cmd_estimate(args) -> int:
    cfg = _estimate_config(args)
    x = read_series_csv(cfg["series"])
    h = get_taper(cfg["taper"])
    try:
        alignment = Alignment(cfg["alignment"])
    except ValueError:
        raise ConfigError(f"unknown alignment {cfg['alignment']!r}") from None

    if cfg["bias_reduction"]:
        est = bias_reduced_estimate(
            x, cfg["t_center"], cfg["T"], cfg["M"], h, cfg["d"], cfg["beta"], alignment
        )
    else:
        window = tapered_autocovariance(
            x, cfg["t_center"], cfg["T"], cfg["M"], h, cfg["d"], alignment
        )
        est = empirical_yule_walker(window, cfg["d"])

    out = _out_dir(args)
    _write_json(
        {
            "theta": est.theta.tolist(),
            "kind": est.kind,
            "bandwidth": est.bandwidth,
            "weights": None if est.weights is None else est.weights.tolist(),
            "degenerate": est.degenerate,
            "u": cfg["t_center"] / cfg["T"],
            "d": cfg["d"],
            "alignment": cfg["alignment"],
        },
        out / "estimate.json",
    )
    _write_manifest(out, "estimate", cfg, None)
    return 0


def cmd_forecast(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        required={"series", "T", "d", "M", "t_range"},
        optional={"taper", "beta", "bias_reduction", "stride"},
        command="forecast",
    )
    resolved = {
        "series": str(_resolve_series_path(args.config, cfg["series"])),
        "T": int(cfg["T"]),
        "d": int(cfg["d"]),
        "M": int(cfg["M"]),
        "t_range": [int(v) for v in cfg["t_range"]],
        "taper": str(cfg.get("taper", "rectangular")),
        "beta": float(cfg.get("beta", 1.0)),
        "bias_reduction": bool(cfg.get("bias_reduction", False)),
        "stride": int(cfg.get("stride", 1)),
    }
    if len(resolved["t_range"]) != 2:
        raise ConfigError("t_range must be [first, last]")
    x = read_series_csv(resolved["series"])
    h = get_taper(resolved["taper"])
    records = rolling_forecast(
        x,
        resolved["T"],
        resolved["d"],
        h,
        resolved["beta"],
        resolved["M"],
        tuple(resolved["t_range"]),
        use_bias_reduction=resolved["bias_reduction"],
        stride=resolved["stride"],
    )
    out = _out_dir(args)
    write_records_csv(records, out / "forecast.csv")
    _write_json(
        {"mse": mean_squared_error(records), "n": len(records)},
        out / "forecast_summary.json",
    )
    _write_manifest(out, "forecast", resolved, None)
    return 0


def cmd_experiment(args) -> int:
    cfg_dict = _load_config(args.config)
    config = ExperimentConfig.from_dict(cfg_dict)
    if args.seed is not None:
        config = replace(config, master_seed=int(args.seed))
    result = run_experiment(config, workers=args.workers)
    out = _out_dir(args)
    write_results(result, out)
    _write_json(result.model.to_dict(), out / "model.json")
    _write_manifest(out, "experiment", config.to_dict(), config.master_seed)
    log.info("experiment finished: %d loss rows", len(result.losses))
    return 0


def cmd_weights(args) -> int:
    if args.k < 0:
        raise ConfigError(f"k must be >= 0, got {args.k}")
    exact = romberg_weights_exact(args.k, symmetric=args.symmetric)
    print(" ".join(f"{float(w):.12g}" for w in exact))
    if all(w.denominator <= _MAX_PRINTED_DENOMINATOR for w in exact):
        print(" ".join(_format_fraction(w) for w in exact))
    return 0


def _format_fraction(w: Fraction) -> str:
    if w.denominator == 1:
        return str(w.numerator)
    return f"{w.numerator}/{w.denominator}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvyw",
        description="Local Yule-Walker estimation for time-varying autoregressions.",
    )
    parser.add_argument("--version", action="version", version=f"tvyw {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log progress to stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, seed: bool):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--output-dir", required=True, help="directory for outputs")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="master seed override")

    p_sim = sub.add_parser("simulate", help="simulate a time-varying AR process")
    add_io(p_sim, seed=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate coefficients at one point")
    add_io(p_est, seed=False)
    p_est.set_defaults(func=cmd_estimate)

    p_fc = sub.add_parser("forecast", help="walk-forward one-step forecasts")
    add_io(p_fc, seed=False)
    p_fc.set_defaults(func=cmd_forecast)

    p_exp = sub.add_parser("experiment", help="Monte Carlo loss comparison")
    add_io(p_exp, seed=True)
    p_exp.add_argument(
        "--workers",
        type=int,
        default=None,
        help="worker processes (default: TVYW_WORKERS or 1)",
    )
    p_exp.set_defaults(func=cmd_experiment)

    p_w = sub.add_parser("weights", help="print extrapolation weights")
    p_w.add_argument("k", type=int, help="extrapolation order")
    p_w.add_argument("--symmetric", action="store_true", help="symmetric-taper variant")
    p_w.set_defaults(func=cmd_weights)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
