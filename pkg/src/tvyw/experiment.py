"""Monte Carlo comparison of raw and bias-reduced local estimators.

One random smooth model is drawn per experiment; for each horizon T a set
of replicate realizations is simulated, both estimators are evaluated at
every bandwidth on the grid, and losses against the population
coefficients are tabulated.  Oracle losses (best bandwidth per
realization) feed a log-log rate fit across horizons.

Replicate seeds depend only on (master_seed, T, replicate), so results
are independent of execution order and of how many replicates run.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import taper as taper_mod
from .errors import ConfigError, DegenerateRegression
from .estimator import (
    Alignment,
    empirical_yule_walker,
    estimation_loss,
    extrapolation_order,
    romberg_weights,
    tapered_autocovariance,
    window_bounds,
)
from .series import Series
from .spectral import ar_autocovariance, local_yule_walker
from .tvar import (
    DEFAULT_BURN_IN,
    TvarModel,
    random_model,
    replicate_seed,
    seed_sequence,
    simulate_many,
)

_TAG_ENSEMBLE = 303

#: Upper bound on doubles simulated per block in the replicate loop.
_BLOCK_BUDGET = 1 << 24

_CONFIG_FIELDS = (
    "p",
    "d",
    "F",
    "delta",
    "beta",
    "T_grid",
    "M_grid",
    "n_replicates",
    "u_eval",
    "taper_name",
    "master_seed",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one experiment run.

    M_grid is either the string "auto" (powers of two from 64 to T / 2,
    resolved per horizon) or an explicit tuple of even bandwidths, which
    is then filtered per horizon to the windows that fit.
    """

    p: int
    d: int
    F: int
    delta: float
    beta: float
    T_grid: tuple[int, ...]
    M_grid: tuple[int, ...] | str
    n_replicates: int
    u_eval: float
    taper_name: str
    master_seed: int

    def __post_init__(self):
        object.__setattr__(self, "T_grid", tuple(int(t) for t in self.T_grid))
        if self.M_grid != "auto":
            object.__setattr__(self, "M_grid", tuple(int(m) for m in self.M_grid))
        if self.p < 1 or self.d < 1:
            raise ConfigError("p and d must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if self.beta <= 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.n_replicates < 1:
            raise ConfigError("n_replicates must be >= 1")
        if not 0.0 < self.u_eval < 1.0:
            raise ConfigError(f"u_eval must be in (0, 1), got {self.u_eval}")
        if len(self.T_grid) == 0 or any(t < 2 for t in self.T_grid):
            raise ConfigError("T_grid must be non-empty with T >= 2")
        if self.M_grid != "auto":
            if len(self.M_grid) == 0:
                raise ConfigError("explicit M_grid must be non-empty")
            if any(m < 2 or m % 2 for m in self.M_grid):
                raise ConfigError("bandwidths must be even and >= 2")
        taper_mod.get(self.taper_name)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "d": self.d,
            "F": self.F,
            "delta": self.delta,
            "beta": self.beta,
            "T_grid": list(self.T_grid),
            "M_grid": "auto" if self.M_grid == "auto" else list(self.M_grid),
            "n_replicates": self.n_replicates,
            "u_eval": self.u_eval,
            "taper_name": self.taper_name,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - set(_CONFIG_FIELDS)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        missing = set(_CONFIG_FIELDS) - set(data)
        if missing:
            raise ConfigError(f"missing config fields: {sorted(missing)}")
        return cls(
            p=int(data["p"]),
            d=int(data["d"]),
            F=int(data["F"]),
            delta=float(data["delta"]),
            beta=float(data["beta"]),
            T_grid=tuple(data["T_grid"]),
            M_grid=data["M_grid"] if data["M_grid"] == "auto" else tuple(data["M_grid"]),
            n_replicates=int(data["n_replicates"]),
            u_eval=float(data["u_eval"]),
            taper_name=str(data["taper_name"]),
            master_seed=int(data["master_seed"]),
        )


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass
class ExperimentResult:
    """Tabulated losses plus derived summaries.

    losses: columns T, M, replicate, kind, loss
    oracle: columns T, replicate, kind, loss  (min over the M grid)
    ratio:  columns T, replicate, ratio      (bias_reduced / raw oracle)
    rates:  columns kind, slope, intercept, r_squared
    """

    config: ExperimentConfig
    model: TvarModel
    losses: pd.DataFrame
    oracle: pd.DataFrame
    ratio: pd.DataFrame
    rates: pd.DataFrame
    summary: dict


def rate_regression(points) -> RateFit:
    """OLS fit of log(loss) on log(T).

    Parameters
    ----------
    points : iterable of (T, loss)

    Raises
    ------
    DegenerateRegression
        With fewer than 3 distinct T values, or any loss <= 0.
    """
    pts = [(float(t), float(loss)) for t, loss in points]
    if len({t for t, _ in pts}) < 3:
        raise DegenerateRegression("need at least 3 distinct T values")
    if any(loss <= 0 or not math.isfinite(loss) for _, loss in pts):
        raise DegenerateRegression("losses must be positive and finite")
    log_t = np.log([t for t, _ in pts])
    log_l = np.log([loss for _, loss in pts])
    slope, intercept = np.polyfit(log_t, log_l, 1)
    fitted = slope * log_t + intercept
    ss_res = float(np.sum((log_l - fitted) ** 2))
    ss_tot = float(np.sum((log_l - np.mean(log_l)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared)


def ensemble_covariance(
    model: TvarModel,
    T: int,
    t: int,
    ell: int,
    n_replicates: int,
    seed: int = 0,
    burn_in: int = DEFAULT_BURN_IN,
) -> float:
    """Sample covariance of (X_t, X_{t-ell}) across independent replicates.

    This is a direct Monte Carlo read of the time-varying second moment
    gamma*(t, T, ell); its standard error scales with the process variance
    over sqrt(n_replicates), independent of T.
    """
    if n_replicates < 2:
        raise ConfigError("need at least 2 replicates for a covariance")
    lo, hi = min(t, t - ell), max(t, t - ell)
    seeds = [seed_sequence(seed, _TAG_ENSEMBLE, r) for r in range(n_replicates)]
    block = simulate_many(model, T, (lo, hi), seeds, burn_in=burn_in)
    a = block[:, t - lo]
    b = block[:, (t - ell) - lo]
    return float(np.cov(a, b)[0, 1])


def resolve_m_grid(config: ExperimentConfig, T: int) -> list[int]:
    """Bandwidth grid for one horizon.

    "auto" yields powers of two from 64 up to T / 2; explicit grids are
    filtered to bandwidths that exceed d and fit inside the horizon.
    """
    if config.M_grid == "auto":
        grid = []
        m = 64
        while m <= T // 2:
            grid.append(m)
            m *= 2
    else:
        grid = [m for m in config.M_grid if m <= T]
    grid = [m for m in grid if m > config.d]
    if not grid:
        raise ConfigError(f"no usable bandwidths for T={T}")
    return sorted(grid)


def experiment_model(config: ExperimentConfig) -> TvarModel:
    """The (single) random model used by every replicate of the run."""
    return random_model(
        p=config.p,
        F=config.F,
        delta=config.delta,
        sigma=1.0,
        seed=config.master_seed,
    )


def population_truth(config: ExperimentConfig, model: TvarModel) -> np.ndarray:
    """Order-d Yule-Walker coefficients of the snapshot at u_eval.

    Equals the model's own coefficient vector when d = p; for d != p it
    is the best order-d linear approximation, which is the quantity the
    empirical solver is actually estimating.
    """
    snap = model.snapshot(config.u_eval)
    cov = ar_autocovariance(snap, config.d)
    return local_yule_walker(cov, config.d)


def _fits(t_lo: int, t_hi: int, T: int) -> bool:
    return t_lo >= 1 and t_hi <= T


def _run_task(payload: dict) -> list[tuple]:
    """Losses for one (T, replicate block); runs inside worker processes."""
    model = TvarModel.from_dict(payload["model"])
    T = payload["T"]
    d = payload["d"]
    h = taper_mod.get(payload["taper_name"])
    truth = np.asarray(payload["truth"], dtype=float)
    t_center = int(math.floor(payload["u_eval"] * T))
    m_grid = payload["m_grid"]
    weights = romberg_weights(payload["k"], symmetric=h.is_symmetric)
    master_seed = payload["master_seed"]

    rows: list[tuple] = []
    reps = payload["replicates"]
    batch = max(1, _BLOCK_BUDGET // (T + DEFAULT_BURN_IN))
    for start in range(0, len(reps), batch):
        chunk = reps[start : start + batch]
        seeds = [replicate_seed(master_seed, T, r) for r in chunk]
        block = simulate_many(model, T, (1, T), seeds)
        for r, values in zip(chunk, block):
            series = Series(values, t_start=1)
            raw_cache: dict[int, np.ndarray] = {}

            def raw_theta(m: int) -> np.ndarray:
                if m not in raw_cache:
                    window = tapered_autocovariance(
                        series, t_center, T, m, h, d, Alignment.CENTERED
                    )
                    raw_cache[m] = empirical_yule_walker(window, d).theta
                return raw_cache[m]

            for m in m_grid:
                if _fits(*window_bounds(t_center, m, Alignment.CENTERED), T):
                    loss = float(np.linalg.norm(raw_theta(m) - truth))
                    rows.append((T, m, r, "raw", loss))
                top = m * 2 ** (len(weights) - 1)
                if _fits(*window_bounds(t_center, top, Alignment.CENTERED), T):
                    theta = np.zeros(d)
                    for j, w in enumerate(weights):
                        theta = theta + w * raw_theta(m * 2**j)
                    loss = float(np.linalg.norm(theta - truth))
                    rows.append((T, m, r, "bias_reduced", loss))
    return rows


def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, else TVYW_WORKERS, else 1."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("TVYW_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"TVYW_WORKERS={env!r} is not an integer") from exc
    return 1


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    """Run the full loss tabulation described by config.

    The same replicate realization is shared by every bandwidth and both
    estimator kinds.  With workers > 1 the replicate blocks are spread
    over a process pool; results are identical to the serial run because
    every task derives its seeds from (master_seed, T, replicate) and the
    final tables are sorted.
    """
    n_workers = resolve_workers(workers)
    model = experiment_model(config)
    truth = population_truth(config, model)
    k = extrapolation_order(config.beta)

    payloads = []
    for T in config.T_grid:
        m_grid = resolve_m_grid(config, T)
        reps = list(range(config.n_replicates))
        chunk = max(1, math.ceil(config.n_replicates / (2 * n_workers)))
        for start in range(0, len(reps), chunk):
            payloads.append(
                {
                    "model": model.to_dict(),
                    "T": T,
                    "d": config.d,
                    "taper_name": config.taper_name,
                    "truth": truth.tolist(),
                    "u_eval": config.u_eval,
                    "m_grid": m_grid,
                    "k": k,
                    "master_seed": config.master_seed,
                    "replicates": reps[start : start + chunk],
                }
            )

    rows: list[tuple] = []
    if n_workers == 1:
        for payload in payloads:
            rows.extend(_run_task(payload))
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for result in pool.map(_run_task, payloads):
                rows.extend(result)

    losses = pd.DataFrame(rows, columns=["T", "M", "replicate", "kind", "loss"])
    losses = losses.sort_values(["T", "M", "replicate", "kind"]).reset_index(drop=True)

    oracle = (
        losses.groupby(["T", "replicate", "kind"], as_index=False)["loss"]
        .min()
        .sort_values(["T", "replicate", "kind"])
        .reset_index(drop=True)
    )

    pivot = oracle.pivot_table(
        index=["T", "replicate"], columns="kind", values="loss"
    ).reset_index()
    if {"raw", "bias_reduced"} <= set(pivot.columns):
        ratio = pd.DataFrame(
            {
                "T": pivot["T"],
                "replicate": pivot["replicate"],
                "ratio": pivot["bias_reduced"] / pivot["raw"],
            }
        ).sort_values(["T", "replicate"]).reset_index(drop=True)
    else:
        ratio = pd.DataFrame(columns=["T", "replicate", "ratio"])

    rate_rows = []
    for kind, group in oracle.groupby("kind"):
        med = group.groupby("T")["loss"].median()
        try:
            fit = rate_regression(zip(med.index.to_numpy(), med.to_numpy()))
            rate_rows.append((kind, fit.slope, fit.intercept, fit.r_squared))
        except DegenerateRegression:
            rate_rows.append((kind, float("nan"), float("nan"), float("nan")))
    rates = pd.DataFrame(
        rate_rows, columns=["kind", "slope", "intercept", "r_squared"]
    ).sort_values("kind").reset_index(drop=True)

    summary = _summarize(config, losses, oracle, ratio, rates)
    return ExperimentResult(
        config=config,
        model=model,
        losses=losses,
        oracle=oracle,
        ratio=ratio,
        rates=rates,
        summary=summary,
    )


def _quartiles(series: pd.Series) -> dict:
    return {
        "median": float(series.median()),
        "q25": float(series.quantile(0.25)),
        "q75": float(series.quantile(0.75)),
    }


def _summarize(config, losses, oracle, ratio, rates) -> dict:
    loss_summary: dict = {}
    for (kind, T, M), group in losses.groupby(["kind", "T", "M"]):
        loss_summary.setdefault(kind, {}).setdefault(str(T), {})[str(M)] = _quartiles(
            group["loss"]
        )
    oracle_summary: dict = {}
    for (kind, T), group in oracle.groupby(["kind", "T"]):
        oracle_summary.setdefault(kind, {})[str(T)] = _quartiles(group["loss"])
    ratio_summary = {
        str(T): _quartiles(group["ratio"]) for T, group in ratio.groupby("T")
    }
    rates_summary = {
        row["kind"]: {
            "slope": row["slope"],
            "intercept": row["intercept"],
            "r_squared": row["r_squared"],
        }
        for _, row in rates.iterrows()
    }
    return {
        "config": config.to_dict(),
        "losses": loss_summary,
        "oracle": oracle_summary,
        "ratio": ratio_summary,
        "rates": rates_summary,
    }


def write_results(result: ExperimentResult, out_dir) -> None:
    """Write losses.csv, oracle.csv, ratio.csv, rates.csv and summary.json."""
    import json
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.losses.to_csv(out / "losses.csv", index=False)
    result.oracle.to_csv(out / "oracle.csv", index=False)
    result.ratio.to_csv(out / "ratio.csv", index=False)
    result.rates.to_csv(out / "rates.csv", index=False)
    with open(out / "summary.json", "w") as fh:
        json.dump(result.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
