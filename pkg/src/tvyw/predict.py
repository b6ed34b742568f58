"""One-step linear prediction from locally estimated coefficients.

The forecast of X_t is the inner product of a coefficient vector with the
d most recent samples.  Coefficients come from causal windows ending at
t - 1, so no forecast ever uses the value it predicts.
"""

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DimensionMismatch
from .estimator import (
    Alignment,
    bias_reduced_estimate,
    empirical_yule_walker,
    tapered_autocovariance,
)
from .series import Series
from .taper import Taper
from .tvar import TvarModel


class EstimatorKind(str, Enum):
    RAW = "raw"
    BIAS_REDUCED = "bias_reduced"
    ORACLE_LOCAL = "oracle_local"


@dataclass(frozen=True)
class PredictionRecord:
    """One forecast/outcome pair."""

    t: int
    forecast: float
    actual: float
    squared_error: float
    estimator_kind: str


def linear_predict(theta: np.ndarray, history: np.ndarray) -> float:
    """Forecast sum_j theta_j * history[j-1]; history is most recent first."""
    theta = np.asarray(theta, dtype=float)
    history = np.asarray(history, dtype=float)
    if theta.shape != history.shape or theta.ndim != 1:
        raise DimensionMismatch(
            f"theta shape {theta.shape} vs history shape {history.shape}"
        )
    return float(np.dot(theta, history))


def _record(t: int, forecast: float, actual: float, kind: str) -> PredictionRecord:
    return PredictionRecord(
        t=int(t),
        forecast=float(forecast),
        actual=float(actual),
        squared_error=float((actual - forecast) ** 2),
        estimator_kind=kind,
    )


def rolling_forecast(
    x: Series,
    T: int,
    d: int,
    h: Taper,
    beta: float,
    M: int,
    t_range: tuple[int, int],
    use_bias_reduction: bool = False,
    stride: int = 1,
) -> list[PredictionRecord]:
    """Walk-forward one-step forecasts over t_range (inclusive).

    At each step the coefficients are re-estimated from the causal window
    ending at t - 1 (raw Yule-Walker at bandwidth M, or the bias-reduced
    ladder when requested) and applied to the last d samples.  stride > 1
    re-estimates only every stride steps and reuses the last coefficients
    in between, trading accuracy for speed.

    The series must cover the longest estimation window of the earliest
    step; WindowOutOfRange propagates otherwise.
    """
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    t_lo, t_hi = int(t_range[0]), int(t_range[1])
    if t_lo > t_hi:
        raise ConfigError(f"empty t_range {t_range}")
    kind = EstimatorKind.BIAS_REDUCED if use_bias_reduction else EstimatorKind.RAW
    records = []
    theta = None
    for t in range(t_lo, t_hi + 1):
        if theta is None or (t - t_lo) % stride == 0:
            if use_bias_reduction:
                est = bias_reduced_estimate(
                    x, t, T, M, h, d, beta, alignment=Alignment.CAUSAL
                )
            else:
                window = tapered_autocovariance(
                    x, t, T, M, h, d, alignment=Alignment.CAUSAL
                )
                est = empirical_yule_walker(window, d)
            theta = est.theta
        history = x.window(t - d, t - 1)[::-1]
        forecast = linear_predict(theta, history)
        records.append(_record(t, forecast, x.value_at(t), kind.value))
    return records


def oracle_forecast(
    x: Series,
    model: TvarModel,
    T: int,
    t_range: tuple[int, int],
) -> list[PredictionRecord]:
    """Forecasts using the model's own coefficients theta(t / T).

    The benchmark forecaster: its residual at t is exactly the scaled
    innovation, so its mean squared error estimates the mean of
    sigma^2(t / T) over the range.
    """
    t_lo, t_hi = int(t_range[0]), int(t_range[1])
    if t_lo > t_hi:
        raise ConfigError(f"empty t_range {t_range}")
    records = []
    for t in range(t_lo, t_hi + 1):
        theta = np.atleast_1d(np.asarray(model.theta_path(t / T), dtype=float))
        history = x.window(t - model.p, t - 1)[::-1]
        forecast = linear_predict(theta, history)
        records.append(_record(t, forecast, x.value_at(t), EstimatorKind.ORACLE_LOCAL.value))
    return records


def mean_squared_error(records: list[PredictionRecord]) -> float:
    if not records:
        raise ConfigError("no records to average")
    return float(np.mean([r.squared_error for r in records]))


def write_records_csv(records: list[PredictionRecord], path) -> None:
    """Stream records to CSV with columns t, forecast, actual, squared_error, estimator_kind."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "forecast", "actual", "squared_error", "estimator_kind"])
        for r in records:
            writer.writerow(
                [r.t, repr(r.forecast), repr(r.actual), repr(r.squared_error), r.estimator_kind]
            )
