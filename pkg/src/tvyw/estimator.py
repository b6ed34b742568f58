"""Tapered local Yule-Walker estimation with Richardson-style bias reduction.

The raw estimator solves the Yule-Walker system built from tapered local
empirical covariances around a point.  Its bias admits an expansion in
powers of the bandwidth ratio M / T, so evaluating it on the bandwidth
ladder M, 2M, 4M, ... and combining with weights that annihilate the
leading powers removes the dominant bias terms.  Symmetric tapers have no
first-order term, which shortens the ladder by one rung.
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from . import taper as taper_mod
from .errors import (
    ConfigError,
    DimensionMismatch,
    OddBandwidth,
)
from .series import Series
from .taper import Taper

#: gamma_hat(u, 0) at or below this is treated as an exactly zero window.
SINGULAR_FLOOR = 1e-300

#: Relative prediction-error floor below which the Levinson recursion
#: abandons the fast path for a least-squares solve.
_LEVINSON_FLOOR = 1e-12


class Alignment(str, Enum):
    """Window placement relative to the anchor index t_center."""

    CENTERED = "centered"
    CAUSAL = "causal"


@dataclass(frozen=True)
class CovarianceWindow:
    """Tapered empirical covariances gamma_hat(u, 0..d) from one window.

    The lags form a positive semi-definite sequence by construction (they
    are the Fourier coefficients of a nonnegative local periodogram), up
    to floating-point rounding.
    """

    u: float
    M: int
    lags: np.ndarray
    h_name: str
    alignment: Alignment

    @property
    def dimension(self) -> int:
        return len(self.lags) - 1


@dataclass(frozen=True)
class CoefficientEstimate:
    """An estimated coefficient vector plus its provenance.

    kind is "raw" for a single-bandwidth Yule-Walker solve and
    "bias_reduced" for a weighted ladder combination; bandwidth is the
    base M in both cases.  weights is None for raw estimates.  degenerate
    marks the all-zero-window convention (theta = 0 was returned because
    there was no data, not because the fit found zero).
    """

    theta: np.ndarray
    kind: str
    bandwidth: int
    weights: np.ndarray | None
    degenerate: bool


def window_bounds(t_center: int, M: int, alignment: Alignment) -> tuple[int, int]:
    """Inclusive sample range used by a window anchored at t_center.

    Centered windows straddle the anchor: t_center - M/2 + 1 .. t_center + M/2.
    Causal windows end just before it: t_center - M .. t_center - 1, so a
    forecast of X_{t_center} never touches the value being predicted.
    """
    if M % 2:
        raise OddBandwidth(f"bandwidth must be even, got {M}")
    if alignment == Alignment.CENTERED:
        return t_center - M // 2 + 1, t_center + M // 2
    return t_center - M, t_center - 1


def tapered_autocovariance(
    x: Series,
    t_center: int,
    T: int,
    M: int,
    h: Taper,
    d: int,
    alignment: Alignment = Alignment.CENTERED,
) -> CovarianceWindow:
    """Tapered local empirical covariances at lags 0..d.

    With window samples x_1*, ..., x_M* (in window order) and weights
    w_t = h(t / M) x_t*, the lag-l value is

        gamma_hat(l) = (1 / H_M) * sum_{t=l+1}^{M} w_t w_{t-l},

    where H_M = sum_k h(k / M)^2.  If H_M = 0 every lag is zero by
    convention.  All d + 1 lags come from dot products of the single
    weighted window, which keeps the cost at O(M d).

    Parameters
    ----------
    x : Series
        Sample window; must cover the index range implied by the alignment.
    t_center : int
        Anchor index; u = t_center / T is recorded on the output.
    T : int
        Rescaling horizon (only enters through u).
    M : int
        Even bandwidth with M > d.
    h : Taper
        Data taper.
    d : int
        Largest lag.
    alignment : Alignment
        Centered for estimation at an interior point, causal for
        forecasting.

    Raises
    ------
    OddBandwidth
        If M is odd.
    DimensionMismatch
        If M <= d or d < 0.
    WindowOutOfRange
        If the series does not cover the window.
    """
    if d < 0:
        raise DimensionMismatch(f"d must be >= 0, got {d}")
    if M <= d:
        raise DimensionMismatch(f"bandwidth M={M} must exceed d={d}")
    lo, hi = window_bounds(t_center, M, alignment)
    xs = x.window(lo, hi)
    h_m = taper_mod.weight_sum(h, M)
    lags = np.zeros(d + 1)
    if h_m > 0.0:
        w = h.evaluate(np.arange(1, M + 1, dtype=float) / M) * xs
        for ell in range(d + 1):
            lags[ell] = np.dot(w[ell:], w[: M - ell]) / h_m
    return CovarianceWindow(
        u=t_center / T, M=M, lags=lags, h_name=h.name, alignment=alignment
    )


def _toeplitz_solve_fallback(lags: np.ndarray, d: int) -> np.ndarray:
    idx = np.arange(d)
    gamma_mat = lags[np.abs(idx[:, None] - idx[None, :])]
    theta, *_ = np.linalg.lstsq(gamma_mat, lags[1 : d + 1], rcond=None)
    return theta


def solve_yule_walker(lags: np.ndarray, d: int) -> np.ndarray:
    """Solve the order-d Yule-Walker system for a covariance sequence.

    Levinson-Durbin recursion, O(d^2).  The recursion assumes the
    prediction-error variance stays positive, which holds for genuinely
    positive-definite sequences; if it falls to (or below) a 1e-12
    relative floor the routine falls back to a dense least-squares solve
    of the same Toeplitz system.
    """
    lags = np.asarray(lags, dtype=float)
    if d < 1 or d > len(lags) - 1:
        raise DimensionMismatch(f"d={d} incompatible with {len(lags)} lags")
    gamma0 = lags[0]
    coeffs = np.zeros(d)
    err = gamma0
    for k in range(1, d + 1):
        if err <= _LEVINSON_FLOOR * abs(gamma0):
            return _toeplitz_solve_fallback(lags, d)
        acc = lags[k]
        if k > 1:
            acc -= np.dot(coeffs[: k - 1], lags[k - 1 : 0 : -1])
        kappa = acc / err
        if k > 1:
            coeffs[: k - 1] -= kappa * coeffs[: k - 1][::-1]
        coeffs[k - 1] = kappa
        err *= 1.0 - kappa * kappa
    return coeffs


def empirical_yule_walker(window: CovarianceWindow, d: int | None = None) -> CoefficientEstimate:
    """Raw local coefficient estimate from one covariance window.

    An exactly empty window (gamma_hat(u, 0) at the 1e-300 floor, which
    only happens when every weighted sample is zero) returns theta = 0
    with the degenerate flag set instead of raising: all-zero windows are
    the one singular case a positive semi-definite window can produce.
    """
    d = window.dimension if d is None else d
    if d < 1 or d > window.dimension:
        raise DimensionMismatch(
            f"d={d} incompatible with window of dimension {window.dimension}"
        )
    if window.lags[0] <= SINGULAR_FLOOR:
        return CoefficientEstimate(
            theta=np.zeros(d),
            kind="raw",
            bandwidth=window.M,
            weights=None,
            degenerate=True,
        )
    theta = solve_yule_walker(window.lags, d)
    return CoefficientEstimate(
        theta=theta, kind="raw", bandwidth=window.M, weights=None, degenerate=False
    )


def extrapolation_order(beta: float) -> int:
    """Number of bias powers to cancel: k = ceil(beta) - 1.

    This is the unique k with beta = k + alpha, alpha in (0, 1]; smooth
    paths (large beta) justify longer ladders.
    """
    if beta <= 0:
        raise ConfigError(f"beta must be positive, got {beta}")
    return math.ceil(beta) - 1


def _solve_exact(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan over the rationals; matrix must be nonsingular."""
    n = len(matrix)
    a = [row[:] for row in matrix]
    b = list(rhs)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ConfigError("extrapolation system is singular")
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = Fraction(1, 1) / a[col][col]
        a[col] = [v * inv for v in a[col]]
        b[col] = b[col] * inv
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
                b[r] = b[r] - f * b[col]
    return b


def romberg_weights_exact(k: int, symmetric: bool = False) -> list[Fraction]:
    """Extrapolation weights for the bandwidth ladder M, 2M, ..., as exact rationals.

    The weights solve sum_j w_j 2^(i j) = 1{i = 0}.  The full variant
    uses rows i = 0..k and all k + 1 ladder rungs.  The symmetric variant
    drops the i = 1 row (symmetric tapers contribute no first-order bias)
    and the last rung, leaving k weights; rows are i in {0, 2, 3, ..., k}.
    For k = 0 both variants reduce to the single weight 1.

    Solved in rational arithmetic: the Vandermonde entries reach 2^(k^2),
    so float64 elimination cannot certify the defining identities, while
    the exact solve satisfies them identically.
    """
    if k < 0:
        raise ConfigError(f"extrapolation order must be >= 0, got {k}")
    if k == 0:
        return [Fraction(1, 1)]
    if symmetric:
        rows = [0] + list(range(2, k + 1))
        cols = list(range(k))
    else:
        rows = list(range(k + 1))
        cols = list(range(k + 1))
    matrix = [[Fraction(2 ** (i * j), 1) for j in cols] for i in rows]
    rhs = [Fraction(1, 1) if i == 0 else Fraction(0, 1) for i in rows]
    return _solve_exact(matrix, rhs)


def romberg_weights(k: int, symmetric: bool = False) -> np.ndarray:
    """Float view of :func:`romberg_weights_exact`."""
    return np.array([float(w) for w in romberg_weights_exact(k, symmetric)])


def bias_reduced_estimate(
    x: Series,
    t_center: int,
    T: int,
    M: int,
    h: Taper,
    d: int,
    beta: float,
    alignment: Alignment = Alignment.CENTERED,
) -> CoefficientEstimate:
    """Ladder-extrapolated coefficient estimate at base bandwidth M.

    Computes raw estimates at bandwidths 2^j M (j = 0 upward, one rung
    per weight) and combines them with the extrapolation weights matching
    the taper symmetry.  For beta <= 1 the ladder has a single rung with
    weight one, so the output theta equals the raw estimate exactly.

    The degenerate flag is set only when every rung was degenerate (in
    which case theta is exactly zero).

    Raises whatever the underlying window extraction raises; in
    particular WindowOutOfRange when the longest rung does not fit in the
    available samples.
    """
    k = extrapolation_order(beta)
    weights = romberg_weights(k, symmetric=h.is_symmetric)
    theta = np.zeros(d)
    all_degenerate = True
    for j, w in enumerate(weights):
        window = tapered_autocovariance(x, t_center, T, (2**j) * M, h, d, alignment)
        est = empirical_yule_walker(window, d)
        theta = theta + w * est.theta
        all_degenerate = all_degenerate and est.degenerate
    return CoefficientEstimate(
        theta=theta,
        kind="bias_reduced",
        bandwidth=M,
        weights=weights,
        degenerate=all_degenerate,
    )


def minimax_bandwidth(T: int, beta: float) -> int:
    """Rate-optimal even bandwidth 2 * floor(T^(2 beta / (2 beta + 1))).

    A 1e-9 nudge is applied before the floor so that exact integer powers
    (for example 8^(2/3) = 4, which float pow returns as 3.999...96) land
    on the mathematical value.
    """
    if T < 1:
        raise ConfigError(f"T must be >= 1, got {T}")
    if beta <= 0:
        raise ConfigError(f"beta must be positive, got {beta}")
    x = float(T) ** (2.0 * beta / (2.0 * beta + 1.0))
    return 2 * int(math.floor(x + 1e-9))


def estimation_loss(estimate: CoefficientEstimate, truth: np.ndarray) -> float:
    """Euclidean distance between an estimate and a reference vector."""
    truth = np.asarray(truth, dtype=float)
    if estimate.theta.shape != truth.shape:
        raise DimensionMismatch(
            f"estimate has shape {estimate.theta.shape}, truth {truth.shape}"
        )
    return float(np.linalg.norm(estimate.theta - truth))
