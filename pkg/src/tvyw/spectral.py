"""Frozen-coefficient (locally stationary) spectral quantities.

At a fixed rescaled time u the process is approximated by a stationary
AR snapshot.  This module turns snapshots into spectral densities, exact
autocovariances, Toeplitz covariance matrices, and back into coefficients
via the Yule-Walker equations.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NumericalSingularity

_YW_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ArSnapshot:
    """Stationary AR coefficients frozen at one rescaled time.

    theta holds the lag coefficients (theta_1, ..., theta_p); sigma is the
    innovation standard deviation.  p = 0 (white noise) is allowed.
    """

    theta: np.ndarray
    sigma: float

    def __post_init__(self):
        object.__setattr__(
            self, "theta", np.atleast_1d(np.asarray(self.theta, dtype=float))
        )

    @property
    def order(self) -> int:
        return len(self.theta)


@dataclass(frozen=True)
class CovarianceSequence:
    """Autocovariances gamma(0), ..., gamma(d) of a stationary snapshot."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", np.atleast_1d(np.asarray(self.values, dtype=float))
        )

    @property
    def dimension(self) -> int:
        """Largest available lag."""
        return len(self.values) - 1


def ar_roots(theta: np.ndarray) -> np.ndarray:
    """Roots of the AR polynomial 1 - theta_1 z - ... - theta_p z^p.

    Trailing zero coefficients are dropped first, so the output length is
    the effective order.  For theta = 0 the polynomial is constant and the
    root set is empty.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    nz = np.nonzero(theta)[0]
    if len(nz) == 0:
        return np.empty(0, dtype=complex)
    p_eff = nz[-1] + 1
    # numpy wants descending powers: -theta_p z^p ... -theta_1 z + 1
    coeffs = np.concatenate([-theta[:p_eff][::-1], [1.0]])
    return np.roots(coeffs)


def min_root_modulus(theta: np.ndarray) -> float:
    """Smallest root modulus of the AR polynomial; inf when theta = 0."""
    roots = ar_roots(theta)
    if len(roots) == 0:
        return np.inf
    return float(np.min(np.abs(roots)))


def local_spectral_density(snapshot: ArSnapshot, lam) -> np.ndarray:
    """AR spectral density sigma^2 / (2 pi) |1 - sum_j theta_j e^{-i j lam}|^{-2}.

    Vectorized over lam; returns a scalar for scalar input.
    """
    lam_arr = np.asarray(lam, dtype=float)
    j = np.arange(1, snapshot.order + 1)
    phase = np.exp(-1j * np.multiply.outer(lam_arr, j))
    transfer = 1.0 - phase @ snapshot.theta
    out = snapshot.sigma**2 / (2.0 * np.pi) / np.abs(transfer) ** 2
    if np.isscalar(lam) or np.ndim(lam) == 0:
        return float(out)
    return out


def ar_autocovariance(snapshot: ArSnapshot, max_lag: int) -> CovarianceSequence:
    """Exact autocovariances of a stationary AR snapshot.

    Solves the (p+1)-dimensional linear system formed by the Yule-Walker
    moment identities

        gamma(l) = sum_j theta_j gamma(l - j) + sigma^2 1{l = 0},

    then extends recursively to lags above p.  No simulation and no
    quadrature is involved, so the result is exact up to solver rounding.

    Raises
    ------
    NumericalSingularity
        If the system is singular or the solution fails the stationarity
        sanity checks (gamma(0) > 0 and |gamma(l)| <= gamma(0)), which is
        what happens when theta lies outside the stable region.
    """
    if max_lag < 0:
        raise DimensionMismatch(f"max_lag must be >= 0, got {max_lag}")
    theta = snapshot.theta
    p = snapshot.order
    sig2 = float(snapshot.sigma) ** 2
    if p == 0:
        values = np.zeros(max_lag + 1)
        values[0] = sig2
        return CovarianceSequence(values)

    a = np.zeros((p + 1, p + 1))
    b = np.zeros(p + 1)
    b[0] = sig2
    for ell in range(p + 1):
        a[ell, ell] += 1.0
        for j in range(1, p + 1):
            a[ell, abs(ell - j)] -= theta[j - 1]
    try:
        head = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalSingularity(f"autocovariance system singular: {exc}") from exc

    if not np.all(np.isfinite(head)) or head[0] <= 0.0:
        raise NumericalSingularity(
            "autocovariance solve produced a non-positive variance; "
            "theta is outside the stable region"
        )
    if np.any(np.abs(head[1:]) > head[0] * (1.0 + 1e-10)):
        raise NumericalSingularity(
            "autocovariance solve violates |gamma(l)| <= gamma(0); "
            "theta is outside the stable region"
        )

    values = np.zeros(max_lag + 1)
    n_head = min(max_lag, p) + 1
    values[:n_head] = head[:n_head]
    for ell in range(p + 1, max_lag + 1):
        values[ell] = np.dot(theta, values[ell - 1 : ell - p - 1 : -1][: p])
    return CovarianceSequence(values)


def toeplitz_matrix(cov: CovarianceSequence, d: int) -> np.ndarray:
    """The d x d covariance matrix with entries gamma(|i - j|).

    Raises
    ------
    DimensionMismatch
        If d < 1 or the sequence does not reach lag d - 1.
    """
    if d < 1:
        raise DimensionMismatch(f"d must be >= 1, got {d}")
    if d - 1 > cov.dimension:
        raise DimensionMismatch(
            f"need lags up to {d - 1}, sequence stops at {cov.dimension}"
        )
    idx = np.arange(d)
    return cov.values[np.abs(idx[:, None] - idx[None, :])]


def local_yule_walker(cov: CovarianceSequence, d: int) -> np.ndarray:
    """Order-d Yule-Walker coefficients from exact autocovariances.

    Solves Gamma_d theta = (gamma(1), ..., gamma(d)) and verifies the
    residual.  This is the population-side solve; the estimation-side
    solve on empirical windows lives in the estimator module and has a
    different degeneracy convention.

    Raises
    ------
    DimensionMismatch
        If the sequence does not reach lag d.
    NumericalSingularity
        If the solve fails or the residual exceeds 1e-8 * ||gamma||.
    """
    if d < 1:
        raise DimensionMismatch(f"d must be >= 1, got {d}")
    if d > cov.dimension:
        raise DimensionMismatch(
            f"need lags up to {d}, sequence stops at {cov.dimension}"
        )
    gamma_mat = toeplitz_matrix(cov, d)
    gamma_vec = cov.values[1 : d + 1]
    try:
        theta = np.linalg.solve(gamma_mat, gamma_vec)
    except np.linalg.LinAlgError as exc:
        raise NumericalSingularity(f"Yule-Walker system singular: {exc}") from exc
    residual = np.linalg.norm(gamma_mat @ theta - gamma_vec)
    if residual > _YW_RESIDUAL_TOL * np.linalg.norm(gamma_vec):
        raise NumericalSingularity(
            f"Yule-Walker residual {residual:.3e} exceeds tolerance"
        )
    return theta
