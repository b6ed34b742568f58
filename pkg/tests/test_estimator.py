from fractions import Fraction

import numpy as np
import pytest

from tvyw.errors import DimensionMismatch, OddBandwidth, WindowOutOfRange
from tvyw.estimator import (
    Alignment,
    bias_reduced_estimate,
    empirical_yule_walker,
    estimation_loss,
    extrapolation_order,
    minimax_bandwidth,
    romberg_weights,
    romberg_weights_exact,
    solve_yule_walker,
    tapered_autocovariance,
    window_bounds,
)
from tvyw.series import Series
from tvyw.spectral import ar_autocovariance, min_root_modulus, toeplitz_matrix
from tvyw.taper import get, names, ramp, rectangular, weight_sum
from conftest import stable_snapshot


# ---------------------------------------------------------------- windows


def test_window_bounds_centered():
    assert window_bounds(10, 4, Alignment.CENTERED) == (9, 12)
    assert window_bounds(100, 8, Alignment.CENTERED) == (97, 104)


def test_window_bounds_causal():
    # causal window ends one step before t_center
    assert window_bounds(10, 4, Alignment.CAUSAL) == (6, 9)


def test_window_bounds_odd_rejected():
    with pytest.raises(OddBandwidth):
        window_bounds(10, 5, Alignment.CENTERED)


def test_autocovariance_hand_example():
    # x = 1..4, rectangular, M = T = 4, centered at t = 2: window is all of x
    x = Series(np.array([1.0, 2.0, 3.0, 4.0]), t_start=1)
    win = tapered_autocovariance(x, 2, 4, 4, rectangular(), 2, Alignment.CENTERED)
    assert abs(win.lags[0] - 30.0 / 4.0) < 1e-14
    assert abs(win.lags[1] - 20.0 / 4.0) < 1e-14
    assert abs(win.lags[2] - 11.0 / 4.0) < 1e-14
    assert win.M == 4
    assert win.alignment == Alignment.CENTERED


def test_autocovariance_matches_correlate(rng):
    # independent route: build the weighted samples explicitly and use
    # np.correlate for the lag products
    x = Series(rng.standard_normal(256), t_start=1)
    M, d, t_c = 64, 5, 128
    for name in names():
        h = get(name)
        win = tapered_autocovariance(x, t_c, 256, M, h, d, Alignment.CENTERED)
        lo, hi = window_bounds(t_c, M, Alignment.CENTERED)
        w = h.evaluate(np.arange(1, M + 1) / M) * x.window(lo, hi)
        full = np.correlate(w, w, mode="full")[M - 1 : M + d]
        oracle = full / weight_sum(h, M)
        assert np.max(np.abs(win.lags - oracle)) < 1e-12, name


def test_autocovariance_out_of_range():
    x = Series(np.zeros(16), t_start=1)
    with pytest.raises(WindowOutOfRange):
        tapered_autocovariance(x, 2, 16, 8, rectangular(), 1, Alignment.CENTERED)


def test_zero_taper_weight_gives_zero_lags():
    # a taper that vanishes on the whole grid makes H_M = 0; the lag
    # estimates are then defined as zero rather than 0/0
    from tvyw.taper import Taper

    dead = Taper(
        name="dead",
        evaluate=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        sup_norm=0.0,
        is_symmetric=True,
    )
    x = Series(np.ones(8), t_start=1)
    win = tapered_autocovariance(x, 4, 8, 4, dead, 1, Alignment.CENTERED)
    assert np.all(win.lags == 0.0)


# ---------------------------------------------------------------- solver


def test_levinson_matches_direct_solve(rng):
    for _ in range(30):
        p = int(rng.integers(1, 7))
        d = int(rng.integers(1, 7))
        snap = stable_snapshot(rng, p)
        cov = ar_autocovariance(snap, max_lag=d)
        theta = solve_yule_walker(cov.values, d)
        direct = np.linalg.solve(toeplitz_matrix(cov, d), cov.values[1 : d + 1])
        assert np.max(np.abs(theta - direct)) < 1e-10


def test_estimate_norm_and_root_bounds(rng):
    # quick version of the fuzz gate: 500 random windows
    for _ in range(500):
        d = int(rng.integers(1, 7))
        M = int(2 * rng.integers(max(2, d), 65))
        x = Series(rng.standard_normal(M), t_start=1)
        win = tapered_autocovariance(
            x, M // 2, M, M, rectangular(), d, Alignment.CENTERED
        )
        est = empirical_yule_walker(win, d)
        assert np.linalg.norm(est.theta) <= 2**d - 1 + 1e-9
        assert min_root_modulus(est.theta) >= 1.0 - 1e-8


def test_degenerate_window():
    x = Series(np.zeros(32), t_start=1)
    win = tapered_autocovariance(x, 16, 32, 16, rectangular(), 2, Alignment.CENTERED)
    est = empirical_yule_walker(win, 2)
    assert est.degenerate
    assert np.all(est.theta == 0.0)


def test_estimate_recovers_ar1():
    # long stationary AR(1) stretch, theta = 0.6
    rng = np.random.default_rng(7)
    n = 1 << 16
    x = np.empty(n)
    acc = 0.0
    xi = rng.standard_normal(n)
    for i in range(n):
        acc = 0.6 * acc + xi[i]
        x[i] = acc
    s = Series(x, t_start=1)
    win = tapered_autocovariance(
        s, n // 2, n, 1 << 14, rectangular(), 1, Alignment.CENTERED
    )
    est = empirical_yule_walker(win, 1)
    assert abs(est.theta[0] - 0.6) < 0.02


# ---------------------------------------------------------------- weights


def test_extrapolation_order():
    assert extrapolation_order(1.0) == 0
    assert extrapolation_order(1.5) == 1
    assert extrapolation_order(2.0) == 1
    assert extrapolation_order(3.0) == 2


def test_weights_known_values():
    assert romberg_weights_exact(1) == [Fraction(2), Fraction(-1)]
    assert romberg_weights_exact(2, symmetric=True) == [
        Fraction(4, 3),
        Fraction(-1, 3),
    ]
    assert romberg_weights_exact(3, symmetric=True) == [
        Fraction(32, 21),
        Fraction(-4, 7),
        Fraction(1, 21),
    ]
    # non-symmetric k = 2: solve by hand from
    #   w0 + w1 + w2 = 1, w0 + 2 w1 + 4 w2 = 0, w0 + 4 w1 + 16 w2 = 0
    assert romberg_weights_exact(2) == [Fraction(8, 3), Fraction(-2), Fraction(1, 3)]


def test_weights_sum_to_one():
    for k in range(9):
        for sym in (False, True):
            w = romberg_weights_exact(k, symmetric=sym)
            assert sum(w) == 1


def test_weights_cancel_lower_orders():
    # the defining system in exact arithmetic: sum_j w_j 2^{i j} = [i == 0]
    for k in range(1, 9):
        w = romberg_weights_exact(k)
        for i in range(k + 1):
            val = sum(wj * Fraction(2) ** (i * j) for j, wj in enumerate(w))
            assert val == (1 if i == 0 else 0), (k, i)
        w = romberg_weights_exact(k, symmetric=True)
        rows = [0] + list(range(2, k + 1))
        for i in rows:
            val = sum(wj * Fraction(2) ** (i * j) for j, wj in enumerate(w))
            assert val == (1 if i == 0 else 0), (k, i, "sym")


def test_weights_float_view():
    w = romberg_weights(2, symmetric=True)
    assert w.dtype == np.float64
    assert np.max(np.abs(w - np.array([4.0 / 3.0, -1.0 / 3.0]))) < 1e-15


# ------------------------------------------------------- bias reduction


def test_bias_reduced_combines_raw_rungs(rng):
    x = Series(rng.standard_normal(1 << 12), t_start=1)
    T = 1 << 12
    t_c, M, d = T // 2, 128, 3
    est = bias_reduced_estimate(x, t_c, T, M, rectangular(), d, 2.0, Alignment.CENTERED)
    # the weights line up with the ladder rungs M, 2M, 4M, ...
    raws = []
    for j in range(len(est.weights)):
        win = tapered_autocovariance(
            x, t_c, T, (1 << j) * M, rectangular(), d, Alignment.CENTERED
        )
        raws.append(empirical_yule_walker(win, d).theta)
    combo = np.sum([wj * r for wj, r in zip(est.weights, raws)], axis=0)
    assert np.max(np.abs(est.theta - combo)) < 1e-12
    assert abs(np.sum(est.weights) - 1.0) < 1e-12
    assert est.kind == "bias_reduced"
    assert est.bandwidth == M


def test_bias_reduced_beta_one_is_raw(rng):
    # beta = 1 means no extrapolation: single rung, weight [1]
    x = Series(rng.standard_normal(1 << 10), t_start=1)
    T = 1 << 10
    est = bias_reduced_estimate(
        x, T // 2, T, 64, rectangular(), 2, 1.0, Alignment.CENTERED
    )
    win = tapered_autocovariance(x, T // 2, T, 64, rectangular(), 2, Alignment.CENTERED)
    raw = empirical_yule_walker(win, 2)
    assert np.array_equal(est.theta, raw.theta)


def test_bias_reduced_asymmetric_taper_uses_full_ladder(rng):
    x = Series(rng.standard_normal(1 << 12), t_start=1)
    T = 1 << 12
    est_sym = bias_reduced_estimate(
        x, T // 2, T, 64, rectangular(), 2, 3.0, Alignment.CENTERED
    )
    est_asym = bias_reduced_estimate(
        x, T // 2, T, 64, ramp(), 2, 3.0, Alignment.CENTERED
    )
    # k = 2: symmetric variant needs 2 rungs, full variant 3
    assert len(est_sym.weights) == 2
    assert len(est_asym.weights) == 3


# ------------------------------------------------- deterministic bias law


def test_covariance_window_bias_order():
    """Taper moments set the bias order of the windowed variance.

    For a slowly varying AR(1) the expected lag-0 window average can be
    written down exactly from the variance recursion
    v(t) = theta(t/T)^2 v(t-1) + 1, with no sampling noise.  Its gap to
    the frozen-time variance scales like (M/T)^2 for a symmetric taper
    and (M/T)^1 for an asymmetric one.
    """

    def theta_fn(u):
        return 0.5 + 0.3 * np.cos(2.0 * u)

    T = 1 << 18
    t0 = T // 2
    pre = 4000
    M_top = 1 << 16
    t_first = t0 - M_top // 2 + 1 - pre
    ts = np.arange(t_first, t0 + M_top // 2 + 1)
    th = theta_fn(ts / T)
    v = np.empty(len(ts))
    acc = 1.0 / (1.0 - th[0] ** 2)
    for i in range(len(ts)):
        acc = th[i] ** 2 * acc + 1.0
        v[i] = acc
    frozen = 1.0 / (1.0 - theta_fn(0.5) ** 2)

    slopes = {}
    for h in (rectangular(), ramp()):
        gaps = []
        Ms = [1 << j for j in range(13, 17)]
        for M in Ms:
            lo, _ = window_bounds(t0, M, Alignment.CENTERED)
            w2 = h.evaluate(np.arange(1, M + 1) / M) ** 2
            mean_v = np.dot(w2, v[lo - t_first : lo - t_first + M]) / weight_sum(h, M)
            gaps.append(abs(mean_v - frozen))
        slopes[h.name] = np.polyfit(np.log(Ms), np.log(gaps), 1)[0]

    assert abs(slopes["rectangular"] - 2.0) < 0.1
    assert abs(slopes["ramp"] - 1.0) < 0.1


# ---------------------------------------------------------------- misc


def test_minimax_bandwidth_values():
    # T^(2 beta / (2 beta + 1)), doubled and floored to even
    assert minimax_bandwidth(1024, 1.0) == 202
    assert minimax_bandwidth(1 << 16, 2.0) == 2 * int((1 << 16) ** 0.8 + 1e-9)
    for T in [256, 1000, 4096]:
        for beta in [1.0, 1.5, 3.0]:
            assert minimax_bandwidth(T, beta) % 2 == 0


def test_estimation_loss():
    x = Series(np.random.default_rng(0).standard_normal(256), t_start=1)
    win = tapered_autocovariance(x, 128, 256, 64, rectangular(), 2, Alignment.CENTERED)
    est = empirical_yule_walker(win, 2)
    truth = np.array([0.1, 0.2])
    expect = float(np.linalg.norm(est.theta - truth))
    assert abs(estimation_loss(est, truth) - expect) < 1e-14
    with pytest.raises(DimensionMismatch):
        estimation_loss(est, np.zeros(3))
