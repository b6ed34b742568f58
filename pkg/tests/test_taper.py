import numpy as np
import pytest

from tvyw.errors import ZeroTaper
from tvyw.taper import (
    get,
    moment,
    names,
    normalize,
    ramp,
    rectangular,
    sine,
    weight_sum,
)


def test_registry_contents():
    assert set(names()) >= {"rectangular", "sine", "ramp"}
    for name in names():
        h = get(name)
        assert h.name == name


def test_get_unknown_name():
    with pytest.raises(KeyError):
        get("hamming")


def test_rectangular_is_flat():
    h = rectangular()
    x = np.linspace(0, 1, 17)
    assert np.all(h.evaluate(x) == 1.0)
    assert h.is_symmetric
    assert h.sup_norm == 1.0


def test_all_tapers_unit_energy():
    # integral of h^2 over [0,1] must be 1; trapezoid on 2^14+1 points
    x = np.linspace(0.0, 1.0, (1 << 14) + 1)
    for name in names():
        h = get(name)
        energy = np.trapezoid(h.evaluate(x) ** 2, x)
        assert abs(energy - 1.0) < 1e-6, name


def test_sine_shape():
    h = sine()
    assert h.is_symmetric
    # sqrt(2) sin(pi x): peak sqrt(2) at x = 1/2, zero at both ends
    assert abs(h.evaluate(np.array([0.5]))[0] - np.sqrt(2)) < 1e-12
    assert abs(h.evaluate(np.array([0.0]))[0]) < 1e-12
    assert abs(h.sup_norm - np.sqrt(2)) < 1e-12


def test_ramp_shape():
    h = ramp()
    assert not h.is_symmetric
    assert abs(h.evaluate(np.array([1.0]))[0] - np.sqrt(3)) < 1e-12


def test_weight_sum_rectangular_exact():
    h = rectangular()
    for M in [1, 2, 64, 1024]:
        assert weight_sum(h, M) == float(M)


def test_weight_sum_matches_brute_force():
    for name in names():
        h = get(name)
        M = 37
        brute = sum(h.evaluate(np.array([k / M]))[0] ** 2 for k in range(1, M + 1))
        assert abs(weight_sum(h, M) - brute) < 1e-10, name


def test_weight_sum_near_M_for_large_M():
    # H_M / M -> integral h^2 = 1
    for name in names():
        h = get(name)
        assert abs(weight_sum(h, 1 << 14) / (1 << 14) - 1.0) < 1e-3, name


def test_first_moment_vanishes_for_symmetric():
    for name in names():
        h = get(name)
        m1 = moment(h, 1)
        if h.is_symmetric:
            assert abs(m1) < 1e-8, name
        else:
            assert abs(m1) > 1e-3, name


def test_moments_against_closed_forms():
    # rectangular: int (x-1/2)^2 = 1/12
    assert abs(moment(rectangular(), 2) - 1.0 / 12.0) < 1e-6
    # ramp h^2 = 3x^2: int 3x^2 (x-1/2) = 3/4 - 1/2 = 1/4
    assert abs(moment(ramp(), 1) - 0.25) < 1e-6
    # sine h^2 = 2 sin^2(pi x) = 1 - cos(2 pi x):
    # int (x-1/2)^2 dx - int cos(2 pi x)(x-1/2)^2 dx = 1/12 - 1/(2 pi^2)
    assert abs(moment(sine(), 2) - (1.0 / 12.0 - 0.5 / np.pi**2)) < 1e-6


def test_normalize_scales_to_unit_energy():
    h = normalize(lambda x: 1.0 + x, "tilted")
    x = np.linspace(0.0, 1.0, (1 << 14) + 1)
    assert abs(np.trapezoid(h.evaluate(x) ** 2, x) - 1.0) < 1e-5
    assert h.name == "tilted"
    assert not h.is_symmetric


def test_normalize_detects_symmetry():
    h = normalize(lambda x: np.sin(np.pi * x) ** 2, "sine2")
    assert h.is_symmetric


def test_normalize_rejects_zero_function():
    with pytest.raises(ZeroTaper):
        normalize(lambda x: np.zeros_like(x), "zero")


def test_taper_accepts_scalar_and_array():
    h = sine()
    scalar = h.evaluate(0.25)
    arr = h.evaluate(np.array([0.25]))
    assert abs(float(scalar) - arr[0]) < 1e-15
