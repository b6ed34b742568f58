"""Data tapers on [0, 1], normalized so that the square integrates to one.

A taper h weights the samples inside a local window before covariances are
formed.  Everything downstream only needs three things: pointwise values
h(k / M), the weight sum H_M = sum_k h(k / M)^2, and the moments
int h(u)^2 (u - 1/2)^ell du that control the bias expansion order.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ZeroTaper

DEFAULT_GRID = 4096

_SYMMETRY_TOL = 1e-12
_ZERO_TOL = 1e-14


@dataclass(frozen=True)
class Taper:
    """A square-normalized weight function on [0, 1].

    Attributes
    ----------
    name : str
        Registry name, also recorded in covariance windows.
    evaluate : callable
        Vectorized map from points in [0, 1] to weights.
    sup_norm : float
        Supremum of |h| (exact for built-ins, grid maximum otherwise).
    is_symmetric : bool
        True when h(x) = h(1 - x); symmetric tapers kill the first-order
        bias term, which halves the length of the extrapolation ladder.
    """

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    sup_norm: float
    is_symmetric: bool


def rectangular() -> Taper:
    """Constant taper h = 1 (already normalized)."""
    return Taper(
        name="rectangular",
        evaluate=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        sup_norm=1.0,
        is_symmetric=True,
    )


def sine() -> Taper:
    """Half-period sine arch sqrt(2) * sin(pi x)."""
    root2 = np.sqrt(2.0)
    return Taper(
        name="sine",
        evaluate=lambda x: root2 * np.sin(np.pi * np.asarray(x, dtype=float)),
        sup_norm=root2,
        is_symmetric=True,
    )


def ramp() -> Taper:
    """Linear ramp sqrt(3) * x, the simplest asymmetric taper.

    Its first moment int h^2 (u - 1/2) du = 1/4 is nonzero, so estimates
    built with it carry a first-order bias term.  Useful for exercising
    the bias-order machinery; not recommended for actual estimation.
    """
    root3 = np.sqrt(3.0)
    return Taper(
        name="ramp",
        evaluate=lambda x: root3 * np.asarray(x, dtype=float),
        sup_norm=root3,
        is_symmetric=False,
    )


_REGISTRY: dict[str, Callable[[], Taper]] = {
    "rectangular": rectangular,
    "sine": sine,
    "ramp": ramp,
}


def names() -> list[str]:
    """Registered taper names."""
    return sorted(_REGISTRY)


def get(name: str) -> Taper:
    """Look up a built-in taper by name.

    Raises
    ------
    KeyError
        If the name is not registered.
    """
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(
            f"unknown taper {name!r}; registered: {', '.join(names())}"
        ) from None


def normalize(
    raw: Callable[[np.ndarray], np.ndarray],
    name: str = "custom",
    n_grid: int = DEFAULT_GRID,
) -> Taper:
    """Scale an arbitrary weight function so that int h^2 = 1.

    The integral is a trapezoid rule on ``n_grid`` points, so the
    normalization (and the symmetry classification) is exact only up to
    quadrature error; callers that need exact constants should construct
    the Taper directly, as the built-ins do.

    Parameters
    ----------
    raw : callable
        Vectorized function on [0, 1].  Does not need any normalization.
    name : str
        Name recorded on the resulting taper.
    n_grid : int
        Number of quadrature points.

    Raises
    ------
    ZeroTaper
        If the quadrature of raw^2 falls below 1e-14.
    """
    x = np.linspace(0.0, 1.0, n_grid)
    values = np.asarray(raw(x), dtype=float)
    norm_sq = np.trapezoid(values**2, x)
    if norm_sq < _ZERO_TOL:
        raise ZeroTaper(f"taper {name!r} has square integral {norm_sq:.3e}")
    scale = 1.0 / np.sqrt(norm_sq)
    scaled = scale * values
    symmetric = bool(np.max(np.abs(scaled - scaled[::-1])) <= _SYMMETRY_TOL)
    return Taper(
        name=name,
        evaluate=lambda u, _raw=raw, _c=scale: _c * np.asarray(_raw(u), dtype=float),
        sup_norm=float(np.max(np.abs(scaled))),
        is_symmetric=symmetric,
    )


def weight_sum(h: Taper, M: int) -> float:
    """Window weight sum H_M = sum_{k=1}^{M} h(k / M)^2.

    This is the normalizer of the tapered local covariance; H_M = M + O(1)
    for any bounded taper, exactly M for the rectangular one.
    """
    k = np.arange(1, M + 1, dtype=float)
    return float(np.sum(h.evaluate(k / M) ** 2))


def moment(h: Taper, ell: int, n_grid: int = DEFAULT_GRID) -> float:
    """Taper moment int_0^1 h(u)^2 (u - 1/2)^ell du (trapezoid rule).

    The zeroth moment is 1 by normalization.  The first moment vanishes
    for symmetric tapers, which is what removes the first-order bias term.
    """
    x = np.linspace(0.0, 1.0, n_grid)
    return float(np.trapezoid(h.evaluate(x) ** 2 * (x - 0.5) ** ell, x))
