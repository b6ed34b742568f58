"""Time-varying autoregressive process generation.

Coefficient paths are built in partial-autocorrelation coordinates: any
path of PACFs inside (-1, 1) maps through a Levinson-style recursion to AR
coefficients whose characteristic roots stay outside the 1/delta disk, so
stability along the whole path is guaranteed by construction rather than
checked after the fact.  Random models draw smooth trigonometric PACF
paths; the recursion X_t = sum_j theta_j(t / T) X_{t-j} + sigma(t / T) xi_t
is then run sample by sample.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, InvalidPacf, NonFiniteSample
from .series import Series
from .spectral import ArSnapshot

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

#: Default number of pre-window samples discarded to forget the zero
#: initial state.  Sufficient for delta <= 0.95: the companion products
#: contract like delta1^j with delta1 < 1, so 2000 steps leave an initial
#: condition footprint far below double precision.
DEFAULT_BURN_IN = 2000

_TAG_MODEL = 101
_TAG_REPLICATE = 202


def seed_sequence(seed, *key: int) -> np.random.SeedSequence:
    """Deterministic seed stream for (seed, key) pairs.

    Passing a SeedSequence through unchanged lets callers pre-derive
    streams; ints are combined with the key into the entropy pool, so
    streams for different keys are independent and do not depend on how
    many other streams exist.
    """
    if isinstance(seed, np.random.SeedSequence):
        if key:
            raise ConfigError("cannot re-key an existing SeedSequence")
        return seed
    return np.random.SeedSequence([int(seed), *key])


def derive_rng(seed, *key: int) -> np.random.Generator:
    """Counter-based generator (Philox) for a derived stream."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *key)))


def replicate_seed(master_seed: int, T: int, replicate: int) -> np.random.SeedSequence:
    """Seed stream for one (T, replicate) cell of an experiment.

    Depends only on the master seed, T, and the replicate index, so
    changing the number of replicates (or the execution order) never
    changes the samples of the replicates that remain.
    """
    return seed_sequence(master_seed, _TAG_REPLICATE, T, replicate)


def pacf_to_ar(pacf: np.ndarray, delta: float) -> np.ndarray:
    """Map partial autocorrelations to damped AR coefficients.

    Runs the inverse Levinson recursion

        theta*_{j,k} = theta*_{j,k-1} - theta*_{k,k} theta*_{k-j,k-1}

    for k = 2..p, then damps the result through theta_j = delta^j
    theta*_{j,p}.  The output polynomial has all roots of modulus at
    least 1/delta, i.e. lies in the stability class with margin delta.

    Accepts a single vector of length p or a batch of shape (n, p); the
    batch form is what path evaluation on sample grids uses.

    Raises
    ------
    InvalidPacf
        If any |pacf| >= 1.
    ConfigError
        If delta is outside (0, 1].
    """
    if not 0.0 < delta <= 1.0:
        raise ConfigError(f"delta must be in (0, 1], got {delta}")
    arr = np.asarray(pacf, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ConfigError(f"pacf must be a vector or batch, got shape {arr.shape}")
    if np.any(np.abs(arr) >= 1.0) or not np.all(np.isfinite(arr)):
        raise InvalidPacf("partial autocorrelations must lie strictly in (-1, 1)")
    n, p = arr.shape
    coeffs = np.zeros((n, p))
    coeffs[:, 0] = arr[:, 0]
    for k in range(2, p + 1):
        kk = arr[:, k - 1]
        prev = coeffs[:, : k - 1].copy()
        coeffs[:, : k - 1] = prev - kk[:, None] * prev[:, ::-1]
        coeffs[:, k - 1] = kk
    coeffs *= np.power(delta, np.arange(1, p + 1))[None, :]
    return coeffs[0] if single else coeffs


@dataclass(frozen=True)
class PacfPathSpec:
    """Smooth random PACF paths: trig polynomials with coefficients a.

    Component k of the path is

        pacf_k(u) = sum_{j=1}^{F-1} a[j-1, k-1] j^2 cos(j u) / N_F,

    with N_F = F (F - 1)(2 F - 1) / 6 = sum_j j^2, so |pacf_k| < 1
    whenever all |a| < 1.  a has shape (F - 1, p).
    """

    p: int
    F: int
    a: np.ndarray
    delta: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        object.__setattr__(self, "a", a)
        if self.p < 1:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        if self.F < 2:
            raise ConfigError(f"F must be >= 2, got {self.F}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if a.shape != (self.F - 1, self.p):
            raise ConfigError(
                f"a must have shape {(self.F - 1, self.p)}, got {a.shape}"
            )
        if np.any(np.abs(a) > 1.0):
            raise ConfigError("pacf path coefficients must lie in [-1, 1]")

    def pacf(self, u) -> np.ndarray:
        """PACF vector(s) at rescaled time(s) u; shape (..., p)."""
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        j = np.arange(1, self.F, dtype=float)
        norm = self.F * (self.F - 1) * (2 * self.F - 1) / 6.0
        basis = np.cos(np.multiply.outer(u_arr, j))
        out = basis @ ((j**2)[:, None] * self.a) / norm
        if np.ndim(u) == 0:
            return out[0]
        return out


@dataclass(frozen=True)
class TvarModel:
    """A time-varying AR(p) process on rescaled time.

    theta_path maps rescaled times (scalar or array) to coefficient
    vectors of shape (..., p); sigma_path maps them to innovation scales.
    Rescaled times outside [0, 1] are evaluated as-is: paths are global
    functions and simulation near the window edges needs them.

    Models built from a PacfPathSpec with constant sigma round-trip
    through JSON; models with arbitrary callables do not.
    """

    p: int
    delta: float
    theta_path: Callable[[np.ndarray], np.ndarray]
    sigma_path: Callable[[np.ndarray], np.ndarray]
    pacf_spec: PacfPathSpec | None = None
    sigma_const: float | None = None
    seed: int | None = None

    def snapshot(self, u: float) -> ArSnapshot:
        """Frozen stationary snapshot at rescaled time u."""
        theta = np.asarray(self.theta_path(float(u)), dtype=float)
        sigma = float(np.asarray(self.sigma_path(float(u))))
        return ArSnapshot(theta=theta, sigma=sigma)

    def to_dict(self) -> dict:
        if self.pacf_spec is None or self.sigma_const is None:
            raise ConfigError(
                "only PACF-path models with constant sigma are serializable"
            )
        return {
            "p": self.p,
            "F": self.pacf_spec.F,
            "delta": self.delta,
            "a": self.pacf_spec.a.tolist(),
            "sigma": self.sigma_const,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TvarModel":
        try:
            spec = PacfPathSpec(
                p=int(data["p"]),
                F=int(data["F"]),
                a=np.asarray(data["a"], dtype=float),
                delta=float(data["delta"]),
            )
            sigma = float(data["sigma"])
        except KeyError as exc:
            raise ConfigError(f"model dict missing field {exc}") from exc
        seed = data.get("seed")
        return make_model(spec, sigma=sigma, seed=seed)


def _constant_path(value: float) -> Callable[[np.ndarray], np.ndarray]:
    def path(u):
        return np.full(np.shape(np.asarray(u)), float(value))

    return path


def make_model(spec: PacfPathSpec, sigma=1.0, seed: int | None = None) -> TvarModel:
    """Assemble a TvarModel from a PACF path spec.

    sigma may be a positive constant or a callable on rescaled time.
    """

    def theta_path(u, _spec=spec):
        return pacf_to_ar(_spec.pacf(u), _spec.delta)

    if callable(sigma):
        sigma_path = sigma
        sigma_const = None
    else:
        if not sigma > 0:
            raise ConfigError(f"sigma must be positive, got {sigma}")
        sigma_path = _constant_path(float(sigma))
        sigma_const = float(sigma)
    return TvarModel(
        p=spec.p,
        delta=spec.delta,
        theta_path=theta_path,
        sigma_path=sigma_path,
        pacf_spec=spec,
        sigma_const=sigma_const,
        seed=seed,
    )


def random_model(
    p: int,
    F: int = 5,
    delta: float = 0.9,
    sigma=1.0,
    seed: int = 0,
) -> TvarModel:
    """Draw a random smooth model: a ~ Uniform[-1, 1] in the PACF path.

    Deterministic in seed; the same seed always yields the same paths.
    """
    rng = derive_rng(seed, _TAG_MODEL)
    a = rng.uniform(-1.0, 1.0, size=(F - 1, p))
    spec = PacfPathSpec(p=p, F=F, a=a, delta=delta)
    return make_model(spec, sigma=sigma, seed=int(seed))


def _ar_recursion_py(theta, sigma, xi):
    n, p = theta.shape
    x = np.zeros(n)
    for t in range(n):
        acc = sigma[t] * xi[t]
        m = p if t >= p else t
        for j in range(1, m + 1):
            acc += theta[t, j - 1] * x[t - j]
        x[t] = acc
    return x


if _HAVE_NUMBA:
    _ar_recursion = njit(cache=True)(_ar_recursion_py)
else:  # pragma: no cover
    _ar_recursion = _ar_recursion_py


def _path_grids(model: TvarModel, T: int, t_lo: int, t_hi: int):
    """Coefficient and scale grids for integer times t_lo..t_hi."""
    u = np.arange(t_lo, t_hi + 1, dtype=float) / T
    theta = np.asarray(model.theta_path(u), dtype=float)
    if theta.ndim == 1 and model.p == 1:
        theta = theta[:, None]
    if theta.shape != (len(u), model.p):
        raise ConfigError(
            f"theta_path returned shape {theta.shape}, expected {(len(u), model.p)}"
        )
    sigma = np.ascontiguousarray(
        np.broadcast_to(np.asarray(model.sigma_path(u), dtype=float), (len(u),))
    )
    return np.ascontiguousarray(theta), sigma


def _innovations(seed_seq: np.random.SeedSequence, n: int) -> np.ndarray:
    # Drawn newest-first and reversed: the innovation attached to a given
    # time index then does not depend on how much burn-in precedes it, so
    # enlarging burn_in perturbs returned samples only through the longer
    # (geometrically forgotten) pre-history.
    rng = np.random.Generator(np.random.Philox(seed_seq))
    return np.ascontiguousarray(rng.standard_normal(n)[::-1])


def simulate(
    model: TvarModel,
    T: int,
    t_range: tuple[int, int],
    burn_in: int = DEFAULT_BURN_IN,
    seed=0,
    innovation: str = "gaussian",
) -> Series:
    """Simulate X_t for t in t_range (inclusive) at horizon T.

    The recursion starts from zeros burn_in steps before the window, so
    the returned samples are within initial-condition error (geometric in
    burn_in) of the infinite-past process.

    Parameters
    ----------
    model : TvarModel
    T : int
        Rescaling horizon; paths are evaluated at u = t / T.
    t_range : (int, int)
        First and last returned index, inclusive.
    burn_in : int
        Discarded pre-window steps.
    seed : int or numpy SeedSequence
    innovation : str
        Only "gaussian" is implemented.

    Raises
    ------
    NonFiniteSample
        If the recursion produces a non-finite value.
    """
    t_lo, t_hi = int(t_range[0]), int(t_range[1])
    if t_lo > t_hi:
        raise ConfigError(f"empty t_range {t_range}")
    if T < 1:
        raise ConfigError(f"T must be >= 1, got {T}")
    if burn_in < 0:
        raise ConfigError(f"burn_in must be >= 0, got {burn_in}")
    if innovation != "gaussian":
        raise ConfigError(f"unsupported innovation law {innovation!r}")
    theta, sigma = _path_grids(model, T, t_lo - burn_in, t_hi)
    xi = _innovations(seed_sequence(seed), len(sigma))
    x = _ar_recursion(theta, sigma, xi)
    if not np.all(np.isfinite(x)):
        raise NonFiniteSample(
            f"non-finite sample in simulation over [{t_lo}, {t_hi}], T={T}"
        )
    return Series(x[burn_in:], t_start=t_lo)


def simulate_many(
    model: TvarModel,
    T: int,
    t_range: tuple[int, int],
    seeds,
    burn_in: int = DEFAULT_BURN_IN,
) -> np.ndarray:
    """Replicated simulation sharing one path-grid evaluation.

    Returns an array of shape (len(seeds), window length); row i is the
    simulation under seeds[i] and equals simulate(..., seed=seeds[i])
    sample for sample.  This is the bulk path used by experiments, where
    evaluating the coefficient path once per replicate would dominate.
    """
    t_lo, t_hi = int(t_range[0]), int(t_range[1])
    if t_lo > t_hi:
        raise ConfigError(f"empty t_range {t_range}")
    theta, sigma = _path_grids(model, T, t_lo - burn_in, t_hi)
    n = len(sigma)
    out = np.empty((len(seeds), t_hi - t_lo + 1))
    for i, seed in enumerate(seeds):
        xi = _innovations(seed_sequence(seed), n)
        x = _ar_recursion(theta, sigma, xi)
        if not np.all(np.isfinite(x)):
            raise NonFiniteSample(f"non-finite sample in replicate {i}")
        out[i] = x[burn_in:]
    return out


def companion_matrix(theta: np.ndarray) -> np.ndarray:
    """Companion form: first row theta, shifted identity below."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    p = len(theta)
    mat = np.zeros((p, p))
    mat[0, :] = theta
    if p > 1:
        mat[1:, :-1] = np.eye(p - 1)
    return mat


def companion_product_norm(model: TvarModel, T: int, t: int, j: int) -> float:
    """Spectral norm of A((t-1)/T) A((t-2)/T) ... A((t-j)/T); 1 for j = 0.

    These products propagate state j steps back; their geometric decay in
    j is what bounds the influence of the pre-window past.
    """
    if j < 0:
        raise ConfigError(f"j must be >= 0, got {j}")
    prod = np.eye(model.p)
    for i in range(1, j + 1):
        theta = np.asarray(model.theta_path((t - i) / T), dtype=float)
        prod = prod @ companion_matrix(theta)
    return float(np.linalg.norm(prod, 2))
