"""Covariance models for isotropic Gaussian fields on the unit N-sphere.

Three families are supported:

* ``SchoenbergSeries``: finite Gegenbauer expansions ``sum a_n P_n^lam(t)``
  with ``lam = (N - 1)/2``;
* ``MonomialSeries``: finite power series ``sum b_n t^n`` in the inner
  product, valid on every sphere;
* closed forms (powered exponential, sine model, canonical field,
  arccos-linear, standardized spherical fractional Brownian motion).

Every covariance is a function of ``t = <x, y>`` except the standardized
SFBM, whose covariance depends on both points through their distance to
a pole; it only exposes ``covariance_points``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import specialfn
from .errors import InvalidModelError, MethodMismatchError

MAX_BASIS_DEGREE = 64

A1 = "A1-satisfied"
A1_PRIME = "A1prime-satisfied"
NOT_SMOOTH = "not-smooth"


@dataclass(frozen=True)
class LocalExpansion:
    """Local behaviour ``C = 1 - c d^alpha (1 + o(1))`` as ``d -> 0``."""

    c: float
    alpha: float

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidModelError(f"local scale c must be positive, got {self.c}")
        if not 0 < self.alpha <= 2:
            raise InvalidModelError(f"local exponent must lie in (0, 2], got {self.alpha}")


@dataclass(frozen=True)
class SmoothnessReport:
    condition: str
    cprime: float
    local: LocalExpansion | None = None
    diagnostics: tuple = ()

    @property
    def smooth(self):
        return math.isfinite(self.cprime)


def _coefficient_tuple(values, name):
    arr = tuple(float(v) for v in values)
    if not arr:
        raise InvalidModelError(f"{name} needs at least one coefficient")
    if not all(math.isfinite(v) for v in arr):
        raise InvalidModelError(f"{name} coefficients must be finite")
    return arr


@dataclass(frozen=True)
class SchoenbergSeries:
    """``C(t) = sum_n a_n P_n^lam(t)`` on ``S^N`` with ``lam = (N - 1)/2``.

    Negative coefficients are accepted at construction so that
    ``validate_model`` can report them; every other entry point rejects
    them.
    """

    dimension: int
    coefficients: tuple

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise InvalidModelError("dimension must be a positive integer")
        object.__setattr__(self, "coefficients", _coefficient_tuple(self.coefficients, "Schoenberg"))

    @property
    def lam(self):
        return (self.dimension - 1) / 2.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        table = specialfn.gegenbauer_table(len(self.coefficients) - 1, self.lam, t)
        return np.tensordot(np.asarray(self.coefficients), table, axes=1)

    def variance(self):
        return sum(a * specialfn.gegenbauer_at_one(n, self.lam) for n, a in enumerate(self.coefficients))


@dataclass(frozen=True)
class MonomialSeries:
    """``C(t) = sum_n b_n t^n``, a covariance on every sphere when all ``b_n >= 0``."""

    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _coefficient_tuple(self.coefficients, "monomial"))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.polynomial.polynomial.polyval(t, self.coefficients)

    def variance(self):
        return float(sum(self.coefficients))


@dataclass(frozen=True)
class PoweredExponential:
    """``C = exp(-c d^alpha)`` with ``alpha`` in (0, 1]."""

    c: float
    alpha: float

    def __post_init__(self):
        if not self.c > 0 or not 0 < self.alpha <= 1:
            raise InvalidModelError("powered exponential needs c > 0 and alpha in (0, 1]")

    def __call__(self, t):
        d = np.arccos(np.clip(t, -1.0, 1.0))
        return np.exp(-self.c * d**self.alpha)


@dataclass(frozen=True)
class SineModel:
    """``C = 1 - sin(d / c^(1/alpha))^alpha`` for ``d <= pi c^(1/alpha)``, and 1 beyond.

    Near the diagonal ``1 - C ~ d^alpha / c``, so the local scale is ``1/c``.
    """

    c: float
    alpha: float

    def __post_init__(self):
        if not self.c > 0 or not 0 < self.alpha < 2:
            raise InvalidModelError("sine model needs c > 0 and alpha in (0, 2)")

    def __call__(self, t):
        d = np.arccos(np.clip(t, -1.0, 1.0))
        width = self.c ** (1.0 / self.alpha)
        inside = d <= math.pi * width
        s = np.abs(np.sin(np.where(inside, d, 0.0) / width))
        return 1.0 - np.where(inside, s**self.alpha, 0.0)


@dataclass(frozen=True)
class Canonical:
    """The canonical field ``X(x) = <x, xi>``, covariance ``C = t``."""

    def __call__(self, t):
        return np.asarray(t, dtype=float) * 1.0


@dataclass(frozen=True)
class ArccosLinear:
    """``C = 1 - (2/pi) d``; its monomial series has ``sum n b_n`` divergent."""

    def __call__(self, t):
        return 1.0 - (2.0 / math.pi) * np.arccos(np.clip(t, -1.0, 1.0))


@dataclass(frozen=True)
class StandardizedSFBM:
    """Spherical fractional Brownian motion divided by ``d(x, o)^beta``.

    The pole ``o`` defaults to ``(1, 0, ..., 0)``.  The field is undefined at
    the pole itself.
    """

    beta: float
    pole: tuple | None = field(default=None)

    def __post_init__(self):
        if not 0 < self.beta <= 0.5:
            raise InvalidModelError("SFBM needs beta in (0, 1/2]")

    def pole_vector(self, n_ambient):
        if self.pole is None:
            o = np.zeros(n_ambient)
            o[0] = 1.0
            return o
        o = np.asarray(self.pole, dtype=float)
        if o.shape != (n_ambient,):
            raise InvalidModelError("pole has the wrong dimension")
        return o / np.linalg.norm(o)

    def covariance_points(self, x, y):
        """Covariance matrix between the rows of ``x`` and the rows of ``y``."""
        x = np.atleast_2d(x)
        y = np.atleast_2d(y)
        o = self.pole_vector(x.shape[1])
        dx = np.arccos(np.clip(x @ o, -1.0, 1.0))
        dy = np.arccos(np.clip(y @ o, -1.0, 1.0))
        if np.any(dx == 0) or np.any(dy == 0):
            raise InvalidModelError("standardized SFBM is undefined at the pole")
        dxy = np.arccos(np.clip(x @ y.T, -1.0, 1.0))
        two_b = 2.0 * self.beta
        num = dx[:, None] ** two_b + dy[None, :] ** two_b - dxy**two_b
        return num / (2.0 * dx[:, None] ** self.beta * dy[None, :] ** self.beta)


CLOSED_FORMS = (PoweredExponential, SineModel, Canonical, ArccosLinear, StandardizedSFBM)


def arccos_linear_monomial(n_terms):
    """Leading monomial coefficients of ``1 - (2/pi) arccos t = (2/pi) arcsin t``."""
    b = np.zeros(2 * n_terms)
    for n in range(n_terms):
        b[2 * n + 1] = (2.0 / math.pi) * math.comb(2 * n, n) / (4.0**n * (2 * n + 1))
    return b


def _check_dimension(model, N):
    if int(N) != N or N < 1:
        raise InvalidModelError("dimension must be a positive integer")
    if isinstance(model, SchoenbergSeries) and model.dimension != N:
        raise InvalidModelError(f"Schoenberg series built for S^{model.dimension}, used on S^{N}")


def _check_nonnegative(model):
    coefs = getattr(model, "coefficients", ())
    bad = [n for n, a in enumerate(coefs) if a < 0]
    if bad:
        raise InvalidModelError(f"negative series coefficients at degrees {bad}")


def covariance_eval(model, cos_angle, N):
    """Evaluate ``C`` at inner product ``cos_angle`` on ``S^N``."""
    _check_dimension(model, N)
    if isinstance(model, StandardizedSFBM):
        raise InvalidModelError("standardized SFBM is not isotropic; use covariance_points")
    t = specialfn._clamp_unit(cos_angle)
    value = model(t)
    return float(value) if np.ndim(value) == 0 else value


def normalize(model, N):
    """Return ``(model, note)`` with the series rescaled to unit variance.

    Closed forms already have unit variance and are returned unchanged with
    ``note = None``.
    """
    _check_dimension(model, N)
    if not isinstance(model, (SchoenbergSeries, MonomialSeries)):
        return model, None
    var = model.variance()
    if not var > 0:
        raise InvalidModelError("series has zero variance")
    if abs(var - 1.0) <= 1e-14:
        return model, None
    note = f"rescaled series by 1/{var:.17g} to unit variance"
    warnings.warn(note, stacklevel=2)
    scaled = tuple(a / var for a in model.coefficients)
    if isinstance(model, SchoenbergSeries):
        return SchoenbergSeries(model.dimension, scaled), note
    return MonomialSeries(scaled), note


def _series_cprime(model, N):
    if isinstance(model, MonomialSeries):
        return float(sum(n * b for n, b in enumerate(model.coefficients)))
    if N == 1:
        return float(sum(n * n * a for n, a in enumerate(model.coefficients)))
    return float((N - 1) * sum(math.comb(n + N - 1, N) * a for n, a in enumerate(model.coefficients) if n >= 1))


def _closed_form_local(model):
    if isinstance(model, PoweredExponential):
        return LocalExpansion(model.c, model.alpha)
    if isinstance(model, SineModel):
        return LocalExpansion(1.0 / model.c, model.alpha)
    if isinstance(model, ArccosLinear):
        return LocalExpansion(2.0 / math.pi, 1.0)
    return None


def cprime(model, N):
    """Smoothness classification and the induced-metric constant ``C'``.

    Finite series are always smooth (their summability conditions hold
    trivially).  Non-smooth closed forms report ``cprime = inf``.
    """
    _check_dimension(model, N)
    if isinstance(model, Canonical):
        return SmoothnessReport(A1_PRIME, 1.0, LocalExpansion(0.5, 2.0))
    if isinstance(model, (SchoenbergSeries, MonomialSeries)):
        _check_nonnegative(model)
        model, note = normalize(model, N)
        cp = _series_cprime(model, N)
        diagnostics = (note,) if note else ()
        if cp <= 0:
            return SmoothnessReport(
                A1 if isinstance(model, SchoenbergSeries) else A1_PRIME,
                cp,
                None,
                diagnostics + ("degenerate: C' = 0, the field is constant",),
            )
        tag = A1 if isinstance(model, SchoenbergSeries) else A1_PRIME
        return SmoothnessReport(tag, cp, LocalExpansion(cp / 2.0, 2.0), diagnostics)
    if isinstance(model, StandardizedSFBM):
        return SmoothnessReport(NOT_SMOOTH, math.inf, None, ("local structure depends on the distance to the pole",))
    return SmoothnessReport(NOT_SMOOTH, math.inf, _closed_form_local(model))


def local_expansion(model, N):
    """The pair ``(c, alpha)`` of the local behaviour ``1 - C ~ c d^alpha``."""
    if isinstance(model, StandardizedSFBM):
        raise MethodMismatchError("standardized SFBM has position-dependent local structure; use sfbm_pickands")
    report = cprime(model, N)
    if report.local is None:
        raise MethodMismatchError("model has no local expansion of the form c d^alpha")
    return report.local


def validate_model(model, N):
    """Check coefficients and classify smoothness.

    Raises ``InvalidModelError`` on negative coefficients; otherwise
    returns a ``SmoothnessReport`` whose diagnostics record any
    normalization applied.
    """
    _check_dimension(model, N)
    _check_nonnegative(model)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return cprime(model, N)


def _gegenbauer_monomial_matrix(degree, lam):
    """Column k holds the power-basis coefficients of ``P_k^lam``."""
    A = np.zeros((degree + 1, degree + 1))
    A[0, 0] = 1.0
    if degree >= 1:
        A[1, 1] = 1.0 if lam == 0 else 2.0 * lam
    for k in range(2, degree + 1):
        prev, prev2 = A[:, k - 1], A[:, k - 2]
        shifted = np.roll(prev, 1)
        shifted[0] = 0.0
        if lam == 0:
            A[:, k] = 2.0 * shifted - prev2
        else:
            A[:, k] = (2.0 * (k + lam - 1.0) * shifted - (k + 2.0 * lam - 2.0) * prev2) / k
    return A


def schoenberg_from_monomial(series, N):
    """Re-expand ``sum b_n t^n`` in the ``P_n^lam`` basis of ``S^N``.

    Negative output coefficients are reported through a warning, not an
    error; the caller decides whether the result is a valid covariance.
    """
    if int(N) != N or N < 1:
        raise InvalidModelError("dimension must be a positive integer")
    b = np.asarray(series.coefficients, dtype=float)
    degree = len(b) - 1
    if degree > MAX_BASIS_DEGREE:
        raise InvalidModelError(f"basis change limited to degree {MAX_BASIS_DEGREE}")
    A = _gegenbauer_monomial_matrix(degree, (N - 1) / 2.0)
    a = solve_triangular(A, b, lower=False)
    # exact zeros in the input should not turn into round-off negatives
    a[np.abs(a) <= 1e-15 * max(1.0, np.abs(b).sum())] = 0.0
    negative = np.flatnonzero(a < 0)
    if negative.size:
        warnings.warn(f"basis change produced negative coefficients at degrees {negative.tolist()}", stacklevel=2)
    return SchoenbergSeries(int(N), tuple(a))
