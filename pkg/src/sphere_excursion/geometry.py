"""Spherical coordinates, parameter domains and Lipschitz-Killing curvatures.

Coordinates follow the hyperspherical convention

    x_1 = cos(theta_1)
    x_k = sin(theta_1) ... sin(theta_{k-1}) cos(theta_k),   2 <= k <= N
    x_{N+1} = sin(theta_1) ... sin(theta_N)

with ``theta_i`` in ``[0, pi]`` for ``i < N`` and ``theta_N`` in ``[0, 2 pi)``.
The pole ``o = (1, 0, ..., 0)`` has all coordinates zero.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidModelError, MethodMismatchError
from .specialfn import sphere_area

GL_PANELS = 64
GL_ORDER = 8

_gl_nodes, _gl_weights = np.polynomial.legendre.leggauss(GL_ORDER)


def gauss_legendre(f, a, b, panels=GL_PANELS):
    """Composite Gauss-Legendre rule for a vectorized ``f`` on ``[a, b]``."""
    if b == a:
        return 0.0
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = mid[:, None] + half[:, None] * _gl_nodes[None, :]
    return float(np.sum(half[:, None] * _gl_weights[None, :] * f(x)))


def adaptive_gauss_legendre(f, a, b, rtol=1e-9, max_panels=1 << 16):
    """Double the panel count until two successive composite rules agree."""
    panels = GL_PANELS
    prev = gauss_legendre(f, a, b, panels)
    while panels < max_panels:
        panels *= 2
        cur = gauss_legendre(f, a, b, panels)
        if abs(cur - prev) <= rtol * abs(cur) or cur == prev:
            return cur
        prev = cur
    return prev


def _check_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 0 or theta.shape[-1] < 1:
        raise InvalidModelError("need at least one spherical coordinate")
    lead = theta[..., :-1]
    last = theta[..., -1]
    if np.any(lead < 0) or np.any(lead > math.pi) or np.any(last < 0) or np.any(last >= 2 * math.pi):
        raise InvalidModelError("spherical coordinates out of range")
    return theta


def embed(theta):
    """Map coordinates (shape ``(..., N)``) to unit vectors (shape ``(..., N+1)``)."""
    theta = _check_theta(theta)
    n = theta.shape[-1]
    out = np.empty(theta.shape[:-1] + (n + 1,))
    sin_prod = np.ones(theta.shape[:-1])
    for k in range(n):
        out[..., k] = sin_prod * np.cos(theta[..., k])
        sin_prod = sin_prod * np.sin(theta[..., k])
    out[..., n] = sin_prod
    return out


def spherical_distance(x, y):
    """Great-circle distance ``arccos <x, y>`` with the inner product clamped."""
    ip = np.sum(np.asarray(x, dtype=float) * np.asarray(y, dtype=float), axis=-1)
    d = np.arccos(np.clip(ip, -1.0, 1.0))
    return float(d) if np.ndim(d) == 0 else d


def distance_expansion_check(theta, phi):
    """Return ``(d(x, y)^2, quadratic form)`` for nearby coordinates.

    The quadratic form is ``sum_j (prod_{i<j} sin^2 theta_i) (phi_j - theta_j)^2``;
    the last increment is reduced into ``(-pi, pi]`` to respect periodicity.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    delta = phi - theta
    delta[-1] = math.remainder(delta[-1], 2 * math.pi)
    weights = np.concatenate(([1.0], np.cumprod(np.sin(theta[:-1]) ** 2)))
    rhs = float(np.sum(weights * delta**2))
    x = embed(theta)
    y = embed(np.concatenate((phi[:-1], [phi[-1] % (2 * math.pi)])))
    # arccos loses half the digits near 0; the chord formula does not
    chord = np.linalg.norm(x - y)
    lhs = (2.0 * math.asin(min(1.0, chord / 2.0))) ** 2
    return lhs, rhs


def anisotropy_matrix(theta, c, alpha):
    """Diagonal scaling ``c^(1/alpha) diag(1, sin t1, ..., prod_{i<N} sin t_i)``.

    For ``N == 1`` the scalar ``c^(1/alpha)`` is returned.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    scale = c ** (1.0 / alpha)
    if theta.size == 1:
        return scale
    diag = np.concatenate(([1.0], np.cumprod(np.sin(theta[:-1]))))
    return scale * np.diag(diag)


def area_element(theta):
    """``prod_{i=1}^{N-1} sin^{N-i} theta_i`` evaluated along the last axis."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[-1]
    out = np.ones(theta.shape[:-1])
    for i in range(n - 1):
        out = out * np.sin(theta[..., i]) ** (n - 1 - i)
    return out


@dataclass(frozen=True)
class FullSphere:
    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidModelError("dimension must be >= 1")


@dataclass(frozen=True)
class CoordinateBox:
    """Product of coordinate intervals ``[a_i, b_i]``."""

    dimension: int
    bounds: tuple

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if len(bounds) != self.dimension or self.dimension < 1:
            raise InvalidModelError("box needs one interval per coordinate")
        for i, (a, b) in enumerate(bounds):
            hi = 2 * math.pi if i == self.dimension - 1 else math.pi
            if not 0 <= a <= b <= hi:
                raise InvalidModelError(f"box interval {i} = [{a}, {b}] outside [0, {hi}]")

    @classmethod
    def full(cls, dimension):
        bounds = [(0.0, math.pi)] * (dimension - 1) + [(0.0, 2 * math.pi)]
        return cls(dimension, tuple(bounds))


@dataclass(frozen=True)
class Cap:
    """Geodesic ball of angular radius ``radius`` around a unit vector ``center``."""

    dimension: int
    center: tuple
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.shape != (self.dimension + 1,):
            raise InvalidModelError("cap center must live in R^(N+1)")
        if abs(np.linalg.norm(center) - 1.0) > 1e-12:
            raise InvalidModelError("cap center must be a unit vector")
        if not 0 < self.radius < math.pi:
            raise InvalidModelError("cap radius must lie in (0, pi)")
        object.__setattr__(self, "center", tuple(center))


@dataclass(frozen=True)
class Semisphere:
    """Closed half of ``S^k``."""

    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidModelError("dimension must be >= 1")


@dataclass(frozen=True)
class Custom:
    """User-described domain: an area and optionally its curvature vector."""

    dimension: int
    area: float
    lk: tuple | None = None

    def __post_init__(self):
        if not self.area >= 0:
            raise InvalidModelError("custom area must be nonnegative")
        if self.lk is not None:
            lk = tuple(float(v) for v in self.lk)
            if len(lk) != self.dimension + 1:
                raise InvalidModelError("custom curvature vector must have k + 1 entries")
            if lk[-1] < 0:
                raise InvalidModelError("top curvature is a volume and cannot be negative")
            object.__setattr__(self, "lk", lk)


def box_integral(box, factors):
    """Integrate a separable integrand over a coordinate box.

    ``factors[i]`` is a vectorized function of ``theta_i`` (or ``None`` for 1).
    """
    total = 1.0
    for (a, b), f in zip(box.bounds, factors):
        total *= (b - a) if f is None else gauss_legendre(f, a, b)
    return total


def _sin_power(p):
    if p == 0:
        return None
    return lambda t: np.sin(t) ** p


def domain_area(domain):
    """Spherical area (N-dimensional volume) of a domain."""
    if isinstance(domain, FullSphere):
        return sphere_area(domain.dimension)
    if isinstance(domain, Semisphere):
        return 0.5 * sphere_area(domain.dimension)
    if isinstance(domain, Custom):
        return float(domain.area)
    if isinstance(domain, CoordinateBox):
        n = domain.dimension
        return box_integral(domain, [_sin_power(n - 1 - i) for i in range(n)])
    if isinstance(domain, Cap):
        n, r = domain.dimension, domain.radius
        if n == 1:
            return 2.0 * r
        if n == 2:
            return 2.0 * math.pi * (1.0 - math.cos(r))
        return sphere_area(n - 1) * gauss_legendre(lambda t: np.sin(t) ** (n - 1), 0.0, r)
    raise InvalidModelError(f"unknown domain {domain!r}")


def lk_sphere(N):
    """Lipschitz-Killing curvatures ``L_0 .. L_N`` of the unit sphere ``S^N``."""
    if N < 1:
        raise InvalidModelError("dimension must be >= 1")
    omega_n = sphere_area(N)
    out = np.zeros(N + 1)
    for j in range(N + 1):
        if (N - j) % 2 == 0:
            out[j] = 2.0 * math.comb(N, j) * omega_n / sphere_area(N - j)
    return out


_SEMISPHERE_LK = {1: (1.0, math.pi), 2: (1.0, math.pi, 2.0 * math.pi)}


def lk_domain(domain):
    """Curvature vector of a supported domain.

    Only the full sphere, one- and two-dimensional semispheres and custom
    domains carrying their own vector are supported; caps and boxes need a
    user-supplied vector.
    """
    if isinstance(domain, FullSphere):
        return lk_sphere(domain.dimension)
    if isinstance(domain, Semisphere) and domain.dimension in _SEMISPHERE_LK:
        return np.array(_SEMISPHERE_LK[domain.dimension])
    if isinstance(domain, Custom) and domain.lk is not None:
        return np.array(domain.lk)
    raise MethodMismatchError(
        f"Lipschitz-Killing curvatures are not available for {type(domain).__name__}; "
        "describe the domain as custom with an explicit curvature vector"
    )
