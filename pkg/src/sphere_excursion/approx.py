"""Analytic approximations to ``P{sup X >= u}`` on spherical domains.

``pickands_sphere``  locally isotropic, possibly non-smooth fields;
``chan_lai_box``     the same formula integrated in coordinates over a box;
``sfbm_pickands``    standardized spherical fractional Brownian motion;
``eec_sphere`` and ``eec_domain``  the expected Euler characteristic of
the excursion set for smooth isotropic fields.

All formulas are large-``u`` asymptotics.  Every result records
``validity_threshold = 1``: below it the values are reported but should
not be read as probabilities.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .covariance import LocalExpansion
from .errors import InvalidModelError, MethodMismatchError
from .pickands import pickands_known
from .specialfn import ec_density, gauss_tail_psi

VALIDITY_THRESHOLD = 1.0

PICKANDS_ERROR = "relative error o(1) as u -> infinity"
EEC_ERROR = "absolute error o(exp(-alpha0 u^2 - u^2/2)) for some unquantified alpha0 > 0"


@dataclass
class ApproxResult:
    u: float
    value: float
    method: str
    terms: dict
    metadata: dict = field(default_factory=dict)
    validity_threshold: float = VALIDITY_THRESHOLD

    @property
    def in_validity_range(self):
        return self.u >= self.validity_threshold

    def to_dict(self):
        return {
            "u": self.u,
            "value": self.value,
            "method": self.method,
            "terms": dict(self.terms),
            "metadata": dict(self.metadata),
            "validity_threshold": self.validity_threshold,
            "in_validity_range": self.in_validity_range,
        }


def _check_level(u):
    if not u > 0 or not math.isfinite(u):
        raise InvalidModelError(f"level u must be positive and finite, got {u}")


def _resolve_constant(alpha, N, pickands_constant):
    if pickands_constant is None:
        pickands_constant = pickands_known(alpha, N)
    if pickands_constant is None:
        raise InvalidModelError(
            f"no closed-form Pickands constant for alpha={alpha}; pass one explicitly or estimate it"
        )
    if not pickands_constant > 0:
        raise InvalidModelError("Pickands constant must be positive")
    return float(pickands_constant)


def _product_result(u, factors, method, metadata):
    value = math.prod(factors.values())
    return ApproxResult(u, value, method, factors, metadata)


def pickands_sphere(local: LocalExpansion, domain, N, u, pickands_constant=None):
    """``c^(N/alpha) Area(T) H_alpha u^(2N/alpha) psi(u)``.

    ``pickands_constant`` defaults to the closed form when ``alpha == 2``.
    """
    _check_level(u)
    if domain.dimension != N:
        raise InvalidModelError("domain dimension does not match the sphere")
    H = _resolve_constant(local.alpha, N, pickands_constant)
    factors = {
        "scale": local.c ** (N / local.alpha),
        "area": geometry.domain_area(domain),
        "pickands_constant": H,
        "level_power": u ** (2.0 * N / local.alpha),
        "psi": gauss_tail_psi(u),
    }
    meta = {"c": local.c, "alpha": local.alpha, "N": N, "domain": type(domain).__name__, "error": PICKANDS_ERROR}
    return _product_result(u, factors, "pickands", meta)


def _abs_det_factors(N, c, alpha):
    # |det M_theta| = c^(N/alpha) prod_k prod_{i<k} sin(theta_i)
    #              = c^(N/alpha) prod_i sin(theta_i)^(N - i)
    factors = []
    for i in range(N):
        power = N - 1 - i
        factors.append(None if power == 0 else (lambda t, p=power: np.abs(np.sin(t)) ** p))
    return factors, c ** (N / alpha)


def chan_lai_box(local: LocalExpansion, box, N, u, pickands_constant=None):
    """Integrate ``|det M_theta| H_alpha`` over a coordinate box, times ``u^(2N/alpha) psi(u)``.

    Over the full coordinate ranges this reproduces ``pickands_sphere`` on
    the whole sphere.
    """
    _check_level(u)
    if not isinstance(box, geometry.CoordinateBox) or box.dimension != N:
        raise InvalidModelError("chan_lai_box needs a coordinate box on S^N")
    H = _resolve_constant(local.alpha, N, pickands_constant)
    fs, scale = _abs_det_factors(N, local.c, local.alpha)
    factors = {
        "det_integral": scale * geometry.box_integral(box, fs),
        "pickands_constant": H,
        "level_power": u ** (2.0 * N / local.alpha),
        "psi": gauss_tail_psi(u),
    }
    meta = {"c": local.c, "alpha": local.alpha, "N": N, "domain": "CoordinateBox", "error": PICKANDS_ERROR}
    return _product_result(u, factors, "pickands", meta)


def _inverse_pole_distance_integral(a, b):
    # On S^1 the distance to the pole is min(theta, 2 pi - theta).
    total = 0.0
    lo, hi = a, min(b, math.pi)
    if hi > lo:
        total += math.log(hi / lo)
    lo, hi = max(a, math.pi), b
    if hi > lo:
        total += math.log((2 * math.pi - lo) / (2 * math.pi - hi))
    return total


def sfbm_integral(box, quadrature=False):
    """``int_D theta_1^(-N) prod_i sin^(N-i)(theta_i) dtheta`` over a pole-free box."""
    N = box.dimension
    a1, b1 = box.bounds[0]
    if a1 <= 0 or (N == 1 and b1 >= 2 * math.pi):
        raise MethodMismatchError("SFBM domain must stay away from the pole")
    if N == 1:
        if not quadrature:
            return _inverse_pole_distance_integral(a1, b1)
        # split at the antipode where the integrand has a kink
        edges = [a1] + [e for e in (math.pi,) if a1 < e < b1] + [b1]
        f = lambda t: 1.0 / np.minimum(t, 2 * math.pi - t)
        return math.fsum(geometry.adaptive_gauss_legendre(f, lo, hi, rtol=1e-13) for lo, hi in zip(edges, edges[1:]))
    first = geometry.adaptive_gauss_legendre(lambda t: t ** (-N) * np.sin(t) ** (N - 1), a1, b1)
    rest = geometry.box_integral(
        geometry.CoordinateBox(N - 1, box.bounds[1:]),
        [None if N - 1 - i == 0 else (lambda t, p=N - 1 - i: np.sin(t) ** p) for i in range(1, N)],
    )
    return first * rest


def sfbm_pickands(beta, box, N, u, pickands_constant=None):
    """Excursion approximation for the standardized SFBM over a pole-free box.

    ``u^(N/beta) psi(u) 2^(-N/(2 beta)) H_(2 beta) int_D theta_1^(-N) (area element)``.
    """
    _check_level(u)
    if not 0 < beta <= 0.5:
        raise InvalidModelError("beta must lie in (0, 1/2]")
    if not isinstance(box, geometry.CoordinateBox) or box.dimension != N:
        raise MethodMismatchError("SFBM approximation needs a coordinate box on S^N")
    H = _resolve_constant(2.0 * beta, N, pickands_constant)
    factors = {
        "integral": sfbm_integral(box),
        "scale": 2.0 ** (-N / (2.0 * beta)),
        "pickands_constant": H,
        "level_power": u ** (N / beta),
        "psi": gauss_tail_psi(u),
    }
    meta = {"beta": beta, "alpha": 2.0 * beta, "N": N, "domain": "CoordinateBox", "error": PICKANDS_ERROR}
    return _product_result(u, factors, "sfbm", meta)


def _check_cprime(cprime):
    if not math.isfinite(cprime):
        raise MethodMismatchError("C' is infinite (non-smooth model); use the Pickands approximation instead")
    if not cprime > 0:
        raise InvalidModelError("C' must be positive")


def eec_domain(cprime, lk, u):
    """``sum_j C'^(j/2) L_j(T) rho_j(u)`` for a curvature vector ``lk``."""
    _check_cprime(cprime)
    lk = np.asarray(lk, dtype=float)
    terms = {}
    for j, L in enumerate(lk):
        terms[f"j={j}"] = 0.0 if L == 0 else float(cprime ** (j / 2.0) * L * ec_density(j, u))
    meta = {"cprime": cprime, "lk": lk.tolist(), "error": EEC_ERROR}
    return ApproxResult(float(u), math.fsum(terms.values()), "eec", terms, meta)


def eec_sphere(cprime, N, u):
    """Expected Euler characteristic of the excursion set over all of ``S^N``."""
    result = eec_domain(cprime, geometry.lk_sphere(N), u)
    result.metadata["N"] = N
    result.metadata["domain"] = "FullSphere"
    return result
