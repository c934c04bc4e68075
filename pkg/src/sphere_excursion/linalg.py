"""Square-root factors of covariance matrices for exact Gaussian sampling."""

import logging

import numpy as np
from scipy import linalg as sla

from .errors import NumericalFailure

log = logging.getLogger(__name__)

JITTER_START = 1e-12
JITTER_ESCALATIONS = 3
RESIDUAL_TOL = 1e-9


def _pivoted_cholesky(cov):
    c, piv, rank, info = sla.lapack.dpstrf(cov, lower=1)
    if info < 0:
        raise NumericalFailure(f"dpstrf argument error {info}")
    lower = np.tril(c)[:, :rank]
    factor = np.empty_like(lower)
    factor[piv - 1] = lower
    return factor


def _smallest_eigenvalue(cov):
    return float(sla.eigvalsh(cov, subset_by_index=[0, 0])[0])


def factorize(cov):
    """Return ``L`` (n x r) with ``L @ L.T == cov`` up to round-off.

    Tries, in order: a plain Cholesky factorization; a pivoted Cholesky
    factorization, which yields a thin factor for rank-deficient
    positive semidefinite matrices; and plain Cholesky with a diagonal
    jitter of ``1e-12 * max(diag)`` escalated tenfold up to three times.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be a square matrix")
    scale = float(np.max(np.diag(cov))) if cov.size else 0.0
    if cov.shape[0] == 0 or scale == 0.0:
        return np.zeros((cov.shape[0], 0))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass

    factor = _pivoted_cholesky(cov)
    residual = np.max(np.abs(cov - factor @ factor.T))
    if residual <= RESIDUAL_TOL * scale:
        log.debug("pivoted Cholesky: rank %d of %d", factor.shape[1], cov.shape[0])
        return factor

    jitter = JITTER_START * scale
    for _ in range(JITTER_ESCALATIONS + 1):
        try:
            factor = np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
            log.warning("covariance factorized with diagonal jitter %.3g", jitter)
            return factor
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericalFailure(
        f"covariance is not positive semidefinite: smallest eigenvalue about {_smallest_eigenvalue(cov):.3e}"
    )
