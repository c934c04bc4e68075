"""Monte Carlo validation on spherical point sets.

Fields are sampled exactly on finite point sets from a square-root factor
of the model covariance (the canonical field uses its feature map, the
points themselves).  Replicate ``i`` always consumes the stream
``rng.replicate_stream(seed, i)``, so results do not depend on chunking
(beyond last-bit BLAS effects) and any statistic can be recomputed on a subset of replicates.

The supremum over a point set underestimates the supremum over the
sphere; nothing here corrects for it.  Refinement studies (double the
points, watch the gap shrink) are the intended way to bound it.
"""

import csv
import hashlib
import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull
from scipy.stats import norm

from . import covariance as cov_models
from . import rng
from .errors import InvalidModelError, MethodMismatchError, NumericalFailure
from .linalg import factorize

MAX_POINTS = 8192
CHUNK = 512
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True, eq=False)
class PointSet:
    dimension: int
    points: np.ndarray
    scheme: str

    def __len__(self):
        return self.points.shape[0]

    @property
    def digest(self):
        return hashlib.sha256(np.ascontiguousarray(self.points).tobytes()).hexdigest()

    def subset(self, index):
        return PointSet(self.dimension, self.points[np.asarray(index)], f"{self.scheme}[subset]")


@dataclass
class FieldSample:
    values: np.ndarray
    seed: int
    model: str


@dataclass
class ExcursionEstimate:
    u: float
    kind: str
    estimate: float
    std_error: float
    replicates: int
    note: str = ""
    ci: tuple | None = None

    def to_dict(self):
        out = {
            "u": self.u,
            "kind": self.kind,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "replicates": self.replicates,
            "note": self.note,
        }
        if self.ci is not None:
            out["ci"] = list(self.ci)
        return out


@dataclass
class SphereTriangulation:
    vertices: PointSet
    edges: np.ndarray
    faces: np.ndarray
    _edge_faces: np.ndarray = field(repr=False, default=None)

    @property
    def euler_number(self):
        return len(self.vertices) - len(self.edges) + len(self.faces)


def fibonacci_points(count):
    """Fibonacci lattice on ``S^2``: equal-area latitude bands, golden-angle longitudes."""
    i = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(1.0 - z * z)
    phi = GOLDEN_ANGLE * i
    return np.column_stack((z, r * np.cos(phi), r * np.sin(phi)))


def _latlong(count, N):
    if N == 1:
        ang = 2.0 * math.pi * np.arange(count) / count
        return np.column_stack((np.cos(ang), np.sin(ang)))
    if N == 2:
        n_lat = max(1, int(round(math.sqrt(count / 2.0))))
        n_lon = max(2, int(math.ceil(count / n_lat)))
        theta = (np.arange(n_lat) + 0.5) * math.pi / n_lat
        phi = 2.0 * math.pi * np.arange(n_lon) / n_lon
        t, p = np.meshgrid(theta, phi, indexing="ij")
        t, p = t.ravel(), p.ravel()
        return np.column_stack((np.cos(t), np.sin(t) * np.cos(p), np.sin(t) * np.sin(p)))
    raise InvalidModelError("latlong grids are available for N = 1 and N = 2")


def make_point_set(scheme, count, N, seed=None):
    """Point set on ``S^N``: ``fibonacci`` (N = 2), ``latlong`` (N <= 2) or ``uniform``."""
    if count < 2:
        raise InvalidModelError("a point set needs at least two points")
    if count > MAX_POINTS:
        raise InvalidModelError(f"dense sampling is limited to {MAX_POINTS} points")
    if scheme == "fibonacci":
        if N != 2:
            raise InvalidModelError("the Fibonacci lattice is defined on S^2 only")
        pts = fibonacci_points(count)
    elif scheme == "latlong":
        pts = _latlong(count, N)
    elif scheme == "uniform":
        if seed is None:
            raise InvalidModelError("uniform point sets need a seed")
        g = rng.replicate_stream(seed, 0)
        pts = g.standard_normal((count, N + 1))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    else:
        raise InvalidModelError(f"unknown point-set scheme {scheme!r}")
    return PointSet(N, pts, scheme)


def min_pairwise_distance(points):
    from scipy.spatial import cKDTree

    tree = cKDTree(points)
    d, _ = tree.query(points, k=2)
    chord = float(np.min(d[:, 1]))
    return 2.0 * math.asin(min(1.0, chord / 2.0))


def covariance_matrix(model, points):
    """Model covariance between all pairs of points (rows of ``points``)."""
    pts = points.points if isinstance(points, PointSet) else np.atleast_2d(points)
    N = pts.shape[1] - 1
    if isinstance(model, cov_models.StandardizedSFBM):
        return model.covariance_points(pts, pts)
    model, _ = cov_models.normalize(model, N)
    gram = np.clip(pts @ pts.T, -1.0, 1.0)
    np.fill_diagonal(gram, 1.0)
    return np.asarray(model(gram), dtype=float)


_FACTOR_CACHE = OrderedDict()
_FACTOR_CACHE_SIZE = 4


def field_factor(model, points):
    """Square-root factor ``L`` with ``L @ L.T`` equal to the model covariance.

    Cached per (model, point set); the cache is small because factors of
    large point sets are large.
    """
    key = (model, points.digest)
    if key in _FACTOR_CACHE:
        _FACTOR_CACHE.move_to_end(key)
        return _FACTOR_CACHE[key]
    if isinstance(model, cov_models.Canonical):
        factor = np.array(points.points)
    else:
        if isinstance(model, (cov_models.SchoenbergSeries, cov_models.MonomialSeries)):
            cov_models.validate_model(model, points.dimension)
        factor = factorize(covariance_matrix(model, points))
    factor.setflags(write=False)
    _FACTOR_CACHE[key] = factor
    while len(_FACTOR_CACHE) > _FACTOR_CACHE_SIZE:
        _FACTOR_CACHE.popitem(last=False)
    return factor


def iter_samples(model, points, replicates, seed, chunk=CHUNK):
    """Yield ``(start, values)`` blocks of field samples, one row per replicate."""
    factor = field_factor(model, points)
    for start, stop in rng.chunks(replicates, chunk):
        yield start, rng.normal_block(seed, start, stop, factor.shape[1]) @ factor.T


def sample_field(model, points, seed, replicate=0):
    """One exact draw of the field on ``points``."""
    factor = field_factor(model, points)
    z = rng.normal_block(seed, replicate, replicate + 1, factor.shape[1])[0]
    return FieldSample(factor @ z, seed, repr(model))


def replicate_maxima(model, points, replicates, seed, subsets=None):
    """Per-replicate maximum over the point set.

    With ``subsets`` (a list of index arrays) the maxima over each subset
    are returned too, computed from the same samples; shape
    ``(len(subsets) + 1, replicates)`` with the full set last.
    """
    subsets = list(subsets or [])
    out = np.empty((len(subsets) + 1, replicates))
    for start, values in iter_samples(model, points, replicates, seed):
        stop = start + values.shape[0]
        for k, idx in enumerate(subsets):
            out[k, start:stop] = values[:, idx].max(axis=1)
        out[-1, start:stop] = values.max(axis=1)
    return out if subsets else out[0]


def wilson_interval(successes, n, z=None):
    z = norm.ppf(0.975) if z is None else z
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


def excursion_from_maxima(maxima, u, n_points=None):
    n = maxima.size
    hits = int(np.count_nonzero(maxima >= u))
    lo, hi = wilson_interval(hits, n)
    note = "maximum over a finite point set; biased low relative to the continuous supremum"
    if n_points is not None:
        note += f" ({n_points} points)"
    return ExcursionEstimate(
        u=float(u),
        kind="sup-probability",
        estimate=hits / n,
        std_error=(hi - lo) / (2.0 * norm.ppf(0.975)),
        replicates=n,
        note=note,
        ci=(lo, hi),
    )


def empirical_excursion(model, points, u, replicates, seed):
    """Fraction of replicates whose maximum over ``points`` reaches ``u``.

    ``u`` may be a sequence, in which case all levels share the same
    samples and a list is returned.
    """
    if replicates < 100:
        raise InvalidModelError("need at least 100 replicates")
    maxima = replicate_maxima(model, points, replicates, seed)
    if np.ndim(u) == 0:
        return excursion_from_maxima(maxima, u, len(points))
    return [excursion_from_maxima(maxima, level, len(points)) for level in u]


def triangulate_points(points):
    """Convex-hull triangulation of points in convex position on ``S^2``."""
    pts = points.points if isinstance(points, PointSet) else np.asarray(points)
    if pts.shape[1] != 3:
        raise InvalidModelError("triangulation needs points on S^2")
    hull = ConvexHull(pts)
    faces = np.sort(hull.simplices, axis=1)
    if np.unique(hull.vertices).size != pts.shape[0]:
        raise NumericalFailure("degenerate hull: some points are not hull vertices")
    edges = np.concatenate((faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [0, 2]]))
    edges, counts = np.unique(edges, axis=0, return_counts=True)
    if np.any(counts != 2):
        raise NumericalFailure("hull is not a closed 2-manifold")
    vertex_set = points if isinstance(points, PointSet) else PointSet(2, pts, "custom")
    tri = SphereTriangulation(vertex_set, edges, faces)
    if tri.euler_number != 2:
        raise NumericalFailure(f"hull has Euler number {tri.euler_number}, expected 2")
    return tri


def triangulate_sphere(count):
    """Triangulated Fibonacci lattice with ``count`` vertices."""
    if count < 12:
        raise InvalidModelError("need at least 12 vertices")
    return triangulate_points(make_point_set("fibonacci", count, 2))


def euler_characteristic(tri, values, u):
    """Euler characteristic of the subcomplex spanned by vertices with ``value >= u``.

    ``values`` may be a 2-D array (one row per replicate); the result is
    then an integer array.
    """
    values = np.asarray(values)
    if values.shape[-1] != len(tri.vertices):
        raise InvalidModelError("one value per vertex is required")
    up = values >= u
    v = up.sum(axis=-1)
    e = (up[..., tri.edges[:, 0]] & up[..., tri.edges[:, 1]]).sum(axis=-1)
    f = (up[..., tri.faces[:, 0]] & up[..., tri.faces[:, 1]] & up[..., tri.faces[:, 2]]).sum(axis=-1)
    chi = v - e + f
    return int(chi) if np.ndim(chi) == 0 else chi


def replicate_euler(model, tri, levels, replicates, seed):
    """Euler characteristics, shape ``(len(levels), replicates)``."""
    levels = np.atleast_1d(np.asarray(levels, dtype=float))
    out = np.empty((levels.size, replicates), dtype=np.int64)
    for start, values in iter_samples(model, tri.vertices, replicates, seed):
        stop = start + values.shape[0]
        for k, u in enumerate(levels):
            out[k, start:stop] = euler_characteristic(tri, values, u)
    return out


def mean_euler_characteristic(model, tri, u, replicates, seed):
    """Sample mean and standard error of ``chi(A_u)`` on a triangulated ``S^2``.

    ``u`` may be a sequence sharing the same samples.
    """
    if tri.vertices.dimension != 2:
        raise InvalidModelError("Euler characteristics are computed on S^2 meshes only")
    report = cov_models.cprime(model, 2)
    if not report.smooth:
        raise MethodMismatchError("mean Euler characteristic requires a smooth model (finite C')")
    chis = replicate_euler(model, tri, u, replicates, seed)
    results = []
    note = f"{len(tri.vertices)}-vertex mesh; induced subcomplex of vertices with X >= u"
    for level, row in zip(np.atleast_1d(u), chis):
        se = float(np.std(row, ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
        results.append(
            ExcursionEstimate(float(level), "mean-euler-characteristic", float(np.mean(row)), se, replicates, note)
        )
    return results[0] if np.ndim(u) == 0 else results


def write_replicate_csv(path, rows):
    """Write replicate-level rows ``(replicate, seed, statistic, value, u)``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replicate", "seed", "statistic", "value", "u"])
        writer.writerows(rows)
