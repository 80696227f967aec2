"""c-packedness estimation, sparse sphere radii and interval merging.

Intervals are closed pairs of 0-based vertex indices ``(j1, j2)``.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractError, DimensionError
from .geom import as_curve, as_point

TANGENT_TOL = 1e-12
MIN_RADIUS_REL = 1e-9


@dataclass(frozen=True)
class PackednessReport:
    estimate: float
    center: np.ndarray
    radius: float

    def to_dict(self):
        return {"estimate": self.estimate, "center": self.center.tolist(), "radius": self.radius}


def _curve_and_point(P, p):
    P = as_curve(P)
    p = as_point(p)
    if P.shape[1] != p.shape[0]:
        raise DimensionError(f"curve has dimension {P.shape[1]}, point {p.shape[0]}")
    return P, p


def ball_curve_length(P, center, r):
    """Length of the part of ``P`` inside the closed ball ``B(center, r)``."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    P, center = _curve_and_point(P, center)
    return float(kernels.ball_lengths(P, center, np.array([float(r)]))[0])


def van_der_corput(n):
    """First ``n`` points of the base-2 van der Corput sequence: 1/2, 1/4, 3/4, ..."""
    out = np.empty(n)
    for k in range(n):
        x, denom, m = 0.0, 1.0, k + 1
        while m:
            denom *= 2.0
            x += (m & 1) / denom
            m >>= 1
        out[k] = x
    return out


def candidate_centers(P, resolution):
    """All vertices, then ``resolution`` points per edge.

    The per-edge parameters are nested in ``resolution`` so that raising the
    resolution only ever adds candidates.
    """
    s = van_der_corput(resolution)
    a, ab = P[:-1], P[1:] - P[:-1]
    inner = (a[:, None, :] + s[None, :, None] * ab[:, None, :]).reshape(-1, P.shape[1])
    return np.concatenate([P, inner])


def packedness_estimate(P, resolution=8):
    """Lower bound on the packedness constant of ``P``.

    Maximises length-inside-ball over radius for a finite family of centers
    and, per center, the radii at which a vertex or a perpendicular foot
    enters the ball.
    """
    P = as_curve(P)
    if P.shape[0] < 2:
        raise ValueError("packedness needs a curve with at least two vertices")
    if resolution < 0:
        raise ValueError(f"resolution must be nonnegative, got {resolution}")
    centers = candidate_centers(P, int(resolution))
    # radii at rounding level would turn cancellation noise into huge ratios
    extent = float(np.max(np.ptp(P, axis=0)))
    best, best_r = kernels.ball_scan(P, np.ascontiguousarray(centers), MIN_RADIUS_REL * extent)
    k = int(np.argmax(best))
    if not best[k] > 0.0:
        # every edge has zero length
        return PackednessReport(0.0, P[0].copy(), 1.0)
    return PackednessReport(float(best[k]), centers[k].copy(), float(best_r[k]))


def _edge_ranges(p, Q):
    """Closest and farthest distance from ``p`` to each edge of ``Q``."""
    a, ab = Q[:-1], Q[1:] - Q[:-1]
    A = (ab * ab).sum(axis=1)
    s = np.zeros_like(A)
    ok = A > 0.0
    s[ok] = np.clip(-((a[ok] - p) * ab[ok]).sum(axis=1) / A[ok], 0.0, 1.0)
    foot = a + s[:, None] * ab
    dmin = np.sqrt(((foot - p) ** 2).sum(axis=1))
    dv = np.sqrt(((Q - p) ** 2).sum(axis=1))
    dmax = np.maximum(dv[:-1], dv[1:])
    return dmin, dmax, foot[ok & (s > 0.0) & (s < 1.0)]


def sphere_crossings(p, Q, r):
    """Number of edges of ``Q`` that meet or touch the sphere ``|x - p| = r``."""
    Q, p = _curve_and_point(Q, p)
    dmin, dmax, _ = _edge_ranges(p, Q)
    return int(np.sum((dmin <= r + TANGENT_TOL) & (dmax >= r - TANGENT_TOL)))


def _best_gap(events, lo, hi, count):
    ev = np.unique(np.concatenate([[lo, hi], events[(events > lo) & (events < hi)]]))
    best = None
    for a, b in zip(ev[:-1], ev[1:]):
        r = 0.5 * (a + b)
        key = (count(r), -(b - a))
        if best is None or key < best[0]:
            best = (key, r)
    if best is None:  # lo == hi
        return float(lo), count(lo)
    return float(best[1]), best[0][0]


def sparse_radius(p, Q, b):
    """Radius in ``[b/2, b]`` whose sphere around ``p`` meets few edges of ``Q``.

    Candidate radii are the midpoints between consecutive event distances
    (vertices and perpendicular feet); the one with the fewest crossing
    edges wins, ties going to the widest event-free gap.
    Returns ``(r, count)``.
    """
    if not b > 0:
        raise ValueError(f"b must be positive, got {b}")
    Q, p = _curve_and_point(Q, p)
    dmin, dmax, feet = _edge_ranges(p, Q)
    events = np.concatenate([np.sqrt(((Q - p) ** 2).sum(axis=1)), np.sqrt(((feet - p) ** 2).sum(axis=1))])

    def count(r):
        return int(np.sum((dmin <= r + TANGENT_TOL) & (dmax >= r - TANGENT_TOL)))

    return _best_gap(events, 0.5 * b, float(b), count)


def row_radius(dists, b):
    """Radius in ``[b/2, b]`` for a bare row of distances (no curve geometry).

    Stands in for :func:`sparse_radius` when only a distance matrix is known:
    counts index steps ``j -> j+1`` at which the distance crosses ``r``.
    """
    dists = np.asarray(dists, dtype=np.float64)

    def count(r):
        inside = dists < r
        return int(np.sum(inside[1:] != inside[:-1]))

    return _best_gap(dists, 0.5 * b, float(b), count)


def check_intervals(I, t=None):
    I = [(int(a), int(b)) for a, b in I]
    for k, (a, b) in enumerate(I):
        if a > b or a < 0 or (t is not None and b >= t):
            raise ContractError(f"interval {k} = [{a}, {b}] is not a valid index range")
        if k and a <= I[k - 1][1]:
            raise ContractError(f"interval {k} = [{a}, {b}] overlaps or precedes interval {k - 1}")
    return I


def merge_with_radius(dists, I, r):
    """Greedy merge of consecutive intervals whose gap vertices all lie at distance >= r."""
    J = []
    for a, b in I:
        if J and all(dists[j] >= r for j in range(J[-1][1] + 1, a)):
            J[-1] = (J[-1][0], b)
        else:
            J.append((a, b))
    return J


def merge_intervals(p, Q, I, b, dists=None):
    """Merge the intervals ``I`` of far vertices of ``Q`` around ``p``.

    Every index covered by ``I`` must satisfy ``|p - q_j| >= b``. Returns
    ``(r, J)`` with ``r`` from :func:`sparse_radius`; each output interval
    starts and ends at an endpoint of ``I`` and covers only vertices at
    distance at least ``r``.
    """
    Q, p = _curve_and_point(Q, p)
    I = check_intervals(I, Q.shape[0])
    if dists is None:
        dists = np.sqrt(((Q - p) ** 2).sum(axis=1))
    for a, c in I:
        for j in range(a, c + 1):
            if dists[j] < b:
                raise ContractError(f"vertex {j} lies at distance {dists[j]!r} < b = {b!r}")
    r, _ = sparse_radius(p, Q, b)
    return r, merge_with_radius(dists, I, r)
