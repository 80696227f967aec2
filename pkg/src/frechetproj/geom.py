"""Curves, random directions, projections and projection-reduction laws.

A curve is an ``(t, d)`` float64 array of vertices with ``1 <= d <= 5``.
Directions are unit vectors drawn uniformly from the sphere in R^d,
``d`` in {2, 3, 4, 5}. Projecting onto the line spanned by ``u`` maps a
vertex ``p`` to the scalar ``<p, u>``; a projected curve has shape ``(t, 1)``.
"""

import math

import numpy as np

from .errors import DimensionError

SPHERE_DIMS = (2, 3, 4, 5)
MAX_DIM = 5


def as_curve(P, name="curve"):
    """Validate and convert ``P`` to a ``(t, d)`` float64 array."""
    arr = np.asarray(P, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a 2D array of vertices, got shape {arr.shape}")
    t, d = arr.shape
    if t < 1:
        raise ValueError(f"{name} must have at least one vertex")
    if not 1 <= d <= MAX_DIM:
        raise DimensionError(f"{name} has dimension {d}; supported are 1..{MAX_DIM}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite coordinates")
    return arr


def as_point(p, name="point"):
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or not 1 <= arr.shape[0] <= MAX_DIM:
        raise DimensionError(f"{name} must be a vector of 1..{MAX_DIM} coordinates")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite coordinates")
    return arr


def _check_sphere_dim(d):
    if d not in SPHERE_DIMS:
        raise DimensionError(f"directions are supported for d in {SPHERE_DIMS}, got {d}")


def _generator(rng):
    if rng is None:
        raise ValueError("an explicit seed or numpy Generator is required")
    return np.random.default_rng(rng)


def sample_unit_vectors(d, n, rng):
    """Draw ``n`` directions uniformly from the unit sphere in R^d.

    For ``d == 2`` the angle is uniform on [0, 2*pi); otherwise a standard
    Gaussian vector is normalised, redrawing the (measure zero) null vectors.
    """
    _check_sphere_dim(d)
    gen = _generator(rng)
    if d == 2:
        theta = gen.uniform(0.0, 2.0 * np.pi, size=n)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    g = gen.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    bad = norms == 0.0
    while bad.any():
        g[bad] = gen.standard_normal((int(bad.sum()), d))
        norms[bad] = np.linalg.norm(g[bad], axis=1)
        bad = norms == 0.0
    return g / norms[:, None]


def sample_unit_vector(d, rng):
    return sample_unit_vectors(d, 1, rng)[0]


def _dot(X, U):
    # Fixed summation order so single and batched projections agree bitwise.
    out = X[..., 0] * U[..., 0]
    for k in range(1, X.shape[-1]):
        out = out + X[..., k] * U[..., k]
    return out


def project_point(p, u):
    p = as_point(p)
    u = as_point(u, "direction")
    if p.shape != u.shape:
        raise DimensionError(f"point has dimension {p.shape[0]}, direction {u.shape[0]}")
    return float(_dot(p, u))


def project_curve(P, u):
    """Project every vertex of ``P`` onto the line spanned by ``u``."""
    P = as_curve(P)
    u = as_point(u, "direction")
    if P.shape[1] != u.shape[0]:
        raise DimensionError(f"curve has dimension {P.shape[1]}, direction {u.shape[0]}")
    return _dot(P, u[None, :])[:, None]


def project_curves(P, U):
    """Project ``P`` onto many directions at once: returns ``(len(U), t)``."""
    P = as_curve(P)
    U = np.atleast_2d(np.asarray(U, dtype=np.float64))
    if P.shape[1] != U.shape[1]:
        raise DimensionError(f"curve has dimension {P.shape[1]}, directions {U.shape[1]}")
    return _dot(P[None, :, :], U[:, None, :])


# Density of the angle between a uniform direction and a fixed axis.
_ANGLE_PDF = {
    2: lambda a: np.full_like(a, 1.0 / np.pi),
    3: lambda a: np.sin(a) / 2.0,
    4: lambda a: 2.0 * np.sin(a) ** 2 / np.pi,
    5: lambda a: 3.0 * np.sin(a) ** 3 / 4.0,
}


def angle_pdf(d, alpha):
    """Density h_d of the angle in [0, pi] between a random direction and an axis."""
    _check_sphere_dim(d)
    a = np.asarray(alpha, dtype=np.float64)
    out = np.where((a >= 0.0) & (a <= np.pi), _ANGLE_PDF[d](a), 0.0)
    return float(out) if out.ndim == 0 else out


def _check_phi(phi):
    phi = np.asarray(phi, dtype=np.float64)
    if np.any(~np.isfinite(phi)) or np.any(phi < 0.0) or np.any(phi > 1.0):
        raise ValueError("phi must lie in [0, 1]")
    return phi


def reduction_cdf(d, phi):
    """Exact ``Pr[|<q - p, u>| / |q - p| < phi]`` for a uniform direction u."""
    _check_sphere_dim(d)
    phi = _check_phi(phi)
    if d == 2:
        out = 1.0 - 2.0 * np.arccos(phi) / np.pi
    elif d == 3:
        out = phi.copy()
    elif d == 4:
        out = 1.0 - (2.0 / np.pi) * (np.arccos(phi) - phi * np.sqrt(1.0 - phi * phi))
    else:
        out = 9.0 / 8.0 * phi - np.cos(3.0 * np.arccos(phi)) / 8.0
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


LINEAR_CONSTANT_45 = 1.0 + 2.0 / math.pi


def reduction_bound(d, phi):
    """Linear upper bound on :func:`reduction_cdf`: phi, or (1 + 2/pi) phi for d >= 4."""
    _check_sphere_dim(d)
    phi = _check_phi(phi)
    out = phi * (LINEAR_CONSTANT_45 if d >= 4 else 1.0)
    return float(out) if out.ndim == 0 else out
