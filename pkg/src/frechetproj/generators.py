"""Extremal curve families and synthetic inputs.

* wedge: a subdivided segment against a bent segment (projection lower bound
  for packed curves);
* star: closed star-shaped curves with k and k + 1 unit rays;
* fork: a synthetic distance matrix on which breadth-first guarding picks a
  quadratic number of cells;
* random walks for the Monte Carlo harness.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geom import SPHERE_DIMS, _generator, sample_unit_vectors


@dataclass(frozen=True)
class WedgeSpec:
    t: int
    alpha: float


@dataclass(frozen=True)
class StarSpec:
    k: int
    with_hats: bool = False


@dataclass(frozen=True)
class ForkSpec:
    t: int
    delta: float = 1.0
    theta: float = 1.0


def gen_wedge(spec):
    """Segment P of length 2 cos(alpha) and two unit legs Q meeting at angle alpha.

    Both curves have ``2t + 1`` uniformly spaced vertices and share their
    endpoints; ``q_{t+1}`` is the apex.
    """
    t, alpha = int(spec.t), float(spec.alpha)
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if not 0.0 < alpha < math.pi / 2:
        raise ValueError(f"alpha must lie in (0, pi/2), got {alpha}")
    ca, sa = math.cos(alpha), math.sin(alpha)
    s = np.arange(2 * t + 1) / (2.0 * t)
    P = np.column_stack([2.0 * ca * s, np.zeros_like(s)])
    u = np.arange(t + 1) / float(t)
    up = np.column_stack([ca * u, sa * u])
    down = np.column_stack([ca + ca * u[1:], sa - sa * u[1:]])
    Q = np.concatenate([up, down])
    analytic = {
        "family": "wedge",
        "t": t,
        "alpha": alpha,
        "vertices": 2 * t + 1,
        "frechet": sa,
        "dtw": t * sa,
        "length_P": 2.0 * ca,
        "length_Q": 2.0,
        "packedness_below": 3.0,
    }
    return P, Q, analytic


def hat_radius(k):
    return 1.0 / (2.0 * math.cos(math.pi / (k + 1)))


def star_curve(rays, with_hats=False, hat=None):
    """Closed star through the origin visiting ``rays`` unit vertices."""
    ang = 2.0 * math.pi * np.arange(rays) / rays
    tips = np.column_stack([np.cos(ang), np.sin(ang)])
    origin = np.zeros(2)
    hats = tips * hat if with_hats else None
    pts = [tips[0]]
    if with_hats:
        pts.append(hats[0])
    pts.append(origin)
    for i in range(1, rays):
        if with_hats:
            pts += [hats[i], tips[i], hats[i], origin]
        else:
            pts += [tips[i], origin]
    if with_hats:
        pts.append(hats[0])
    pts.append(tips[0])
    return np.array(pts)


def gen_star(spec):
    """Stars with ``k`` and ``k + 1`` rays, padded with copies of ``p_1`` to equal length."""
    k = int(spec.k)
    if k < 2 or k % 2:
        raise ValueError(f"k must be an even integer >= 2, got {spec.k}")
    rho = hat_radius(k)
    P = star_curve(k, spec.with_hats, rho)
    Q = star_curve(k + 1, spec.with_hats, rho)
    pad = Q.shape[0] - P.shape[0]
    P = np.concatenate([P, np.repeat(P[:1], pad, axis=0)])
    t = P.shape[0]
    analytic = {
        "family": "star",
        "k": k,
        "with_hats": bool(spec.with_hats),
        "vertices": t,
        "frechet_continuous": rho,
        "hat_radius": rho,
        "lower_bound_factor": (t - 5) / (16.0 * math.pi) if spec.with_hats else (t - 3) / (8.0 * math.pi),
        "packedness_at_center": 2.0 * k,
    }
    return P, Q, analytic


def fork_bits(t):
    """0/1 pattern of the fork matrix, row 0 being the start of P."""
    if t < 3:
        raise ValueError(f"fork matrix needs t >= 3, got {t}")
    F = np.zeros((t, t), dtype=bool)
    for j in range(1, t + 1):
        col = j - 1
        if j % 3 == 1:
            F[:, col] = True
            F[t - 1, col] = False
        elif j % 3 == 2:
            F[0, col] = True
        else:
            F[0, col] = True
    return F


def gen_fork_matrix(spec):
    """Distance matrix with value 0 on free cells and ``delta`` elsewhere."""
    if not spec.delta > 0 or not spec.theta >= 1:
        raise ValueError("fork matrix needs delta > 0 and theta >= 1")
    return np.where(fork_bits(int(spec.t)), 0.0, float(spec.delta))


def fork_count(t):
    """Cell count of the fork's guarding set claimed for side ``t``."""
    return (t - 1) * t // 3


def gen_random_walk(t, d, step, rng):
    """Random walk from the origin with ``t`` vertices and steps of length ``step``."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if d not in SPHERE_DIMS:
        raise ValueError(f"d must be in {SPHERE_DIMS}, got {d}")
    if not step >= 0:
        raise ValueError(f"step must be nonnegative, got {step}")
    gen = _generator(rng)
    walk = np.zeros((t, d))
    if t > 1:
        walk[1:] = np.cumsum(step * sample_unit_vectors(d, t - 1, gen), axis=0)
    return walk
