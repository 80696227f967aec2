"""Discrete Frechet distance, DTW, free-space matrices and brute-force oracles.

Indices are 0-based: a traversal of curves with ``n`` and ``m`` vertices is a
list of pairs starting at ``(0, 0)`` and ending at ``(n - 1, m - 1)`` where
every step increases ``i``, ``j`` or both by one.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ContractError, DimensionError
from .geom import as_curve, project_curves

BRUTEFORCE_LIMIT = 16


class DistanceResult(NamedTuple):
    value: float
    witness: list


@dataclass(frozen=True)
class FreeSpaceMatrix:
    threshold: float
    bits: np.ndarray

    @property
    def shape(self):
        return self.bits.shape


def _pair(P, Q):
    P = as_curve(P, "P")
    Q = as_curve(Q, "Q")
    if P.shape[1] != Q.shape[1]:
        raise DimensionError(f"P has dimension {P.shape[1]}, Q has dimension {Q.shape[1]}")
    return P, Q


def distance_matrix(P, Q):
    """Pairwise vertex distances, shape ``(len(P), len(Q))``."""
    P, Q = _pair(P, Q)
    diff = P[:, None, :] - Q[None, :, :]
    if P.shape[1] == 1:
        return np.abs(diff[:, :, 0])
    return np.sqrt(np.sum(diff * diff, axis=2))


def _check_matrix(D):
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] < 1 or D.shape[1] < 1:
        raise DimensionError(f"distance matrix must be a non-empty 2D array, got shape {D.shape}")
    if not np.all(np.isfinite(D)) or np.any(D < 0):
        raise ValueError("distance matrix entries must be finite and nonnegative")
    return D


def dp_table(D, kind=kernels.FRECHET):
    return kernels.table(_check_matrix(D), kind)


def backtrack(T):
    """Recover a witness traversal from a filled DP table.

    Among the predecessors holding the minimum, the diagonal is preferred,
    then ``(i - 1, j)``, then ``(i, j - 1)``.
    """
    i, j = T.shape[0] - 1, T.shape[1] - 1
    path = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, right = T[i - 1, j - 1], T[i - 1, j], T[i, j - 1]
            if diag <= up and diag <= right:
                i, j = i - 1, j - 1
            elif up <= right:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return path


def frechet_from_matrix(D):
    T = dp_table(D, kernels.FRECHET)
    return DistanceResult(float(T[-1, -1]), backtrack(T))


def dtw_from_matrix(D):
    T = dp_table(D, kernels.DTW)
    return DistanceResult(float(T[-1, -1]), backtrack(T))


def discrete_frechet(P, Q):
    """Discrete Frechet distance with a witness traversal, O(|P| |Q|)."""
    return frechet_from_matrix(distance_matrix(P, Q))


def dtw(P, Q):
    """Dynamic time warping distance (sum of matched distances) with a witness."""
    return dtw_from_matrix(distance_matrix(P, Q))


def traversal_cost(D, path, kind=kernels.FRECHET):
    """Max (Frechet) or left-to-right sum (DTW) of ``D`` along ``path``."""
    acc = None
    for i, j in path:
        d = float(D[i, j])
        if acc is None:
            acc = d
        elif kind == kernels.FRECHET:
            acc = d if d > acc else acc
        else:
            acc = acc + d
    return acc


def is_traversal(path, n, m):
    if not path or tuple(path[0]) != (0, 0) or tuple(path[-1]) != (n - 1, m - 1):
        return False
    for (a, b), (c, d) in zip(path, path[1:]):
        if (c - a, d - b) not in ((1, 0), (0, 1), (1, 1)):
            return False
    return True


def iter_traversals(n, m):
    """Yield every monotone traversal of an ``n`` by ``m`` grid."""
    path = [(0, 0)]

    def rec(i, j):
        if i == n - 1 and j == m - 1:
            yield list(path)
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            a, b = i + di, j + dj
            if a < n and b < m:
                path.append((a, b))
                yield from rec(a, b)
                path.pop()

    yield from rec(0, 0)


def _bruteforce(P, Q, kind):
    D = distance_matrix(P, Q)
    n, m = D.shape
    if n + m > BRUTEFORCE_LIMIT:
        raise ContractError(f"enumeration limited to |P| + |Q| <= {BRUTEFORCE_LIMIT}, got {n + m}")
    return min(traversal_cost(D, path, kind) for path in iter_traversals(n, m))


def discrete_frechet_bruteforce(P, Q):
    """Exact minimum over all traversals by enumeration (oracle for small inputs)."""
    return _bruteforce(P, Q, kernels.FRECHET)


def dtw_bruteforce(P, Q):
    return _bruteforce(P, Q, kernels.DTW)


def free_space_from_matrix(D, delta):
    if not delta > 0:
        raise ValueError(f"threshold must be positive, got {delta}")
    D = _check_matrix(D)
    return FreeSpaceMatrix(float(delta), D < delta)


def free_space(P, Q, delta):
    """Free-space matrix: cell ``(i, j)`` is 1 iff ``|p_i - q_j| < delta``."""
    return free_space_from_matrix(distance_matrix(P, Q), delta)


def traversal_exists(F):
    """True iff a monotone path of free cells joins the two corners."""
    bits = F.bits if isinstance(F, FreeSpaceMatrix) else np.asarray(F, dtype=bool)
    return bool(kernels.reach(np.ascontiguousarray(bits, dtype=np.bool_))[-1, -1])


def projected_distances(P, Q, U, kind=kernels.FRECHET):
    """Distance between the projections of ``P`` and ``Q`` for each row of ``U``.

    Agrees bitwise with projecting each curve separately and calling
    :func:`discrete_frechet` (or :func:`dtw`) on the results.
    """
    P, Q = _pair(P, Q)
    pp = np.ascontiguousarray(project_curves(P, U))
    qq = np.ascontiguousarray(project_curves(Q, U))
    return kernels.batch_1d(pp, qq, kind)


def distance(P, Q, kind=kernels.FRECHET):
    return (discrete_frechet if kind == kernels.FRECHET else dtw)(P, Q).value


KINDS = {"frechet": kernels.FRECHET, "dtw": kernels.DTW}


def parse_kind(kind):
    if isinstance(kind, str):
        try:
            return KINDS[kind.lower()]
        except KeyError:
            raise ValueError(f"unknown distance kind {kind!r}; choose from {sorted(KINDS)}") from None
    if kind not in (kernels.FRECHET, kernels.DTW):
        raise ValueError(f"unknown distance kind {kind!r}")
    return int(kind)
