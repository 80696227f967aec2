"""Guarding sets over the traversal grid.

A set ``B`` of grid cells guards the pair ``(P, Q)`` with quality ``theta``
when every member has ``D[i, j] >= delta / theta`` and every traversal from
``(0, 0)`` to ``(n - 1, m - 1)`` hits ``B``, where ``delta`` is the discrete
Frechet distance. Sets are stored as boolean masks over the ``n x m`` grid.
Cells reachable from ``(0, 0)`` without entering ``B`` form ``S_B``; the
cells outside ``S_B`` and ``B`` form ``H_B``.
"""

import json
import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ContractError, DegenerateDistanceError
from .geom import LINEAR_CONSTANT_45, SPHERE_DIMS
from .io import fmt
from .metrics import _pair, distance_matrix, frechet_from_matrix
from .packing import check_intervals, merge_with_radius, row_radius, sparse_radius

S_CELL, B_CELL, H_CELL = 0, 1, 2


@dataclass(frozen=True)
class GuardingSet:
    mask: np.ndarray
    theta: float
    delta: float
    row_groups: dict = None
    col_groups: dict = None
    meta: dict = field(default_factory=dict)

    @property
    def size(self):
        return int(self.mask.sum())

    @property
    def pairs(self):
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.mask))]

    def __contains__(self, cell):
        return bool(self.mask[cell])

    def __len__(self):
        return self.size


@dataclass(frozen=True)
class Partition:
    labels: np.ndarray

    @property
    def S(self):
        return self.labels == S_CELL

    @property
    def B(self):
        return self.labels == B_CELL

    @property
    def H(self):
        return self.labels == H_CELL


@dataclass
class GuardingCheck:
    distance_ok: bool
    guarding_ok: bool
    bad_members: list
    escape_path: list

    def __bool__(self):
        return self.distance_ok and self.guarding_ok

    def describe(self):
        if self:
            return "ok"
        out = []
        if self.bad_members:
            out.append(f"members below delta/theta: {self.bad_members[:5]}")
        if self.escape_path:
            out.append(f"traversal avoiding B: {self.escape_path}")
        return "; ".join(out)


@dataclass(frozen=True)
class ExtendedGroupReport:
    row_counts: np.ndarray
    col_counts: np.ndarray
    row_runs: dict
    col_runs: dict


def _as_mask(B, shape):
    if isinstance(B, GuardingSet):
        B = B.mask
    if isinstance(B, np.ndarray) and B.dtype == bool:
        if B.shape != shape:
            raise ValueError(f"mask shape {B.shape} does not match grid {shape}")
        return B
    mask = np.zeros(shape, dtype=bool)
    for i, j in B:
        mask[i, j] = True
    return mask


def _shape(D):
    return D.shape if hasattr(D, "shape") else tuple(D)


def reachable(free):
    return kernels.reach(np.ascontiguousarray(free, dtype=np.bool_))


def partition(D, B):
    """Classify every grid cell as S_B, B or H_B."""
    mask = _as_mask(B, _shape(D))
    labels = np.full(mask.shape, H_CELL, dtype=np.int8)
    labels[reachable(~mask)] = S_CELL
    labels[mask] = B_CELL
    return Partition(labels)


def build_guarding(D, delta, theta=1.0, check_delta=True):
    """Breadth-first construction of a theta-guarding set from ``(0, 0)``.

    Cells with ``D < delta / theta`` are expanded; the first cells at or
    above the threshold met from an expanded cell become members.
    """
    D = np.asarray(D, dtype=np.float64)
    if not theta >= 1:
        raise ValueError(f"theta must be >= 1, got {theta}")
    if check_delta:
        exact = frechet_from_matrix(D).value
        if exact != delta:
            raise ContractError(f"delta = {delta!r} differs from the min-max traversal value {exact!r}")
    n, m = D.shape
    bound = delta / theta
    mask = np.zeros((n, m), dtype=bool)
    if D[0, 0] >= bound:
        mask[0, 0] = True
        return GuardingSet(mask, float(theta), float(delta))
    seen = np.zeros((n, m), dtype=bool)
    seen[0, 0] = True
    queue = deque([(0, 0)])
    while queue:
        i, j = queue.popleft()
        for a, b in ((i, j + 1), (i + 1, j), (i + 1, j + 1)):
            if a >= n or b >= m:
                continue
            if D[a, b] < bound:
                if not seen[a, b]:
                    seen[a, b] = True
                    queue.append((a, b))
            else:
                mask[a, b] = True
    return GuardingSet(mask, float(theta), float(delta))


def _member_index(mask):
    member = np.full(mask.shape, -1, dtype=np.int64)
    mi, mj = np.nonzero(mask)
    member[mi, mj] = np.arange(mi.size)
    return member, mi, mj


def find_avoidable(D, B):
    """Members bypassed on both sides by S_B paths to another member."""
    mask = _as_mask(B, _shape(D))
    member, mi, mj = _member_index(mask)
    if mi.size == 0:
        return set()
    S = reachable(~mask)
    flags = kernels.avoidable_flags(S, member, mi.size)
    return {(int(mi[k]), int(mj[k])) for k in np.nonzero(flags)[0]}


def _strip_avoidable(mask):
    mask = mask.copy()
    sweeps = removed = 0
    while True:
        found = find_avoidable(mask.shape, mask)
        if not found:
            return mask, sweeps, removed
        for cell in found:
            mask[cell] = False
        sweeps += 1
        removed += len(found)


def remove_avoidable(D, B):
    """Drop avoidable members, recomputing S_B, until none are left."""
    gs = B if isinstance(B, GuardingSet) else None
    mask, sweeps, removed = _strip_avoidable(_as_mask(B, _shape(D)))
    if gs is None:
        return mask
    meta = dict(gs.meta, avoidable_sweeps=sweeps, avoidable_removed=removed)
    return replace(gs, mask=mask, meta=meta)


@dataclass
class RowTrim:
    row: int
    radius: float
    I: list
    J: list
    filling: list
    removed: list
    pruned: list


def _trim(D, mask, i, b, P=None, Q=None, r=None):
    """Trim the reachable area at row ``i`` in place; returns a :class:`RowTrim`."""
    n, m = mask.shape
    if not 0 <= i < n:
        raise IndexError(f"row {i} out of range for {n} rows")
    cols = np.nonzero(mask[i])[0]
    if cols.size == 0:
        return RowTrim(i, float("nan"), [], [], [], [], [])
    dists = D[i]
    for j in cols:
        if dists[j] < b:
            raise ContractError(f"member ({i}, {int(j)}) has distance {dists[j]!r} < b = {b!r}")
    if r is not None:
        if not 0.5 * b <= r <= b:
            raise ValueError(f"radius {r!r} outside [b/2, b] = [{0.5 * b!r}, {b!r}]")
    elif P is not None and Q is not None:
        r, _ = sparse_radius(P[i], Q, b)
    else:
        r, _ = row_radius(dists, b)
    I = check_intervals([(int(j), int(j)) for j in cols])
    J = merge_with_radius(dists, I, r)
    S = reachable(~mask)
    filling = [(i, j) for lo, hi in J for j in range(lo, hi + 1) if S[i, j] and not mask[i, j]]
    seen = np.zeros_like(mask)
    queue = deque(filling)
    for cell in filling:
        seen[cell] = True
    removed = []
    while queue:
        a, c = queue.popleft()
        for x, y in ((a + 1, c), (a + 1, c + 1)):
            if x >= n or y >= m or seen[x, y]:
                continue
            seen[x, y] = True
            if mask[x, y]:
                mask[x, y] = False
                removed.append((x, y))
            else:
                queue.append((x, y))
    for cell in filling:
        mask[cell] = True
    # A filling pair may have been the only S_B entry into a member further
    # right. Such members are never the first hit of a traversal, and dropping
    # them leaves S_B unchanged.
    pruned = predecessor_violations(mask)
    for cell in pruned:
        mask[cell] = False
    return RowTrim(i, float(r), I, J, filling, removed, pruned)


def trim_row(D, B, i, b, P=None, Q=None, r=None):
    """Trim the reachable area of ``B`` along row ``i``.

    The row's members are merged into intervals around ``p_i`` (with radius
    from :func:`sparse_radius` when the curves are given, otherwise from the
    distance row alone); S_B cells inside the merged intervals are added to
    ``B``, members met by a breadth-first walk from them through later rows
    are dropped, and so are members left without an S_B predecessor.
    ``r`` fixes the merge radius instead.
    """
    D = np.asarray(D, dtype=np.float64)
    mask = _as_mask(B, D.shape).copy()
    step = _trim(D, mask, i, b, P, Q, r)
    if not isinstance(B, GuardingSet):
        return mask
    rows = dict(B.row_groups or {})
    rows[i] = step.J
    meta = dict(B.meta, last_trim=step)
    return replace(B, mask=mask, row_groups=rows, meta=meta)


def _trim_pass(D, mask, b, P, Q):
    groups, steps, cleaned = {}, [], 0
    for i in range(mask.shape[0]):
        if find_avoidable(mask.shape, mask):
            stripped, _, removed = _strip_avoidable(mask)
            mask[:] = stripped
            cleaned += removed
        step = _trim(D, mask, i, b, P, Q)
        if step.J:
            groups[i] = step.J
        steps.append(step)
    return groups, steps, cleaned


def trim_full(P, Q, c_hint=None):
    """Three-phase trimming of the 1-guarding set into a 4-guarding set.

    Phase 1 strips avoidable members, phase 2 trims every row with
    ``b = delta``, phase 3 every column with ``b = delta / 2``.
    """
    P, Q = _pair(P, Q)
    return _trim_all(distance_matrix(P, Q), P, Q, c_hint)


def trim_matrix(D, c_hint=None):
    """:func:`trim_full` for a bare distance matrix (radii from the rows alone)."""
    D = np.asarray(D, dtype=np.float64)
    return _trim_all(D, None, None, c_hint)


def _trim_all(D, P, Q, c_hint):
    delta = frechet_from_matrix(D).value
    if delta == 0.0:
        raise DegenerateDistanceError("distance zero: guarding sets and distortion are undefined")
    base = build_guarding(D, delta, 1.0, check_delta=False)
    sizes = {"initial": base.size}
    mask, sweeps, removed = _strip_avoidable(base.mask)
    sizes["phase1"] = int(mask.sum())
    rows, row_steps, row_clean = _trim_pass(D, mask, delta, P, Q)
    sizes["phase2"] = int(mask.sum())
    maskT = np.ascontiguousarray(mask.T)
    cols, col_steps, col_clean = _trim_pass(np.ascontiguousarray(D.T), maskT, delta / 2.0, Q, P)
    mask = maskT.T.copy()
    sizes["phase3"] = int(mask.sum())
    meta = {
        "sizes": sizes,
        "avoidable_removed": removed,
        "avoidable_sweeps": sweeps,
        "avoidable_cleaned_rows": row_clean,
        "avoidable_cleaned_cols": col_clean,
        "avoidable_after": sorted(find_avoidable(mask.shape, mask)),
        "pruned": sum(len(s.pruned) for s in row_steps + col_steps),
        "row_radii": {s.row: s.radius for s in row_steps if s.J},
        "col_radii": {s.row: s.radius for s in col_steps if s.J},
    }
    if c_hint is not None:
        meta["size_bound"] = (3.0 * c_hint + 4.0) * max(D.shape)
    return GuardingSet(mask, 4.0, float(delta), rows, cols, meta)


def escape_path(mask):
    """A traversal avoiding ``mask``, or None if every traversal hits it."""
    R = reachable(~mask)
    n, m = mask.shape
    if not R[n - 1, m - 1]:
        return None
    i, j = n - 1, m - 1
    path = [(i, j)]
    while (i, j) != (0, 0):
        for a, b in ((i - 1, j - 1), (i - 1, j), (i, j - 1)):
            if a >= 0 and b >= 0 and R[a, b]:
                i, j = a, b
                break
        path.append((i, j))
    path.reverse()
    return path


def verify_guarding(D, B, theta, delta):
    """Check both guarding-set properties; the result is truthy iff both hold."""
    D = np.asarray(D, dtype=np.float64)
    mask = _as_mask(B, D.shape)
    bound = delta / theta
    bad = [(int(i), int(j)) for i, j in zip(*np.nonzero(mask & (D < bound)))]
    path = escape_path(mask)
    return GuardingCheck(not bad, path is None, bad, path)


def predecessor_violations(B):
    """Members without an S_B cell among their three grid predecessors.

    The single member ``(0, 0)`` has no predecessors and is exempt.
    """
    mask = B.mask if isinstance(B, GuardingSet) else np.asarray(B, dtype=bool)
    S = reachable(~mask)
    out = []
    for i, j in zip(*np.nonzero(mask)):
        if i == 0 and j == 0:
            continue
        preds = [(i - 1, j), (i, j - 1), (i - 1, j - 1)]
        if not any(a >= 0 and b >= 0 and S[a, b] for a, b in preds):
            out.append((int(i), int(j)))
    return out


def _runs(idx):
    runs = []
    for j in idx:
        j = int(j)
        if runs and runs[-1][1] == j - 1:
            runs[-1] = (runs[-1][0], j)
        else:
            runs.append((j, j))
    return runs


def _group_count(runs, J):
    keys = set()
    for k, (lo, hi) in enumerate(runs):
        host = next((q for q, (a, b) in enumerate(J) if a <= lo and hi <= b), None)
        keys.add(("J", host) if host is not None else ("run", k))
    return len(keys)


def extended_groups(B, row_groups=None, col_groups=None):
    """Count extended groups per row and per column.

    Maximal runs of members that sit inside one merged interval recorded
    during trimming count once; other runs count individually.
    """
    if isinstance(B, GuardingSet):
        row_groups = B.row_groups if row_groups is None else row_groups
        col_groups = B.col_groups if col_groups is None else col_groups
        mask = B.mask
    else:
        mask = np.asarray(B, dtype=bool)
    if row_groups is None or col_groups is None:
        raise ContractError("extended groups need the merged intervals recorded by trimming")
    n, m = mask.shape
    row_runs = {i: _runs(np.nonzero(mask[i])[0]) for i in range(n)}
    col_runs = {j: _runs(np.nonzero(mask[:, j])[0]) for j in range(m)}
    rc = np.array([_group_count(row_runs[i], row_groups.get(i, [])) for i in range(n)], dtype=np.int64)
    cc = np.array([_group_count(col_runs[j], col_groups.get(j, [])) for j in range(m)], dtype=np.int64)
    return ExtendedGroupReport(rc, cc, row_runs, col_runs)


def theorem_bound(d, c, gamma, t):
    """Distortion factor ``4 (3c + 4) t / gamma`` (times ``1 + 2/pi`` for d = 4, 5)."""
    if d not in SPHERE_DIMS:
        raise ValueError(f"d must be in {SPHERE_DIMS}, got {d}")
    if not c >= 2:
        raise ValueError(f"c must be >= 2, got {c}")
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    factor = (12.0 * c + 16.0) * t / gamma
    scale = LINEAR_CONSTANT_45 if d >= 4 else 1.0
    assert math.isclose(factor, 4.0 * (3.0 * c + 4.0) * t / gamma, rel_tol=1e-12)
    return factor * scale


def guarding_rows(D, gs):
    return [(i, j, float(D[i, j])) for i, j in gs.pairs]


def write_guarding(csv_path, json_path, D, gs):
    """CSV ``i,j,delta_ij`` (0-based, skipped when ``csv_path`` is None) plus a JSON sidecar."""
    if csv_path is not None:
        lines = ["i,j,delta_ij"] + [f"{i},{j},{fmt(v)}" for i, j, v in guarding_rows(D, gs)]
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    sidecar = {
        "theta": gs.theta,
        "delta": gs.delta,
        "size": gs.size,
        "row_groups": None,
        "col_groups": None,
    }
    if gs.row_groups is not None and gs.col_groups is not None:
        rep = extended_groups(gs)
        sidecar["row_groups"] = rep.row_counts.tolist()
        sidecar["col_groups"] = rep.col_counts.tolist()
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


__all__ = [
    "GuardingCheck",
    "GuardingSet",
    "Partition",
    "build_guarding",
    "extended_groups",
    "find_avoidable",
    "partition",
    "predecessor_violations",
    "remove_avoidable",
    "theorem_bound",
    "trim_full",
    "trim_matrix",
    "trim_row",
    "verify_guarding",
    "write_guarding",
]
