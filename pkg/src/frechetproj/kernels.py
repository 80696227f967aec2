"""Hot numeric kernels, each in a numba loop form and a pure-numpy form.

The public names at the bottom of the module (``table``, ``batch_1d``,
``reach``, ``avoidable_flags``, ``ball_lengths``, ``ball_scan``) dispatch to
one backend chosen by :mod:`frechetproj._jit`. Both backends perform the
same floating point operations per cell, so their results agree bit for bit.

``kind`` selects the traversal cost: 0 for the discrete Frechet distance
(max along the traversal), 1 for dynamic time warping (sum).
"""

import numpy as np

from ._jit import BACKEND, njit, pick

FRECHET = 0
DTW = 1

# Elements per chunk in the batched numpy DP (3D scratch array).
_CHUNK_ELEMS = 2_000_000


# ---------------------------------------------------------------- DP tables


def _table_loops(dist, kind):
    n, m = dist.shape
    D = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            d = dist[i, j]
            if i == 0 and j == 0:
                D[i, j] = d
                continue
            best = np.inf
            if i > 0 and D[i - 1, j] < best:
                best = D[i - 1, j]
            if j > 0 and D[i, j - 1] < best:
                best = D[i, j - 1]
            if i > 0 and j > 0 and D[i - 1, j - 1] < best:
                best = D[i - 1, j - 1]
            if kind == 0:
                D[i, j] = d if d > best else best
            else:
                D[i, j] = d + best
    return D


def _diag(s, n, m):
    i = np.arange(max(0, s - m + 1), min(s, n - 1) + 1)
    return i, s - i


def _table_np(dist, kind):
    n, m = dist.shape
    Dp = np.full((n + 1, m + 1), np.inf)
    Dp[0, 0] = -np.inf if kind == 0 else 0.0
    for s in range(n + m - 1):
        i, j = _diag(s, n, m)
        best = np.minimum(np.minimum(Dp[i, j + 1], Dp[i + 1, j]), Dp[i, j])
        d = dist[i, j]
        Dp[i + 1, j + 1] = np.maximum(d, best) if kind == 0 else d + best
    return Dp[1:, 1:].copy()


def _batch_loops(pp, qq, kind):
    r, n = pp.shape
    m = qq.shape[1]
    out = np.empty(r)
    prev = np.empty(m)
    cur = np.empty(m)
    for k in range(r):
        for i in range(n):
            for j in range(m):
                d = abs(pp[k, i] - qq[k, j])
                if i == 0 and j == 0:
                    cur[j] = d
                    continue
                best = np.inf
                if i > 0 and prev[j] < best:
                    best = prev[j]
                if j > 0 and cur[j - 1] < best:
                    best = cur[j - 1]
                if i > 0 and j > 0 and prev[j - 1] < best:
                    best = prev[j - 1]
                if kind == 0:
                    cur[j] = d if d > best else best
                else:
                    cur[j] = d + best
            prev, cur = cur, prev
        out[k] = prev[m - 1]
    return out


def _batch_np(pp, qq, kind):
    r, n = pp.shape
    m = qq.shape[1]
    out = np.empty(r)
    step = max(1, _CHUNK_ELEMS // ((n + 1) * (m + 1)))
    diags = [_diag(s, n, m) for s in range(n + m - 1)]
    for a in range(0, r, step):
        b = min(r, a + step)
        dist = np.abs(pp[a:b, :, None] - qq[a:b, None, :])
        Dp = np.full((b - a, n + 1, m + 1), np.inf)
        Dp[:, 0, 0] = -np.inf if kind == 0 else 0.0
        for i, j in diags:
            best = np.minimum(np.minimum(Dp[:, i, j + 1], Dp[:, i + 1, j]), Dp[:, i, j])
            d = dist[:, i, j]
            Dp[:, i + 1, j + 1] = np.maximum(d, best) if kind == 0 else d + best
        out[a:b] = Dp[:, n, m]
    return out


# ------------------------------------------------------------ reachability


def _reach_loops(free):
    n, m = free.shape
    R = np.zeros((n, m), dtype=np.bool_)
    for i in range(n):
        for j in range(m):
            if not free[i, j]:
                continue
            if i == 0 and j == 0:
                R[i, j] = True
            elif i > 0 and R[i - 1, j]:
                R[i, j] = True
            elif j > 0 and R[i, j - 1]:
                R[i, j] = True
            elif i > 0 and j > 0 and R[i - 1, j - 1]:
                R[i, j] = True
    return R


def _reach_np(free):
    n, m = free.shape
    R = np.zeros((n, m), dtype=bool)
    idx = np.arange(m)
    for i in range(n):
        f = free[i]
        if i == 0:
            seed = np.zeros(m, dtype=bool)
            seed[0] = f[0]
        else:
            up = R[i - 1]
            diag = np.zeros(m, dtype=bool)
            diag[1:] = up[:-1]
            seed = f & (up | diag)
        # a free cell is reached iff its free run holds a seed at or left of it
        last_block = np.maximum.accumulate(np.where(f, -1, idx))
        last_seed = np.maximum.accumulate(np.where(seed, idx, -1))
        R[i] = f & (last_seed > last_block)
    return R


# ------------------------------------------------------- avoidable members
#
# F[c] is a bitset over guarding-set members: bit k is set when member k can be
# entered from c along a monotone path whose cells (other than the member)
# all lie in S_B. A member (i, j) is avoidable iff two S_B cells of row i on
# opposite sides of column j (or of column j on opposite sides of row i)
# share a bit.


def _avoidable_loops(S, member, nmem):
    n, m = S.shape
    W = (nmem + 63) // 64
    F = np.zeros((n, m, W), dtype=np.uint64)
    one = np.uint64(1)
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if not S[i, j]:
                continue
            for t in range(3):
                if t == 0:
                    a, b = i, j + 1
                elif t == 1:
                    a, b = i + 1, j
                else:
                    a, b = i + 1, j + 1
                if a >= n or b >= m:
                    continue
                k = member[a, b]
                if k >= 0:
                    F[i, j, k >> 6] |= one << np.uint64(k & 63)
                elif S[a, b]:
                    for w in range(W):
                        F[i, j, w] |= F[a, b, w]
    flags = np.zeros(nmem, dtype=np.bool_)
    acc = np.zeros(W, dtype=np.uint64)
    suffix = np.zeros((max(n, m) + 1, W), dtype=np.uint64)
    for i in range(n):
        suffix[m, :] = 0
        for j in range(m - 1, -1, -1):
            for w in range(W):
                suffix[j, w] = suffix[j + 1, w] | F[i, j, w]
        acc[:] = 0
        for j in range(m):
            k = member[i, j]
            if k >= 0:
                for w in range(W):
                    if acc[w] & suffix[j + 1, w]:
                        flags[k] = True
                        break
            for w in range(W):
                acc[w] |= F[i, j, w]
    for j in range(m):
        suffix[n, :] = 0
        for i in range(n - 1, -1, -1):
            for w in range(W):
                suffix[i, w] = suffix[i + 1, w] | F[i, j, w]
        acc[:] = 0
        for i in range(n):
            k = member[i, j]
            if k >= 0:
                for w in range(W):
                    if acc[w] & suffix[i + 1, w]:
                        flags[k] = True
                        break
            for w in range(W):
                acc[w] |= F[i, j, w]
    return flags


def _avoidable_np(S, member, nmem):
    n, m = S.shape
    W = (nmem + 63) // 64
    G = np.zeros((n + 1, m + 1, W), dtype=np.uint64)
    F = np.zeros((n, m, W), dtype=np.uint64)
    mi, mj = np.nonzero(member >= 0)
    k = member[mi, mj]
    G[mi, mj, k >> 6] = np.left_shift(np.uint64(1), (k & 63).astype(np.uint64))
    for s in range(n + m - 2, -1, -1):
        i, j = _diag(s, n, m)
        acc = G[i + 1, j] | G[i, j + 1] | G[i + 1, j + 1]
        keep = S[i, j]
        acc[~keep] = 0
        F[i, j] = acc
        G[i[keep], j[keep]] = acc[keep]
    flags = np.zeros(nmem, dtype=bool)
    zero_col = np.zeros((n, 1, W), dtype=np.uint64)
    left = np.concatenate([zero_col, np.bitwise_or.accumulate(F, axis=1)[:, :-1]], axis=1)
    right = np.concatenate(
        [np.bitwise_or.accumulate(F[:, ::-1], axis=1)[:, ::-1][:, 1:], zero_col], axis=1
    )
    hit = ((left & right) != 0).any(axis=2)
    zero_row = np.zeros((1, m, W), dtype=np.uint64)
    up = np.concatenate([zero_row, np.bitwise_or.accumulate(F, axis=0)[:-1]], axis=0)
    down = np.concatenate(
        [np.bitwise_or.accumulate(F[::-1], axis=0)[::-1][1:], zero_row], axis=0
    )
    hit |= ((up & down) != 0).any(axis=2)
    flags[k] = hit[mi, mj]
    return flags


# ------------------------------------------------------- curve inside balls


def _ball_lengths_loops(P, center, radii):
    n, d = P.shape
    out = np.zeros(radii.shape[0])
    for e in range(n - 1):
        A = 0.0
        dot = 0.0
        cc = 0.0
        for k in range(d):
            ab = P[e + 1, k] - P[e, k]
            ac = P[e, k] - center[k]
            A += ab * ab
            dot += ac * ab
            cc += ac * ac
        if A == 0.0:
            continue
        s0 = -dot / A
        h2 = cc - s0 * s0 * A
        if h2 < 0.0:
            h2 = 0.0
        length = np.sqrt(A)
        for q in range(radii.shape[0]):
            r = radii[q]
            gap = r * r - h2
            if gap <= 0.0:
                continue
            w = np.sqrt(gap / A)
            lo = s0 - w
            hi = s0 + w
            if lo < 0.0:
                lo = 0.0
            if hi > 1.0:
                hi = 1.0
            if hi > lo:
                out[q] += (hi - lo) * length
    return out


def _ball_lengths_np(P, center, radii):
    a = P[:-1]
    ab = P[1:] - a
    ac = a - center
    A = np.einsum("ij,ij->i", ab, ab)
    live = A > 0.0
    if not live.any():
        return np.zeros(radii.shape[0])
    A, ab, ac = A[live], ab[live], ac[live]
    s0 = -np.einsum("ij,ij->i", ac, ab) / A
    h2 = np.maximum(np.einsum("ij,ij->i", ac, ac) - s0 * s0 * A, 0.0)
    gap = radii[:, None] ** 2 - h2[None, :]
    w = np.sqrt(np.maximum(gap, 0.0) / A[None, :])
    lo = np.maximum(s0 - w, 0.0)
    hi = np.minimum(s0 + w, 1.0)
    seg = np.where((gap > 0.0) & (hi > lo), (hi - lo) * np.sqrt(A)[None, :], 0.0)
    # sequential sum keeps the same accumulation order as the loop kernel
    out = np.zeros(radii.shape[0])
    for e in range(seg.shape[1]):
        out += seg[:, e]
    return out


def _event_radii_np(P, center, rmin):
    dv = np.sqrt(((P - center) ** 2).sum(axis=1))
    a = P[:-1]
    ab = P[1:] - a
    A = (ab * ab).sum(axis=1)
    ok = A > 0.0
    s = np.zeros_like(A)
    s[ok] = -((a[ok] - center) * ab[ok]).sum(axis=1) / A[ok]
    inside = ok & (s > 0.0) & (s < 1.0)
    foot = a[inside] + s[inside, None] * ab[inside]
    df = np.sqrt(((foot - center) ** 2).sum(axis=1))
    radii = np.unique(np.concatenate([dv, df]))
    return radii[radii > rmin]


def _ball_scan_np(P, centers, rmin):
    best = np.zeros(centers.shape[0])
    best_r = np.full(centers.shape[0], np.nan)
    for c in range(centers.shape[0]):
        radii = _event_radii_np(P, centers[c], rmin)
        if radii.size == 0:
            continue
        ratio = _ball_lengths_np(P, centers[c], radii) / radii
        q = int(np.argmax(ratio))
        best[c] = ratio[q]
        best_r[c] = radii[q]
    return best, best_r


def _ball_scan_loops(P, centers, rmin):
    n, d = P.shape
    nc = centers.shape[0]
    best = np.zeros(nc)
    best_r = np.full(nc, np.nan)
    radii = np.empty(2 * n)
    for c in range(nc):
        cnt = 0
        for v in range(n):
            s = 0.0
            for k in range(d):
                t = P[v, k] - centers[c, k]
                s += t * t
            radii[cnt] = np.sqrt(s)
            cnt += 1
        for e in range(n - 1):
            A = 0.0
            dot = 0.0
            for k in range(d):
                ab = P[e + 1, k] - P[e, k]
                A += ab * ab
                dot += (P[e, k] - centers[c, k]) * ab
            if A == 0.0:
                continue
            s0 = -dot / A
            if s0 > 0.0 and s0 < 1.0:
                s = 0.0
                for k in range(d):
                    t = P[e, k] + s0 * (P[e + 1, k] - P[e, k]) - centers[c, k]
                    s += t * t
                radii[cnt] = np.sqrt(s)
                cnt += 1
        cand = np.unique(radii[:cnt])
        cand = cand[cand > rmin]
        if cand.shape[0] == 0:
            continue
        lengths = _ball_lengths_loops(P, centers[c], cand)
        for q in range(cand.shape[0]):
            ratio = lengths[q] / cand[q]
            if ratio > best[c]:
                best[c] = ratio
                best_r[c] = cand[q]
    return best, best_r


# -------------------------------------------------------------- dispatch

table_jit = njit(_table_loops)
batch_1d_jit = njit(_batch_loops)
reach_jit = njit(_reach_loops)
avoidable_flags_jit = njit(_avoidable_loops)
ball_lengths_jit = njit(_ball_lengths_loops)
if ball_lengths_jit is not None:
    # numba resolves this global when ball_scan_jit first compiles
    _ball_lengths_loops = ball_lengths_jit
ball_scan_jit = njit(_ball_scan_loops)

table = pick(table_jit, _table_np)
batch_1d = pick(batch_1d_jit, _batch_np)
reach = pick(reach_jit, _reach_np)
avoidable_flags = pick(avoidable_flags_jit, _avoidable_np)
ball_lengths = pick(ball_lengths_jit, _ball_lengths_np)
ball_scan = pick(ball_scan_jit, _ball_scan_np)

NUMPY_KERNELS = {
    "table": _table_np,
    "batch_1d": _batch_np,
    "reach": _reach_np,
    "avoidable_flags": _avoidable_np,
    "ball_lengths": _ball_lengths_np,
    "ball_scan": _ball_scan_np,
}
JIT_KERNELS = {
    "table": table_jit,
    "batch_1d": batch_1d_jit,
    "reach": reach_jit,
    "avoidable_flags": avoidable_flags_jit,
    "ball_lengths": ball_lengths_jit,
    "ball_scan": ball_scan_jit,
}

__all__ = [
    "BACKEND",
    "DTW",
    "FRECHET",
    "JIT_KERNELS",
    "NUMPY_KERNELS",
    "avoidable_flags",
    "ball_lengths",
    "ball_scan",
    "batch_1d",
    "reach",
    "table",
]
