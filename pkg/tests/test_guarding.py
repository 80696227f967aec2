import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frechetproj.errors import ContractError, DegenerateDistanceError
from frechetproj.generators import ForkSpec, StarSpec, WedgeSpec, gen_fork_matrix, gen_star, gen_wedge
from frechetproj.guarding import (
    GuardingSet,
    build_guarding,
    escape_path,
    extended_groups,
    find_avoidable,
    partition,
    predecessor_violations,
    remove_avoidable,
    theorem_bound,
    trim_full,
    trim_matrix,
    trim_row,
    verify_guarding,
    write_guarding,
)
from frechetproj.metrics import discrete_frechet, distance_matrix
from frechetproj.packing import packedness_estimate

from strategies import curve_pairs

MOVES = ((0, 1), (1, 0), (1, 1))


# ------------------------------------------------------------------ oracles


def walk_avoiding(mask):
    """Enumerate every monotone path from (0, 0) that stays off ``mask``.

    Yields ``(path, hit)`` where ``hit`` is the member entered from the end of
    ``path`` (or None when ``path`` ends at the top-right corner).
    """
    n, m = mask.shape
    if mask[0, 0]:
        return
    stack = [[(0, 0)]]
    while stack:
        path = stack.pop()
        i, j = path[-1]
        if (i, j) == (n - 1, m - 1):
            yield path, None
        for di, dj in MOVES:
            a, b = i + di, j + dj
            if a >= n or b >= m:
                continue
            if mask[a, b]:
                yield path, (a, b)
            else:
                stack.append(path + [(a, b)])


def oracle_partition(mask):
    S = np.zeros(mask.shape, dtype=bool)
    for path, _ in walk_avoiding(mask):
        for c in path:
            S[c] = True
    return S


def oracle_guarding(mask):
    return not any(hit is None for _, hit in walk_avoiding(mask))


def oracle_avoidable(mask):
    # cells of S_B lying on some S_B path into each member
    feeders = {}
    for path, hit in walk_avoiding(mask):
        if hit is not None:
            feeders.setdefault(hit, set()).update(path)
    out = set()
    for i, j in zip(*np.nonzero(mask)):
        for cells in feeders.values():
            row = [y for x, y in cells if x == i]
            col = [x for x, y in cells if y == j]
            if (any(y < j for y in row) and any(y > j for y in row)) or (
                any(x < i for x in col) and any(x > i for x in col)
            ):
                out.add((int(i), int(j)))
                break
    return out


def minimal_guarding(mask):
    mask = mask.copy()
    for i, j in zip(*np.nonzero(mask)):
        mask[i, j] = False
        if escape_path(mask) is not None:
            mask[i, j] = True
    return mask


@st.composite
def small_masks(draw):
    n = draw(st.integers(1, 7))
    m = draw(st.integers(1, 7))
    bits = draw(st.lists(st.booleans(), min_size=n * m, max_size=n * m))
    return np.array(bits, dtype=bool).reshape(n, m)


# ------------------------------------------------------------ construction


def test_start_cell_far():
    D = np.array([[2.0, 1.0], [1.0, 3.0]])
    gs = build_guarding(D, 3.0, 2.0)
    assert gs.pairs == [(0, 0)]
    assert verify_guarding(D, gs, 2.0, 3.0)


def test_theta_below_one():
    with pytest.raises(ValueError):
        build_guarding(np.ones((2, 2)), 1.0, 0.5)


def test_delta_mismatch():
    with pytest.raises(ContractError):
        build_guarding(np.ones((2, 2)), 0.5)


@pytest.mark.parametrize("t", [6, 9, 15, 30])
def test_fork_count(t):
    # observed count with the literal queue construction; see the notes ledger
    D = gen_fork_matrix(ForkSpec(t))
    gs = build_guarding(D, 1.0)
    assert gs.size == (t + 1) * t // 3
    assert verify_guarding(D, gs, 1.0, 1.0)


@pytest.mark.parametrize("theta", [1.0, 2.0, 4.0])
def test_random_pairs_verify(theta):
    rng = np.random.default_rng(11)
    for _ in range(100):
        t1, t2 = rng.integers(2, 51, size=2)
        P, Q = rng.normal(size=(t1, 2)), rng.normal(size=(t2, 2))
        D = distance_matrix(P, Q)
        delta = discrete_frechet(P, Q).value
        gs = build_guarding(D, delta, theta)
        assert verify_guarding(D, gs, theta, delta), (t1, t2)
        assert predecessor_violations(gs) == []


@given(curve_pairs(d=2, max_len=7))
def test_build_matches_path_oracle(pair):
    P, Q = pair
    D = distance_matrix(P, Q)
    delta = discrete_frechet(P, Q).value
    gs = build_guarding(D, delta)
    assert oracle_guarding(gs.mask)
    assert np.all(D[gs.mask] >= delta)


# -------------------------------------------------------------- partition


def test_partition_trivial():
    D = np.ones((3, 4))
    p = partition(D, {(0, 0)})
    assert not p.S.any() and p.B.sum() == 1 and p.H.sum() == 11
    assert partition(D, set()).S.all()


def test_partition_hand_instance():
    B = {(0, 2), (1, 2), (2, 0), (2, 1), (2, 2)}
    expected = np.array(
        [
            list("SSBHH"),
            list("SSBHH"),
            list("BBBHH"),
            list("HHHHH"),
            list("HHHHH"),
            list("HHHHH"),
        ]
    )
    p = partition((6, 5), B)
    got = np.where(p.S, "S", np.where(p.B, "B", "H"))
    assert (got == expected).all()


@given(small_masks())
def test_partition_matches_oracle(mask):
    p = partition(mask.shape, mask)
    assert (p.S == oracle_partition(mask)).all()
    assert ((p.S.astype(int) + p.B + p.H) == 1).all()


@given(small_masks())
def test_guarding_matches_oracle(mask):
    D = np.ones(mask.shape)
    check = verify_guarding(D, mask, 1.0, 1.0)
    assert bool(check) == oracle_guarding(mask)
    if not check:
        path = check.escape_path
        assert path[0] == (0, 0) and path[-1] == (mask.shape[0] - 1, mask.shape[1] - 1)
        assert not any(mask[c] for c in path)
        assert all((b[0] - a[0], b[1] - a[1]) in MOVES for a, b in zip(path, path[1:]))


# -------------------------------------------------------------- avoidable


def test_avoidable_hand_instance():
    # (1, 1) is passed on the left via (1, 0) -> (2, 1) -> (2, 2) and on the
    # right via (0, 2) -> (1, 2) -> (2, 2)
    B = {(1, 1), (2, 2)}
    assert find_avoidable((3, 3), B) == {(1, 1)}
    assert remove_avoidable((3, 3), B).nonzero() == (np.array([2]), np.array([2]))


def test_avoidable_trivial():
    assert find_avoidable((4, 4), {(0, 0)}) == set()


def test_remove_avoidable_noop():
    D = np.ones((3, 3))
    gs = GuardingSet(np.eye(3, dtype=bool)[::-1].copy(), 1.0, 1.0)
    assert find_avoidable(D, gs) == set()
    out = remove_avoidable(D, gs)
    assert (out.mask == gs.mask).all() and out.meta["avoidable_removed"] == 0


@given(small_masks())
@settings(max_examples=120)
def test_avoidable_matches_oracle(mask):
    assert find_avoidable(mask.shape, mask) == oracle_avoidable(mask)


@given(curve_pairs(d=2, max_len=8))
def test_remove_avoidable_keeps_guarding(pair):
    P, Q = pair
    D = distance_matrix(P, Q)
    delta = discrete_frechet(P, Q).value
    gs = build_guarding(D, delta)
    out = remove_avoidable(D, gs)
    assert verify_guarding(D, out, 1.0, delta)
    assert find_avoidable(D, out) == set()
    assert out.size <= gs.size


# ----------------------------------------------------------------- trimming


def hand_trim_instance():
    # 1-based rows counted from the bottom (row 1 is p_1), columns from the left
    before = {(2, 1), (2, 4), (2, 5), (3, 4), (4, 2), (4, 5), (5, 3), (5, 4), (5, 5)}
    free = {(1, j) for j in range(1, 6)} | {(2, 2), (2, 3), (3, 2), (3, 3), (4, 3), (4, 4)}
    D = np.ones((5, 5))
    for i, j in free:
        D[i - 1, j - 1] = 0.2
    # free cells of the trimmed row sit between b/2 and b
    D[1, 1], D[1, 2] = 0.7, 0.6
    mask = np.zeros((5, 5), dtype=bool)
    for i, j in before:
        mask[i - 1, j - 1] = True
    return D, mask


def test_trim_row_hand_instance():
    D, mask = hand_trim_instance()
    assert verify_guarding(D, mask, 1.0, 1.0)
    out = trim_row(D, GuardingSet(mask, 1.0, 1.0), 1, 1.0)
    assert sorted((i + 1, j + 1) for i, j in out.pairs) == [(2, j) for j in range(1, 6)]
    step = out.meta["last_trim"]
    assert step.radius == 0.55
    assert step.J == [(0, 4)] and step.filling == [(1, 1), (1, 2)]
    assert out.row_groups == {1: [(0, 4)]}
    assert verify_guarding(D, out, 2.0, 1.0)


def test_trim_row_fixed_radius_blocks_merge():
    D, mask = hand_trim_instance()
    out = trim_row(D, mask, 1, 1.0, r=0.65)
    # (2, 3) at 0.6 now splits the row; nothing on the left merges
    assert out[1].tolist() == [True, False, False, True, True]
    with pytest.raises(ValueError):
        trim_row(D, mask, 1, 1.0, r=0.4)


def test_trim_row_empty_and_range():
    D, mask = hand_trim_instance()
    assert (trim_row(D, mask, 0, 1.0) == mask).all()
    with pytest.raises(IndexError):
        trim_row(D, mask, 5, 1.0)


def test_trim_row_member_too_close():
    D, mask = hand_trim_instance()
    with pytest.raises(ContractError):
        trim_row(D, mask, 1, 1.5)


@given(curve_pairs(d=2, min_len=2, max_len=12))
def test_trim_row_filling_far_enough(pair):
    P, Q = pair
    D = distance_matrix(P, Q)
    delta = discrete_frechet(P, Q).value
    if delta == 0:
        return
    gs = remove_avoidable(D, build_guarding(D, delta))
    for i in range(D.shape[0]):
        out = trim_row(D, gs, i, delta, P, Q)
        for cell in out.meta["last_trim"].filling:
            assert D[cell] >= delta / 2
        assert verify_guarding(D, out, 2.0, delta)


@given(curve_pairs(d=2, min_len=2, max_len=14))
def test_trim_full_random(pair):
    P, Q = pair
    if discrete_frechet(P, Q).value == 0:
        with pytest.raises(DegenerateDistanceError):
            trim_full(P, Q)
        return
    gs = trim_full(P, Q)
    D = distance_matrix(P, Q)
    assert gs.theta == 4.0
    assert verify_guarding(D, gs, 4.0, gs.delta)
    assert predecessor_violations(gs) == []
    assert gs.meta["avoidable_after"] == []


def test_trim_full_identical_curves():
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(DegenerateDistanceError):
        trim_full(P, P.copy())


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("t", [5, 20, 60])
def test_trim_full_wedge(t, alpha):
    P, Q, _ = gen_wedge(WedgeSpec(t, alpha))
    c_hat = max(packedness_estimate(P).estimate, packedness_estimate(Q).estimate)
    gs = trim_full(P, Q, c_hint=3.0)
    assert verify_guarding(distance_matrix(P, Q), gs, 4.0, gs.delta)
    assert gs.size <= 13 * (2 * t + 1) == gs.meta["size_bound"]
    rep = extended_groups(gs)
    assert rep.col_counts.max() <= c_hat + 1
    assert rep.row_counts.max() <= c_hat + 2


@pytest.mark.parametrize("k", [2, 6, 12])
def test_trim_full_star(k):
    P, Q, _ = gen_star(StarSpec(k, True))
    gs = trim_full(P, Q)
    assert verify_guarding(distance_matrix(P, Q), gs, 4.0, gs.delta)


def test_trim_matrix_on_fork():
    D = gen_fork_matrix(ForkSpec(12))
    gs = trim_matrix(D)
    assert verify_guarding(D, gs, 4.0, 1.0)


# -------------------------------------------------------------- validators


def test_verify_empty_set():
    check = verify_guarding(np.ones((3, 2)), set(), 1.0, 1.0)
    assert not check and check.escape_path is not None
    assert "traversal avoiding B" in check.describe()


def test_verify_start_only():
    D = np.array([[5.0, 0.0], [0.0, 0.0]])
    assert verify_guarding(D, {(0, 0)}, 1.0, 5.0)
    bad = verify_guarding(D, {(0, 0)}, 1.0, 6.0)
    assert not bad.distance_ok and bad.bad_members == [(0, 0)]


def test_mutation_flips_minimal_sets():
    rng = np.random.default_rng(5)
    for _ in range(30):
        P, Q = rng.normal(size=(9, 2)), rng.normal(size=(8, 2))
        D = distance_matrix(P, Q)
        delta = discrete_frechet(P, Q).value
        mask = minimal_guarding(build_guarding(D, delta).mask)
        assert verify_guarding(D, mask, 1.0, delta)
        for i, j in zip(*np.nonzero(mask)):
            mask[i, j] = False
            assert not verify_guarding(D, mask, 1.0, delta).guarding_ok
            mask[i, j] = True


def test_predecessor_violation_detected():
    mask = np.zeros((3, 3), dtype=bool)
    mask[0, 1] = mask[1, 0] = mask[1, 1] = mask[2, 2] = True
    assert predecessor_violations(mask) == [(2, 2)]
    assert predecessor_violations(np.eye(1, dtype=bool)) == []


def test_extended_groups_rows_and_columns():
    mask = np.zeros((8, 3), dtype=bool)
    mask[[0, 1, 3, 5, 6], 0] = True
    mask[2, :] = True
    rep = extended_groups(mask, {2: [(0, 2)]}, {0: [(0, 3)]})
    assert rep.col_counts.tolist() == [2, 1, 1]
    assert rep.col_runs[0] == [(0, 3), (5, 6)]
    assert rep.row_counts[2] == 1
    # without the merged interval the runs count separately
    rep = extended_groups(mask, {}, {})
    assert rep.col_counts[0] == 2
    mask[4, 0] = False
    mask[2, 0] = False
    rep = extended_groups(mask, {}, {0: [(0, 3)]})
    assert rep.col_counts[0] == 2
    rep = extended_groups(mask, {}, {})
    assert rep.col_counts[0] == 3


def test_extended_groups_need_intervals():
    with pytest.raises(ContractError):
        extended_groups(np.eye(3, dtype=bool))


def test_theorem_bound_values():
    assert theorem_bound(2, 2, 0.5, 10) == 800
    assert theorem_bound(3, 2, 0.5, 10) == 800
    assert theorem_bound(4, 2, 0.5, 10) == pytest.approx(800 * (1 + 2 / math.pi))
    assert round(theorem_bound(5, 2, 0.5, 10), 1) == 1309.3


@pytest.mark.parametrize("args", [(1, 2, 0.5, 1), (2, 1.5, 0.5, 1), (2, 2, 1.0, 1), (2, 2, 0.5, 0)])
def test_theorem_bound_ranges(args):
    with pytest.raises(ValueError):
        theorem_bound(*args)


@given(st.floats(2, 50), st.floats(0.01, 0.99), st.integers(1, 500))
def test_theorem_bound_monotone(c, gamma, t):
    base = theorem_bound(2, c, gamma, t)
    assert theorem_bound(2, c + 1, gamma, t) > base
    assert theorem_bound(2, c, gamma, t + 1) > base
    assert theorem_bound(2, c, gamma * 0.5, t) > base


def test_write_guarding(tmp_path):
    P, Q, _ = gen_wedge(WedgeSpec(4, 0.5))
    gs = trim_full(P, Q)
    D = distance_matrix(P, Q)
    side = write_guarding(tmp_path / "g.csv", tmp_path / "g.json", D, gs)
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[0] == "i,j,delta_ij" and len(lines) == gs.size + 1
    for line, (i, j) in zip(lines[1:], gs.pairs):
        a, b, v = line.split(",")
        assert (int(a), int(b)) == (i, j) and float(v) == D[i, j]
    on_disk = json.loads((tmp_path / "g.json").read_text())
    assert on_disk == side
    assert set(on_disk) == {"theta", "delta", "size", "row_groups", "col_groups"}
    assert len(on_disk["row_groups"]) == D.shape[0] and len(on_disk["col_groups"]) == D.shape[1]


def test_write_guarding_without_groups(tmp_path):
    D = gen_fork_matrix(ForkSpec(6))
    side = write_guarding(None, tmp_path / "g.json", D, build_guarding(D, 1.0))
    assert side["row_groups"] is None and not (tmp_path / "g.csv").exists()
