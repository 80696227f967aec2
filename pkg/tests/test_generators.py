import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from frechetproj.generators import (
    ForkSpec,
    StarSpec,
    WedgeSpec,
    fork_bits,
    fork_count,
    gen_fork_matrix,
    gen_random_walk,
    gen_star,
    gen_wedge,
    hat_radius,
    star_curve,
)
from frechetproj.geom import project_curve, sample_unit_vectors
from frechetproj.metrics import discrete_frechet, dtw


def arc_length(P):
    return float(np.linalg.norm(np.diff(P, axis=0), axis=1).sum())


def test_wedge_thirty_degrees():
    P, Q, info = gen_wedge(WedgeSpec(5, math.pi / 6))
    assert abs(discrete_frechet(P, Q).value - 0.5) < 1e-12
    assert abs(dtw(P, Q).value - 2.5) < 1e-12
    assert info["frechet"] == math.sin(math.pi / 6) and info["dtw"] == 5 * math.sin(math.pi / 6)


@given(st.integers(1, 40), st.floats(0.01, 1.5))
def test_wedge_shape(t, alpha):
    P, Q, info = gen_wedge(WedgeSpec(t, alpha))
    assert P.shape == Q.shape == (2 * t + 1, 2)
    assert abs(arc_length(P) - 2 * math.cos(alpha)) < 1e-12
    assert abs(arc_length(Q) - 2.0) < 1e-12
    assert np.allclose(np.diff(P, axis=0), P[1] - P[0], atol=1e-15)
    assert (P[0] == Q[0]).all() and np.allclose(P[-1], Q[-1], atol=1e-15)
    assert np.allclose(Q[t], [math.cos(alpha), math.sin(alpha)])
    assert abs(discrete_frechet(P, Q).value - math.sin(alpha)) < 1e-12
    assert info["vertices"] == 2 * t + 1


@pytest.mark.parametrize("bad", [WedgeSpec(0, 0.5), WedgeSpec(3, 0.0), WedgeSpec(3, math.pi / 2)])
def test_wedge_ranges(bad):
    with pytest.raises(ValueError):
        gen_wedge(bad)


def test_star_twelve():
    P, Q, info = gen_star(StarSpec(12, True))
    assert P.shape == Q.shape == (53, 2)
    assert info["frechet_continuous"] == 1 / (2 * math.cos(math.pi / 13))
    assert abs(info["frechet_continuous"] - 0.514964) < 1e-6
    assert discrete_frechet(P, Q).value >= 0.5
    assert info["lower_bound_factor"] == (53 - 5) / (16 * math.pi)


@pytest.mark.parametrize("k", [2, 4, 6, 8, 10])
def test_star_vertex_counts(k):
    P, Q, info = gen_star(StarSpec(k))
    assert len(star_curve(k)) == 2 * k + 1
    assert P.shape == Q.shape == (2 * k + 3, 2)
    assert info["lower_bound_factor"] == (2 * k) / (8 * math.pi)
    Ph, Qh, info = gen_star(StarSpec(k, True))
    assert len(star_curve(k, True, hat_radius(k))) == 4 * k + 1
    assert Ph.shape == (4 * k + 5, 2)
    # padding repeats the first vertex
    assert (Ph[4 * k + 1 :] == Ph[0]).all()


def test_star_geometry():
    P = star_curve(4, True, hat_radius(4))
    r = np.linalg.norm(P, axis=1)
    assert set(np.round(r, 12)) == {0.0, 1.0, round(hat_radius(4), 12)}
    assert (P[0] == P[-1]).all()


def test_star_odd_k():
    with pytest.raises(ValueError):
        gen_star(StarSpec(3))


@pytest.mark.parametrize("k", [2, 6, 12])
def test_star_projection_lower_bound(k):
    P, Q, info = gen_star(StarSpec(k, True))
    base = discrete_frechet(P, Q).value
    U = sample_unit_vectors(2, 1000, np.random.default_rng(k))
    for u in U:
        proj = discrete_frechet(project_curve(P, u), project_curve(Q, u)).value
        ratio = math.inf if proj == 0 else base / proj
        assert ratio >= info["lower_bound_factor"]


def test_fork_pattern():
    t = 6
    F = fork_bits(t)
    for j in range(1, t + 1):
        col = F[:, j - 1]
        if j % 3 == 1:
            assert col[:-1].all() and not col[-1]
        else:
            assert col[0] and not col[1:].any()
    D = gen_fork_matrix(ForkSpec(t, delta=2.5))
    assert set(np.unique(D)) == {0.0, 2.5}
    assert ((D == 0) == F).all()


def test_fork_ranges():
    with pytest.raises(ValueError):
        fork_bits(2)
    with pytest.raises(ValueError):
        gen_fork_matrix(ForkSpec(6, delta=0))
    with pytest.raises(ValueError):
        gen_fork_matrix(ForkSpec(6, theta=0.5))


def test_fork_count_formula():
    assert [fork_count(t) for t in (6, 30)] == [10, 290]


def test_walk_single_point():
    assert (gen_random_walk(1, 3, 1.0, np.random.default_rng(0)) == 0).all()


def test_walk_zero_step():
    W = gen_random_walk(10, 2, 0.0, np.random.default_rng(0))
    assert (W == 0).all()


@given(st.integers(2, 60), st.sampled_from([2, 3, 4, 5]), st.floats(0.01, 10), st.integers(0, 2**32 - 1))
def test_walk_steps(t, d, step, seed):
    W = gen_random_walk(t, d, step, np.random.default_rng(seed))
    assert W.shape == (t, d) and (W[0] == 0).all()
    assert np.allclose(np.linalg.norm(np.diff(W, axis=0), axis=1), step, atol=1e-12 * max(1, step * t))
    again = gen_random_walk(t, d, step, np.random.default_rng(seed))
    assert (W == again).all()


@pytest.mark.parametrize("args", [(0, 2, 1.0), (3, 1, 1.0), (3, 6, 1.0), (3, 2, -1.0)])
def test_walk_ranges(args):
    with pytest.raises(ValueError):
        gen_random_walk(*args, np.random.default_rng(0))
