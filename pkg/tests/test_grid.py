import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowmode import InvalidArgument, discrete_h1_seminorm, discrete_l2_norm, make_grid, sample_field
from lowmode.errors import EvaluationError
from lowmode.grid import node_index, node_of_index


def sinsin(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


@pytest.mark.parametrize("m, h, N", [(1, 0.5, 1), (255, 1 / 256, 65025), (127, 1 / 128, 16129)])
def test_make_grid_sizes(m, h, N):
    g = make_grid(m)
    assert g.h == h
    assert g.N == N


@pytest.mark.parametrize("bad", [0, -3, 2.5, True, "7", [3]])
def test_make_grid_rejects(bad):
    with pytest.raises((InvalidArgument, TypeError, ValueError)):
        make_grid(bad)


def test_make_grid_zero_is_invalid_argument():
    with pytest.raises(InvalidArgument):
        make_grid(0)


@pytest.mark.parametrize("i, j, k", [(1, 1, 0), (4, 1, 3), (1, 2, 4)])
def test_node_index_examples(i, j, k):
    assert node_index(i, j, make_grid(4)) == k


@pytest.mark.parametrize("i, j", [(0, 1), (1, 5), (5, 5), (1, 0)])
def test_node_index_out_of_range(i, j):
    with pytest.raises(InvalidArgument):
        node_index(i, j, make_grid(4))


def test_node_index_bijection_exhaustive():
    for m in range(1, 65):
        g = make_grid(m)
        seen = [node_index(i, j, g) for j in range(1, m + 1) for i in range(1, m + 1)]
        assert seen == list(range(g.N))
        assert all(node_of_index(node_index(i, j, g), g) == (i, j)
                   for j in range(1, m + 1) for i in range(1, m + 1))


def test_sample_field_examples():
    assert np.array_equal(sample_field(make_grid(5), lambda x, y: 0 * x), np.zeros(25))
    assert sample_field(make_grid(1), sinsin)[0] == pytest.approx(1.0, abs=1e-15)
    g = make_grid(3)
    v = sample_field(g, lambda x, y: x * y)
    assert v[node_index(2, 2, g)] == 0.25


def test_sample_field_reports_bad_node():
    g = make_grid(3)
    with pytest.raises(EvaluationError) as exc:
        sample_field(g, lambda x, y: np.where((x == 0.5) & (y == 0.75), np.nan, 1.0))
    assert exc.value.point == (0.5, 0.75)


def test_l2_norm_examples():
    g = make_grid(3)
    assert discrete_l2_norm(g, np.ones(9)) == pytest.approx(0.75, rel=1e-15)
    assert discrete_l2_norm(g, np.zeros(9)) == 0.0
    g = make_grid(255)
    assert discrete_l2_norm(g, sample_field(g, sinsin)) == pytest.approx(0.5, abs=1e-4)


def test_h1_seminorm_examples():
    assert discrete_h1_seminorm(make_grid(7), np.zeros(49)) == 0.0
    assert discrete_h1_seminorm(make_grid(1), np.ones(1)) == pytest.approx(2.0, rel=1e-15)
    for m in (127, 255):
        g = make_grid(m)
        val = discrete_h1_seminorm(g, sample_field(g, sinsin))
        assert val == pytest.approx(math.pi / math.sqrt(2), rel=1e-2)


def test_norm_shape_mismatch():
    with pytest.raises(InvalidArgument):
        discrete_l2_norm(make_grid(3), np.ones(8))


def test_norms_converge_at_expected_orders():
    # continuum values: ||u||_L2 = 1/2, |u|_H1 = pi/sqrt(2)
    e_l2, e_h1 = [], []
    for m in (31, 63, 127, 255):
        g = make_grid(m)
        v = sample_field(g, sinsin)
        e_l2.append(abs(discrete_l2_norm(g, v) - 0.5))
        e_h1.append(abs(discrete_h1_seminorm(g, v) - math.pi / math.sqrt(2)))
    # the sampled L2 norm of this mode is exact for every m
    assert max(e_l2) < 1e-14
    rates = np.log2(np.array(e_h1[:-1]) / np.array(e_h1[1:]))
    assert np.all(rates > 0.9)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 20), alpha=st.floats(-1e3, 1e3, allow_nan=False), seed=st.integers(0, 2 ** 32 - 1))
def test_norms_absolutely_homogeneous(m, alpha, seed):
    g = make_grid(m)
    v = np.random.default_rng(seed).standard_normal(g.N)
    for norm in (discrete_l2_norm, discrete_h1_seminorm):
        assert norm(g, alpha * v) == pytest.approx(abs(alpha) * norm(g, v), rel=1e-13, abs=1e-300)
