import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from broadgen.matrices import (
    augment_and_normalize,
    build_anchor,
    build_query_distance,
    pairwise_cosine_distance,
    query_distance_matrix,
    shared_token_counts,
)

T = lambda s: tuple(s.split())  # noqa: E731


def test_anchor_examples():
    np.testing.assert_array_equal(build_anchor([T("a b")], T("a c")), [[1.0, 0.0]])
    np.testing.assert_array_equal(build_anchor([T("x")], T("a b")), [[0.0, 0.0]])
    np.testing.assert_array_equal(build_anchor([T("a b"), T("b")], T("a b")), [[0.5, 0.5], [0.0, 1.0]])


def test_anchor_repeated_title_token_is_per_position():
    a = build_anchor([T("a")], T("a b a"))
    np.testing.assert_allclose(a, [[0.5, 0.0, 0.5]])


def test_distance_examples():
    np.testing.assert_array_equal(build_query_distance([T("a b"), T("a b")]), np.zeros((2, 2)))
    np.testing.assert_array_equal(build_query_distance([T("a"), T("b")]), [[0, 1], [1, 0]])
    d = build_query_distance([T("a b c"), T("a b"), T("x")])
    np.testing.assert_allclose(d[0], [0, 1 / 3, 1])
    np.testing.assert_array_equal(shared_token_counts([T("a b c"), T("a b"), T("x")])[0], [3, 2, 0])


def test_distance_is_asymmetric():
    d = build_query_distance([T("a b c"), T("a b")])
    assert d[0, 1] == pytest.approx(1 / 3) and d[1, 0] == 0.0


def test_augment_examples():
    np.testing.assert_allclose(augment_and_normalize(np.array([[1.0]]), np.array([[0.0]])), [[1.0, 0.0]])
    np.testing.assert_array_equal(augment_and_normalize(np.array([[0.0]]), np.array([[0.0]])), [[0.0, 0.0]])
    np.testing.assert_allclose(augment_and_normalize(np.array([[0.6, 0.0]]), np.array([[0.8]])), [[0.6, 0.0, 0.8]])
    with pytest.raises(ValueError):
        augment_and_normalize(np.zeros((2, 1)), np.zeros((3, 3)))


def test_cosine_examples():
    assert pairwise_cosine_distance(np.array([[1.0, 0.0], [1.0, 0.0]]))[0, 1] == 0.0
    assert pairwise_cosine_distance(np.array([[1.0, 0.0], [0.0, 1.0]]))[0, 1] == 1.0
    r = 1 / np.sqrt(2)
    assert pairwise_cosine_distance(np.array([[1.0, 0.0], [r, r]]))[0, 1] == pytest.approx(1 - r, abs=1e-12)


def test_zero_row_is_unit_distance():
    d = pairwise_cosine_distance(np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert d[0, 1] == 1.0 and d[0, 0] == 0.0


token = st.sampled_from(list("abcdefg"))
queries = st.lists(st.lists(token, min_size=1, max_size=4).map(tuple), min_size=1, max_size=8)


@settings(max_examples=100, deadline=None)
@given(queries, st.lists(token, min_size=1, max_size=5).map(tuple))
def test_distance_matrix_properties(qs, title):
    d = query_distance_matrix(qs, title)
    n = len(qs)
    assert d.shape == (n, n)
    np.testing.assert_array_equal(d, d.T)
    np.testing.assert_array_equal(np.diag(d), 0.0)
    assert np.all((d >= 0) & (d <= 2))
    for i in range(n):
        for j in range(n):
            if qs[i] == qs[j]:
                assert d[i, j] == 0.0
