import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rmsets import Dataset, Selection, UtilityVector, convex_hull_2d, kth_best_score, normalize_dataset, score, skyline
from rmsets.core import DegenerateDimensionError, dominates, skyline_indices, upper_hull_indices

from .conftest import A, B, C
from .strategies import point_arrays, weight_vectors


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset([[0.5, 1.2]])
    with pytest.raises(ValueError):
        Dataset(np.empty((0, 2)))
    with pytest.raises(ValueError):
        Dataset([[np.nan, 0.1]])
    d = Dataset([[0.1, 0.2], [0.3, 0.4]])
    assert d.n == 2 and d.dim == 2
    assert d[1].coords == (0.3, 0.4) and d[1].id == 1
    with pytest.raises(ValueError):
        d.points[0, 0] = 0.5  # read-only


def test_selection_rejects_duplicates(hotels):
    with pytest.raises(ValueError):
        Selection((1, 1))
    with pytest.raises(IndexError):
        Selection((7,)).validate(hotels)


def test_utility_vector():
    u = UtilityVector.l1([2.0, 2.0])
    assert u.weights == (0.5, 0.5) and u.normalized
    with pytest.raises(ValueError):
        UtilityVector((-0.1, 1.1))
    with pytest.raises(ValueError):
        UtilityVector((0.3, 0.3), normalized=True)


def test_normalize_examples():
    same = Dataset([[1.0, 0.2], [0.4, 1.0]])
    assert np.array_equal(normalize_dataset(same).points, same.points)
    assert normalize_dataset(Dataset([[0.5, 0.2]])).points.tolist() == [[1.0, 1.0]]
    with pytest.raises(DegenerateDimensionError):
        normalize_dataset(Dataset([[0.5, 0.0], [0.2, 0.0]]))


def test_normalize_random(rng):
    out = normalize_dataset(Dataset(rng.random((100, 4)))).points
    assert np.allclose(out.max(axis=0), 1.0, atol=1e-12)


def test_score_examples(hotels):
    assert score(hotels[A], [0.5, 0.5]) == pytest.approx(0.575)
    assert score(hotels[A], [1, 0]) == pytest.approx(0.8)
    assert score(hotels[A], [0, 0]) == 0.0
    with pytest.raises(ValueError):
        score(hotels[A], [1, 0, 0])


def test_kth_best_examples(hotels, rng):
    assert kth_best_score(hotels, [0.5, 0.5], 1) == (pytest.approx(0.6), B)
    assert kth_best_score(hotels, [0.5, 0.5], 4)[0] == pytest.approx(0.4)
    with pytest.raises(ValueError):
        kth_best_score(hotels, [0.5, 0.5], 5)
    data = Dataset(rng.random((20, 3)))
    w = rng.random(3)
    assert kth_best_score(data, w, 3)[0] == sorted(data.points @ w, reverse=True)[2]


def test_kth_best_tie_goes_to_lower_id():
    d = Dataset([[0.5, 0.5], [0.9, 0.1], [0.5, 0.5]])
    assert kth_best_score(d, [0.5, 0.5], 1) == (0.5, 0)
    assert kth_best_score(d, [0.5, 0.5], 2) == (0.5, 1)


def test_skyline_examples(hotels):
    assert skyline(hotels).indices == (A, B, C)
    assert skyline(Dataset([[0.3, 0.3]])).indices == (0,)
    assert skyline(Dataset([[0.3, 0.3], [0.3, 0.3]])).indices == (0,)


def _brute_skyline(P):
    keep = []
    for i, p in enumerate(P):
        if any(dominates(q, p) for q in P):
            continue
        if any(np.array_equal(P[j], p) for j in range(i)):
            continue
        keep.append(i)
    return keep


@given(point_arrays(max_n=25, grid=5))
def test_skyline_matches_brute_force(P):
    assert skyline_indices(P).tolist() == _brute_skyline(P)


@given(point_arrays(min_d=2, max_d=2, max_n=25, grid=8))
def test_skyline_2d_fast_path(P):
    assert skyline_indices(P).tolist() == _brute_skyline(P)


def test_hull_examples(hotels):
    assert [p.id for p in convex_hull_2d(hotels)] == [C, B, A]
    with pytest.raises(ValueError):
        convex_hull_2d(Dataset([[0.1, 0.2, 0.3]]))


@given(point_arrays(min_d=2, max_d=2, min_n=1, max_n=30, grid=20))
def test_hull_points_are_unique_maximisers(P):
    hull = upper_hull_indices(P)
    xs, ys = P[hull, 0], P[hull, 1]
    assert np.all(np.diff(xs) > 0) and np.all(np.diff(ys) < 0)
    # every skyline point off the hull is never the unique strict maximum
    a = np.linspace(0, 1, 2001)
    S = np.outer(a, P[:, 0]) + np.outer(1 - a, P[:, 1])
    best = S.max(axis=1)
    hull_best = S[:, hull].max(axis=1)
    assert np.allclose(best, hull_best, atol=1e-12)


@given(point_arrays(max_n=10, min_d=2), st.data())
def test_score_is_dot_product(P, data):
    w = data.draw(weight_vectors(P.shape[1]))
    d = Dataset(P)
    assert score(d[0], w) == pytest.approx(float(np.dot(P[0], w)))
