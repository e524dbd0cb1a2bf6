import numpy as np
import pytest

from tokclust import CondensedDistanceMatrix, ZeroNormVector, cosine_distance, pairwise_distances


def test_identical_vectors_have_zero_distance():
    assert cosine_distance(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0])) == 0.0


def test_orthogonal_vectors_have_distance_one():
    assert cosine_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(1.0)


def test_antipodal_vectors_have_distance_two():
    assert cosine_distance(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == pytest.approx(2.0)


def test_zero_norm_vector_raises():
    with pytest.raises(ZeroNormVector):
        cosine_distance(np.zeros(3), np.ones(3))
    with pytest.raises(ZeroNormVector):
        cosine_distance(np.ones(3), np.full(3, 1e-13))


def test_pairwise_identical_rows():
    dm = pairwise_distances(np.array([[1.0, 2.0], [1.0, 2.0]]))
    assert dm.n == 2
    np.testing.assert_allclose(dm.values, [0.0])


def test_pairwise_standard_basis():
    dm = pairwise_distances(np.eye(3))
    np.testing.assert_allclose(dm.values, [1.0, 1.0, 1.0])


def test_pairwise_matches_per_pair_calls():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((8, 5))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    dm = pairwise_distances(x)
    for i in range(8):
        for j in range(i + 1, 8):
            assert dm.value(i, j) == pytest.approx(cosine_distance(x[i], x[j]), abs=1e-12)


def test_pairwise_rejects_zero_norm_row():
    x = np.ones((3, 4))
    x[1] = 0.0
    with pytest.raises(ZeroNormVector, match="row 1"):
        pairwise_distances(x)


def test_scale_invariance():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((6, 7))
    base = pairwise_distances(x)
    for c in (1e-6, 0.5, 3.0, 1e6):
        scaled = x.copy()
        scaled[2] *= c
        np.testing.assert_allclose(pairwise_distances(scaled).values, base.values, atol=1e-9)


def test_output_length_and_range():
    rng = np.random.default_rng(2)
    for n in (2, 5, 17):
        dm = pairwise_distances(rng.standard_normal((n, 3)))
        assert dm.values.shape == (n * (n - 1) // 2,)
        assert np.all(dm.values >= 0.0) and np.all(dm.values <= 2.0)


def test_condensed_index_map():
    dm = CondensedDistanceMatrix(values=np.arange(10, dtype=float), n=5)
    offset = 0
    for i in range(5):
        for j in range(i + 1, 5):
            assert dm.index(i, j) == offset
            assert dm.index(j, i) == offset
            assert dm.value(i, j) == offset
            offset += 1
    assert dm.value(3, 3) == 0.0


def test_condensed_square_round_trip():
    rng = np.random.default_rng(3)
    dm = pairwise_distances(rng.standard_normal((6, 4)))
    sq = dm.to_square()
    assert sq.shape == (6, 6)
    np.testing.assert_array_equal(sq, sq.T)
    assert np.all(np.diag(sq) == 0.0)
    for i in range(6):
        for j in range(6):
            assert sq[i, j] == dm.value(i, j)


def test_condensed_length_validation():
    with pytest.raises(ValueError):
        CondensedDistanceMatrix(values=np.zeros(4), n=4)
