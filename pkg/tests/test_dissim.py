import math

import numpy as np
import pytest

import oracles
from dsom.dissim import (
    BinaryTable,
    DissimMatrix,
    ModalTable,
    ModalVariable,
    affinity_dissimilarity,
    jaccard_dissimilarity,
    read_matrix,
    read_points,
    require_valid,
    squared_euclidean_matrix,
    validate_matrix,
    write_matrix,
    write_points,
)


def _modal(counts, weights=None, names=None):
    counts = [np.asarray(c, dtype=float) for c in counts]
    n = counts[0].shape[0]
    return ModalTable(
        labels=[f"o{i}" for i in range(n)],
        variables=[
            ModalVariable(name=(names[j] if names else f"v{j}"), modalities=[], counts=c)
            for j, c in enumerate(counts)
        ],
        weights=None if weights is None else np.asarray(weights, dtype=float),
    )


# ------------------------------------------------------------ squared euclid


def test_squared_euclidean_scalar_example():
    m = squared_euclidean_matrix(np.array([[0.0], [1.0], [3.0]]))
    assert np.array_equal(m.values, [[0.0, 1.0, 9.0], [1.0, 0.0, 4.0], [9.0, 4.0, 0.0]])
    assert m.labels == ["0", "1", "2"]


def test_squared_euclidean_matches_gram_identity():
    rng = np.random.default_rng(7)
    for _ in range(10):
        pts = rng.normal(size=(rng.integers(2, 40), rng.integers(1, 6)))
        direct = squared_euclidean_matrix(pts).values
        gram = oracles.sq_euclidean_gram(pts)
        assert np.allclose(direct, gram, rtol=1e-9, atol=1e-9)


def test_squared_euclidean_exactly_valid():
    rng = np.random.default_rng(8)
    pts = rng.normal(size=(30, 4)) * 1e3
    m = squared_euclidean_matrix(pts)
    assert validate_matrix(m).ok  # exact symmetry, exact zero diagonal


# ----------------------------------------------------------------- affinity


def test_affinity_single_variable_example():
    m = affinity_dissimilarity(_modal([[[4.0, 0.0], [1.0, 1.0]]]))
    expected = 2.0 * (1.0 - math.sqrt(0.5))
    assert m.values[0, 1] == pytest.approx(expected, abs=1e-12)
    assert m.values[0, 1] == pytest.approx(0.5857864376269049, abs=1e-12)


def test_affinity_identical_profiles_are_zero():
    m = affinity_dissimilarity(_modal([[[2.0, 6.0], [1.0, 3.0]]]))
    assert abs(m.values[0, 1]) <= 1e-12


def test_affinity_disjoint_profiles_hit_two():
    m = affinity_dissimilarity(_modal([[[5.0, 0.0], [0.0, 3.0]]]))
    assert m.values[0, 1] == pytest.approx(2.0, abs=1e-12)


def test_affinity_scale_invariance():
    rng = np.random.default_rng(11)
    counts = rng.integers(1, 9, size=(6, 4)).astype(float)
    base = affinity_dissimilarity(_modal([counts])).values
    for alpha in (1000.0, 1e-6, 7.3):
        scaled = affinity_dissimilarity(_modal([counts * alpha])).values
        assert np.max(np.abs(scaled - base)) <= 1e-12


def test_affinity_matches_pairwise_oracle():
    rng = np.random.default_rng(12)
    c1 = rng.integers(0, 7, size=(5, 3)).astype(float) + rng.random((5, 3))
    c1[c1.sum(axis=1) == 0, 0] = 1.0
    c2 = rng.integers(1, 5, size=(5, 2)).astype(float)
    m = affinity_dissimilarity(_modal([c1, c2]))
    for i in range(5):
        for k in range(5):
            a = 0.5 * oracles.affinity_pair(c1[i], c1[k]) + 0.5 * oracles.affinity_pair(
                c2[i], c2[k]
            )
            assert m.values[i, k] == pytest.approx(2.0 * (1.0 - a), abs=1e-12)


def test_affinity_weights_normalized():
    counts = [[[1.0, 2.0], [3.0, 1.0]], [[2.0, 2.0], [1.0, 5.0]]]
    default = affinity_dissimilarity(_modal(counts)).values
    scaled = affinity_dissimilarity(_modal(counts, weights=[3.0, 3.0])).values
    assert np.allclose(default, scaled, atol=1e-15)
    with pytest.raises(ValueError):
        affinity_dissimilarity(_modal(counts, weights=[1.0]))
    with pytest.raises(ValueError):
        affinity_dissimilarity(_modal(counts, weights=[-1.0, 2.0]))


def test_affinity_rejects_empty_rows_and_negatives():
    with pytest.raises(ValueError, match="no occurrences"):
        affinity_dissimilarity(_modal([[[1.0, 1.0], [0.0, 0.0]]]))
    with pytest.raises(ValueError, match="negative"):
        affinity_dissimilarity(_modal([[[1.0, -1.0], [1.0, 1.0]]]))
    with pytest.raises(ValueError, match="variables"):
        affinity_dissimilarity(ModalTable(labels=["a"], variables=[]))


def test_affinity_output_is_valid_and_bounded():
    rng = np.random.default_rng(13)
    for _ in range(10):
        counts = rng.integers(0, 6, size=(8, 5)).astype(float)
        counts[:, 0] += 1.0  # keep every row occupied
        m = affinity_dissimilarity(_modal([counts]))
        assert validate_matrix(m).ok
        assert m.values.max() <= 2.0


# ------------------------------------------------------------------ jaccard


def _binary(rows):
    bits = np.asarray(rows, dtype=np.uint8)
    return BinaryTable(
        row_labels=[f"r{i}" for i in range(bits.shape[0])],
        col_labels=[f"c{j}" for j in range(bits.shape[1])],
        bits=bits,
    )


def test_jaccard_worked_example():
    m = jaccard_dissimilarity(_binary([[1, 0, 1], [1, 1, 0]]))
    assert m.values[0, 1] == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_jaccard_identical_and_disjoint_rows():
    m = jaccard_dissimilarity(_binary([[1, 1, 0], [1, 1, 0], [0, 0, 1]]))
    assert m.values[0, 1] == 0.0
    assert m.values[0, 2] == 1.0


def test_jaccard_all_zero_rows_warn_and_match():
    with pytest.warns(RuntimeWarning):
        m = jaccard_dissimilarity(_binary([[0, 0], [0, 0], [1, 0]]))
    assert m.values[0, 1] == 0.0
    assert m.values[0, 2] == 1.0  # zero row vs occupied row shares nothing


def test_jaccard_matches_pairwise_oracle():
    rng = np.random.default_rng(17)
    rows = (rng.random((9, 12)) < 0.4).astype(np.uint8)
    rows[:, 0] = 1
    m = jaccard_dissimilarity(_binary(rows))
    assert validate_matrix(m).ok
    for i in range(9):
        for k in range(9):
            assert m.values[i, k] == pytest.approx(
                1.0 - oracles.jaccard_pair(rows[i], rows[k]), abs=1e-15
            )


def test_jaccard_rejects_non_binary():
    with pytest.raises(ValueError):
        jaccard_dissimilarity(_binary([[0, 2], [1, 0]]))


# --------------------------------------------------------------- validation


def _matrix(values, labels=None):
    values = np.asarray(values, dtype=float)
    return DissimMatrix(values, labels or [str(i) for i in range(values.shape[0])])


def test_validate_flags_each_violation():
    assert validate_matrix(_matrix([[0.0, 1.0], [1.0, 0.0]])).ok
    assert not validate_matrix(_matrix([[0.0, -1.0], [-1.0, 0.0]])).ok
    assert not validate_matrix(_matrix([[0.0, 1.0], [2.0, 0.0]])).ok
    assert not validate_matrix(_matrix([[1.0, 1.0], [1.0, 0.0]])).ok
    assert not validate_matrix(_matrix([[0.0, np.nan], [np.nan, 0.0]])).ok
    assert not validate_matrix(_matrix(np.zeros((2, 3)))).ok
    assert not validate_matrix(_matrix(np.zeros((2, 2)), labels=["a"])).ok


def test_require_valid_raises_with_location():
    with pytest.raises(ValueError, match="asymmetric"):
        require_valid(_matrix([[0.0, 1.0], [2.0, 0.0]]))


# ------------------------------------------------------------------- files


def test_matrix_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(19)
    values = oracles.random_dissim(rng, 12, scale=1e8)
    m = DissimMatrix(values, [f"obs-{i}" for i in range(12)])
    path = tmp_path / "m.dissim"
    write_matrix(m, path)
    back = read_matrix(path)
    assert np.array_equal(back.values, m.values)
    assert back.labels == m.labels


def test_matrix_file_layout(tmp_path):
    m = _matrix([[0.0, 1.5], [1.5, 0.0]], labels=["a", "b"])
    path = tmp_path / "m.dissim"
    write_matrix(m, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "dissim v1 2"
    assert lines[1] == "a,b"
    assert lines[2] == "0.0,1.5"


def test_matrix_read_rejects_malformed(tmp_path):
    path = tmp_path / "bad.dissim"

    def roundtrip(text):
        path.write_text(text)
        with pytest.raises(ValueError):
            read_matrix(path)

    roundtrip("")
    roundtrip("wrong v9 2\na,b\n0.0,1.0\n1.0,0.0\n")
    roundtrip("dissim v1 2\na\n0.0,1.0\n1.0,0.0\n")  # label count
    roundtrip("dissim v1 2\na,b\n0.0,1.0\n")  # missing row
    roundtrip("dissim v1 2\na,b\n0.0,1.0\n1.0,x\n")  # bad value
    roundtrip("dissim v1 2\na,b\n0.0,1.0\n2.0,0.0\n")  # asymmetric
    roundtrip("dissim v1 2\na,b\n0.0,-1.0\n-1.0,0.0\n")  # negative


def test_write_rejects_invalid_matrix_and_labels(tmp_path):
    with pytest.raises(ValueError):
        write_matrix(_matrix([[0.0, 1.0], [2.0, 0.0]]), tmp_path / "x")
    with pytest.raises(ValueError):
        write_matrix(_matrix(np.zeros((2, 2)), labels=["a,b", "c"]), tmp_path / "x")


def test_points_roundtrip(tmp_path):
    rng = np.random.default_rng(23)
    pts = rng.normal(size=(7, 3))
    labels = [f"p{i}" for i in range(7)]
    path = tmp_path / "pts.csv"
    write_points(pts, labels, path)
    back, back_labels = read_points(path)
    assert np.array_equal(back, pts)
    assert back_labels == labels
    with pytest.raises(ValueError):
        write_points(pts, labels[:-1], tmp_path / "short.csv")
