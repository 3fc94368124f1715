"""Vector space loading and primitives."""

import math

import numpy as np
import pytest

from portrayal.errors import DimensionMismatch, EmptyFile, TooFewWords, ZeroNorm
from portrayal.spaces import cosine, load_space, load_spaces, mean_vector
from util import make_space, random_unit


class TestLoadSpace:
    def test_three_word_fixture(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("cat 1 0 0 0\ndog 0 1 0 0\neel 0 0 1 0\n")
        space = load_space(path, 1850)
        assert len(space) == 3 and space.dim == 4
        assert np.array_equal(space.vectors["dog"], [0, 1, 0, 0])

    def test_dimension_mismatch(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("cat 1 0 0 0\ndog 0 1 0\n")
        with pytest.raises(DimensionMismatch):
            load_space(path, 1850)

    def test_duplicate_last_wins_with_warning(self, tmp_path, caplog):
        path = tmp_path / "vec.txt"
        path.write_text("cat 1 0\ncat 0 1\n")
        with caplog.at_level("WARNING"):
            space = load_space(path, 1850)
        assert len(space) == 1
        assert np.array_equal(space.vectors["cat"], [0, 1])
        assert any("duplicate" in r.message for r in caplog.records)

    def test_zero_vector_flagged(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("cat 0 0\ndog 1 0\n")
        space = load_space(path, 1850)
        assert space.zero_words == {"cat"}
        assert not space.usable("cat") and space.usable("dog")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("")
        with pytest.raises(EmptyFile):
            load_space(path, 1850)

    def test_count_header_tolerated(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("2 3\ncat 1 0 0\ndog 0 1 0\n")
        assert len(load_space(path, 1850)) == 2

    def test_cross_decade_dim_enforced(self, tmp_path):
        (tmp_path / "a.txt").write_text("cat 1 0\n")
        (tmp_path / "b.txt").write_text("cat 1 0 0\n")
        with pytest.raises(DimensionMismatch):
            load_spaces({1850: tmp_path / "a.txt", 1860: tmp_path / "b.txt"})


class TestCosine:
    def test_identical_vectors(self):
        v = np.array([1.0, 2.0, 3.0])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_hand_value(self):
        assert cosine(np.array([1.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(
            math.sqrt(0.5), abs=1e-4
        )

    def test_zero_norm(self):
        with pytest.raises(ZeroNorm):
            cosine(np.zeros(3), np.ones(3))

    def test_symmetry_and_scale_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            u, v = rng.standard_normal(6), rng.standard_normal(6)
            a, b = rng.uniform(0.1, 9.0, size=2)
            assert cosine(u, v) == pytest.approx(cosine(v, u), abs=1e-12)
            assert cosine(a * u, b * v) == pytest.approx(cosine(u, v), abs=1e-12)
            assert -1.0 - 1e-12 <= cosine(u, v) <= 1.0 + 1e-12


class TestMeanVector:
    def test_simple_mean(self):
        space = make_space({"a": [1, 0], "b": [0, 1]})
        mean, used = mean_vector(["a", "b"], space)
        assert np.allclose(mean, [0.5, 0.5])
        assert used == ["a", "b"]

    def test_too_few_words(self):
        space = make_space({"a": [1, 0]})
        with pytest.raises(TooFewWords):
            mean_vector(["a", "zzz"], space, min_present=3)

    def test_partial_presence(self):
        space = make_space({"a": [1, 0], "b": [0, 1], "c": [1, 1]})
        mean, used = mean_vector(["a", "b", "c", "d", "e"], space, min_present=3)
        assert len(used) == 3
        assert np.allclose(mean, [2 / 3, 2 / 3])

    def test_permutation_invariance(self):
        space = make_space({"a": [1, 0], "b": [0, 1], "c": [2, 2]})
        m1, _ = mean_vector(["a", "b", "c"], space)
        m2, _ = mean_vector(["c", "a", "b"], space)
        assert np.allclose(m1, m2, atol=1e-15)

    def test_duplicates_dropped(self):
        space = make_space({"a": [1, 0], "b": [0, 1]})
        mean, used = mean_vector(["a", "a", "b"], space)
        assert used == ["a", "b"]
        assert np.allclose(mean, [0.5, 0.5])


def test_random_unit_helper():
    rng = np.random.default_rng(0)
    assert np.linalg.norm(random_unit(rng, 8)) == pytest.approx(1.0, abs=1e-12)
