"""
Tests for the data model (datasets, populations, moment families) and the
seeded streams
"""

import numpy as np
import pytest

from parsimax.core import (
    Atom, Dataset, FinitePopulation, MomentSet, SymMatrix, population_moments, sample_moments,
)
from parsimax.core.data import pairwise_cross
from parsimax.core.streams import (
    DRAW_STREAM, WORKERS_ENV, block_sizes, derive_seed, ordered_map, stream, worker_count,
)
from parsimax.exc import ConfigError, DimensionMismatch, InvalidDataset, TooFewRows
from parsimax.harness import DgpConfig, generate


class TestDataset:
    """Validation and the design views"""

    def test_shapes_and_default_names(self):
        d = Dataset(np.arange(4.0), np.ones(4), np.arange(4.0) ** 2)
        assert (d.n, d.p, d.h) == (4, 1, 1)
        assert d.z_names == ('z1',)
        assert d.x_names == ('x1',)

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            Dataset(np.zeros(2), np.ones(2), np.arange(2.0))

    def test_row_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Dataset(np.zeros(5), np.ones(4), np.zeros(5))

    def test_non_finite_values(self):
        y = np.array([0.0, 1.0, np.nan, 2.0])
        with pytest.raises(InvalidDataset):
            Dataset(y, np.ones(4), np.arange(4.0))

    def test_arrays_are_read_only(self, dataset):
        with pytest.raises(ValueError):
            dataset.y[0] = 1.0

    def test_design_and_parsimonious_design(self, dataset):
        np.testing.assert_array_equal(dataset.design, np.hstack([dataset.z, dataset.x]))
        pars = dataset.parsimonious_design(2)
        assert pars.shape == (dataset.n, dataset.p + 1)
        np.testing.assert_array_equal(pars[:, -1], dataset.x[:, 2])

    def test_with_x_order_permutes_names(self, dataset):
        swapped = dataset.with_x_order([1, 0, 2, 3])
        assert swapped.x_names[:2] == ('x2', 'x1')
        np.testing.assert_array_equal(swapped.x[:, 0], dataset.x[:, 1])


class TestPairwiseCross:
    """Row-summed outer products"""

    def test_matches_matrix_product(self, rng):
        a = rng.standard_normal((10000, 3))
        b = rng.standard_normal((10000, 2))
        np.testing.assert_allclose(pairwise_cross(a, b), a.T @ b, rtol=1e-12, atol=1e-9)

    def test_empty_rows(self):
        np.testing.assert_array_equal(pairwise_cross(np.zeros((0, 2)), np.zeros((0, 3))),
                                      np.zeros((2, 3)))


class TestFinitePopulation:
    """Atom validation"""

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(InvalidDataset):
            FinitePopulation(np.ones((3, 1)), [[1.0], [-1.0], [0.5]], np.ones(3), [0.5, 0.3, 0.1])

    def test_probabilities_must_be_positive(self):
        with pytest.raises(InvalidDataset):
            FinitePopulation(np.ones((3, 1)), [[1.0], [-1.0], [0.5]], np.ones(3), [0.6, 0.5, -0.1])

    def test_negative_variance(self):
        with pytest.raises(InvalidDataset):
            FinitePopulation(np.ones((2, 1)), [[1.0], [-1.0]], [1.0, -1.0], [0.5, 0.5])

    def test_singular_second_moments(self):
        """x identical to the constant leaves Gamma singular"""
        with pytest.raises(InvalidDataset):
            FinitePopulation(np.ones((2, 1)), np.ones((2, 1)), np.ones(2), [0.5, 0.5])

    def test_atoms_round_trip(self, population):
        rebuilt = FinitePopulation.from_atoms(population.atoms())
        np.testing.assert_array_equal(rebuilt.x, population.x)
        np.testing.assert_array_equal(rebuilt.prob, population.prob)

    def test_from_atoms(self):
        pop = FinitePopulation.from_atoms([
            Atom((1.0,), (1.0,), 2.0, 0.5),
            Atom((1.0,), (-1.0,), 2.0, 0.5),
        ])
        gamma, lam = population_moments(pop)
        np.testing.assert_allclose(gamma.assembled().entries, np.eye(2))
        np.testing.assert_allclose(lam.assembled().entries, 2 * np.eye(2))


class TestMomentSet:
    """Block views of the assembled second-moment matrix"""

    def test_block_layout(self):
        m = np.arange(25.0).reshape(5, 5)
        m = m + m.T
        moments = MomentSet.from_assembled(m, 2)
        block = moments.block(0, 2)
        np.testing.assert_array_equal(block[:2, :2], m[:2, :2])
        np.testing.assert_array_equal(block[:2, 2], m[:2, 4])
        np.testing.assert_array_equal(block[2, :2], m[2, :2])
        assert block[2, 2] == m[2, 4]

    def test_assembled_round_trip(self, rng):
        a = rng.standard_normal((4, 4))
        m = a @ a.T
        np.testing.assert_allclose(MomentSet.from_assembled(m, 1).assembled().entries, m)

    def test_zx_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            MomentSet(SymMatrix.identity(1), np.zeros((2, 2)), SymMatrix.identity(2))

    def test_sample_moments(self, dataset):
        gamma = sample_moments(dataset)
        np.testing.assert_allclose(gamma.assembled().entries,
                                   dataset.design.T @ dataset.design / dataset.n, atol=1e-12)

    def test_weighted_sample_moments(self, dataset):
        w = np.linspace(0.0, 2.0, dataset.n)
        lam = sample_moments(dataset, w)
        expected = (dataset.design * w[:, None]).T @ dataset.design / dataset.n
        np.testing.assert_allclose(lam.assembled().entries, expected, atol=1e-12)

    def test_weights_length_checked(self, dataset):
        with pytest.raises(DimensionMismatch):
            sample_moments(dataset, np.ones(3))

    def test_sample_moments_approach_population(self, population):
        """Mean Frobenius error over ten samples shrinks from n=100 to n=10000"""
        gamma = population_moments(population)[0].assembled().entries

        def mean_error(n):
            errors = []
            for seed in range(10):
                d = generate(DgpConfig(n=n, p=2, h=3, population=population, seed=seed))
                errors.append(np.linalg.norm(sample_moments(d).assembled().entries - gamma))
            return np.mean(errors)

        small, large = mean_error(100), mean_error(10000)
        assert large < small / 3


class TestStreams:
    """Seed derivation and the ordered worker pool"""

    def test_stream_is_reproducible(self):
        a = stream(5, DRAW_STREAM, 3).standard_normal(4)
        b = stream(5, DRAW_STREAM, 3).standard_normal(4)
        np.testing.assert_array_equal(a, b)

    def test_indices_give_distinct_streams(self):
        a = stream(5, DRAW_STREAM, 0).standard_normal(4)
        b = stream(5, DRAW_STREAM, 1).standard_normal(4)
        assert not np.array_equal(a, b)

    def test_derive_seed_is_stable(self):
        assert derive_seed(1, 1, 2) == derive_seed(1, 1, 2)
        assert derive_seed(1, 1, 2) != derive_seed(1, 1, 3)

    def test_seed_range(self):
        with pytest.raises(ConfigError):
            stream(-1, DRAW_STREAM)
        with pytest.raises(ConfigError):
            stream(2 ** 64, DRAW_STREAM)

    def test_block_sizes(self):
        assert block_sizes(10, 4) == [4, 4, 2]
        assert block_sizes(8, 4) == [4, 4]
        assert sum(block_sizes(20001)) == 20001

    def test_worker_count_from_env(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, '3')
        assert worker_count() == 3
        assert worker_count(1) == 1

    def test_worker_count_rejects_garbage(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, 'many')
        with pytest.raises(ConfigError):
            worker_count()

    def test_ordered_map_keeps_order(self):
        assert ordered_map(lambda k: k * k, range(50), workers=4) == [k * k for k in range(50)]
