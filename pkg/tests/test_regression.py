"""
Tests for the least-squares fits behind the parsimonious regressions
"""

import numpy as np
import pytest

from parsimax.core import (
    Dataset, full_fit, ols, parsimonious_betas, parsimonious_fits, restricted_fit,
)
from parsimax.exc import DimensionMismatch, RankDeficient


class TestOls:
    """Normal-equation solves"""

    def test_mean_regression(self):
        """A column of ones recovers the mean"""
        fit = ols(np.ones((3, 1)), [1.0, 2.0, 3.0])
        np.testing.assert_allclose(fit.coefficients, [2.0])
        np.testing.assert_allclose(fit.residuals, [-1.0, 0.0, 1.0], atol=1e-12)
        assert fit.rss == pytest.approx(2.0)

    def test_exact_fit_leaves_zero_residuals(self, rng):
        design = np.column_stack([np.ones(20), rng.standard_normal(20)])
        y = design @ np.array([1.5, -2.0])
        fit = ols(design, y)
        np.testing.assert_allclose(fit.residuals, 0.0, atol=1e-10)
        np.testing.assert_allclose(fit.coefficients, [1.5, -2.0], atol=1e-10)

    def test_matches_lstsq(self, rng):
        design = rng.standard_normal((50, 4))
        y = rng.standard_normal(50)
        expected, *_ = np.linalg.lstsq(design, y, rcond=None)
        np.testing.assert_allclose(ols(design, y).coefficients, expected, atol=1e-10)

    def test_gram_is_kept(self, rng):
        design = rng.standard_normal((30, 2))
        fit = ols(design, rng.standard_normal(30))
        np.testing.assert_allclose(fit.gram.entries, design.T @ design / 30, atol=1e-12)

    def test_collinear_design_is_rank_deficient(self):
        x = np.arange(6.0)
        with pytest.raises(RankDeficient) as info:
            ols(np.column_stack([x, 2 * x]), np.ones(6), index=4)
        assert info.value.index == 4

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            ols(np.ones((4, 1)), np.ones(3))


class TestParsimoniousFits:
    """One regression of y on [Z, x_i] per key regressor"""

    def test_betas_match_separate_regressions(self, dataset):
        fits = parsimonious_fits(dataset)
        betas = parsimonious_betas(fits)
        for i in range(dataset.h):
            expected, *_ = np.linalg.lstsq(dataset.parsimonious_design(i), dataset.y, rcond=None)
            assert betas[i] == pytest.approx(expected[-1], abs=1e-10)

    def test_worker_count_does_not_change_output(self, dataset):
        serial = parsimonious_betas(parsimonious_fits(dataset, workers=1))
        threaded = parsimonious_betas(parsimonious_fits(dataset, workers=4))
        np.testing.assert_array_equal(serial, threaded)

    def test_collinear_key_regressor_reports_its_index(self, rng):
        z = np.column_stack([np.ones(40), rng.standard_normal(40)])
        x = np.column_stack([rng.standard_normal(40), z[:, 1]])
        d = Dataset(rng.standard_normal(40), z, x)
        with pytest.raises(RankDeficient) as info:
            parsimonious_fits(d)
        assert info.value.index == 1

    def test_restricted_and_full_fits(self, dataset):
        assert restricted_fit(dataset).regressor_count == dataset.p
        assert full_fit(dataset).regressor_count == dataset.p + dataset.h


def _annihilate(z, v):
    """v minus its projection on the columns of z"""
    coef, *_ = np.linalg.lstsq(z, v, rcond=None)
    return v - z @ coef


class TestFitInvariants:
    """Partialling out Z, RSS ordering and residual orthogonality"""

    def test_parsimonious_beta_after_partialling_out(self, dataset):
        y_tilde = _annihilate(dataset.z, dataset.y)
        betas = parsimonious_betas(parsimonious_fits(dataset))
        for i in range(dataset.h):
            x_tilde = _annihilate(dataset.z, dataset.x[:, i])
            assert betas[i] == pytest.approx(x_tilde @ y_tilde / (x_tilde @ x_tilde), abs=1e-10)

    def test_full_fit_after_partialling_out(self, dataset):
        y_tilde = _annihilate(dataset.z, dataset.y)
        x_tilde = _annihilate(dataset.z, dataset.x)
        expected, *_ = np.linalg.lstsq(x_tilde, y_tilde, rcond=None)
        np.testing.assert_allclose(full_fit(dataset).coefficients[dataset.p:], expected, atol=1e-10)

    def test_parsimonious_rss_never_exceeds_restricted(self, dataset):
        restricted = restricted_fit(dataset).rss
        for fit in parsimonious_fits(dataset):
            assert fit.rss <= restricted * (1 + 1e-12)

    def test_restricted_residuals_orthogonal_to_z(self, dataset):
        u = restricted_fit(dataset).residuals
        scale = np.abs(u).max() * np.abs(dataset.z).max()
        np.testing.assert_allclose(dataset.z.T @ u / dataset.n, 0.0, atol=1e-10 * scale)

    def test_residuals_orthogonal_to_every_regressor(self, dataset):
        for i, fit in enumerate(parsimonious_fits(dataset)):
            design = dataset.parsimonious_design(i)
            scale = np.abs(fit.residuals).max() * np.abs(design).max()
            np.testing.assert_allclose(design.T @ fit.residuals / dataset.n, 0.0, atol=1e-10 * scale)
        fit = full_fit(dataset)
        scale = np.abs(fit.residuals).max() * np.abs(dataset.design).max()
        np.testing.assert_allclose(dataset.design.T @ fit.residuals / dataset.n, 0.0, atol=1e-10 * scale)
