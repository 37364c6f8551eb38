import math

import numpy as np
import pytest

from jamnet import NumericalFailure, bounds


def test_ceo_distortion_examples():
    assert bounds.ceo_distortion(0.0, [1.0], 1.0) == 1.0
    assert bounds.ceo_distortion(0.0, [0.3, 2.2], 1.0) == 1.0
    assert bounds.ceo_distortion(0.5, [1.0], 1.0) == pytest.approx(0.75, abs=1e-15)
    # Large rate approaches the estimation floor.
    assert bounds.ceo_distortion(50.0, [1.0], 1.0) == pytest.approx(0.5, abs=1e-12)


def test_ceo_distortion_monotone_convex():
    betas = [0.7, 1.4, 0.3]
    rates = np.linspace(0.0, 8.0, 100)
    d = np.array([bounds.ceo_distortion(r, betas) for r in rates])
    assert np.all(np.diff(d) < 0.0)
    assert np.all(np.diff(d, 2) > -1e-15)


def test_ceo_decomposition_identity():
    rng = np.random.default_rng(2)
    for _ in range(50):
        betas = rng.uniform(0.2, 3.0, size=rng.integers(1, 6))
        rate = float(rng.uniform(0.0, 10.0))
        d = bounds.ceo_distortion(rate, betas)
        d_est = bounds.ceo_estimation_floor(betas)
        d_rd = bounds.ceo_sigma_t(betas) * 2.0 ** (-2.0 * rate)
        assert abs(d - (d_est + d_rd)) <= 1e-12


def test_ceo_sigma_t_examples():
    assert bounds.ceo_sigma_t([1.0]) == pytest.approx(0.5, abs=1e-15)
    assert bounds.ceo_sigma_t([]) == 0.0
    assert bounds.ceo_sigma_t([1.0, 1.0, 1.0]) == pytest.approx(0.75, abs=1e-15)
    assert abs(bounds.ceo_sigma_t([1.0, 1.0, 1.0]) - bounds.ceo_sigma_t_matrix([1.0, 1.0, 1.0])) <= 1e-12


def test_ru_spectrum_examples():
    assert np.allclose(bounds.ru_spectrum([1.0, 1.0]), [1.0, 3.0])
    assert np.allclose(bounds.ru_spectrum([0.8]), [1.64])
    assert np.allclose(bounds.ru_spectrum([1.0, 2.0]), [1.0, 6.0])


def test_ru_spectrum_matches_eigensolver():
    rng = np.random.default_rng(3)
    for _ in range(50):
        betas = rng.uniform(0.2, 3.0, size=rng.integers(1, 9))
        closed = bounds.ru_spectrum(betas)
        numeric = np.sort(np.linalg.eigvalsh(bounds.observation_covariance(betas)))
        assert np.max(np.abs(closed - numeric)) <= 1e-10


def test_maximal_correlation_values():
    assert bounds.maximal_correlation_discrete(0.0, 257, 5.0) <= 1e-10
    for rho in (0.5, 0.9, -0.5):
        star = bounds.maximal_correlation_discrete(rho, 257, 5.0)
        assert abs(star - abs(rho)) <= 1e-2


def test_maximal_correlation_error_shrinks_when_grid_doubles():
    for rho in (0.3, 0.5, 0.9):
        err_n = abs(bounds.maximal_correlation_discrete(rho, 65, 5.0) - rho)
        err_2n = abs(bounds.maximal_correlation_discrete(rho, 130, 5.0) - rho)
        assert err_2n <= err_n + 1e-12


def test_maximal_correlation_singular_functions_affine():
    sig, x, f, g = bounds.maximal_correlation_functions(0.5, 257, 5.0)
    inner = slice(1, -1)  # edge cells hold the tails; their centers are nominal
    design = np.vstack([np.ones_like(x[inner]), x[inner]]).T
    for func in (f, g):
        _, residual, *_ = np.linalg.lstsq(design, func[inner], rcond=None)
        rel = math.sqrt(residual[0]) / np.linalg.norm(func[inner])
        assert rel < 1e-3


def test_maximal_correlation_input_guards():
    with pytest.raises(ValueError):
        bounds.maximal_correlation_discrete(1.0)
    with pytest.raises(ValueError):
        bounds.maximal_correlation_discrete(0.5, grid_n=2)
    with pytest.raises(NumericalFailure):
        bounds.maximal_correlation_discrete(0.5, 257, range_sigmas=0.0)
