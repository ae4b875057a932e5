import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from wlecov.estimator import FitConfig, fit_mle, fit_wle
from wlecov.pca import RobustPCA, outlier_map, pca_from_scatter, project, robust_pca, robust_standardize


def random_spd(rng, p):
    A = rng.normal(size=(p, p))
    return A @ A.T + 0.5 * np.eye(p)


def test_diagonal_scatter():
    m = pca_from_scatter(np.zeros(2), np.diag([4.0, 1.0]), 1)
    assert np.allclose(m.loadings[:, 0], [1.0, 0.0])
    assert m.eigenvalues[0] == pytest.approx(4.0)
    assert m.explained_variance_ratio == pytest.approx(0.8)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_isotropic_scatter(k):
    m = pca_from_scatter(np.zeros(4), np.eye(4), k)
    assert np.allclose(m.eigenvalues, 1.0)
    assert m.explained_variance_ratio == pytest.approx(k / 4)


def test_bad_inputs():
    with pytest.raises(ValueError):
        pca_from_scatter(np.zeros(2), np.eye(2), 3)
    with pytest.raises(ValueError):
        pca_from_scatter(np.zeros(3), np.eye(2), 1)
    with pytest.raises(linalg.LinAlgError):
        pca_from_scatter(np.zeros(2), np.diag([1.0, -1.0]), 1)


@pytest.mark.property
@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000))
def test_loadings_orthonormal_and_ratio_monotone(p, seed):
    rng = np.random.default_rng(seed)
    S = random_spd(rng, p)
    ratios = []
    for k in range(1, p + 1):
        m = pca_from_scatter(np.zeros(p), S, k)
        assert np.allclose(m.loadings.T @ m.loadings, np.eye(k), atol=1e-10)
        assert np.allclose(S @ m.loadings, m.loadings * m.eigenvalues, atol=1e-8 * np.abs(S).max())
        ratios.append(m.explained_variance_ratio)
    assert np.all(np.diff(ratios) >= -1e-12)
    assert ratios[-1] == pytest.approx(1.0)


@pytest.mark.property
@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000))
def test_reconstruction_identity(p, seed):
    # with the n-1 covariance, n/(n-1) mean squared OD equals the discarded eigenvalues
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, p)) @ rng.normal(size=(p, p))
    fit = fit_mle(X)
    for k in range(1, p + 1):
        m = robust_pca(fit, k)
        od = project(m, X)["orthogonal_distance"]
        n = X.shape[0]
        assert np.mean(od**2) * n / (n - 1) == pytest.approx(m.total_variance - m.eigenvalues.sum(),
                                                             abs=1e-8 * m.total_variance)


def test_reconstruction_on_clean_data_with_wle():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(2000, 4)) * [3.0, 2.0, 1.0, 0.5]
    m = robust_pca(fit_wle(X), 2)
    od = project(m, X)["orthogonal_distance"]
    assert np.mean(od**2) == pytest.approx(m.total_variance - m.eigenvalues.sum(), rel=0.1)


def test_projection_examples():
    m = pca_from_scatter(np.array([1.0, 1.0]), np.diag([4.0, 1.0]), 1)
    out = project(m, [[1.0, 1.0], [1.0 + 3.0, 1.0], [1.0, 3.0]])
    assert np.allclose(out["score_distance"], [0.0, 1.5, 0.0])
    assert np.allclose(out["orthogonal_distance"], [0.0, 0.0, 2.0])


def test_full_rank_projection_has_no_orthogonal_part(rng):
    S = random_spd(rng, 3)
    m = pca_from_scatter(np.zeros(3), S, 3)
    assert np.allclose(project(m, rng.normal(size=(10, 3)))["orthogonal_distance"], 0.0, atol=1e-12)


def test_outlier_map_degenerate_subspace(rng):
    m = pca_from_scatter(np.zeros(3), np.diag([3.0, 2.0, 1.0]), 2)
    X = np.c_[rng.normal(size=(50, 2)), np.zeros(50)]
    omap = outlier_map(m, X)
    assert omap["od_cutoff"] == 0.0
    assert not omap["od_flags"].any()


def test_outlier_map_cutoffs_on_clean_data():
    rng = np.random.default_rng(21)
    X = rng.normal(size=(1000, 5))
    m = robust_pca(fit_mle(X), 2)
    omap = outlier_map(m, X, alpha=0.025)
    assert abs(omap["sd_flags"].mean() - 0.025) < 0.02
    assert abs(omap["od_flags"].mean() - 0.025) < 0.02
    assert omap["sd_cutoff"] == pytest.approx(np.sqrt(-2 * np.log(0.025)))


def test_sign_convention_deterministic(rng):
    S = random_spd(rng, 4)
    a = pca_from_scatter(np.zeros(4), S, 4)
    b = pca_from_scatter(np.zeros(4), S.copy(), 4)
    assert np.array_equal(a.loadings, b.loadings)
    top = np.abs(a.loadings).argmax(axis=0)
    assert np.all(a.loadings[top, range(4)] > 0)


def test_robust_loading_resists_contamination():
    rng = np.random.default_rng(4)
    n, p = 200, 5
    X = rng.normal(size=(n, p)) * [1.0, 2.0, 1.0, 1.0, 1.0]
    bad = rng.random(n) < 0.2
    X[bad] = rng.normal(size=(bad.sum(), p)) * 0.1
    X[bad, 0] += 8.0
    e1 = np.eye(p)[0]

    def angle(v):
        return np.degrees(np.arccos(min(1.0, abs(v @ e1))))

    robust = robust_pca(fit_wle(X, FitConfig(kernel="reflect")), 1).loadings[:, 0]
    classical = robust_pca(fit_mle(X), 1).loadings[:, 0]
    assert angle(robust) > angle(classical)
    assert angle(classical) < 10 and angle(robust) > 80


def test_robust_standardize(rng):
    X = rng.normal(5, 3, size=(500, 2))
    Z, med, scale = robust_standardize(X)
    assert np.allclose(np.median(Z, axis=0), 0)
    assert np.allclose(scale, 3, rtol=0.15)
    with pytest.raises(ValueError):
        robust_standardize(np.c_[X[:, 0], np.ones(500)])


def test_transformer(rng):
    X = rng.normal(size=(100, 4)) * [4.0, 2.0, 1.0, 1.0]
    est = RobustPCA(n_components=2).fit(X)
    T = est.transform(X)
    assert T.shape == (100, 2)
    assert est.components_.shape == (2, 4)
    assert est.distances(X).shape == (100, 2)
    assert 0 < est.explained_variance_ratio_ <= 1
