import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.discriminant_analysis import LinearDiscriminantAnalysis

from wlecov.discriminant import (
    DaModel,
    WLEDiscriminantAnalysis,
    classify,
    fit_da,
    loo_cv,
    misclassification,
    spatial_median,
)
from wlecov.estimator import FitConfig
from wlecov.exceptions import RankError

MLE = FitConfig(raf="ml")


def two_groups(rng, n=60, p=2, gap=6.0):
    X = np.r_[rng.normal(size=(n, p)), rng.normal(size=(n, p)) + gap]
    y = np.repeat(["a", "b"], n)
    return X, y


def manual_model(means, scatter, priors=None, kind="lda-b"):
    means = np.atleast_2d(np.asarray(means, float))
    k = means.shape[0]
    S = np.atleast_2d(np.asarray(scatter, float))
    priors = np.full(k, 1.0 / k) if priors is None else np.asarray(priors, float)
    return DaModel(kind, np.arange(k), priors, means, np.repeat(S[None], k, axis=0))


# -- spatial median ----------------------------------------------------------------

def test_spatial_median_examples():
    assert np.allclose(spatial_median([[2.0, 3.0]]), [2.0, 3.0])
    assert np.allclose(spatial_median([[1, 0], [-1, 0], [0, 1], [0, -1]]), [0.0, 0.0], atol=1e-10)
    assert np.allclose(spatial_median(np.array([[0.0], [1.0], [10.0]])), [1.0])


def test_spatial_median_gradient_vanishes(rng):
    X = rng.standard_t(2, size=(101, 3))
    m = spatial_median(X)
    r = np.linalg.norm(X - m, axis=1)
    grad = ((X - m) / r[:, None]).sum(axis=0)
    assert np.linalg.norm(grad) < 1e-6


def test_spatial_median_at_a_data_point():
    # the centre point's neighbours pull with total force below one
    X = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.1], [0.0, 1.0], [0.1, -1.0]])
    assert np.array_equal(spatial_median(X), X[0])


def test_spatial_median_resists_outliers(rng):
    X = np.r_[rng.normal(size=(80, 2)), np.full((20, 2), 100.0)]
    assert np.linalg.norm(spatial_median(X)) < 1.0


# -- classification rules ----------------------------------------------------------

def test_zero_distance_wins():
    m = manual_model([[0, 0], [3, 0], [0, 3]], np.eye(2))
    assert classify(m, [3.0, 0.0]) == 1
    assert classify(m, np.array([[0.0, 3.0], [0.0, 0.0]])).tolist() == [2, 0]


def test_prior_dominates_with_equal_means(rng):
    m = manual_model([[0, 0], [0, 0]], np.eye(2), priors=[0.3, 0.7])
    assert np.all(classify(m, rng.normal(size=(50, 2)) * 5) == 1)


def test_one_dimensional_boundary_at_midpoint():
    m = manual_model([[0.0], [2.0]], [[1.0]])
    assert classify(m, [0.999]) == 0
    assert classify(m, [1.001]) == 1
    # exact tie goes to the first group
    assert classify(m, [1.0]) == 0


@pytest.mark.property
@settings(max_examples=100, deadline=None)
@given(st.floats(-100, 100), st.integers(0, 1000))
def test_argmax_invariance(shift, seed):
    rng = np.random.default_rng(seed)
    m = manual_model(rng.normal(size=(3, 2)), np.eye(2), priors=[0.2, 0.3, 0.5])
    X = rng.normal(size=(20, 2))
    shifted = DaModel(m.kind, m.labels, m.priors * np.exp(shift / 50), m.means, m.scatters)
    assert np.array_equal(classify(m, X), np.argmax(m.scores(X) + shift, axis=1))
    assert np.array_equal(classify(m, X), classify(shifted, X))


def test_linear_boundary_is_affine():
    m = manual_model([[0, 0], [2, 1]], [[1.0, 0.3], [0.3, 2.0]])
    g = np.linspace(-3, 5, 41)
    grid = np.array([[a, b] for a in g for b in g])
    s = m.scores(grid)
    diff = s[:, 1] - s[:, 0]
    A = np.c_[grid, np.ones(len(grid))]
    coef, *_ = np.linalg.lstsq(A, diff, rcond=None)
    assert np.allclose(A @ coef, diff, atol=1e-10)


def test_quadratic_boundary_is_quadratic():
    m = manual_model([[0, 0], [2, 1]], np.eye(2), kind="qda")
    m.scatters[1] = np.diag([3.0, 0.5])
    g = np.linspace(-3, 5, 21)
    grid = np.array([[a, b] for a in g for b in g])
    s = m.scores(grid)
    diff = s[:, 1] - s[:, 0]
    x, y = grid.T
    lin = np.c_[x, y, np.ones_like(x)]
    quad = np.c_[x * x, y * y, x * y, lin]
    assert np.linalg.lstsq(lin, diff, rcond=None)[1][0] > 1.0
    coef, *_ = np.linalg.lstsq(quad, diff, rcond=None)
    assert np.allclose(quad @ coef, diff, atol=1e-9)


# -- fitting -----------------------------------------------------------------------

def test_separated_groups_have_no_errors(rng):
    X, y = two_groups(rng, gap=20)
    for kind in ("lda-a", "lda-b", "qda"):
        assert misclassification(fit_da(X, y, kind), X, y) == 0.0


@pytest.mark.property
@pytest.mark.parametrize("seed", range(5))
def test_pooled_scatter_is_convex_combination(seed):
    rng = np.random.default_rng(seed)
    X = np.r_[rng.normal(size=(40, 2)), rng.normal(size=(30, 2)) * [2.0, 0.5] + 5, rng.normal(size=(35, 2)) + [0, 8]]
    X[:3] += 30
    y = np.repeat([0, 1, 2], [40, 30, 35])
    m = fit_da(X, y, "lda-a", FitConfig(kernel="reflect"))
    coef = np.array([f.gamma * f.weights.sum() for f in m.fits])
    assert np.all(coef > 0)
    lam = coef / coef.sum()
    assert lam.sum() == pytest.approx(1.0)
    assert np.allclose(m.pooled_scatter, np.einsum("j,jkl->kl", lam, np.array([f.scatter for f in m.fits])))


def test_identical_groups_pool_to_group_scatter(rng):
    G = rng.normal(size=(50, 2))
    X = np.r_[G, G]
    y = np.repeat([0, 1], 50)
    m = fit_da(X, y, "lda-a")
    assert np.allclose(m.pooled_scatter, m.fits[0].scatter)


def test_unit_weights_match_classical_rules(rng):
    X = np.r_[rng.normal(size=(40, 3)), rng.normal(size=(50, 3)) * 1.5 + 1.2, rng.normal(size=(45, 3)) + [2, -1, 0]]
    y = np.repeat([0, 1, 2], [40, 50, 45])
    lda_a = fit_da(X, y, "lda-a", MLE)
    pooled = sum((np.sum(y == c) - 1) * np.cov(X[y == c], rowvar=False) for c in range(3)) / (len(y) - 3)
    assert np.allclose(lda_a.pooled_scatter, pooled)
    sk_lda = LinearDiscriminantAnalysis(solver="lsqr").fit(X, y)
    assert np.array_equal(classify(lda_a, X), sk_lda.predict(X))
    qda = fit_da(X, y, "qda", MLE)
    # the quadratic score carries no log-determinant term
    scores = np.column_stack([
        np.log(np.mean(y == c))
        - 0.5 * np.einsum("ij,jk,ik->i", X - X[y == c].mean(0), np.linalg.inv(np.cov(X[y == c], rowvar=False)),
                          X - X[y == c].mean(0))
        for c in range(3)
    ])
    assert np.array_equal(classify(qda, X), scores.argmax(axis=1))


def test_lda_b_shifts_centers(rng):
    X, y = two_groups(rng)
    m = fit_da(X, y, "lda-b")
    shift = m.fits[-1].location
    assert np.allclose(m.means[0], spatial_median(X[y == "a"]) + shift)
    m2 = fit_da(X, y, "lda-b", center="wle")
    assert np.allclose(m2.means[1], m2.fits[1].location + m2.fits[-1].location)


def test_priors_and_validation(rng):
    X, y = two_groups(rng)
    m = fit_da(X, y, "lda-b", priors=[1, 3])
    assert np.allclose(m.priors, [0.25, 0.75])
    with pytest.raises(ValueError):
        fit_da(X, y, "lda-c")
    with pytest.raises(ValueError):
        fit_da(X, y, priors=[1, -1])
    with pytest.raises(ValueError):
        fit_da(X, np.zeros(len(y)))
    with pytest.raises(RankError):
        fit_da(np.r_[X, [[0.0, 0.0]]], np.r_[y, ["c"]], "qda")
    with pytest.raises(AttributeError):
        fit_da(X, y, "qda").pooled_scatter


def test_diabetes_group_order(diabetes):
    X, y = diabetes
    m = fit_da(X, y, "qda")
    order = np.argsort(m.means[:, 0])
    assert [str(m.labels[i]) for i in order] == ["Normal", "Chemical_Diabetic", "Overt_Diabetic"]


# -- cross-validation ------------------------------------------------------------

def test_loo_close_to_resubstitution_on_large_clean_sample():
    rng = np.random.default_rng(9)
    X, y = two_groups(rng, n=150, p=2, gap=2.5)
    m = fit_da(X, y, "lda-b", MLE)
    assert abs(loo_cv(X, y, "lda-b", MLE) - misclassification(m, X, y)) <= 2 / 300


def test_loo_reports_failing_split(rng):
    X = np.r_[rng.normal(size=(3, 2)), rng.normal(size=(20, 2)) + 5]
    y = np.repeat([0, 1], [3, 20])
    with pytest.raises(RuntimeError, match="leave-one-out split 0 failed"):
        loo_cv(X, y, "qda")


def test_loo_parallel_matches_serial(rng):
    X, y = two_groups(rng, n=15, gap=2.0)
    assert loo_cv(X, y, "lda-b", n_jobs=1) == loo_cv(X, y, "lda-b", n_jobs=2)


def test_classifier_front_end(rng):
    X, y = two_groups(rng, gap=4)
    clf = WLEDiscriminantAnalysis(kind="qda").fit(X, y)
    assert clf.score(X, y) > 0.95
    assert clf.decision_function(X).shape == (len(y), 2)
    assert set(clf.classes_) == {"a", "b"}
