import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from sklearn.utils.estimator_checks import check_estimator

from wlecov.estimator import FitConfig, WLECovariance, fit_mle, fit_wle
from wlecov.outlier import (
    WLEOutlierDetector,
    detect,
    diagnostics,
    mahalanobis_sq,
    multiplicity_level,
    scaled_beta_distribution,
    scaled_beta_quantile,
)


def fake_fit(d2, p):
    return SimpleNamespace(squared_distances=np.asarray(d2, float), location=np.zeros(p))


# -- distances -------------------------------------------------------------------

def test_distance_hand_example():
    assert mahalanobis_sq([[3.0, 4.0]], [0.0, 0.0], np.eye(2))[0] == pytest.approx(25.0)


def test_distance_zero_at_center():
    assert mahalanobis_sq([[1.0, -2.0]], [1.0, -2.0], [[2.0, 0.3], [0.3, 1.0]])[0] == 0.0


def test_distance_matches_inverse(rng):
    X = rng.normal(size=(20, 3))
    A = rng.normal(size=(3, 3))
    S = A @ A.T + np.eye(3)
    mu = rng.normal(size=3)
    R = X - mu
    assert np.allclose(mahalanobis_sq(X, mu, S), np.einsum("ij,jk,ik->i", R, np.linalg.inv(S), R))


@pytest.mark.property
def test_distance_affine_invariance(rng):
    X = rng.normal(size=(30, 3))
    A = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    b = rng.normal(size=3)
    S = np.cov(X, rowvar=False)
    mu = X.mean(axis=0)
    assert np.allclose(mahalanobis_sq(X @ A.T + b, A @ mu + b, A @ S @ A.T), mahalanobis_sq(X, mu, S))


def test_distance_rejects_bad_scatter():
    with pytest.raises(ValueError):
        mahalanobis_sq([[1.0, 1.0]], [0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        mahalanobis_sq([[1.0, 1.0]], [0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])


# -- reference laws --------------------------------------------------------------

def test_beta_quantile_approaches_chi2():
    # chi-square(2) quantile at 0.975 is -2 log(0.025)
    assert -2 * math.log(0.025) == pytest.approx(7.3778, abs=1e-4)
    assert scaled_beta_quantile(10**6, 2, 0.975) == pytest.approx(7.3778, abs=1e-3)


@pytest.mark.property
@pytest.mark.parametrize("p", [2, 5, 10])
@pytest.mark.parametrize("level", [0.9, 0.975, 0.99])
def test_beta_quantile_limit(p, level):
    errs = [abs(scaled_beta_quantile(n, p, level) - stats.chi2.ppf(level, p)) for n in (100, 1000, 10**5)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_beta_quantile_support_and_monotone():
    n = 47
    q = scaled_beta_quantile(n, 2, np.linspace(0.05, 0.95, 19))
    assert 0 < scaled_beta_quantile(n, 2, 0.5) < (n - 1) ** 2 / n
    assert np.all(np.diff(q) > 0)


def test_beta_variants():
    d = scaled_beta_distribution(50, 3)
    assert d.args == (1.5, 23.0)
    assert scaled_beta_distribution(50, 3, "n-p").args == (1.5, 23.5)
    with pytest.raises(ValueError):
        scaled_beta_distribution(50, 3, "other")
    with pytest.raises(ValueError):
        scaled_beta_quantile(4, 3, 0.5)
    with pytest.raises(ValueError):
        scaled_beta_quantile(50, 3, 1.0)


def test_beta_mean_matches_unbiased_moments():
    # E[d^2] = p (n-1)/n for the sample covariance with n-1 denominator
    n, p = 40, 3
    assert scaled_beta_distribution(n, p).mean() == pytest.approx(p * (n - 1) / n)


def test_multiplicity_level_values():
    assert multiplicity_level(0.025, 195) == pytest.approx(0.9998702, abs=1e-7)
    assert multiplicity_level(0.025, 1) == pytest.approx(0.975)
    assert multiplicity_level(1e-12, 100) > 1 - 1e-13
    with pytest.raises(ValueError):
        multiplicity_level(0.0, 10)


# -- detection -------------------------------------------------------------------

def test_zero_distances_flag_nothing():
    rep = detect(fake_fit(np.zeros(20), 2))
    assert not rep.flags_plain.any() and not rep.flags_multiplicity.any()


def test_cutoffs_follow_reference():
    rep = detect(fake_fit(np.arange(50.0), 3), alpha=0.05, reference="chisq")
    assert rep.cutoff_plain == pytest.approx(stats.chi2.ppf(0.95, 3))
    assert rep.cutoff_multiplicity == pytest.approx(stats.chi2.ppf(0.95 ** (1 / 50), 3))
    assert rep.flags_plain.tolist() == (np.arange(50.0) > rep.cutoff_plain).tolist()
    with pytest.raises(ValueError):
        detect(fake_fit(np.arange(50.0), 3), reference="f")


@pytest.mark.property
@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(min_value=0, max_value=200), min_size=10, max_size=80),
    st.integers(1, 5),
    st.floats(min_value=1e-4, max_value=0.5),
    st.sampled_from(["beta", "chisq"]),
)
def test_multiplicity_flags_are_subset(d2, p, alpha, reference):
    if len(d2) <= p + 1:
        return
    rep = detect(fake_fit(d2, p), alpha=alpha, reference=reference)
    assert rep.cutoff_multiplicity >= rep.cutoff_plain
    assert np.all(rep.flags_plain[rep.flags_multiplicity])


@pytest.mark.slow
def test_plain_size_on_clean_data():
    rng = np.random.default_rng(17)
    fractions = []
    for _ in range(100):
        fit = fit_wle(rng.normal(size=(500, 5)))
        fractions.append(detect(fit, alpha=0.025).flags_plain.mean())
    assert abs(np.mean(fractions) - 0.025) <= 0.01


@pytest.mark.property
def test_distances_below_support_bound(rng):
    n = 60
    for variant in ("reflect", "logback"):
        X = np.r_[rng.normal(size=(n - 5, 3)), rng.normal(8, 1, size=(5, 3))]
        fit = fit_wle(X, FitConfig(kernel=variant))
        assert np.all(fit.squared_distances[fit.weights > 0.5] < (n - 1) ** 2 / n)
        assert np.all(fit_mle(X).squared_distances < (n - 1) ** 2 / n)


# -- diagnostics -----------------------------------------------------------------

def test_dd_on_diagonal_for_identical_fits(rng):
    X = rng.normal(size=(30, 2))
    mle = fit_mle(X)
    diag = diagnostics(mle, mle)
    assert np.array_equal(diag["dd_pairs"][:, 0], diag["dd_pairs"][:, 1])
    assert diag["cutoffs"]["multiplicity"] > diag["cutoffs"]["plain"]


def test_qq_pairs_near_identity():
    X = np.random.default_rng(2).normal(size=(500, 4))
    fit = fit_wle(X)
    qq = diagnostics(fit, fit_mle(X))["qq_pairs"]
    assert np.all(np.diff(qq[:, 1]) >= 0)
    central = qq[25:-25]
    assert np.max(np.abs(central[:, 1] - central[:, 0])) < 1.5


def test_diagnostics_shape_mismatch(rng):
    with pytest.raises(ValueError):
        diagnostics(fit_mle(rng.normal(size=(10, 2))), fit_mle(rng.normal(size=(11, 2))))


# -- sklearn front end -----------------------------------------------------------

def test_detector_flags_planted_outliers(rng):
    X = np.r_[rng.normal(size=(95, 3)), rng.normal(0, 0.1, size=(5, 3)) + 10]
    det = WLEOutlierDetector(estimator=WLECovariance(kernel="reflect")).fit(X)
    pred = det.predict(X)
    assert np.all(pred[-5:] == -1)
    assert np.mean(pred[:95] == 1) > 0.95


def test_detector_estimator_checks():
    # the three-blob sample has no point beyond a familywise cutoff
    check_estimator(
        WLEOutlierDetector(estimator=WLECovariance(kernel="reflect")),
        expected_failed_checks={
            "check_outliers_fit_predict": "no outliers at familywise level",
            "check_outliers_train": "no outliers at familywise level",
        },
    )
