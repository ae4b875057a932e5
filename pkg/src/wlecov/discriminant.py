"""Robust linear and quadratic discriminant analysis from weighted likelihood fits.

Pooled scatter for the linear rule comes in two flavours:

* ``lda-a`` averages the group-wise unbiased scatters with weights
  ``gamma_j * omega_j`` (``omega_j`` = sum of the group's weights);
* ``lda-b`` centres every group at a robust location, fits a single
  weighted likelihood estimate to the pooled centred data, and shifts the
  group centres by the pooled location.

Observations are assigned to the group maximising
``log(prior_j) - d^2(y, mu_j, Sigma) / 2``, with ``Sigma`` the pooled
scatter (linear) or the group scatter (quadratic).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

from ._median import spatial_median
from .estimator import FitConfig, FitResult, fit_wle
from .exceptions import RankError
from .outlier import mahalanobis_sq

__all__ = [
    "KINDS",
    "DaModel",
    "spatial_median",
    "fit_da",
    "classify",
    "misclassification",
    "loo_cv",
    "WLEDiscriminantAnalysis",
]

KINDS = ("lda-a", "lda-b", "qda")


@dataclass
class DaModel:
    kind: str
    labels: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    scatters: np.ndarray  # (k, p, p); identical slices for the linear rules
    fits: list = field(default_factory=list, repr=False)

    @property
    def pooled_scatter(self) -> np.ndarray:
        if self.kind == "qda":
            raise AttributeError("quadratic models have no pooled scatter")
        return self.scatters[0]

    def scores(self, X) -> np.ndarray:
        """Discriminant scores, shape (n_samples, n_groups)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], len(self.labels)))
        for j in range(len(self.labels)):
            d2 = mahalanobis_sq(X, self.means[j], self.scatters[j])
            out[:, j] = np.log(self.priors[j]) - 0.5 * d2
        return out


def _group_indices(labels):
    labels = np.asarray(labels)
    classes = np.unique(labels)
    return classes, [np.flatnonzero(labels == c) for c in classes]


def _check_priors(priors, counts):
    if priors is None:
        return counts / counts.sum()
    priors = np.asarray(priors, dtype=float)
    if priors.shape != counts.shape or np.any(priors <= 0):
        raise ValueError("priors must be positive, one per group")
    return priors / priors.sum()


def fit_da(X, labels, kind: str = "lda-b", config: FitConfig | None = None, priors=None,
           center: str = "l1") -> DaModel:
    """Fit a robust discriminant model.

    Parameters
    ----------
    X : array-like of shape (n_samples, n_features)
    labels : array-like of shape (n_samples,)
    kind : {"lda-a", "lda-b", "qda"}
    config : FitConfig, optional
        Settings shared by every weighted likelihood fit.
    priors : array-like, optional
        Defaults to the group proportions.
    center : {"l1", "wle"}, default="l1"
        Group centring for ``lda-b``: spatial median, or the group-wise
        weighted likelihood location.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if center not in ("l1", "wle"):
        raise ValueError("center must be 'l1' or 'wle'")
    config = FitConfig() if config is None else config
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    classes, groups = _group_indices(labels)
    if classes.size < 2:
        raise ValueError("need at least two groups")
    counts = np.array([g.size for g in groups], dtype=float)
    prior = _check_priors(priors, counts)

    need_group_fits = kind in ("lda-a", "qda") or center == "wle"
    if need_group_fits:
        for c, g in zip(classes, groups):
            if g.size <= p:
                raise RankError(f"group {c!r} has {g.size} rows, needs more than p={p}")
    elif n <= p:
        raise RankError(f"need more rows than columns (n={n}, p={p})")

    fits: list[FitResult] = []
    if need_group_fits:
        fits = [fit_wle(X[g], config) for g in groups]

    if kind == "qda":
        means = np.array([f.location for f in fits])
        scatters = np.array([f.scatter for f in fits])
    elif kind == "lda-a":
        coef = np.array([f.gamma * f.weights.sum() for f in fits])
        pooled = np.einsum("j,jkl->kl", coef, np.array([f.scatter for f in fits])) / coef.sum()
        means = np.array([f.location for f in fits])
        scatters = np.repeat(pooled[None], len(classes), axis=0)
    else:
        if center == "l1":
            centers = np.array([spatial_median(X[g]) for g in groups])
        else:
            centers = np.array([f.location for f in fits])
        Z = np.empty_like(X)
        for j, g in enumerate(groups):
            Z[g] = X[g] - centers[j]
        pooled_fit = fit_wle(Z, config)
        fits = fits + [pooled_fit]
        means = centers + pooled_fit.location
        scatters = np.repeat(pooled_fit.scatter[None], len(classes), axis=0)
    return DaModel(kind=kind, labels=classes, priors=prior, means=means, scatters=scatters, fits=fits)


def classify(model: DaModel, y):
    """Label(s) maximising the discriminant score; first index wins ties.

    A single observation (1-d input) returns a single label.
    """
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    out = model.labels[np.argmax(model.scores(np.atleast_2d(y)), axis=1)]
    return out[0] if single else out


def misclassification(model: DaModel, X, labels) -> float:
    labels = np.asarray(labels)
    pred = classify(model, np.atleast_2d(X))
    if pred.shape[0] != labels.shape[0]:
        raise ValueError("labels must align with rows")
    return float(np.mean(pred != labels))


def _loo_split(args):
    i, X, labels, kind, config, priors, center = args
    mask = np.ones(X.shape[0], dtype=bool)
    mask[i] = False
    try:
        model = fit_da(X[mask], labels[mask], kind, config, priors, center)
    except Exception as exc:
        raise RuntimeError(f"leave-one-out split {i} failed: {exc}") from exc
    return classify(model, X[i]) != labels[i]


def loo_cv(X, labels, kind: str = "lda-b", config: FitConfig | None = None, priors=None,
           center: str = "l1", n_jobs: int | None = None) -> float:
    """Leave-one-out misclassification rate, refitting every split."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    tasks = [(i, X, labels, kind, config, priors, center) for i in range(X.shape[0])]
    if n_jobs in (None, 1):
        errors = [_loo_split(t) for t in tasks]
    else:
        from joblib import Parallel, delayed

        errors = Parallel(n_jobs=n_jobs)(delayed(_loo_split)(t) for t in tasks)
    return float(np.mean(errors))


class WLEDiscriminantAnalysis(ClassifierMixin, BaseEstimator):
    """Discriminant analysis on weighted likelihood estimates.

    Parameters
    ----------
    kind : {"lda-a", "lda-b", "qda"}, default="lda-b"
    center : {"l1", "wle"}, default="l1"
        Group centring used by ``lda-b``.
    priors : array-like or None, default=None
    kernel, raf, bandwidth, target_downweighting, init, max_iter, tol, smooth_model
        Forwarded to every weighted likelihood fit; see
        :class:`~wlecov.estimator.WLECovariance`.
    """

    def __init__(self, kind="lda-b", *, center="l1", priors=None, kernel="logback",
                 raf="hellinger", bandwidth="auto", target_downweighting=None,
                 init="deterministic", max_iter=500, tol=1e-6, smooth_model=True):
        self.kind = kind
        self.center = center
        self.priors = priors
        self.kernel = kernel
        self.raf = raf
        self.bandwidth = bandwidth
        self.target_downweighting = target_downweighting
        self.init = init
        self.max_iter = max_iter
        self.tol = tol
        self.smooth_model = smooth_model

    def _config(self):
        return FitConfig(
            kernel=self.kernel,
            raf=self.raf,
            bandwidth=None if self.bandwidth in (None, "auto") else float(self.bandwidth),
            target_downweighting=self.target_downweighting,
            init=self.init,
            max_iter=self.max_iter,
            tol=self.tol,
            smooth_model=self.smooth_model,
        )

    def fit(self, X, y):
        X, y = validate_data(self, X, y)
        check_classification_targets(y)
        self.model_ = fit_da(X, y, self.kind, self._config(), self.priors, self.center)
        self.classes_ = self.model_.labels
        self.means_ = self.model_.means
        self.priors_ = self.model_.priors
        return self

    def decision_function(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, reset=False)
        return self.model_.scores(X)

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
