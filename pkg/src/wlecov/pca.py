"""Principal components of a weighted likelihood scatter estimate.

Score distance (SD) measures how far a point lies from the centre within the
principal subspace; orthogonal distance (OD) measures its distance from that
subspace. Together they give the usual PCA outlier map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

__all__ = [
    "PcaModel",
    "robust_pca",
    "pca_from_scatter",
    "project",
    "outlier_map",
    "robust_standardize",
    "RobustPCA",
]


@dataclass(frozen=True)
class PcaModel:
    center: np.ndarray
    loadings: np.ndarray
    eigenvalues: np.ndarray
    total_variance: float
    k: int

    @property
    def explained_variance_ratio(self) -> float:
        """Share of the scatter trace captured by the ``k`` components."""
        return float(self.eigenvalues.sum() / self.total_variance)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "center": self.center.tolist(),
            "loadings": self.loadings.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "total_variance": self.total_variance,
            "explained_variance_ratio": self.explained_variance_ratio,
        }


def _fix_signs(vectors):
    # largest-magnitude entry of each column made positive; first index wins ties
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def pca_from_scatter(center, scatter, k: int) -> PcaModel:
    """Leading ``k`` eigenpairs of a symmetric positive definite scatter."""
    scatter = np.asarray(scatter, dtype=float)
    center = np.asarray(center, dtype=float)
    p = scatter.shape[0]
    if scatter.shape != (p, p) or center.shape != (p,):
        raise ValueError("center and scatter dimensions disagree")
    k = int(k)
    if not 1 <= k <= p:
        raise ValueError(f"k must lie in [1, {p}], got {k}")
    vals, vecs = linalg.eigh(scatter)
    if vals[0] <= 0:
        raise linalg.LinAlgError("scatter matrix is not positive definite")
    order = np.argsort(vals)[::-1][:k]
    return PcaModel(
        center=center.copy(),
        loadings=_fix_signs(vecs[:, order]),
        eigenvalues=vals[order],
        total_variance=float(np.trace(scatter)),
        k=k,
    )


def robust_pca(fit, k: int) -> PcaModel:
    """Principal components of a fitted location/scatter pair.

    Parameters
    ----------
    fit : FitResult
        Any object with ``location`` and ``scatter``.
    k : int
        Number of components, ``1 <= k <= p``.
    """
    return pca_from_scatter(fit.location, fit.scatter, k)


def project(model: PcaModel, X) -> dict:
    """Scores, score distances and orthogonal distances of the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.center.shape[0]:
        raise ValueError(f"expected {model.center.shape[0]} columns, got {X.shape[1]}")
    R = X - model.center
    T = R @ model.loadings
    resid = R - T @ model.loadings.T
    return {
        "scores": T,
        "score_distance": np.sqrt(np.sum(T**2 / model.eigenvalues, axis=1)),
        "orthogonal_distance": np.sqrt(np.einsum("ij,ij->i", resid, resid)),
    }


def _od_cutoff(od, alpha):
    z = od ** (2.0 / 3.0)
    center = np.median(z)
    scale = stats.median_abs_deviation(z, scale="normal")
    if scale == 0 and center == 0:
        return 0.0
    return float((center + scale * stats.norm.ppf(1.0 - alpha)) ** 1.5)


def outlier_map(model: PcaModel, X, alpha: float = 0.025) -> dict:
    """Coordinates and cutoffs of the SD/OD outlier map.

    The SD cutoff is ``sqrt`` of the chi-square(k) ``1 - alpha`` quantile.
    The OD cutoff treats ``OD**(2/3)`` as approximately normal
    (Wilson-Hilferty) with centre and scale estimated by the median and the
    normal-consistent MAD.

    Returns
    -------
    dict with keys ``pairs`` (n x 2 array of SD, OD), ``sd_cutoff``,
    ``od_cutoff``, ``sd_flags`` and ``od_flags``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    proj = project(model, X)
    sd, od = proj["score_distance"], proj["orthogonal_distance"]
    # rounding noise of points lying in the subspace counts as zero
    od = np.where(od <= 1e-10 * np.sqrt(model.total_variance), 0.0, od)
    sd_cut = float(np.sqrt(stats.chi2.ppf(1.0 - alpha, model.k)))
    od_cut = _od_cutoff(od, alpha)
    return {
        "pairs": np.column_stack([sd, od]),
        "sd_cutoff": sd_cut,
        "od_cutoff": od_cut,
        "sd_flags": sd > sd_cut,
        "od_flags": od > od_cut,
    }


def robust_standardize(X):
    """Columnwise robust z-scores ``(x - median) / MAD`` (normal-consistent).

    Returns the standardized data with the medians and scales used.
    """
    X = np.asarray(X, dtype=float)
    med = np.median(X, axis=0)
    scale = stats.median_abs_deviation(X, axis=0, scale="normal")
    if np.any(scale == 0):
        bad = np.flatnonzero(scale == 0).tolist()
        raise ValueError(f"columns {bad} have zero MAD and cannot be standardized")
    return (X - med) / scale, med, scale


class RobustPCA(TransformerMixin, BaseEstimator):
    """PCA on a weighted likelihood scatter estimate.

    Parameters
    ----------
    n_components : int, default=2
    standardize : bool, default=True
        Work on robust z-scores (median/MAD) of the columns.
    alpha : float, default=0.025
        Level of the outlier-map cutoffs.
    estimator : WLECovariance or None
        Unfitted covariance estimator; a default ``WLECovariance`` when None.

    Attributes
    ----------
    model_ : PcaModel
    components_ : ndarray of shape (n_components, n_features)
    explained_variance_ : ndarray of shape (n_components,)
    explained_variance_ratio_ : float
        Cumulative share of the scatter trace.
    sd_cutoff_, od_cutoff_ : float
    """

    def __init__(self, n_components=2, *, standardize=True, alpha=0.025, estimator=None):
        self.n_components = n_components
        self.standardize = standardize
        self.alpha = alpha
        self.estimator = estimator

    def _prepare(self, X):
        if self.standardize:
            return (X - self.median_) / self.scale_
        return X

    def fit(self, X, y=None):
        from sklearn.base import clone

        from .estimator import WLECovariance

        X = validate_data(self, X, ensure_min_samples=2)
        if self.standardize:
            _, self.median_, self.scale_ = robust_standardize(X)
        Z = self._prepare(X)
        est = WLECovariance() if self.estimator is None else clone(self.estimator)
        self.estimator_ = est.fit(Z)
        self.model_ = pca_from_scatter(est.location_, est.covariance_, self.n_components)
        self.components_ = self.model_.loadings.T
        self.explained_variance_ = self.model_.eigenvalues
        self.explained_variance_ratio_ = self.model_.explained_variance_ratio
        omap = outlier_map(self.model_, Z, self.alpha)
        self.sd_cutoff_, self.od_cutoff_ = omap["sd_cutoff"], omap["od_cutoff"]
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, reset=False)
        return project(self.model_, self._prepare(X))["scores"]

    def distances(self, X):
        """Score and orthogonal distances, shape (n_samples, 2)."""
        check_is_fitted(self)
        X = validate_data(self, X, reset=False)
        proj = project(self.model_, self._prepare(X))
        return np.column_stack([proj["score_distance"], proj["orthogonal_distance"]])
