"""Weighted likelihood estimation of multivariate location and scatter.

Robustness weights come from Pearson residuals of the *squared Mahalanobis
distances*: a univariate kernel estimate of their density is compared with
the (smoothed) chi-square law they follow at the normal model. The fit is
the fixed point of

    distances -> density estimate -> residuals -> weights -> weighted mean
    and unbiased weighted covariance

run from several starting values, after which one root is selected.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from sklearn.covariance import EmpiricalCovariance
from sklearn.utils import check_random_state
from sklearn.utils.validation import validate_data

from ._median import spatial_median
from .exceptions import (
    BandwidthSelectionError,
    ConvergenceError,
    DegenerateScatterError,
    RankError,
)
from .kde import (
    KernelScheme,
    canonical_variant,
    default_bandwidth,
    get_smoothed_model,
    kernel_density,
    pearson_residuals,
)
from .outlier import mahalanobis_sq
from .raf import RafSpec, parse_raf, weight

__all__ = [
    "FitConfig",
    "FitResult",
    "WLECovariance",
    "weighted_location_scatter",
    "init_deterministic",
    "init_subsampling",
    "select_root",
    "select_bandwidth",
    "fit_wle",
    "fit_mle",
    "root_criterion",
]

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12
RESIDUAL_THRESHOLD = -0.95
MIN_STEP = 1.0 / 64


@dataclass(frozen=True)
class FitConfig:
    """Settings of a weighted likelihood fit.

    ``bandwidth=None`` with ``target_downweighting=None`` means the
    normal-reference bandwidth of :func:`wlecov.kde.default_bandwidth`.
    A target downweighting level in (0, 0.5) switches to bandwidth search.
    """

    kernel: str = "logback"
    raf: RafSpec = field(default_factory=RafSpec.hellinger)
    bandwidth: float | None = None
    target_downweighting: float | None = None
    init: str = "deterministic"
    n_subsamples: int = 500
    random_state: int | None = None
    max_iter: int = 500
    tol: float = 1e-6
    smooth_model: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kernel", canonical_variant(self.kernel))
        object.__setattr__(self, "raf", parse_raf(self.raf))
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        t = self.target_downweighting
        if t is not None and not 0 < t < 0.5:
            raise ValueError("target downweighting level must lie in (0, 0.5)")
        if self.init not in ("deterministic", "subsampling"):
            raise ValueError(f"unknown init {self.init!r}")

    def scheme(self, n: int, p: int) -> KernelScheme:
        h = self.bandwidth if self.bandwidth is not None else default_bandwidth(self.kernel, n, p)
        return KernelScheme(self.kernel, h)


@dataclass
class FitResult:
    location: np.ndarray
    scatter: np.ndarray
    weights: np.ndarray
    squared_distances: np.ndarray
    iterations: int
    converged: bool
    gamma: float
    scheme: KernelScheme | None = None
    raf: RafSpec | None = None
    criterion: float = float("nan")
    start_index: int = -1
    n_starts: int = 1
    n_converged: int = 1

    @property
    def downweighting(self) -> float:
        """Empirical downweighting level ``1 - mean(weights)``."""
        return float(1.0 - np.mean(self.weights))

    @property
    def correlation(self) -> np.ndarray:
        s = np.sqrt(np.diag(self.scatter))
        return self.scatter / np.outer(s, s)


def weighted_location_scatter(X, weights):
    """Weighted mean and unbiased weighted covariance.

    ``Sigma_u = sum w_i r_i r_i^T / (gamma * sum w_i)`` with
    ``gamma = 1 - sum w_i^2 / (sum w_i)^2``; unit weights give the
    ``n - 1`` denominator.

    Returns
    -------
    location, scatter, gamma
    """
    X = np.asarray(X, dtype=float)
    w = np.asarray(weights, dtype=float)
    n, p = X.shape
    if w.shape != (n,):
        raise ValueError("weights must have one entry per row")
    if np.any(w < 0) or np.any(w > 1):
        raise ValueError("weights must lie in [0, 1]")
    sw = w.sum()
    sw2 = np.dot(w, w)
    if sw <= 0:
        raise RankError("all weights are zero")
    if sw * sw / sw2 <= p:
        raise RankError(f"effective sample size {sw * sw / sw2:.3g} does not exceed p={p}")
    gamma = 1.0 - sw2 / (sw * sw)
    mu = w @ X / sw
    R = X - mu
    S = (R * w[:, None]).T @ R / (gamma * sw)
    S = 0.5 * (S + S.T)
    cond = np.linalg.cond(S)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateScatterError(f"scatter condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    return mu, S, float(gamma)


# -- starting values -----------------------------------------------------------

def _mad(X, center=None):
    center = np.median(X, axis=0) if center is None else center
    return 1.4826 * np.median(np.abs(X - center), axis=0)


def _make_pd(S):
    S = 0.5 * (S + S.T)
    vals, vecs = np.linalg.eigh(S)
    floor = max(vals.max(), 1e-300) * 1e-10
    vals = np.maximum(vals, floor)
    return (vecs * vals) @ vecs.T


def _shape_from_correlation(Z, R):
    """Rescale a correlation-type matrix of standardized data (DetMCD style)."""
    _, vecs = np.linalg.eigh(0.5 * (R + R.T))
    B = Z @ vecs
    scales = _mad(B)
    if np.any(scales <= 0):
        scales = np.maximum(scales, np.std(B, axis=0, ddof=1))
        scales = np.maximum(scales, 1e-12)
    S = (vecs * scales**2) @ vecs.T
    root = (vecs * scales) @ vecs.T
    inv_root = (vecs / scales) @ vecs.T
    center = np.median(Z @ inv_root, axis=0) @ root
    return center, S


def _normal_scores(Z):
    n = Z.shape[0]
    ranks = stats.rankdata(Z, axis=0)
    return stats.norm.ppf((ranks - 1.0 / 3.0) / (n + 1.0 / 3.0))


def init_deterministic(X):
    """Six deterministic (location, scatter) starts.

    1. coordinatewise median with diagonal squared MADs
    2. hyperbolic tangent of robustly standardized data
    3. Spearman rank correlation
    4. normal-scores correlation
    5. spatial median with an isotropic shape of average squared MAD
    6. mean and covariance of the half sample closest to the median,
       rescaled so the median squared distance matches chi-square(p)

    Starts 2-4 turn a correlation matrix of the standardized data into a
    scatter through its eigenvectors and MADs of the rotated coordinates.
    Starts 1-5 need every MAD to be positive and are skipped otherwise.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if n <= p:
        raise RankError(f"need n > p for starting values (n={n}, p={p})")
    med = np.median(X, axis=0)
    mad = _mad(X, med)
    starts = []
    if np.all(mad > 0):
        Z = (X - med) / mad
        D = np.diag(mad)
        starts.append((med.copy(), np.diag(mad**2)))
        for R in (
            np.corrcoef(np.tanh(Z), rowvar=False),
            np.corrcoef(stats.rankdata(Z, axis=0), rowvar=False),
            np.corrcoef(_normal_scores(Z), rowvar=False),
        ):
            R = np.atleast_2d(R)
            cz, Sz = _shape_from_correlation(Z, np.nan_to_num(R))
            starts.append((med + mad * cz, _make_pd(D @ Sz @ D)))
        starts.append((spatial_median(X), np.eye(p) * np.mean(mad**2)))
    else:
        warnings.warn("zero MAD in some coordinate: deterministic starts 1-5 skipped", RuntimeWarning)
    scale = np.where(mad > 0, mad, np.std(X, axis=0, ddof=1))
    scale = np.where(scale > 0, scale, 1.0)
    norms = np.linalg.norm((X - med) / scale, axis=1)
    half = np.argsort(norms, kind="stable")[: (n + 1) // 2 if (n + 1) // 2 > p else p + 1]
    sub = X[half]
    mu6 = sub.mean(axis=0)
    # the inner half underestimates spread; rescale to chi-square consistency
    starts.append((mu6, _rescale_start(X, mu6, _make_pd(np.atleast_2d(np.cov(sub, rowvar=False))))))
    return [(np.asarray(m, dtype=float), _make_pd(np.atleast_2d(S))) for m, S in starts]


def init_subsampling(X, count: int, random_state=None, max_retries: int = 100):
    """Mean and covariance of ``count`` random subsets of size ``p + 1``.

    Singular subsets are redrawn, at most ``max_retries`` times per start.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if n < p + 1:
        raise RankError(f"need n >= p + 1 for subsampling (n={n}, p={p})")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = check_random_state(random_state)
    starts = []
    for _ in range(count):
        for _attempt in range(max_retries + 1):
            idx = np.sort(rng.choice(n, size=p + 1, replace=False))
            sub = X[idx]
            S = np.atleast_2d(np.cov(sub, rowvar=False))
            cond = np.linalg.cond(S)
            if np.isfinite(cond) and cond < MAX_CONDITION:
                starts.append((sub.mean(axis=0), S))
                break
        else:
            raise DegenerateScatterError(f"no nonsingular subset found after {max_retries} retries")
    return starts


# -- the fixed point -----------------------------------------------------------

def _rescale_start(X, location, scatter):
    """Scale a shape so the median squared distance matches chi-square(p)."""
    p = X.shape[1]
    d2 = mahalanobis_sq(X, location, scatter)
    med = np.median(d2)
    if med <= 0 or not np.isfinite(med):
        return scatter
    return scatter * (med / stats.chi2.ppf(0.5, p))


def _relative_change(mu0, S0, mu1, S1):
    scale = math.sqrt(max(np.trace(S1) / S1.shape[0], 1e-300))
    dmu = np.linalg.norm(mu1 - mu0) / max(np.linalg.norm(mu1), scale)
    dS = np.linalg.norm(S1 - S0) / max(np.linalg.norm(S1), 1e-300)
    return max(dmu, dS)


def _weights(X, mu, S, scheme, raf, smooth):
    d2 = mahalanobis_sq(X, mu, S)
    if raf.is_mle:
        return np.ones(X.shape[0]), d2
    delta = pearson_residuals(X.shape[1], scheme, d2, smooth=smooth)
    return weight(raf, delta), d2


def _step(X, mu, S, scheme, raf, smooth):
    w, _ = _weights(X, mu, S, scheme, raf, smooth)
    mu_new, S_new, gamma = weighted_location_scatter(X, w)
    return mu_new, S_new, w, gamma


def _is_pd(S):
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(np.isfinite(S)))


def _iterate(X, mu, S, scheme, raf, config):
    """Fixed-point iterations from ``(mu, S)``, counted in map evaluations.

    Pairs of relaxed steps ``x + s (F(x) - x)`` are extrapolated (SQUAREM)
    to speed up slow linear convergence. A pair that overshoots back and
    forth (dominant eigenvalue of the map below -1/2, e.g. a boundary
    point whose weight flips every step) halves the relaxation ``s``; an
    extrapolation that increases the step size of the map is discarded in
    favour of the plain iterate. None of this moves the fixed points, and
    convergence is always judged on a full step of the map.
    """
    smooth = config.smooth_model
    converged = False
    relax = 1.0
    it = 0
    previous = np.inf
    fallback = None

    def evaluate(mu0, S0):
        nonlocal it
        it += 1
        mu1, S1, w1, g1 = _step(X, mu0, S0, scheme, raf, smooth)
        return mu1, S1, w1, g1, _relative_change(mu0, S0, mu1, S1)

    while it < config.max_iter:
        muF, SF, w, gamma, change = evaluate(mu, S)
        if change < config.tol:
            mu, S, converged = muF, SF, True
            break
        if fallback is not None and change > previous:
            mu, S = fallback
            fallback = None
            continue
        fallback = None
        previous = change
        mu1, S1 = mu + relax * (muF - mu), S + relax * (SF - S)
        if it >= config.max_iter:
            mu, S = mu1, S1
            break
        muF, SF, w, gamma, change = evaluate(mu1, S1)
        if change < config.tol:
            mu, S, converged = muF, SF, True
            break
        mu2, S2 = mu1 + relax * (muF - mu1), S1 + relax * (SF - S1)
        r = np.concatenate([mu1 - mu, (S1 - S).ravel()])
        v = np.concatenate([mu2 - 2 * mu1 + mu, (S2 - 2 * S1 + S).ravel()])
        nr, nv = np.linalg.norm(r), np.linalg.norm(v)
        if nv > 1.5 * nr and relax > MIN_STEP:
            relax /= 2.0
            mu, S = mu2, S2
            continue
        alpha = min(-nr / nv if nv > 0 else -1.0, -1.0)
        mu_x = mu - 2 * alpha * r[: mu.size] + alpha**2 * v[: mu.size]
        S_x = S - 2 * alpha * (S1 - S) + alpha**2 * (S2 - 2 * S1 + S)
        S_x = (S_x + S_x.T) / 2.0
        if alpha < -1.0 and _is_pd(S_x) and np.all(np.isfinite(mu_x)):
            mu, S, fallback = mu_x, S_x, (mu2, S2)
        else:
            mu, S = mu2, S2
    if not converged:
        # weights and scatter must describe the returned iterate
        w, _ = _weights(X, mu, S, scheme, raf, smooth)
        gamma = weighted_location_scatter(X, w)[2]
    d2 = mahalanobis_sq(X, mu, S)
    return FitResult(
        location=mu,
        scatter=S,
        weights=w,
        squared_distances=d2,
        iterations=it,
        converged=converged,
        gamma=gamma,
        scheme=scheme,
        raf=raf,
    )


def root_criterion(result: FitResult, smooth: bool = True) -> float:
    """Model probability of the region where the Pearson residual is below -0.95.

    The residual function is evaluated over the smoothed-model grid using the
    kernel estimate of ``result.squared_distances``; the model mass of the
    region where the data are (nearly) absent is returned.
    """
    p = result.location.shape[0]
    model = get_smoothed_model(p, result.scheme, smooth)
    grid = model.grid
    d2 = np.maximum(result.squared_distances, 1e-300)
    m_hat = kernel_density(result.scheme, d2, grid)
    m_star = np.exp(model.log_values)
    low = m_hat < (1.0 + RESIDUAL_THRESHOLD) * m_star
    return float(np.sum(model.quadrature_weights() * m_star * low))


def empirical_low_residual_fraction(result: FitResult, smooth: bool = True) -> float:
    """Share of observations whose own Pearson residual is below -0.95."""
    p = result.location.shape[0]
    delta = pearson_residuals(p, result.scheme, result.squared_distances, smooth=smooth)
    return float(np.mean(delta < RESIDUAL_THRESHOLD))


def select_root(candidates, X=None, config: FitConfig | None = None,
                tie_tolerance: float | None = None) -> FitResult:
    """Pick the root with the smallest low-residual model probability.

    Only converged candidates compete unless none converged, in which case
    the best non-converged one is returned with ``converged=False``.

    The probability is estimated from ``n`` observations, so criterion values
    within ``tie_tolerance`` (default ``1/n``) of the minimum count as ties.
    Ties go to the smaller ``det(scatter)``, then to the earlier candidate.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidate roots")
    smooth = True if config is None else config.smooth_model
    if len(candidates) == 1:
        only = candidates[0]
        if not np.isfinite(only.criterion):
            only.criterion = root_criterion(only, smooth)
        return only
    pool = [c for c in candidates if c.converged] or candidates
    for c in pool:
        if not np.isfinite(c.criterion):
            c.criterion = root_criterion(c, smooth)
    if tie_tolerance is None:
        tie_tolerance = 1.0 / pool[0].squared_distances.shape[0]
    lowest = min(c.criterion for c in pool)
    tied = [
        (round(np.linalg.slogdet(c.scatter)[1], 10), i)
        for i, c in enumerate(pool)
        if c.criterion <= lowest + tie_tolerance
    ]
    return pool[min(tied)[1]]


def _fit_at(X, config: FitConfig, scheme: KernelScheme, starts):
    raf = config.raf
    if raf.is_mle:
        # unit weights: a single weighted step from any start gives the MLE
        res = _iterate(X, X.mean(axis=0), np.atleast_2d(np.cov(X, rowvar=False)), scheme, raf, config)
        res.start_index, res.n_starts, res.n_converged = 0, 1, int(res.converged)
        return res
    candidates = []
    failures = 0
    for i, (mu0, S0) in enumerate(starts):
        try:
            S0 = _rescale_start(X, mu0, S0)
            res = _iterate(X, mu0, S0, scheme, raf, config)
        except (DegenerateScatterError, RankError, ValueError) as exc:
            failures += 1
            logger.debug("start %d abandoned: %s", i, exc)
            continue
        res.start_index = i
        candidates.append(res)
    if not candidates:
        raise DegenerateScatterError(f"all {len(starts)} starts degenerated")
    best = select_root(candidates, X, config)
    best.n_starts = len(starts)
    best.n_converged = sum(c.converged for c in candidates)
    if best.n_converged == 0:
        raise ConvergenceError(f"no start converged within {config.max_iter} iterations", best=best)
    return best


def _starts(X, config):
    if config.init == "deterministic":
        return init_deterministic(X)
    return init_subsampling(X, config.n_subsamples, config.random_state)


def select_bandwidth(X, target: float, config: FitConfig | None = None, tol: float = 0.01,
                     max_expansions: int = 30, max_bisections: int = 40, starts=None):
    """Bandwidth whose fit reaches a given empirical downweighting level.

    Downweighting ``1 - mean(w)`` decreases as the bandwidth grows. The
    search brackets ``target`` by doubling/halving from the default
    bandwidth, then bisects on the log scale.

    Returns
    -------
    h : float
    result : FitResult
        The fit at ``h``.
    """
    if not 0 < target < 0.5:
        raise ValueError("target downweighting level must lie in (0, 0.5)")
    config = FitConfig() if config is None else config
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if config.raf.is_mle:
        raise ValueError("the maximum likelihood RAF never downweights")
    starts = _starts(X, config) if starts is None else starts
    profile = []

    def evaluate(h):
        res = _fit_at(X, config, KernelScheme(config.kernel, h), starts)
        profile.append((h, res.downweighting))
        return res

    h = config.bandwidth or default_bandwidth(config.kernel, n, p)
    res = evaluate(h)
    best = (abs(res.downweighting - target), h, res)
    if best[0] <= tol:
        return h, res
    direction = 2.0 if res.downweighting > target else 0.5
    lo_h, lo_res = h, res
    for _ in range(max_expansions):
        h2 = lo_h * direction
        res2 = evaluate(h2)
        if abs(res2.downweighting - target) < best[0]:
            best = (abs(res2.downweighting - target), h2, res2)
        if best[0] <= tol:
            return best[1], best[2]
        if (res2.downweighting - target) * (lo_res.downweighting - target) < 0:
            a, b = sorted([(lo_h, lo_res), (h2, res2)], key=lambda t: t[0])
            break
        lo_h, lo_res = h2, res2
    else:
        raise BandwidthSelectionError(
            f"could not bracket downweighting level {target}", profile=profile
        )
    # a: smaller h (more downweighting), b: larger h
    for _ in range(max_bisections):
        mid = math.sqrt(a[0] * b[0])
        rm = evaluate(mid)
        err = abs(rm.downweighting - target)
        if err < best[0]:
            best = (err, mid, rm)
        if err <= tol:
            break
        if rm.downweighting > target:
            a = (mid, rm)
        else:
            b = (mid, rm)
    if best[0] > tol:
        warnings.warn(
            f"closest downweighting {target:+.3f}{best[0]:+.3f} is outside the tolerance;"
            " the downweighting profile jumps between roots",
            RuntimeWarning,
        )
    return best[1], best[2]


def fit_wle(X, config: FitConfig | None = None) -> FitResult:
    """Weighted likelihood estimate of location and unbiased scatter.

    Parameters
    ----------
    X : array-like of shape (n_samples, n_features)
        Requires ``n_samples > n_features``.
    config : FitConfig, optional

    Returns
    -------
    FitResult
    """
    config = FitConfig() if config is None else config
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("data must be a 2-d array")
    n, p = X.shape
    if n <= p:
        raise RankError(f"need more rows than columns (n={n}, p={p})")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contain non-finite values")
    if config.target_downweighting is not None and not config.raf.is_mle:
        _, res = select_bandwidth(X, config.target_downweighting, config)
        return res
    starts = [] if config.raf.is_mle else _starts(X, config)
    return _fit_at(X, config, config.scheme(n, p), starts)


def fit_mle(X) -> FitResult:
    """Sample mean and ``n - 1`` covariance packaged as a :class:`FitResult`."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    mu, S, gamma = weighted_location_scatter(X, np.ones(n))
    return FitResult(
        location=mu,
        scatter=S,
        weights=np.ones(n),
        squared_distances=mahalanobis_sq(X, mu, S),
        iterations=1,
        converged=True,
        gamma=gamma,
        raf=RafSpec.maximum_likelihood(),
    )


def refit_step(X, result: FitResult, smooth: bool = True):
    """One more fixed-point step from ``result``; returns (location, scatter)."""
    w, _ = _weights(np.asarray(X, float), result.location, result.scatter, result.scheme,
                    result.raf, smooth)
    mu, S, _ = weighted_location_scatter(X, w)
    return mu, S


class WLECovariance(EmpiricalCovariance):
    """Weighted likelihood estimator of location and scatter.

    Parameters
    ----------
    kernel : {"logback", "reflect", "gamma", "logchisq"}, default="logback"
        Boundary-corrected kernel used on the squared distances.
    raf : str or RafSpec, default="hellinger"
        Residual adjustment function (``ml``, ``hellinger``, ``kl``, ``ncs``
        or ``power:<tau>``).
    bandwidth : float or "auto", default="auto"
        Kernel bandwidth on the kernel's own scale. ``"auto"`` uses the
        normal-reference rule derived from the chi-square law.
    target_downweighting : float or None, default=None
        If set, the bandwidth is searched so that ``1 - mean(weights_)``
        matches this level (overrides ``bandwidth``).
    init : {"deterministic", "subsampling"}, default="deterministic"
    n_subsamples : int, default=500
        Number of random ``(p + 1)``-subsets when ``init="subsampling"``.
    max_iter : int, default=500
    tol : float, default=1e-6
        Relative change of location and scatter at which iterations stop.
    smooth_model : bool, default=True
        Smooth the chi-square model with the kernel before forming residuals.
    store_precision : bool, default=True
    random_state : int, RandomState instance or None, default=None

    Attributes
    ----------
    location_ : ndarray of shape (n_features,)
    covariance_ : ndarray of shape (n_features, n_features)
        Unbiased weighted scatter.
    precision_ : ndarray of shape (n_features, n_features)
    weights_ : ndarray of shape (n_samples,)
    dist_ : ndarray of shape (n_samples,)
        Squared robust distances of the training rows.
    downweighting_ : float
    bandwidth_ : float
    n_iter_ : int
    result_ : FitResult
    """

    def __init__(
        self,
        *,
        kernel="logback",
        raf="hellinger",
        bandwidth="auto",
        target_downweighting=None,
        init="deterministic",
        n_subsamples=500,
        max_iter=500,
        tol=1e-6,
        smooth_model=True,
        store_precision=True,
        random_state=None,
    ):
        self.kernel = kernel
        self.raf = raf
        self.bandwidth = bandwidth
        self.target_downweighting = target_downweighting
        self.init = init
        self.n_subsamples = n_subsamples
        self.max_iter = max_iter
        self.tol = tol
        self.smooth_model = smooth_model
        self.store_precision = store_precision
        self.random_state = random_state

    def _config(self) -> FitConfig:
        bandwidth = None if self.bandwidth in (None, "auto") else float(self.bandwidth)
        seed = self.random_state
        if not (seed is None or isinstance(seed, (int, np.integer))):
            seed = check_random_state(seed).randint(np.iinfo(np.int32).max)
        return FitConfig(
            kernel=self.kernel,
            raf=parse_raf(self.raf),
            bandwidth=bandwidth,
            target_downweighting=self.target_downweighting,
            init=self.init,
            n_subsamples=self.n_subsamples,
            random_state=seed,
            max_iter=self.max_iter,
            tol=self.tol,
            smooth_model=self.smooth_model,
        )

    def fit(self, X, y=None):
        X = validate_data(self, X, ensure_min_samples=2)
        config = self._config()
        result = fit_wle(X, config)
        self.result_ = result
        self.config_ = config
        self._set_covariance(result.scatter)
        self.location_ = result.location
        self.weights_ = result.weights
        self.dist_ = result.squared_distances
        self.downweighting_ = result.downweighting
        self.gamma_ = result.gamma
        self.bandwidth_ = result.scheme.bandwidth if result.scheme is not None else float("nan")
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        return self
