"""Boundary-corrected kernel density estimation of squared distances.

Four schemes are supported:

``reflect``
    Folded normal kernel on the squared-distance scale.
``logback``
    Normal kernel on log squared distances, back-transformed to (0, inf).
``gamma``
    Gamma kernel ``k(y; t, h) = Gamma(y; shape=t/h + 1, scale=h)``.
``logchisq``
    Normal kernel on log squared distances, compared with the log-chi-square
    law directly on the log scale.

Every scheme pairs its data-side estimate with a smoothed model density
``m*(y) = int k(y; t, h) f(t) dt`` where ``f`` is the chi-square (or
log-chi-square) density of squared distances at the normal model. The
quotient of the two gives the Pearson residuals.

Note that ``logback`` and ``logchisq`` yield the same Pearson residuals
when they share a bandwidth: the Jacobian ``1/y`` of the back-transform
cancels in the ratio. They still differ in the density they report.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats
from scipy.interpolate import CubicSpline

__all__ = [
    "SCHEMES",
    "KernelScheme",
    "SmoothedModel",
    "default_bandwidth",
    "kernel_density",
    "log_kernel_density",
    "smoothed_model",
    "get_smoothed_model",
    "pearson_residuals",
    "to_comparison_scale",
]

SCHEMES = ("reflect", "logback", "gamma", "logchisq")
_ALIASES = {
    "reflect": "reflect",
    "reflected": "reflect",
    "folded": "reflect",
    "wlea": "reflect",
    "logback": "logback",
    "wleb": "logback",
    "logchisq": "logchisq",
    "wlec": "logchisq",
    "gamma": "gamma",
    "wled": "gamma",
}

DENSITY_FLOOR = 1e-300
_LOG_FLOOR = math.log(DENSITY_FLOOR)
GRID_SIZE = 512
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_LOG_GL_WEIGHTS = np.log(_GL_WEIGHTS)
_QUANTILE_PROBS = np.array(
    [1e-12, 1e-8, 1e-5, 1e-3, 0.01, 0.05, 0.15, 0.3, 0.5, 0.7, 0.85, 0.95,
     0.99, 0.999, 1 - 1e-5, 1 - 1e-8, 1 - 1e-12, 1 - 1e-15]
)
_KERNEL_OFFSETS = np.array([-12.0, -6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0, 12.0])
# rows of the data-side kernel matrix are processed in blocks of this many cells
_BLOCK_CELLS = 2_000_000


@dataclass(frozen=True)
class KernelScheme:
    """A boundary-correction variant together with its bandwidth.

    The bandwidth lives on the scale the variant smooths: squared distances
    for ``reflect`` and ``gamma``, log squared distances otherwise.
    """

    variant: str
    bandwidth: float

    def __post_init__(self):
        variant = _ALIASES.get(str(self.variant).lower())
        if variant is None:
            raise ValueError(f"unknown kernel scheme {self.variant!r}; expected one of {SCHEMES}")
        object.__setattr__(self, "variant", variant)
        h = float(self.bandwidth)
        if not (h > 0 and math.isfinite(h)):
            raise ValueError(f"bandwidth must be positive and finite, got {self.bandwidth}")
        object.__setattr__(self, "bandwidth", h)

    @property
    def log_scale(self) -> bool:
        """Whether the smoothing happens on log squared distances."""
        return self.variant in ("logback", "logchisq")

    @property
    def compares_on_log_scale(self) -> bool:
        return self.variant == "logchisq"


def canonical_variant(name: str) -> str:
    variant = _ALIASES.get(str(name).lower())
    if variant is None:
        raise ValueError(f"unknown kernel scheme {name!r}; expected one of {SCHEMES}")
    return variant


def default_bandwidth(variant: str, n: int, p: int) -> float:
    """Normal-reference bandwidth computed from the chi-square law itself.

    The spread of squared distances at the model does not depend on the
    data scale, so neither does the bandwidth. For the gamma kernel the
    variance ``h * t`` of the kernel at the model mean ``t = p`` is matched
    to the squared normal-reference bandwidth.
    """
    variant = canonical_variant(variant)
    factor = 1.06 * float(n) ** (-0.2)
    if variant in ("logback", "logchisq"):
        return factor * math.sqrt(special.polygamma(1, p / 2.0))
    h = factor * math.sqrt(2.0 * p)
    if variant == "gamma":
        return h * h / p
    return h


def to_comparison_scale(scheme: KernelScheme, squared_distances) -> np.ndarray:
    """Map squared distances to the axis on which residuals are formed."""
    d2 = np.asarray(squared_distances, dtype=float)
    if scheme.compares_on_log_scale:
        return np.log(np.maximum(d2, DENSITY_FLOOR))
    return d2


# -- kernels -----------------------------------------------------------------

def _log_normal_pdf(u, h):
    return -0.5 * (u / h) ** 2 - math.log(h) - 0.5 * math.log(2 * math.pi)


def _log_kernel(variant, h, y, t):
    """log k(y; t, h) on the smoothing scale (y, t broadcast)."""
    if variant == "reflect":
        return np.logaddexp(_log_normal_pdf(y - t, h), _log_normal_pdf(y + t, h))
    if variant == "gamma":
        shape = t / h + 1.0
        return special.xlogy(shape - 1.0, y) - y / h - special.gammaln(shape) - shape * math.log(h)
    return _log_normal_pdf(y - t, h)


def _log_chi2(p, t):
    half = p / 2.0
    with np.errstate(divide="ignore"):
        return special.xlogy(half - 1.0, t) - t / 2.0 - half * math.log(2.0) - special.gammaln(half)


def _log_logchi2(p, x):
    half = p / 2.0
    return half * x - np.exp(x) / 2.0 - half * math.log(2.0) - special.gammaln(half)


# -- data side ---------------------------------------------------------------

def _validate_sample(sample):
    s = np.asarray(sample, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("kernel density needs a nonempty sample")
    if not np.all(np.isfinite(s)):
        raise ValueError("sample contains non-finite values")
    if np.any(s <= 0):
        raise ValueError("squared distances must be strictly positive")
    return s


def _log_kde_smoothing_scale(variant, h, sample, at):
    """log of (1/n) sum_j k(at; sample_j, h) on the smoothing scale."""
    n = sample.size
    out = np.empty(at.size)
    block = max(1, _BLOCK_CELLS // n)
    for start in range(0, at.size, block):
        rows = at[start:start + block, None]
        out[start:start + block] = special.logsumexp(_log_kernel(variant, h, rows, sample[None, :]), axis=1)
    return out - math.log(n)


def log_kernel_density(scheme: KernelScheme, sample, at) -> np.ndarray:
    """Log of :func:`kernel_density`, without underflow."""
    s = _validate_sample(sample)
    at = np.atleast_1d(np.asarray(at, dtype=float))
    v, h = scheme.variant, scheme.bandwidth
    if v in ("reflect", "gamma"):
        if np.any(at < 0):
            raise ValueError("evaluation points must be nonnegative for positive-support kernels")
        return _log_kde_smoothing_scale(v, h, s, at)
    if v == "logback":
        if np.any(at <= 0):
            raise ValueError("evaluation points must be positive for the back-transformed kernel")
        return _log_kde_smoothing_scale(v, h, np.log(s), np.log(at)) - np.log(at)
    return _log_kde_smoothing_scale(v, h, np.log(s), at)


def kernel_density(scheme: KernelScheme, sample, at) -> np.ndarray:
    """Kernel density estimate of positive squared distances.

    Parameters
    ----------
    scheme : KernelScheme
        Variant and bandwidth.
    sample : array-like of positive floats
        Squared distances. Log-scale variants transform them internally.
    at : array-like
        Evaluation points. For ``logchisq`` these are on the log scale and
        the log-scale density is returned; every other variant evaluates a
        density on the squared-distance axis.

    Returns
    -------
    ndarray
        Nonnegative density values.
    """
    return np.exp(log_kernel_density(scheme, sample, at))


# -- model side --------------------------------------------------------------

def _model_quantiles(p, log_scale):
    q = stats.chi2.ppf(_QUANTILE_PROBS, p)
    return np.log(q) if log_scale else q


def _breakpoints(variant, h, p, y):
    """Per-point sorted integration breakpoints, shape (len(y), K)."""
    log_scale = variant in ("logback", "logchisq")
    q = _model_quantiles(p, log_scale)
    yy = y[:, None]
    if variant == "reflect":
        kern = np.concatenate([yy + h * _KERNEL_OFFSETS, -yy + h * _KERNEL_OFFSETS[5:]], axis=1)
    elif variant == "gamma":
        spread = np.sqrt(yy * h) + h
        kern = yy + spread * _KERNEL_OFFSETS
        kern = np.concatenate([kern, yy + 12.0 * spread + 12.0 * h], axis=1)
    else:
        kern = yy + h * _KERNEL_OFFSETS
    pts = np.concatenate([np.broadcast_to(q, (y.size, q.size)), kern], axis=1)
    lo = pts.min(axis=1, keepdims=True)
    hi = pts.max(axis=1, keepdims=True)
    if not log_scale:
        lo = np.zeros_like(lo)
    pts = np.clip(pts, lo, hi)
    pts = np.concatenate([lo, pts, hi], axis=1)
    return np.sort(pts, axis=1)


def _log_smoothed_direct(variant, h, p, y, block=256):
    """log m*(y) by composite 32-point Gauss-Legendre quadrature.

    The integration axis is split at model quantiles and at kernel-scaled
    offsets around ``y``, so both the kernel peak and the model bulk are
    resolved whatever the bandwidth.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty(y.size)
    for start in range(0, y.size, block):
        yb = y[start:start + block]
        bp = _breakpoints(variant, h, p, yb)
        log_scale = variant in ("logback", "logchisq")
        if not log_scale:
            # t = u^2 removes the t^(p/2 - 1) singularity at the origin
            bp = np.sqrt(bp)
        a, b = bp[:, :-1], bp[:, 1:]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        t = mid[..., None] + half[..., None] * _GL_NODES
        with np.errstate(divide="ignore"):
            logw = np.log(half)[..., None] + _LOG_GL_WEIGHTS
        if log_scale:
            logf = _log_logchi2(p, t)
        else:
            with np.errstate(divide="ignore"):
                logw = logw + np.log(2 * t)
            t = t * t
            logf = _log_chi2(p, t)
        logk = _log_kernel(variant, h, yb[:, None, None], t)
        with np.errstate(invalid="ignore"):
            terms = (logw + logk + logf).reshape(yb.size, -1)
        terms = np.where(np.isnan(terms), -np.inf, terms)
        out[start:start + block] = special.logsumexp(terms, axis=1)
    return out


class SmoothedModel:
    """Smoothed chi-square model density of squared distances.

    The model side never changes while a fit iterates, so ``log m*`` is
    tabulated once on a grid and interpolated with a cubic spline. Points
    beyond the grid are integrated directly.

    Parameters
    ----------
    p : int
        Dimension, i.e. chi-square degrees of freedom.
    scheme : KernelScheme
    smooth : bool, default=True
        If False the raw chi-square (or log-chi-square) density is used.
    """

    def __init__(self, p: int, scheme: KernelScheme, smooth: bool = True):
        if int(p) != p or p < 1:
            raise ValueError(f"p must be a positive integer, got {p}")
        self.p = int(p)
        self.scheme = scheme
        self.smooth = bool(smooth)
        self._build_grid()

    def _build_grid(self):
        v, h, p = self.scheme.variant, self.scheme.bandwidth, self.p
        if self.scheme.log_scale:
            q = np.log(stats.chi2.ppf([1e-10, 1 - 1e-10], p))
            self._coord = np.linspace(q[0] - 4 * h, q[1] + 4 * h, GRID_SIZE)
            self.grid = self._coord.copy() if v == "logchisq" else np.exp(self._coord)
            self._direct_below = -np.inf
        else:
            upper = stats.chi2.ppf(1 - 1e-10, p)
            if v == "reflect":
                upper += 4 * h
            else:
                upper += 4 * (math.sqrt(upper * h) + h)
            self._coord = np.linspace(0.0, math.sqrt(upper), GRID_SIZE)
            if v == "gamma":
                # log m* diverges to -inf at 0 under the gamma kernel
                self._coord[0] = self._coord[1] * 1e-3
            self.grid = self._coord ** 2
        # the gamma-kernel model bends sharply near 0; integrate there directly
        self._direct_below = self.grid[8] if v == "gamma" else -np.inf
        self.log_values = self._log_density_direct(self.grid)
        if not self.smooth:
            self._interp = None
            return
        self._interp = CubicSpline(self._coord, self.log_values, extrapolate=False)

    def _to_coord(self, at):
        if self.scheme.variant == "logchisq":
            return at
        if self.scheme.variant == "logback":
            with np.errstate(divide="ignore"):
                return np.log(at)
        return np.sqrt(np.maximum(at, 0.0))

    def _log_density_direct(self, at):
        v, h, p = self.scheme.variant, self.scheme.bandwidth, self.p
        at = np.asarray(at, dtype=float)
        if not self.smooth:
            if v == "logchisq":
                return _log_logchi2(p, at)
            return _log_chi2(p, at)
        if v == "logback":
            with np.errstate(divide="ignore"):
                x = np.log(at)
            return _log_smoothed_direct(v, h, p, x) - x
        return _log_smoothed_direct(v, h, p, at)

    def log_density(self, at) -> np.ndarray:
        """log m* at ``at`` (log scale for ``logchisq``, squared distances otherwise)."""
        at = np.atleast_1d(np.asarray(at, dtype=float))
        if not self.smooth:
            return self._log_density_direct(at)
        out = self._interp(self._to_coord(at))
        outside = np.isnan(out) | (at < self._direct_below)
        if np.any(outside):
            out[outside] = self._log_density_direct(at[outside])
        return out

    def density(self, at) -> np.ndarray:
        return np.exp(self.log_density(at))

    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid weights over ``self.grid`` on the comparison axis."""
        g = self.grid
        w = np.zeros_like(g)
        dg = np.diff(g)
        w[:-1] += dg / 2
        w[1:] += dg / 2
        return w


@functools.lru_cache(maxsize=256)
def get_smoothed_model(p: int, scheme: KernelScheme, smooth: bool = True) -> SmoothedModel:
    """Shared, cached :class:`SmoothedModel` for ``(p, scheme, smooth)``."""
    return SmoothedModel(p, scheme, smooth)


def smoothed_model(p: int, scheme: KernelScheme, at, smooth: bool = True) -> np.ndarray:
    """Smoothed model density m* evaluated at ``at``.

    For ``logchisq`` ``at`` is on the log scale; otherwise it is on the
    squared-distance axis.
    """
    return get_smoothed_model(int(p), scheme, bool(smooth)).density(at)


def pearson_residuals(p: int, scheme: KernelScheme, squared_distances, smooth: bool = True,
                      return_flags: bool = False):
    """Pearson residuals ``m_hat(x_i) / m*(x_i) - 1`` of squared distances.

    Both densities are evaluated at each observation's squared distance (log
    squared distance for ``logchisq``) with the same kernel and bandwidth.
    Model values below ``1e-300`` are replaced by the floor; with
    ``return_flags=True`` a boolean mask of the floored points is returned
    as well.
    """
    d2 = np.asarray(squared_distances, dtype=float).ravel()
    if d2.size == 0:
        raise ValueError("need at least one squared distance")
    if np.any(d2 < 0) or not np.all(np.isfinite(d2)):
        raise ValueError("squared distances must be finite and nonnegative")
    d2 = np.maximum(d2, DENSITY_FLOOR)
    model = get_smoothed_model(int(p), scheme, bool(smooth))
    x = to_comparison_scale(scheme, d2)
    log_hat = log_kernel_density(scheme, d2, x)
    log_star = model.log_density(x)
    floored = log_star < _LOG_FLOOR
    log_star = np.maximum(log_star, _LOG_FLOOR)
    delta = np.exp(np.minimum(log_hat - log_star, 690.0)) - 1.0
    if return_flags:
        return delta, floored
    return delta
