import numpy as np

__all__ = ["spatial_median"]


def _anchor_optimal(X, anchor, tie, tol):
    diff = X - anchor
    r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    at = r <= tie
    pull = (diff[~at] / r[~at, None]).sum(axis=0)
    return float(np.linalg.norm(pull)) <= at.sum() + tol


def spatial_median(X, tol=1e-8, max_iter=10_000):
    """L1 (spatial) median by Weiszfeld iterations with the Vardi-Zhang step.

    When an iterate coincides with data points the subgradient condition is
    checked there, so the iteration never divides by a zero distance.

    Parameters
    ----------
    X : array-like of shape (n_samples, n_features)
    tol : float
        Required norm of the (sub)gradient of ``sum_i ||x_i - m||``.
    max_iter : int

    Returns
    -------
    ndarray of shape (n_features,)
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] == 0:
        raise ValueError("spatial median of an empty sample")
    if X.shape[0] == 1:
        return X[0].copy()
    scale = max(float(np.max(np.ptp(X, axis=0))), 1.0)
    tie = 1e-12 * scale
    m = np.median(X, axis=0)
    for _ in range(max_iter):
        diff = X - m
        r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        at = r <= tie
        inv = 1.0 / r[~at]
        pull = inv @ diff[~at]  # negative gradient, away from the anchors
        grad_norm = float(np.linalg.norm(pull))
        n_at = int(at.sum())
        if grad_norm <= n_at + tol:
            # 0 is in the subdifferential (n_at == 0 reduces to a zero gradient)
            return m
        if not n_at:
            # near a data point Weiszfeld creeps sublinearly; test that point exactly
            anchor = X[np.argmin(r)]
            if _anchor_optimal(X, anchor, tie, tol):
                return anchor.copy()
        target = inv @ X[~at] / inv.sum()
        if n_at:
            lam = min(1.0, n_at / grad_norm)
            m = (1.0 - lam) * target + lam * m
        else:
            m = target
    raise RuntimeError(f"spatial median did not converge in {max_iter} iterations")
