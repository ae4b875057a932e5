"""Monte Carlo harness for contaminated multivariate normal samples.

Rows are drawn from ``(1 - eps) N_p(0, I) + eps N_p(k a, delta I)``. Fits
are scored against the truth ``mu = 0, Sigma = I``.

Every (scenario, replicate) pair gets its own random stream spawned from the
master seed, so tables do not depend on how the work is scheduled.
"""

from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .estimator import FitConfig, fit_mle, fit_wle
from .exceptions import WLEError

__all__ = [
    "Scenario",
    "scenario_from_dict",
    "MetricsRow",
    "CellSummary",
    "default_direction",
    "generate",
    "measure",
    "default_estimators",
    "run_study",
    "write_results",
    "n_workers",
]

METRICS = (
    "location_error",
    "log_mean_trace",
    "log10_condition",
    "max_diag_deviation",
    "max_offdiag",
    "elapsed_seconds",
)


def default_direction(p: int) -> np.ndarray:
    """All ones for ``p <= 10``; ones in the first five coordinates otherwise."""
    a = np.zeros(p)
    a[: p if p <= 10 else 5] = 1.0
    return a


@dataclass(frozen=True)
class Scenario:
    n: int
    p: int
    epsilon: float = 0.0
    k: float = 0.0
    direction: tuple | None = None
    delta: float = 0.01
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if not 0 <= self.epsilon < 0.5:
            raise ValueError("epsilon must lie in [0, 0.5)")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.direction is not None:
            a = tuple(float(v) for v in self.direction)
            if len(a) != self.p:
                raise ValueError("direction must have length p")
            if self.epsilon > 0 and not any(a):
                raise ValueError("direction must be nonzero under contamination")
            object.__setattr__(self, "direction", a)

    @property
    def a(self) -> np.ndarray:
        if self.direction is None:
            return default_direction(self.p)
        return np.asarray(self.direction)

    def label(self) -> dict:
        return {"n": self.n, "p": self.p, "epsilon": self.epsilon, "k": self.k, "delta": self.delta}


def generate(scenario: Scenario, rng=None) -> np.ndarray:
    """Draw one contaminated sample.

    ``rng`` defaults to a generator seeded with ``scenario.seed``.
    """
    rng = np.random.default_rng(scenario.seed) if rng is None else rng
    n, p = scenario.n, scenario.p
    X = rng.standard_normal((n, p))
    bad = rng.random(n) < scenario.epsilon
    m = int(bad.sum())
    if m:
        X[bad] = scenario.k * scenario.a + math.sqrt(scenario.delta) * rng.standard_normal((m, p))
    return X


@dataclass
class MetricsRow:
    location_error: float
    log_mean_trace: float
    log10_condition: float
    max_diag_deviation: float
    max_offdiag: float
    elapsed_seconds: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, m) for m in METRICS])


def measure(fit, elapsed: float = 0.0) -> MetricsRow:
    """Accuracy of a fit against ``mu = 0``, ``Sigma = I``."""
    mu = np.asarray(fit.location, dtype=float)
    S = np.asarray(fit.scatter, dtype=float)
    p = mu.shape[0]
    eig = np.linalg.eigvalsh(S)
    off = S - np.diag(np.diag(S))
    return MetricsRow(
        location_error=float(np.linalg.norm(mu)),
        log_mean_trace=float(np.log(np.trace(S) / p)),
        log10_condition=float(np.log10(eig[-1] / eig[0])),
        max_diag_deviation=float(np.max(np.abs(np.diag(S) - 1.0))),
        max_offdiag=float(np.max(np.abs(off))) if p > 1 else 0.0,
        elapsed_seconds=float(elapsed),
    )


def _wle(kernel, **kw):
    config = FitConfig(kernel=kernel, raf="hellinger", **kw)
    return lambda X: fit_wle(X, config)


def default_estimators(target_downweighting: float | None = None) -> dict[str, Callable]:
    """The four kernel schemes with the Hellinger RAF, plus the MLE.

    ``target_downweighting=None`` uses the normal-reference bandwidth.
    """
    kw = {} if target_downweighting is None else {"target_downweighting": target_downweighting}
    return {
        "WLEa": _wle("reflect", **kw),
        "WLEb": _wle("logback", **kw),
        "WLEc": _wle("logchisq", **kw),
        "WLEd": _wle("gamma", **kw),
        "MLE": fit_mle,
    }


@dataclass
class CellSummary:
    scenario: Scenario
    estimator: str
    replicates: int
    failures: int
    means: dict = field(default_factory=dict)

    def row(self) -> dict:
        out = self.scenario.label()
        out["estimator"] = self.estimator
        out.update(self.means)
        out["replicates"] = self.replicates
        out["failures"] = self.failures
        return out


def n_workers() -> int:
    """Worker cap from ``WLE_THREADS`` (default 1)."""
    value = os.environ.get("WLE_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError as exc:
        raise ValueError(f"WLE_THREADS must be an integer, got {value!r}") from exc


def _run_replicate(scenario, seed_seq, estimators):
    X = generate(scenario, np.random.default_rng(seed_seq))
    out = {}
    for name, proc in estimators.items():
        t0 = time.perf_counter()
        try:
            fit = proc(X)
        except (WLEError, ValueError, np.linalg.LinAlgError):
            out[name] = None
            continue
        out[name] = measure(fit, time.perf_counter() - t0).as_array()
    return out


def run_study(grid, replicates: int, estimators: dict[str, Callable] | None = None,
              seed: int | None = 0, n_jobs: int | None = None) -> list[CellSummary]:
    """Average the performance measures over replicates for every cell.

    Parameters
    ----------
    grid : list of Scenario
    replicates : int
    estimators : dict name -> callable(X) returning a FitResult-like object
        Defaults to :func:`default_estimators`.
    seed : int or None
        Master seed. Replicate ``r`` of scenario ``s`` uses the stream
        ``SeedSequence(seed).spawn(...)[s].spawn(...)[r]``.
    n_jobs : int, optional
        Parallel workers (joblib); defaults to ``WLE_THREADS``.

    Returns
    -------
    list of CellSummary
        One entry per (scenario, estimator), in grid then estimator order.
        Failed fits count in ``failures`` and are excluded from the means.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    grid = list(grid)
    estimators = default_estimators() if estimators is None else dict(estimators)
    root = np.random.SeedSequence(seed)
    streams = [s.spawn(replicates) for s in root.spawn(len(grid))]
    tasks = [(si, r) for si in range(len(grid)) for r in range(replicates)]
    n_jobs = n_workers() if n_jobs is None else n_jobs
    if n_jobs == 1:
        results = [_run_replicate(grid[si], streams[si][r], estimators) for si, r in tasks]
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(
            delayed(_run_replicate)(grid[si], streams[si][r], estimators) for si, r in tasks
        )
    summaries = []
    for si, scenario in enumerate(grid):
        chunk = [res for (sj, _), res in zip(tasks, results) if sj == si]
        for name in estimators:
            rows = [res[name] for res in chunk if res[name] is not None]
            failures = len(chunk) - len(rows)
            if rows:
                avg = np.mean(rows, axis=0)
                means = dict(zip(METRICS, map(float, avg)))
            else:
                means = dict.fromkeys(METRICS, float("nan"))
            summaries.append(CellSummary(scenario, name, replicates, failures, means))
    return summaries


def write_results(summaries, path, float_format: str = ".12g") -> None:
    """Write study summaries as CSV, one line per (scenario, estimator)."""
    rows = [s.row() for s in summaries]
    fields = list(rows[0]) if rows else ["n", "p", "epsilon", "k", "delta", "estimator", *METRICS,
                                         "replicates", "failures"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format(v, float_format) if isinstance(v, float) else v
                             for k, v in row.items()})


def scenario_from_dict(d: dict) -> Scenario:
    known = {f for f in Scenario.__dataclass_fields__}
    return Scenario(**{k: v for k, v in d.items() if k in known})

