"""Residual adjustment functions and the residual-to-weight map.

The power-divergence family is indexed by ``tau``::

    A(delta) = tau * ((delta + 1) ** (1 / tau) - 1)      tau finite
    A(delta) = log(delta + 1)                            tau -> infinity

and a Pearson residual ``delta`` is turned into a robustness weight through
``w = [A(delta) + 1]^+ / (delta + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["RafSpec", "raf_value", "weight", "parse_raf"]


@dataclass(frozen=True)
class RafSpec:
    """Residual adjustment function selector.

    Parameters
    ----------
    family : {"power", "kl"}
        ``"kl"`` is the limiting Kullback-Leibler member (tau -> infinity);
        it is kept as its own variant so no infinite float is ever stored.
    tau : float
        Power-divergence index, only used when ``family == "power"``.
        Admissible values are ``-1`` and ``[1, inf)``.
    """

    family: str = "power"
    tau: float = 2.0

    def __post_init__(self):
        if self.family not in ("power", "kl"):
            raise ValueError(f"unknown RAF family {self.family!r}")
        if self.family == "power":
            tau = float(self.tau)
            if not math.isfinite(tau):
                raise ValueError("use RafSpec.kullback_leibler() for tau -> infinity")
            if not (tau == -1.0 or tau >= 1.0):
                raise ValueError(f"tau must be -1 or >= 1, got {tau}")

    @classmethod
    def maximum_likelihood(cls) -> "RafSpec":
        return cls("power", 1.0)

    @classmethod
    def hellinger(cls) -> "RafSpec":
        return cls("power", 2.0)

    @classmethod
    def kullback_leibler(cls) -> "RafSpec":
        return cls("kl", 0.0)

    @classmethod
    def neyman_chisq(cls) -> "RafSpec":
        return cls("power", -1.0)

    @property
    def is_mle(self) -> bool:
        return self.family == "power" and self.tau == 1.0

    def to_string(self) -> str:
        if self.family == "kl":
            return "kl"
        names = {1.0: "ml", 2.0: "hellinger", -1.0: "ncs"}
        return names.get(float(self.tau), f"power:{self.tau:g}")


def parse_raf(text) -> RafSpec:
    """Parse ``ml``, ``hellinger``, ``kl``, ``ncs`` or ``power:<tau>``."""
    if isinstance(text, RafSpec):
        return text
    key = str(text).strip().lower()
    presets = {
        "ml": RafSpec.maximum_likelihood,
        "mle": RafSpec.maximum_likelihood,
        "hellinger": RafSpec.hellinger,
        "hd": RafSpec.hellinger,
        "kl": RafSpec.kullback_leibler,
        "ncs": RafSpec.neyman_chisq,
    }
    if key in presets:
        return presets[key]()
    if key.startswith("power:"):
        value = key.split(":", 1)[1]
        if value in ("inf", "infinity"):
            return RafSpec.kullback_leibler()
        return RafSpec("power", float(value))
    raise ValueError(f"cannot parse RAF specification {text!r}")


def raf_value(spec: RafSpec, delta):
    """Evaluate the residual adjustment function A(delta).

    Returns a float for scalar input and an ndarray otherwise. ``delta``
    must be >= -1; the Kullback-Leibler member returns ``-inf`` at -1.
    """
    d = np.asarray(delta, dtype=float)
    if np.any(d < -1.0):
        raise ValueError("Pearson residuals must be >= -1")
    x = d + 1.0
    if spec.family == "kl":
        with np.errstate(divide="ignore"):
            out = np.log(x)
    elif spec.tau == 1.0:
        out = d.copy()
    else:
        tau = spec.tau
        with np.errstate(divide="ignore"):
            out = tau * (np.power(x, 1.0 / tau) - 1.0)
    return float(out) if out.ndim == 0 else out


def weight(spec: RafSpec, delta):
    """Robustness weight ``[A(delta)+1]^+ / (delta+1)`` clamped to [0, 1].

    ``delta == -1`` maps to 0 by continuity.
    """
    d = np.asarray(delta, dtype=float)
    if spec.is_mle:
        if np.any(d < -1.0):
            raise ValueError("Pearson residuals must be >= -1")
        out = np.ones_like(d)
    else:
        a = raf_value(spec, d)
        x = d + 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.maximum(np.asarray(a) + 1.0, 0.0) / x
        out = np.where(x > 0.0, out, 0.0)
        # the KL and tau = -1 members return -inf at delta = -1
        out = np.clip(np.nan_to_num(out, nan=0.0, posinf=1.0), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out
