"""Gumbel and truncated-Gumbel primitives in the log domain.

``TG(mu, kappa)`` is a unit-scale Gumbel with location ``mu`` conditioned on
being at most ``kappa``. Two independent samplers are provided:

* :func:`sample_tg_exp` uses the exponential-race identity
  ``-log(T + T0) ~ TG(log lam, -log T0)`` for ``T ~ Exp(lam)``;
* :func:`sample_tg_invcdf` inverts the truncated CDF.

An untruncated draw is requested with ``kappa=None``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .rng import RandomStream

__all__ = [
    "ParameterError",
    "TruncatedGumbelParams",
    "ExpRaceState",
    "logaddexp",
    "sample_tg_exp",
    "sample_tg_invcdf",
    "tg_cdf",
    "tg_chain",
]

EULER_GAMMA = 0.5772156649015329


class ParameterError(ValueError):
    """Invalid distribution or sampler parameter."""


@dataclass(frozen=True)
class TruncatedGumbelParams:
    """Location ``mu`` and truncation point ``kappa`` (None means +inf)."""

    mu: float
    kappa: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ParameterError(f"location must be finite, got {self.mu}")
        k = self.kappa
        if k is not None:
            if math.isnan(k) or k == -math.inf:
                raise ParameterError(f"truncation must be in (-inf, +inf], got {k}")
            if k == math.inf:
                object.__setattr__(self, "kappa", None)
            else:
                object.__setattr__(self, "kappa", float(k))
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def truncated(self) -> bool:
        return self.kappa is not None


@dataclass(frozen=True)
class ExpRaceState:
    """Exponential rate and offset equivalent to a set of TG parameters."""

    rate: float
    offset: float

    @classmethod
    def from_params(cls, params: TruncatedGumbelParams) -> "ExpRaceState":
        offset = 0.0 if params.kappa is None else math.exp(-params.kappa)
        return cls(rate=math.exp(params.mu), offset=offset)


def logaddexp(a: float, b: float) -> float:
    """log(e^a + e^b) without overflow."""
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))


def _tg_from_exp(e, mu, kappa):
    # -log(e / lam + e^-kappa), computed as -logaddexp(log e - mu, -kappa)
    a = math.log(e) - mu
    if kappa is None:
        return -a
    return -logaddexp(a, -kappa)


def sample_tg_exp(params: TruncatedGumbelParams, rng: RandomStream, size=None):
    """Draw from TG(mu, kappa) as ``-log(T + T0)`` with ``T ~ Exp(e^mu)``.

    Parameters
    ----------
    params : TruncatedGumbelParams
    rng : RandomStream
    size : int, optional
        If given, return an array of that many independent draws.

    Returns
    -------
    float or ndarray
        Every draw is ``<= kappa`` exactly.
    """
    if size is None:
        return _tg_from_exp(rng.exponential(), params.mu, params.kappa)
    a = np.log(rng.exponential(size)) - params.mu
    if params.kappa is None:
        return -a
    out = -np.logaddexp(a, -params.kappa)
    return np.minimum(out, params.kappa)


def sample_tg_invcdf(params: TruncatedGumbelParams, u):
    """The ``u``-quantile of TG(mu, kappa).

    ``mu - log(exp(mu - kappa) - log u)``; with no truncation this is the
    plain Gumbel quantile ``mu - log(-log u)``.
    """
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise ParameterError("quantile level must lie in (0, 1)")
    mu, kappa = params.mu, params.kappa
    if arr.ndim == 0:
        log_e = math.log(-math.log(float(arr)))
        if kappa is None:
            return mu - log_e
        return min(mu - logaddexp(mu - kappa, log_e), kappa)
    log_e = np.log(-np.log(arr))
    if kappa is None:
        return mu - log_e
    return np.minimum(mu - np.logaddexp(mu - kappa, log_e), kappa)


def tg_cdf(g, params: TruncatedGumbelParams):
    """CDF of TG(mu, kappa) at ``g``.

    ``exp(-(e^{mu-g} - e^{mu-kappa}))`` below the truncation point and 1 at
    or above it.
    """
    mu, kappa = params.mu, params.kappa
    g_arr = np.asarray(g, dtype=float)
    with np.errstate(over="ignore"):
        if kappa is None:
            out = np.exp(-np.exp(mu - g_arr))
        else:
            # e^{mu-g} - e^{mu-kappa} = e^{mu-kappa} * expm1(kappa - g)
            gap = np.exp(mu - kappa) * np.expm1(kappa - np.minimum(g_arr, kappa))
            out = np.where(g_arr >= kappa, 1.0, np.exp(-gap))
    if out.ndim == 0:
        return float(out)
    return out


def tg_chain(log_masses, rng: RandomStream, size: int, sampler: str = "exp"):
    """Simulate ``size`` independent chains ``G_n ~ TG(log_masses[n], G_{n-1})``.

    The first draw is untruncated. Returns an array of shape
    ``(size, len(log_masses))``.
    """
    log_masses = [float(m) for m in log_masses]
    if not log_masses:
        raise ParameterError("need at least one mass")
    out = np.empty((size, len(log_masses)))
    prev = None
    for j, mu in enumerate(log_masses):
        if sampler == "exp":
            a = np.log(rng.exponential(size)) - mu
            g = -a if prev is None else np.minimum(-np.logaddexp(a, -prev), prev)
        elif sampler == "invcdf":
            u = rng.uniform(size)
            zero = u == 0.0
            while np.any(zero):
                u[zero] = rng.uniform(int(zero.sum()))
                zero = u == 0.0
            log_e = np.log(-np.log(u))
            g = mu - log_e if prev is None else np.minimum(mu - np.logaddexp(mu - prev, log_e), prev)
        else:
            raise ParameterError(f"unknown sampler {sampler!r}")
        out[:, j] = g
        prev = g
    return out
