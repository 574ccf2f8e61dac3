"""Global-bound A* sampling on a standardized target with unimodal ratio.

Each step proposes ``X_n`` uniformly in the current interval ``B_n``, draws
the interval's Gumbel ``G_n ~ TG(log |B_n|, G_{n-1})``, raises the lower bound
``L_n = max_k log r(X_k) + G_k`` and sets the upper bound
``U_n = log r_max + G_n``. The run stops once ``U_n <= L_n`` and returns the
maximiser of the lower bound. The interval then shrinks toward the mode: the
proposal replaces the endpoint on its own side of the mode, which keeps the
intervals nested and the mode inside them.

Two entry points:

* :func:`run` - one replica with a full :class:`RunTrace` (pure Python);
* :func:`run_batch` - many replicas through the compiled kernel when it is
  available, returning arrays. Both consume random numbers identically, so
  replica ``i`` of a batch equals ``run`` on ``rng.split(i)``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from . import _pykernel
from .gumbel import ParameterError, TruncatedGumbelParams, sample_tg_exp
from .rng import RandomStream

try:
    from . import _ckernel
except ImportError:  # pragma: no cover - exercised only without a compiler
    _ckernel = None

__all__ = [
    "BoundsState",
    "ChainState",
    "RunTrace",
    "BatchResult",
    "RunawayRunError",
    "DegenerateInterval",
    "step",
    "run",
    "run_batch",
    "exactness_check",
    "ks_statistic",
    "ks_critical_value",
    "ks_two_sample_critical_value",
    "default_max_steps",
    "available_backends",
    "default_backend",
    "BACKEND",
]


def available_backends() -> list[str]:
    return (["cython"] if _ckernel is not None else []) + ["python"]


def default_backend() -> str:
    """``cython`` when compiled, unless ``UNIMODAL_ASTAR_BACKEND=python``."""
    want = os.environ.get("UNIMODAL_ASTAR_BACKEND", "auto").lower()
    if want == "python" or _ckernel is None:
        return "python"
    return "cython"


BACKEND = default_backend()


class RunawayRunError(RuntimeError):
    """A run exceeded ``max_steps``; carries the partial trace or batch."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


class DegenerateInterval(Exception):
    """The search interval has no proposal mass left."""


def default_max_steps(target) -> int:
    return math.ceil(40.0 * (target.log_r_max + 1.0)) + 1000


@dataclass(frozen=True)
class BoundsState:
    """Search interval ``[left, right]`` used at step ``n``."""

    left: float = 0.0
    right: float = 1.0
    n: int = 1

    @property
    def mass(self) -> float:
        return self.right - self.left


@dataclass(frozen=True)
class ChainState:
    """Gumbel chain and A* bounds after the latest step."""

    gumbel: Optional[float] = None
    lower: float = -math.inf
    upper: float = math.inf
    sample: float = math.nan
    value: float = -math.inf

    @property
    def terminated(self) -> bool:
        return self.upper <= self.lower


@dataclass
class RunTrace:
    """Instrumentation of one run.

    ``hits[g]`` is the first step whose proposal lands in ``S(g)``, or None if
    the run ended first; ``residuals[g] = max(0, T - hits[g])`` (0 when not hit).
    """

    T: int
    sample: float
    masses: list = field(default_factory=list)
    gumbels: list = field(default_factory=list)
    proposals: list = field(default_factory=list)
    intervals: list = field(default_factory=list)
    lowers: list = field(default_factory=list)
    uppers: list = field(default_factory=list)
    hits: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    degenerate: bool = False


def step(target, bounds: BoundsState, chain: ChainState, rng: RandomStream):
    """Advance the sampler by one proposal.

    Returns ``(next_bounds, next_chain, x)``; ``next_bounds`` is the interval
    for the following step. Raises :class:`DegenerateInterval` if ``bounds``
    has zero mass.
    """
    z = bounds.mass
    if not z > 0.0:
        raise DegenerateInterval(f"empty interval at step {bounds.n}")
    x = bounds.left + rng.uniform() * z
    g = sample_tg_exp(TruncatedGumbelParams(math.log(z), chain.gumbel), rng)
    lr = target.log_ratio(x)
    val = lr + g
    if val > chain.value:
        chain = replace(chain, lower=val, sample=x, value=val)
    chain = replace(chain, gumbel=g, upper=target.log_r_max + g)
    if x <= target.mode:
        bounds = BoundsState(x, bounds.right, bounds.n + 1)
    else:
        bounds = BoundsState(bounds.left, x, bounds.n + 1)
    return bounds, chain, x


def _check_grid(gamma_grid) -> list[float]:
    grid = [float(g) for g in gamma_grid]
    if any(not 0.0 < g <= 1.0 for g in grid):
        raise ParameterError("gamma grid values must lie in (0, 1]")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ParameterError("gamma grid must be sorted ascending")
    return grid


def _as_stream(rng: Union[int, RandomStream]) -> RandomStream:
    return rng if isinstance(rng, RandomStream) else RandomStream(int(rng))


def run(target, gamma_grid: Sequence[float] = (), rng: Union[int, RandomStream] = 0, max_steps: Optional[int] = None) -> RunTrace:
    """One A* sampling run with full instrumentation."""
    grid = _check_grid(gamma_grid)
    rng = _as_stream(rng)
    if max_steps is None:
        max_steps = default_max_steps(target)
    if max_steps < 1:
        raise ParameterError("max_steps must be >= 1")
    thr = [math.log(g) + target.log_r_max for g in grid]
    hits: dict = {g: None for g in grid}
    trace = RunTrace(T=0, sample=math.nan, hits=hits)
    bounds, chain = BoundsState(), ChainState()
    nh = 0
    while True:
        if bounds.n > max_steps:
            _finish(trace, chain, grid)
            raise RunawayRunError(f"no termination within {max_steps} steps", trace)
        trace.masses.append(bounds.mass)
        trace.intervals.append((bounds.left, bounds.right))
        try:
            n = bounds.n
            bounds, chain, x = step(target, bounds, chain, rng)
        except DegenerateInterval:
            trace.masses.pop()
            trace.intervals.pop()
            trace.degenerate = True
            break
        trace.T = n
        trace.proposals.append(x)
        trace.gumbels.append(chain.gumbel)
        trace.lowers.append(chain.lower)
        trace.uppers.append(chain.upper)
        lr = target.log_ratio(x)
        while nh < len(grid) and lr >= thr[nh]:
            hits[grid[nh]] = n
            nh += 1
        if chain.terminated:
            break
    _finish(trace, chain, grid)
    return trace


def _finish(trace, chain, grid):
    trace.sample = chain.sample
    for g in grid:
        hit = trace.hits[g]
        trace.residuals[g] = 0 if hit is None else max(0, trace.T - hit)


@dataclass
class BatchResult:
    """Per-replica arrays from :func:`run_batch`.

    ``N[i, j]`` is the hitting step for ``gamma_grid[j]`` (0 = not hit) and
    ``Z[i, n-1]`` the interval mass at step ``n`` for ``n <= zn_cap``, with the
    bound process continued past termination.
    """

    T: np.ndarray
    samples: np.ndarray
    flags: np.ndarray
    N: np.ndarray
    Z: np.ndarray
    gamma_grid: tuple
    backend: str

    @property
    def degenerate(self) -> np.ndarray:
        return self.flags == _pykernel.FLAG_DEGENERATE

    @property
    def hit(self) -> np.ndarray:
        return self.N > 0

    @property
    def K(self) -> np.ndarray:
        return np.where(self.hit, np.maximum(0, self.T[:, None] - self.N), 0)

    def frozen_Z(self) -> np.ndarray:
        """Masses with the bound process frozen at termination instead."""
        cap = self.Z.shape[1]
        idx = np.minimum(np.arange(cap)[None, :], np.maximum(self.T, 1)[:, None] - 1)
        return np.take_along_axis(self.Z, idx, axis=1)


def run_batch(
    target,
    n: int,
    rng: Union[int, RandomStream] = 0,
    gamma_grid: Sequence[float] = (),
    max_steps: Optional[int] = None,
    zn_cap: int = 0,
    workers: int = 1,
    start: int = 0,
    backend: Optional[str] = None,
) -> BatchResult:
    """Run replicas ``start .. start + n - 1``; replica ``i`` uses ``rng.split(i)``.

    Work is split into contiguous index blocks over ``workers`` threads; the
    compiled kernel releases the GIL. Results do not depend on ``workers``.
    """
    grid = _check_grid(gamma_grid)
    root = _as_stream(rng)
    if max_steps is None:
        max_steps = default_max_steps(target)
    backend = backend or default_backend()
    spec = target.kernel_spec()
    if backend == "cython" and (spec is None or _ckernel is None):
        backend = "python"
    streams = root.spawn(n, start)
    thr = np.array([math.log(g) + target.log_r_max for g in grid], dtype=float)
    out_T = np.zeros(n, dtype=np.int64)
    out_x = np.zeros(n, dtype=float)
    out_flag = np.zeros(n, dtype=np.int8)
    out_N = np.zeros((n, len(grid)), dtype=np.int64)
    out_Z = np.zeros((n, zn_cap), dtype=float)

    def block(lo, hi):
        args = (thr, int(max_steps), int(zn_cap), out_T[lo:hi], out_x[lo:hi], out_flag[lo:hi], out_N[lo:hi], out_Z[lo:hi])
        if backend == "cython":
            code, params = spec
            _ckernel.run_replicas(
                int(code), np.ascontiguousarray(params, dtype=float), float(target.log_r_max), float(target.mode),
                [s.bit_generator for s in streams[lo:hi]], *args,
            )
        else:
            _pykernel.run_replicas(target.log_ratio, target.log_r_max, target.mode, streams[lo:hi], *args)

    workers = max(1, min(int(workers), n)) if n else 1
    edges = np.linspace(0, n, workers + 1).astype(int)
    if workers == 1:
        block(0, n)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(block, edges[:-1], edges[1:]))
    result = BatchResult(out_T, out_x, out_flag, out_N, out_Z, tuple(grid), backend)
    runaway = np.flatnonzero(out_flag == _pykernel.FLAG_RUNAWAY)
    if runaway.size:
        raise RunawayRunError(f"replica {start + int(runaway[0])} exceeded {max_steps} steps", result)
    return result


def ks_statistic(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance to ``cdf``."""
    return float(stats.kstest(np.asarray(samples, dtype=float), cdf).statistic)


def ks_critical_value(n: int, alpha: float = 1e-3) -> float:
    """Asymptotic one-sample KS critical value ``sqrt(log(2/alpha) / (2n))``."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def ks_two_sample_critical_value(n: int, m: int, alpha: float = 1e-3) -> float:
    return math.sqrt(math.log(2.0 / alpha) / 2.0) * math.sqrt((n + m) / (n * m))


def exactness_check(target, n_samples: int, rng: Union[int, RandomStream] = 0, workers: int = 1) -> float:
    """KS distance between ``n_samples`` A* outputs and the target CDF."""
    res = run_batch(target, n_samples, rng, workers=workers)
    return ks_statistic(res.samples, target.q_cdf)
