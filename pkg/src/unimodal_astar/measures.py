"""Target/proposal models and built-in unimodal-ratio families.

All samplers operate on a :class:`StandardizedTarget`: the proposal is uniform
on [0, 1] and the target is described by its density ratio ``r`` (which is then
also the target density), the ratio's mode and ``r_max``. General pairs on the
real line are reduced to this form by :func:`standardize`, which pushes both
measures through the proposal CDF.

Built-in families expose a ``kernel_spec`` so the compiled run loop can
evaluate their log-ratio without calling back into Python. The Python
``log_ratio`` methods perform the same floating-point operations in the same
order, so both backends produce identical runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize, special

from .gumbel import ParameterError
from .numerics import golden_section_max
from .width import gamma_tilde

__all__ = [
    "AbsoluteContinuityError",
    "InfiniteDivergenceError",
    "StandardizationError",
    "StandardizedTarget",
    "UniformRatio",
    "WorstCaseTarget",
    "PiecewiseLinearTarget",
    "StaircaseTarget",
    "TruncatedGaussianTarget",
    "CallableTarget",
    "TargetProposalPair",
    "ratio",
    "renyi_inf",
    "standardize",
    "worst_case_family",
    "triangle_family",
    "staircase_family",
    "truncated_gaussian_family",
    "gaussian_pair",
    "FAMILIES",
    "make_family",
]

# kernel family codes, shared with the compiled kernel
CONST, WORST, PWL, STAIR, GAUSS = 0, 1, 2, 3, 4

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class AbsoluteContinuityError(ValueError):
    """The target puts mass where the proposal has none."""


class InfiniteDivergenceError(ValueError):
    """The density ratio is unbounded (infinite Renyi-infinity divergence)."""


class StandardizationError(ValueError):
    """The proposal CDF cannot be inverted on its support."""


def _log(y: float) -> float:
    return math.log(y) if y > 0.0 else -math.inf


class StandardizedTarget:
    """A target on [0, 1] against the uniform proposal.

    Subclasses implement :meth:`log_ratio` and :meth:`q_cdf` and set ``mode``
    and ``log_r_max``.
    """

    name = "target"
    mode: float
    log_r_max: float
    full_support = True

    @property
    def r_max(self) -> float:
        return math.exp(self.log_r_max)

    def log_ratio(self, x: float) -> float:
        raise NotImplementedError

    def ratio(self, x: float) -> float:
        return math.exp(self.log_ratio(x))

    def q_cdf(self, x):
        raise NotImplementedError

    def kernel_spec(self):
        """``(code, params)`` for the compiled kernel, or None."""
        return None

    def width_breakpoints(self) -> list[float]:
        """Levels ``gamma`` where the width function has kinks or jumps."""
        return []

    def exact_superlevel(self, gamma: float):
        """Closed-form superlevel interval, or None to fall back to bisection."""
        return None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(r_max={self.r_max:.6g}, mode={self.mode:.6g})"


class UniformRatio(StandardizedTarget):
    """r == 1: the target equals the proposal."""

    name = "uniform-ratio"

    def __init__(self, name: str = "uniform-ratio"):
        self.name = name
        self.mode = 0.5
        self.log_r_max = 0.0

    def log_ratio(self, x):
        return 0.0

    def q_cdf(self, x):
        return np.clip(x, 0.0, 1.0)

    def kernel_spec(self):
        return CONST, np.zeros(1)


class WorstCaseTarget(StandardizedTarget):
    """Density ``r_max * min(1, gt / sqrt(x))`` with ``gt = 1 - sqrt(1 - 1/r_max)``.

    Its width function is 1 up to ``gt`` and ``(gt / gamma)**2`` above, the
    profile that maximises the runtime bound functional at fixed ``r_max``.
    The argmax set is the plateau ``[0, gt**2]``; its midpoint is the mode.
    """

    name = "worst-case"

    def __init__(self, r_max: float):
        if not r_max >= 1.0 or not math.isfinite(r_max):
            raise ParameterError(f"r_max must be a finite number >= 1, got {r_max}")
        self.r_max_param = float(r_max)
        self.log_r_max = math.log(r_max)
        self.gt = gamma_tilde(r_max)
        self.log_gt = math.log(self.gt)
        self.gt2 = self.gt * self.gt
        self.mode = 0.5 * self.gt2

    @property
    def r_max(self):
        return self.r_max_param

    def log_ratio(self, x):
        if x <= self.gt2:
            return self.log_r_max
        t = self.log_gt - 0.5 * math.log(x)
        if t > 0.0:
            t = 0.0
        return self.log_r_max + t

    def q_cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        r, gt = self.r_max_param, self.gt
        out = np.where(x <= self.gt2, r * x, r * (2.0 * gt * np.sqrt(x) - self.gt2))
        return float(out) if out.ndim == 0 else out

    def kernel_spec(self):
        return WORST, np.array([self.log_r_max, self.log_gt, self.gt2])

    def width_breakpoints(self):
        return [self.gt]


class PiecewiseLinearTarget(StandardizedTarget):
    """Continuous piecewise-linear density through knots covering [0, 1]."""

    name = "piecewise-linear"

    def __init__(self, xs: Sequence[float], ys: Sequence[float], name: Optional[str] = None):
        xs = [float(v) for v in xs]
        ys = [float(v) for v in ys]
        if len(xs) != len(ys) or len(xs) < 2:
            raise ParameterError("need matching knot lists of length >= 2")
        if xs[0] != 0.0 or xs[-1] != 1.0 or any(b <= a for a, b in zip(xs, xs[1:])):
            raise ParameterError("knots must increase strictly from 0 to 1")
        if min(ys) < 0.0:
            raise ParameterError("density must be non-negative")
        mass = sum(0.5 * (y0 + y1) * (x1 - x0) for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:]))
        if abs(mass - 1.0) > 1e-12:
            raise ParameterError(f"knots integrate to {mass}, not 1")
        top = max(range(len(ys)), key=lambda i: ys[i])
        if any(b < a for a, b in zip(ys[: top + 1], ys[1 : top + 1])) or any(
            b > a for a, b in zip(ys[top:], ys[top + 1 :])
        ):
            raise ParameterError("piecewise-linear ratio is not unimodal")
        if name:
            self.name = name
        self.xs, self.ys = xs, ys
        # the top plateau (equal consecutive peak knots) has its midpoint as mode
        hi = top
        while hi + 1 < len(ys) and ys[hi + 1] == ys[top]:
            hi += 1
        self.mode = 0.5 * (xs[top] + xs[hi])
        self.log_r_max = self.log_ratio(self.mode)
        self.full_support = min(ys) > 0.0

    def _value(self, x):
        xs, ys = self.xs, self.ys
        m = len(xs)
        j = 0
        while j < m - 2 and x > xs[j + 1]:
            j += 1
        return ys[j] + (ys[j + 1] - ys[j]) * ((x - xs[j]) / (xs[j + 1] - xs[j]))

    def log_ratio(self, x):
        return _log(self._value(x))

    def q_cdf(self, x):
        arr = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        xs = np.array(self.xs)
        ys = np.array(self.ys)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs))])
        j = np.clip(np.searchsorted(xs, arr, side="right") - 1, 0, len(xs) - 2)
        dx = arr - xs[j]
        slope = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j])
        out = cum[j] + ys[j] * dx + 0.5 * slope * dx * dx
        return float(out) if out.ndim == 0 else out

    def kernel_spec(self):
        return PWL, np.array([float(len(self.xs)), *self.xs, *self.ys])

    def width_breakpoints(self):
        r = max(self.ys)
        return sorted({y / r for y in self.ys if 0.0 < y < r})


class StaircaseTarget(StandardizedTarget):
    """Piecewise-constant unimodal density built from nested closed intervals.

    Level ``j`` (heights increasing) raises the density to ``heights[j]`` on
    ``[lows[j], highs[j]]``; intervals must be nested, the innermost last.
    """

    name = "staircase"

    def __init__(self, heights, lows, highs, name: Optional[str] = None):
        heights = [float(h) for h in heights]
        lows = [float(v) for v in lows]
        highs = [float(v) for v in highs]
        k = len(heights)
        if not (k == len(lows) == len(highs)) or k == 0:
            raise ParameterError("need one interval per level")
        if heights[0] <= 0.0 or any(b <= a for a, b in zip(heights, heights[1:])):
            raise ParameterError("heights must be positive and strictly increasing")
        for j in range(k):
            if not 0.0 <= lows[j] < highs[j] <= 1.0:
                raise ParameterError(f"bad interval [{lows[j]}, {highs[j]}]")
            if j and not (lows[j - 1] <= lows[j] and highs[j] <= highs[j - 1]):
                raise ParameterError("intervals must be nested")
        mass = sum((h - p) * (hi - lo) for h, p, lo, hi in zip(heights, [0.0] + heights[:-1], lows, highs))
        if abs(mass - 1.0) > 1e-12:
            raise ParameterError(f"staircase integrates to {mass}, not 1")
        if name:
            self.name = name
        self.heights, self.lows, self.highs = heights, lows, highs
        self.log_heights = [math.log(h) for h in heights]
        self.mode = 0.5 * (lows[-1] + highs[-1])
        self.log_r_max = self.log_heights[-1]
        self.full_support = lows[0] == 0.0 and highs[0] == 1.0

    @property
    def r_max(self):
        return self.heights[-1]

    def log_ratio(self, x):
        for j in range(len(self.heights) - 1, -1, -1):
            if self.lows[j] <= x <= self.highs[j]:
                return self.log_heights[j]
        return -math.inf

    def q_cdf(self, x):
        arr = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        out = np.zeros_like(arr)
        prev = 0.0
        for h, lo, hi in zip(self.heights, self.lows, self.highs):
            out = out + (h - prev) * np.clip(arr - lo, 0.0, hi - lo)
            prev = h
        return float(out) if out.ndim == 0 else out

    def kernel_spec(self):
        return STAIR, np.array([float(len(self.heights)), *self.lows, *self.highs, *self.log_heights])

    def width_breakpoints(self):
        return [h / self.heights[-1] for h in self.heights[:-1]]

    def exact_superlevel(self, gamma):
        if gamma <= 0.0:
            return 0.0, 1.0
        thr = math.log(gamma) + self.log_r_max
        for j, lh in enumerate(self.log_heights):
            if lh >= thr:
                return self.lows[j], self.highs[j]
        return self.mode, self.mode


class TruncatedGaussianTarget(StandardizedTarget):
    """Normal(mean, sd) restricted to [0, 1], against the uniform proposal."""

    name = "truncated-gaussian"

    def __init__(self, mean: float, sd: float):
        if not sd > 0.0 or not math.isfinite(sd):
            raise ParameterError(f"sd must be positive and finite, got {sd}")
        self.mean, self.sd = float(mean), float(sd)
        self.z_lo = special.ndtr(-self.mean / self.sd)
        self.mass = special.ndtr((1.0 - self.mean) / self.sd) - self.z_lo
        if not self.mass > 0.0:
            raise ParameterError("no Gaussian mass on [0, 1]")
        self.log_norm = -math.log(self.sd) - _LOG_SQRT_2PI - math.log(self.mass)
        self.mode = min(max(self.mean, 0.0), 1.0)
        self.log_r_max = self.log_ratio(self.mode)

    def log_ratio(self, x):
        t = (x - self.mean) / self.sd
        return self.log_norm - 0.5 * (t * t)

    def q_cdf(self, x):
        arr = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        out = (special.ndtr((arr - self.mean) / self.sd) - self.z_lo) / self.mass
        return float(out) if out.ndim == 0 else out

    def kernel_spec(self):
        return GAUSS, np.array([self.mean, self.sd, self.log_norm])

    def width_breakpoints(self):
        lvl = sorted({self.log_ratio(0.0) - self.log_r_max, self.log_ratio(1.0) - self.log_r_max})
        return [math.exp(v) for v in lvl if v < 0.0]


class CallableTarget(StandardizedTarget):
    """A user-supplied ratio on [0, 1].

    When ``mode`` is omitted it is located by golden-section search, which is
    exact to ``1e-10`` for a unimodal ratio.
    """

    def __init__(
        self,
        log_ratio: Callable[[float], float],
        q_cdf: Optional[Callable] = None,
        mode: Optional[float] = None,
        log_r_max: Optional[float] = None,
        name: str = "callable",
    ):
        self._log_ratio = log_ratio
        self._q_cdf = q_cdf
        self.name = name
        if mode is None:
            mode, _ = golden_section_max(log_ratio, 0.0, 1.0, tol=1e-10)
            # boundary maxima are missed by the interior bracket
            mode = max((mode, 0.0, 1.0), key=log_ratio)
        self.mode = float(mode)
        self.log_r_max = float(log_ratio(self.mode) if log_r_max is None else log_r_max)
        if not math.isfinite(self.log_r_max):
            raise InfiniteDivergenceError("ratio is unbounded or zero at its mode")

    def log_ratio(self, x):
        return self._log_ratio(x)

    def q_cdf(self, x):
        if self._q_cdf is None:
            raise NotImplementedError("this target has no CDF")
        return self._q_cdf(x)


@dataclass
class TargetProposalPair:
    """Target Q and proposal P on the real line, given by densities and CDFs."""

    q_density: Callable[[float], float]
    p_density: Callable[[float], float]
    p_cdf: Callable[[float], float]
    p_quantile: Callable[[float], float]
    q_cdf: Optional[Callable[[float], float]] = None
    x_max: Optional[float] = None
    support: tuple[float, float] = (-10.0, 10.0)


def ratio(pair: TargetProposalPair, x: float) -> float:
    """Radon-Nikodym derivative ``q(x) / p(x)``."""
    p = pair.p_density(x)
    q = pair.q_density(x)
    if p <= 0.0:
        if q > 0.0:
            raise AbsoluteContinuityError(f"q({x}) = {q} > 0 where p vanishes")
        return 0.0
    return q / p


def _pair_mode(pair: TargetProposalPair, grid_size: int = 20001) -> float:
    if pair.x_max is not None:
        return pair.x_max
    lo, hi = pair.support
    xs = np.linspace(lo, hi, grid_size)
    vals = np.array([ratio(pair, x) for x in xs])
    i = int(np.argmax(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid_size - 1)]
    x, _ = golden_section_max(lambda t: ratio(pair, t), a, b, tol=1e-12)
    return x


def renyi_inf(pair: TargetProposalPair, grid_size: int = 20001) -> float:
    """Renyi infinity-divergence ``log r_max`` of Q from P."""
    lo, hi = pair.support
    xs = np.linspace(lo, hi, grid_size)
    vals = np.array([ratio(pair, x) for x in xs])
    if not np.all(np.isfinite(vals)):
        raise InfiniteDivergenceError("density ratio is unbounded on the grid")
    r_max = max(ratio(pair, _pair_mode(pair)), float(vals.max()))
    if not r_max > 0.0:
        raise InfiniteDivergenceError("density ratio vanishes everywhere")
    return math.log(r_max)


def standardize(pair: TargetProposalPair, check_points: int = 101) -> StandardizedTarget:
    """Push Q and P through the proposal CDF so that P becomes uniform on [0, 1].

    The returned ratio is ``r(Phi^{-1}(z))``; the mode moves to ``Phi(x_max)``
    and ``r_max`` is unchanged.
    """
    zs = np.linspace(0.0, 1.0, check_points)[1:-1]
    for z in zs:
        x = pair.p_quantile(z)
        if not math.isfinite(x) or abs(pair.p_cdf(x) - z) > 1e-9:
            raise StandardizationError(f"proposal CDF is not invertible near z={z}")
    xq = np.array([pair.p_quantile(z) for z in zs])
    if np.any(np.diff(xq) <= 0.0):
        raise StandardizationError("proposal quantile is not strictly increasing")

    x_max = _pair_mode(pair)
    log_r_max = math.log(ratio(pair, x_max))

    def log_ratio(z):
        x = pair.p_quantile(min(max(z, 0.0), 1.0))
        # infinite quantiles only occur at z in {0, 1}, a null set
        return _log(ratio(pair, x)) if math.isfinite(x) else -math.inf

    q_cdf = None
    if pair.q_cdf is not None:
        def q_cdf(z):
            z = np.clip(np.asarray(z, dtype=float), 0.0, 1.0)
            out = np.vectorize(lambda t: pair.q_cdf(pair.p_quantile(t)))(z)
            return float(out) if out.ndim == 0 else out

    return CallableTarget(log_ratio, q_cdf, mode=pair.p_cdf(x_max), log_r_max=log_r_max, name="standardized")


def gaussian_pair(q_mean: float, q_sd: float, p_mean: float = 0.0, p_sd: float = 1.0) -> TargetProposalPair:
    """Gaussian target against a Gaussian proposal (ratio unimodal iff q_sd < p_sd)."""
    if not q_sd < p_sd:
        raise ParameterError("ratio of Gaussians is bounded and unimodal only for q_sd < p_sd")
    # d/dx log(q/p) = 0
    x_max = (q_mean / q_sd**2 - p_mean / p_sd**2) / (1.0 / q_sd**2 - 1.0 / p_sd**2)
    lo = min(q_mean - 12 * q_sd, p_mean - 12 * p_sd)
    hi = max(q_mean + 12 * q_sd, p_mean + 12 * p_sd)

    def pdf(m, s):
        return lambda x: math.exp(-0.5 * ((x - m) / s) ** 2 - _LOG_SQRT_2PI) / s

    return TargetProposalPair(
        q_density=pdf(q_mean, q_sd),
        p_density=pdf(p_mean, p_sd),
        p_cdf=lambda x: float(special.ndtr((x - p_mean) / p_sd)),
        p_quantile=lambda z: p_mean + p_sd * float(special.ndtri(z)),
        q_cdf=lambda x: float(special.ndtr((x - q_mean) / q_sd)),
        x_max=x_max,
        support=(lo, hi),
    )


# ---------------------------------------------------------------- families


def worst_case_family(r_max: float) -> WorstCaseTarget:
    return WorstCaseTarget(r_max)


def triangle_family(r_max: float = 2.0, peak: float = 0.5) -> PiecewiseLinearTarget:
    """Tent-shaped ratio with maximum ``r_max`` at ``peak``.

    For ``r_max >= 2`` the tent has base ``2 / r_max`` and is zero outside it
    (shifted to fit in [0, 1]). Below 2 the tent spans [0, 1] and sits on a
    floor of height ``2 - r_max``; ``r_max = 1`` gives the uniform ratio.
    ``triangle_family(2, 0)`` is the density ``2(1 - x)``.
    """
    if not 1.0 <= r_max < math.inf:
        raise ParameterError(f"r_max must be >= 1, got {r_max}")
    if not 0.0 <= peak <= 1.0:
        raise ParameterError(f"peak must lie in [0, 1], got {peak}")
    if r_max >= 2.0:
        base = 2.0 / r_max
        a = min(max(peak - 0.5 * base, 0.0), 1.0 - base)
        b = a + base
        peak = min(max(peak, a), b)
        pts = [(0.0, 0.0), (a, 0.0), (peak, r_max), (b, 0.0), (1.0, 0.0)]
    else:
        floor = 2.0 - r_max
        pts = [(0.0, floor), (peak, r_max), (1.0, floor)]
    knots: list[tuple[float, float]] = []
    for x, y in pts:
        if knots and x == knots[-1][0]:
            knots[-1] = (x, max(y, knots[-1][1]))
        else:
            knots.append((x, y))
    return PiecewiseLinearTarget([k[0] for k in knots], [k[1] for k in knots], name="triangle")


def staircase_family(r_max: float = 4.0, levels: int = 4, center: float = 0.5) -> StaircaseTarget:
    """Nested-plateau staircase with heights ``r_max * j / levels``.

    Level widths are ``min(1, a * (levels - j + 1))`` with ``a`` chosen so the
    density integrates to one; intervals are centred on ``center`` and shifted
    to stay inside [0, 1].
    """
    if not 1.0 <= r_max < math.inf:
        raise ParameterError(f"r_max must be >= 1, got {r_max}")
    if levels < 1:
        raise ParameterError("need at least one level")
    if r_max == 1.0:
        return StaircaseTarget([1.0], [0.0], [1.0], name="staircase")
    k = levels
    need = k / r_max

    # With c levels capped at width 1 the mass condition is linear in a:
    # c + a * (k - c) * (k - c + 1) / 2 = k / r_max.
    a = math.nan
    for c in range(k):
        cand = (need - c) / ((k - c) * (k - c + 1) / 2.0)
        if cand > 0.0 and cand * (k - c) <= 1.0 and (c == 0 or cand * (k - c + 1) >= 1.0):
            a = cand
            break
    widths = [min(1.0, a * (k - j)) for j in range(k)]
    heights = [r_max * (j + 1) / k for j in range(k)]
    lows, highs = [], []
    for w in widths:
        lo = min(max(center - 0.5 * w, 0.0), 1.0 - w)
        lows.append(lo)
        highs.append(lo + w)
    mass = sum((h - p) * (hi - lo) for h, p, lo, hi in zip(heights, [0.0] + heights[:-1], lows, highs))
    if abs(mass - 1.0) > 1e-12:
        raise ParameterError("staircase construction failed to normalise")
    return StaircaseTarget(heights, lows, highs, name="staircase")


def truncated_gaussian_family(
    r_max: Optional[float] = None, mean: float = 0.5, sd: Optional[float] = None
) -> StandardizedTarget:
    """Truncated Gaussian on [0, 1], given either ``sd`` or a target ``r_max``.

    With ``r_max`` the standard deviation is solved for; ``r_max = 1`` is the
    infinite-variance limit, the uniform ratio.
    """
    if sd is not None:
        return TruncatedGaussianTarget(mean, sd)
    if r_max is None:
        raise ParameterError("give either sd or r_max")
    if not 1.0 <= r_max < math.inf:
        raise ParameterError(f"r_max must be >= 1, got {r_max}")
    if r_max == 1.0:
        return UniformRatio(name="truncated-gaussian")
    log_target = math.log(r_max)

    def gap(log_sd):
        return TruncatedGaussianTarget(mean, math.exp(log_sd)).log_r_max - log_target

    lo, hi = -40.0, 0.0
    while gap(hi) > 0.0:
        hi += 5.0
    log_sd = optimize.brentq(gap, lo, hi, xtol=1e-14)
    return TruncatedGaussianTarget(mean, math.exp(log_sd))


FAMILIES = {
    "uniform-ratio": lambda r_max=1.0, **kw: UniformRatio(),
    "worst-case": lambda r_max=2.0, **kw: worst_case_family(r_max),
    "triangle": lambda r_max=2.0, mode=None, **kw: triangle_family(r_max, 0.5 if mode is None else mode),
    "truncated-gaussian": lambda r_max=None, mean=0.5, sd=None, **kw: truncated_gaussian_family(r_max, mean, sd),
    "staircase": lambda r_max=4.0, levels=4, mode=None, **kw: staircase_family(
        r_max, int(levels), 0.5 if mode is None else mode
    ),
}


def make_family(name: str, **params) -> StandardizedTarget:
    """Build a built-in family by name; unknown names raise with the valid list."""
    try:
        factory = FAMILIES[name]
    except KeyError:
        raise ParameterError(f"unknown family {name!r}; valid families: {', '.join(FAMILIES)}") from None
    return factory(**{k: v for k, v in params.items() if v is not None})
