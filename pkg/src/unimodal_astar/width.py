"""Superlevel sets, width functions and the runtime-bound functional ``h``.

For a unimodal ratio the superlevel set ``S(gamma) = {x : r(x) >= gamma r_max}``
is an interval containing the mode; its length is the width ``w(gamma)``.
Widths are non-increasing in ``gamma`` and integrate to ``1 / r_max``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gumbel import ParameterError
from .numerics import adaptive_simpson, bisect_boundary, golden_section_min

__all__ = [
    "WidthFunction",
    "superlevel_interval",
    "width",
    "width_integral",
    "gamma_tilde",
    "v_template",
    "numeric_width",
    "worst_case_width",
    "staircase_width",
    "f_term",
    "g_term",
    "h_functional",
    "inf_h",
    "width_profile_csv",
]


def gamma_tilde(r_max: float) -> float:
    """``1 - sqrt(1 - 1/r_max)``, the knee of the worst-case width profile.

    Evaluated as ``a / (1 + sqrt(1 - a))`` with ``a = 1/r_max`` to avoid
    cancellation for large ``r_max``.
    """
    if not r_max >= 1.0:
        raise ParameterError(f"r_max must be >= 1, got {r_max}")
    a = 1.0 / r_max
    return a / (1.0 + math.sqrt(1.0 - a))


def v_template(gamma: float, knee: float) -> float:
    """1 for ``gamma <= knee``, ``(knee / gamma)**2`` above."""
    if gamma <= knee:
        return 1.0
    return (knee / gamma) ** 2


def superlevel_interval(target, gamma: float, exact: bool = True) -> tuple[float, float]:
    """The closed interval ``S(gamma)`` of a unimodal standardized target.

    Endpoints are located by bisection of ``log r(x) >= log gamma + log r_max``
    on either side of the mode; a side on which the ratio never drops below the
    level is clamped to the domain edge. Targets with a closed form (the
    staircase) use it when ``exact`` is set.
    """
    if gamma > 1.0:
        raise ParameterError(f"gamma must be <= 1, got {gamma}")
    if gamma <= 0.0:
        return 0.0, 1.0
    if exact:
        closed = target.exact_superlevel(gamma)
        if closed is not None:
            return closed
    thr = math.log(gamma) + target.log_r_max

    def inside(x):
        return target.log_ratio(x) >= thr

    mode = target.mode
    left = 0.0 if inside(0.0) else bisect_boundary(inside, mode, 0.0)
    right = 1.0 if inside(1.0) else bisect_boundary(inside, mode, 1.0)
    return left, right


def width(target, gamma: float, exact: bool = True) -> float:
    a, b = superlevel_interval(target, gamma, exact)
    return b - a


@dataclass(frozen=True)
class WidthFunction:
    """A width profile ``gamma -> w(gamma)`` tied to its ``r_max``."""

    evaluator: Callable[[float], float]
    r_max: float
    kind: str
    breakpoints: tuple = ()

    def __call__(self, gamma: float) -> float:
        return self.evaluator(gamma)


def numeric_width(target, exact: bool = True) -> WidthFunction:
    """Width function of ``target`` from its superlevel intervals."""
    return WidthFunction(
        lambda g: width(target, g, exact),
        target.r_max,
        "numeric",
        tuple(target.width_breakpoints()),
    )


def worst_case_width(r_max: float) -> WidthFunction:
    """Closed-form worst-case profile: ``v_template(gamma, gamma_tilde(r_max))``."""
    knee = gamma_tilde(r_max)
    return WidthFunction(lambda g: v_template(g, knee), r_max, "closed-form-worst-case", (knee,))


def staircase_width(target) -> WidthFunction:
    """Exact width profile of a staircase target from its breakpoints."""

    def w(g):
        a, b = target.exact_superlevel(g)
        return b - a

    return WidthFunction(w, target.r_max, "closed-form-staircase", tuple(target.width_breakpoints()))


def width_integral(target_or_width, tol: float = 1e-8) -> float:
    """``int_0^1 w(gamma) d gamma`` by adaptive Simpson (equals ``1/r_max``)."""
    if isinstance(target_or_width, WidthFunction):
        w = target_or_width
    else:
        w = numeric_width(target_or_width)
    return adaptive_simpson(w, 0.0, 1.0, tol=tol, breakpoints=w.breakpoints)


def f_term(gamma: float, w) -> float:
    val = w(gamma)
    return math.inf if val <= 0.0 else -math.log(val)


def g_term(gamma: float) -> float:
    return -2.0 * math.log(gamma)


def h_functional(gamma: float, w) -> float:
    """``log(1/w(gamma)) + 2 log(1/gamma)``; ``inf`` where the width vanishes."""
    if not 0.0 < gamma <= 1.0:
        raise ParameterError(f"gamma must lie in (0, 1], got {gamma}")
    return f_term(gamma, w) + g_term(gamma)


def inf_h(w, grid_size: int = 1000, lo: float = 1e-6) -> tuple[float, float]:
    """Minimise ``h(., w)`` over a log-spaced grid on ``[lo, 1]``, then refine.

    The grid argmin is refined by golden-section search in ``log gamma`` on the
    neighbouring grid cells. Returns ``(gamma, h)``.
    """
    if grid_size < 100:
        raise ParameterError("grid_size must be >= 100")
    grid = np.logspace(math.log10(lo), 0.0, grid_size)
    grid[-1] = 1.0
    vals = [h_functional(float(g), w) for g in grid]
    i = int(np.argmin(vals))
    best_g, best_h = float(grid[i]), vals[i]
    a = math.log(grid[max(i - 1, 0)])
    b = math.log(grid[min(i + 1, grid_size - 1)])
    if b > a and math.isfinite(best_h):
        t, v = golden_section_min(lambda s: h_functional(min(math.exp(s), 1.0), w), a, b, tol=1e-12)
        if v < best_h:
            best_g, best_h = min(math.exp(t), 1.0), v
    return best_g, best_h


def width_profile_csv(w, gammas) -> str:
    """CSV text with columns gamma, width, f, g, h."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["gamma", "width", "f", "g", "h"])
    for g in gammas:
        g = float(g)
        val = w(g)
        f = f_term(g, w)
        gg = g_term(g) if g > 0.0 else math.inf
        out.writerow([_fmt(g), _fmt(val), _fmt(f), _fmt(gg), _fmt(f + gg)])
    return buf.getvalue()


def _fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")
