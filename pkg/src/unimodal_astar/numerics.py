"""Small deterministic 1-D numerics: adaptive Simpson, golden section, bisection."""
from __future__ import annotations

import math
from typing import Callable, Sequence

__all__ = [
    "QuadratureError",
    "adaptive_simpson",
    "golden_section_max",
    "golden_section_min",
    "bisect_boundary",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def _simpson(fa, fm, fb, a, b):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-8,
    breakpoints: Sequence[float] = (),
    max_depth: int = 60,
) -> float:
    """Integrate ``f`` over ``[a, b]`` by adaptive Simpson with Richardson correction.

    ``breakpoints`` inside ``(a, b)`` split the range first, so kinks and jumps
    at known locations land on panel edges. The tolerance is absolute and is
    shared among panels in proportion to their length.
    """
    cuts = sorted({a, b, *(p for p in breakpoints if a < p < b)})
    total = 0.0
    span = b - a
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += _simpson_panel(f, lo, hi, tol * (hi - lo) / span, max_depth)
    return total


def _simpson_panel(f, a, b, tol, max_depth):
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, a, b)
    total = 0.0
    # explicit stack; entries are (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = _simpson(fa, flm, fm, a, m)
        right = _simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol or b - a < 1e-15:
            total += left + right + delta / 15.0
        elif depth >= max_depth:
            raise QuadratureError(f"no convergence on [{a}, {b}]")
        else:
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
    return total


def golden_section_min(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10):
    """Minimise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    # the bracket interior points may beat the midpoint on flat or kinked f
    best = min((fx, x), (fc, c), (fd, d))
    return best[1], best[0]


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    x, v = golden_section_min(lambda t: -f(t), a, b, tol)
    return x, -v


def bisect_boundary(inside: Callable[[float], bool], x_in: float, x_out: float, xtol: float = 0.0) -> float:
    """Locate the edge of ``{x : inside(x)}`` between ``x_in`` and ``x_out``.

    Requires ``inside(x_in)`` and not ``inside(x_out)``. Returns the last point
    known to be inside; with ``xtol=0`` bisection runs until the bracket can no
    longer be split in floating point.
    """
    for _ in range(2000):
        if abs(x_out - x_in) <= xtol:
            break
        mid = 0.5 * (x_in + x_out)
        if mid == x_in or mid == x_out:
            break
        if inside(mid):
            x_in = mid
        else:
            x_out = mid
    return x_in
