"""Pure-Python batched run loop (fallback for the compiled kernel).

Mirrors ``_ckernel.pyx`` operation for operation: the same uniforms are drawn
in the same order and every floating-point expression is evaluated in the same
order, so both backends return bit-identical results.
"""
from __future__ import annotations

import math

FLAG_OK, FLAG_DEGENERATE, FLAG_RUNAWAY = 0, 1, 2


def run_replicas(
    log_ratio,
    log_r_max,
    mode,
    streams,
    thresholds,
    max_steps,
    zn_cap,
    out_T,
    out_x,
    out_flag,
    out_N,
    out_Z,
):
    """Run one A* sampler replica per stream, writing into the ``out_*`` arrays.

    ``thresholds[j] = log(gamma_j) + log_r_max`` (ascending); ``out_N[i, j]``
    receives the first step whose log-ratio reaches ``thresholds[j]`` (0 when
    never reached). ``out_Z[i, :zn_cap]`` receives interval masses, continuing
    the bound process past termination.
    """
    ng = len(thresholds)
    thr = [float(t) for t in thresholds]
    for i, stream in enumerate(streams):
        rand = stream._gen.random
        left, right = 0.0, 1.0
        g = 0.0
        first = True
        best = -math.inf
        xhat = math.nan
        nh = 0
        n = 0
        flag = FLAG_OK
        x = math.nan
        while True:
            n += 1
            if n > max_steps:
                flag = FLAG_RUNAWAY
                n = max_steps
                break
            z = right - left
            if z <= 0.0:
                flag = FLAG_DEGENERATE
                n -= 1
                break
            if n <= zn_cap:
                out_Z[i, n - 1] = z
            x = left + rand() * z
            u = rand()
            while u == 0.0:
                u = rand()
            a = math.log(-math.log(u)) - math.log(z)
            if first:
                g = -a
                first = False
            else:
                b = -g
                if a < b:
                    a, b = b, a
                g = -(a + math.log1p(math.exp(b - a)))
            lr = log_ratio(x)
            val = lr + g
            if val > best:
                best = val
                xhat = x
            while nh < ng and lr >= thr[nh]:
                out_N[i, nh] = n
                nh += 1
            if log_r_max + g <= best:
                break
            if x <= mode:
                left = x
            else:
                right = x
        out_T[i] = n
        out_x[i] = xhat
        out_flag[i] = flag
        if flag == FLAG_OK and n < zn_cap:
            # the bound process after termination: no Gumbels, only the split
            if x <= mode:
                left = x
            else:
                right = x
            for m in range(n, zn_cap):
                z = right - left
                out_Z[i, m] = z
                x = left + rand() * z
                if x <= mode:
                    left = x
                else:
                    right = x
        elif n < zn_cap:
            z = right - left
            for m in range(n, zn_cap):
                out_Z[i, m] = z
