# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched run loop; see ``_pykernel.py`` for the reference semantics."""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, NAN, exp, log, log1p
from libc.stdlib cimport free, malloc
from libc.stdint cimport int64_t, int8_t
from numpy.random cimport bitgen_t

cdef enum:
    CONST = 0
    WORST = 1
    PWL = 2
    STAIR = 3
    GAUSS = 4


cdef inline double _log_ratio(int code, const double* p, double x) noexcept nogil:
    cdef int m, j, k
    cdef double t, y
    cdef const double* xs
    cdef const double* ys
    if code == CONST:
        return 0.0
    elif code == WORST:
        if x <= p[2]:
            return p[0]
        t = p[1] - 0.5 * log(x)
        if t > 0.0:
            t = 0.0
        return p[0] + t
    elif code == PWL:
        m = <int>p[0]
        xs = p + 1
        ys = p + 1 + m
        j = 0
        while j < m - 2 and x > xs[j + 1]:
            j += 1
        y = ys[j] + (ys[j + 1] - ys[j]) * ((x - xs[j]) / (xs[j + 1] - xs[j]))
        if y > 0.0:
            return log(y)
        return -INFINITY
    elif code == STAIR:
        k = <int>p[0]
        j = k - 1
        while j >= 0:
            if p[1 + j] <= x and x <= p[1 + k + j]:
                return p[1 + 2 * k + j]
            j -= 1
        return -INFINITY
    else:
        t = (x - p[0]) / p[1]
        return p[2] - 0.5 * (t * t)


cdef void _run_block(
    int code, const double* p, double log_r_max, double mode,
    bitgen_t** gens, int64_t start, int64_t stop,
    const double* thr, int ng, int64_t max_steps, int64_t zn_cap,
    int64_t[::1] out_T, double[::1] out_x, int8_t[::1] out_flag,
    int64_t[:, ::1] out_N, double[:, ::1] out_Z,
) noexcept nogil:
    cdef int64_t i, n, m
    cdef int nh, flag, first
    cdef double left, right, g, best, xhat, x, z, u, a, b, lr, val
    cdef bitgen_t* rng
    for i in range(start, stop):
        rng = gens[i]
        left = 0.0
        right = 1.0
        g = 0.0
        first = 1
        best = -INFINITY
        xhat = NAN
        nh = 0
        n = 0
        flag = 0
        x = NAN
        while True:
            n += 1
            if n > max_steps:
                flag = 2
                n = max_steps
                break
            z = right - left
            if z <= 0.0:
                flag = 1
                n -= 1
                break
            if n <= zn_cap:
                out_Z[i, n - 1] = z
            x = left + rng.next_double(rng.state) * z
            u = rng.next_double(rng.state)
            while u == 0.0:
                u = rng.next_double(rng.state)
            a = log(-log(u)) - log(z)
            if first:
                g = -a
                first = 0
            else:
                b = -g
                if a < b:
                    a, b = b, a
                g = -(a + log1p(exp(b - a)))
            lr = _log_ratio(code, p, x)
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
        if flag == 0 and n < zn_cap:
            if x <= mode:
                left = x
            else:
                right = x
            for m in range(n, zn_cap):
                z = right - left
                out_Z[i, m] = z
                x = left + rng.next_double(rng.state) * z
                if x <= mode:
                    left = x
                else:
                    right = x
        elif n < zn_cap:
            z = right - left
            for m in range(n, zn_cap):
                out_Z[i, m] = z


def run_replicas(
    int code, const double[::1] params, double log_r_max, double mode,
    list bit_generators, const double[::1] thresholds,
    int64_t max_steps, int64_t zn_cap,
    int64_t[::1] out_T, double[::1] out_x, int8_t[::1] out_flag,
    int64_t[:, ::1] out_N, double[:, ::1] out_Z,
):
    """Compiled counterpart of ``_pykernel.run_replicas`` for built-in families.

    ``bit_generators`` are numpy BitGenerators, one per replica, each owned
    exclusively by this call. Runs without the GIL.
    """
    cdef int64_t nrep = len(bit_generators)
    cdef int64_t i
    cdef bitgen_t** gens = <bitgen_t**>malloc(max(nrep, 1) * sizeof(bitgen_t*))
    if gens == NULL:
        raise MemoryError()
    try:
        for i in range(nrep):
            gens[i] = <bitgen_t*>PyCapsule_GetPointer(bit_generators[i].capsule, "BitGenerator")
        with nogil:
            _run_block(code, &params[0], log_r_max, mode, gens, 0, nrep,
                       &thresholds[0] if thresholds.shape[0] > 0 else NULL,
                       <int>thresholds.shape[0], max_steps, zn_cap,
                       out_T, out_x, out_flag, out_N, out_Z)
    finally:
        free(gens)
