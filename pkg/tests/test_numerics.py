import math

import numpy as np
import pytest

from unimodal_astar.numerics import QuadratureError, adaptive_simpson, bisect_boundary, golden_section_max, golden_section_min
from unimodal_astar.rng import RandomStream, replica_streams


def test_simpson_smooth():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-9)
    assert adaptive_simpson(lambda x: x**3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-12)


def test_simpson_with_jump_and_breakpoint():
    step = lambda x: 1.0 if x < 0.3 else 3.0
    assert adaptive_simpson(step, 0.0, 1.0, breakpoints=[0.3]) == pytest.approx(0.3 + 2.1, abs=1e-12)
    assert adaptive_simpson(step, 0.0, 1.0) == pytest.approx(2.4, abs=1e-7)


def test_simpson_sqrt_singularity():
    assert adaptive_simpson(lambda x: 0.5 / math.sqrt(x) if x > 0 else 0.0, 0.0, 1.0, tol=1e-8) == pytest.approx(
        1.0, abs=1e-3
    )


def test_simpson_failure():
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: math.sin(1.0 / x) / x if x > 0 else 0.0, 0.0, 1.0, tol=1e-14, max_depth=8)


def test_golden_section():
    x, fx = golden_section_min(lambda t: (t - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-7) and fx < 1e-13
    x, fx = golden_section_max(lambda t: -abs(t - 0.71), 0.0, 1.0)
    assert x == pytest.approx(0.71, abs=1e-9)
    x, _ = golden_section_max(lambda t: t, 0.0, 1.0)
    assert x == pytest.approx(1.0, abs=1e-9)


def test_bisect_boundary_returns_inside_point():
    inside = lambda x: x <= 0.123456789
    b = bisect_boundary(inside, 0.0, 1.0)
    assert inside(b) and not inside(np.nextafter(b, 1.0))
    b = bisect_boundary(lambda x: x >= 0.25, 1.0, 0.0)
    assert b == 0.25


def test_streams_reproducible_and_independent():
    a, b = RandomStream(5).split(3), RandomStream(5).split(3)
    np.testing.assert_array_equal(a.uniform(10), b.uniform(10))
    c = RandomStream(5).split(4)
    assert not np.array_equal(RandomStream(5).split(3).uniform(10), c.uniform(10))
    assert [s.key for s in replica_streams(1, 3, start=2)] == [(2,), (3,), (4,)]
    assert RandomStream(1).split(2).split(7).key == (2, 7)


def test_exponential_draws():
    r = RandomStream(0)
    e = r.exponential(200_000)
    assert np.all(e >= 0) and e.mean() == pytest.approx(1.0, abs=0.01)
    assert r.positive_uniform() > 0.0
    # scalar draws consume the same uniforms as the vector path
    v = RandomStream(8).exponential(4)
    s = RandomStream(8)
    np.testing.assert_allclose([s.exponential() for _ in range(4)], v, rtol=1e-15)
