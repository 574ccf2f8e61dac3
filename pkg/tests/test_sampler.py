import math

import numpy as np
import pytest

from conftest import NONTRIVIAL, family
from unimodal_astar.gumbel import ParameterError
from unimodal_astar.measures import CallableTarget, UniformRatio, worst_case_family
from unimodal_astar.rng import RandomStream
from unimodal_astar.sampler import (
    BoundsState,
    ChainState,
    DegenerateInterval,
    RunawayRunError,
    available_backends,
    default_max_steps,
    exactness_check,
    ks_critical_value,
    ks_statistic,
    run,
    run_batch,
    step,
)

GRID = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]


def test_constant_ratio_terminates_at_once():
    t = UniformRatio()
    for seed in range(20):
        tr = run(t, rng=seed)
        assert tr.T == 1
        assert 0.0 <= tr.sample <= 1.0
        assert tr.uppers[0] == tr.lowers[0] == tr.gumbels[0]
    res = run_batch(t, 1000, rng=1)
    assert np.all(res.T == 1)


def test_step_semantics():
    t = worst_case_family(8.0)
    rng = RandomStream(3)
    b, c, x = step(t, BoundsState(), ChainState(), rng)
    assert b.n == 2
    assert c.upper == pytest.approx(t.log_r_max + c.gumbel)
    assert c.lower == pytest.approx(t.log_ratio(x) + c.gumbel)
    assert (b.left, b.right) == ((x, 1.0) if x <= t.mode else (0.0, x))
    with pytest.raises(DegenerateInterval):
        step(t, BoundsState(0.3, 0.3, 4), c, rng)


@pytest.mark.parametrize("name", NONTRIVIAL)
def test_trace_invariants(name):
    t = family(name, 64.0)
    for seed in range(200):
        tr = run(t, GRID, rng=RandomStream(seed))
        assert tr.masses[0] == 1.0
        assert len(tr.masses) == len(tr.gumbels) == tr.T
        for (l0, r0), (l1, r1) in zip(tr.intervals, tr.intervals[1:]):
            assert l0 <= l1 and r1 <= r0
        for lo, hi in tr.intervals:
            assert lo <= t.mode <= hi
        assert all(b <= a for a, b in zip(tr.masses, tr.masses[1:]))
        assert all(b < a for a, b in zip(tr.gumbels, tr.gumbels[1:]))
        assert all(b < a for a, b in zip(tr.uppers, tr.uppers[1:]))
        assert all(b >= a for a, b in zip(tr.lowers, tr.lowers[1:]))
        assert tr.uppers[-1] <= tr.lowers[-1]
        assert all(u > l for u, l in zip(tr.uppers[:-1], tr.lowers[:-1]))
        best = int(np.argmax([t.log_ratio(x) + g for x, g in zip(tr.proposals, tr.gumbels)]))
        assert tr.sample == tr.proposals[best]
        prev = 0
        for g in GRID:
            thr = math.log(g) + t.log_r_max
            n = tr.hits[g]
            if n is None:
                assert all(t.log_ratio(x) < thr for x in tr.proposals)
                assert tr.residuals[g] == 0
                prev = math.inf
                continue
            assert t.log_ratio(tr.proposals[n - 1]) >= thr
            assert all(t.log_ratio(x) < thr for x in tr.proposals[: n - 1])
            assert n >= prev
            prev = n
            assert tr.residuals[g] == max(0, tr.T - n)
            if tr.residuals[g] > 0:
                assert tr.T == n + tr.residuals[g]


def test_determinism():
    t = family("triangle", 8.0)
    a, b = run(t, GRID, rng=RandomStream(42)), run(t, GRID, rng=RandomStream(42))
    assert a == b


@pytest.mark.parametrize("name", NONTRIVIAL + ["uniform-ratio"])
def test_batch_matches_single_runs(name):
    t = family(name, 16.0)
    root = RandomStream(3)
    res = run_batch(t, 50, root, GRID, zn_cap=4)
    for i in (0, 17, 49):
        tr = run(t, GRID, root.split(i))
        assert res.T[i] == tr.T
        assert res.samples[i] == tr.sample
        assert [int(v) for v in res.N[i]] == [tr.hits[g] or 0 for g in GRID]
        k = min(4, tr.T)
        np.testing.assert_array_equal(res.Z[i, :k], tr.masses[:k])


@pytest.mark.skipif("cython" not in available_backends(), reason="compiled kernel not built")
@pytest.mark.parametrize("name", NONTRIVIAL + ["uniform-ratio"])
def test_backends_bit_identical(name):
    t = family(name, 64.0)
    a = run_batch(t, 3000, 9, GRID, zn_cap=15, backend="cython")
    b = run_batch(t, 3000, 9, GRID, zn_cap=15, backend="python")
    assert a.backend == "cython" and b.backend == "python"
    for f in ("T", "samples", "flags", "N", "Z"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))


def test_worker_count_does_not_matter():
    t = family("staircase", 64.0)
    a = run_batch(t, 2001, 4, GRID, zn_cap=8, workers=1)
    b = run_batch(t, 2001, 4, GRID, zn_cap=8, workers=3)
    c = run_batch(t, 2001, 4, GRID, zn_cap=8, workers=1, backend="python")
    for f in ("T", "samples", "N", "Z"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))
        np.testing.assert_array_equal(getattr(a, f), getattr(c, f))


def test_callable_target_uses_python_kernel():
    t = CallableTarget(lambda x: math.log(2.0 * (1.0 - x)) if x < 1.0 else -math.inf)
    res = run_batch(t, 100, 0)
    assert res.backend == "python"
    assert np.all(res.flags == 0)


def test_runaway_carries_partial():
    t = worst_case_family(1e6)
    with pytest.raises(RunawayRunError) as err:
        run(t, [0.5], rng=1, max_steps=1)
    assert err.value.partial.T == 1
    with pytest.raises(RunawayRunError) as err:
        run_batch(t, 20, 1, max_steps=1)
    assert err.value.partial.T.shape == (20,)
    with pytest.raises(ParameterError):
        run(t, max_steps=0)
    assert default_max_steps(worst_case_family(1.0)) == 1040


def test_grid_validation():
    t = UniformRatio()
    with pytest.raises(ParameterError):
        run(t, [0.5, 0.2])
    with pytest.raises(ParameterError):
        run_batch(t, 3, 0, [0.0, 0.5])


def test_frozen_vs_continued_masses():
    res = run_batch(worst_case_family(8.0), 500, 2, zn_cap=10)
    fz = res.frozen_Z()
    for i in range(20):
        T = res.T[i]
        np.testing.assert_array_equal(fz[i, :T], res.Z[i, :T])
        assert np.all(fz[i, T:] == res.Z[i, min(T, 10) - 1])
        assert np.all(np.diff(res.Z[i]) <= 0)


def test_mean_mass_at_step_five():
    res = run_batch(worst_case_family(8.0), 100_000, 5, zn_cap=5)
    z5 = res.Z[:, 4]
    se = z5.std(ddof=1) / math.sqrt(z5.size)
    assert 0.5**4 - 3 * se <= z5.mean() <= 0.75**4 + 3 * se


def test_mean_steps_r64():
    alpha = 1.0 / math.log(4.0 / 3.0)
    res = run_batch(worst_case_family(64.0), 10_000, 6)
    se = res.T.std(ddof=1) / 100.0
    bound = 4 * alpha * math.log(64.0) + 4 * alpha * math.log(2.0) + 22
    assert bound == pytest.approx(89.5, abs=0.05)
    assert res.T.mean() - 3 * se <= bound


@pytest.mark.parametrize("name", ["uniform-ratio", "worst-case", "staircase", "truncated-gaussian"])
def test_exactness(name):
    t = family(name, 4.0 if name != "uniform-ratio" else 1.0)
    n = 100_000
    assert exactness_check(t, n, rng=11) < ks_critical_value(n)
    assert ks_critical_value(n) == pytest.approx(0.00617, abs=1e-5)


def test_exactness_detects_wrong_target():
    t = family("triangle", 4.0)
    samples = run_batch(t, 20_000, 1).samples
    assert ks_statistic(samples, family("triangle", 8.0).q_cdf) > ks_critical_value(20_000)
