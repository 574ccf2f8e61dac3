import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from unimodal_astar.gumbel import (
    EULER_GAMMA,
    ExpRaceState,
    ParameterError,
    TruncatedGumbelParams as TG,
    logaddexp,
    sample_tg_exp,
    sample_tg_invcdf,
    tg_cdf,
    tg_chain,
)
from unimodal_astar.rng import RandomStream
from unimodal_astar.sampler import ks_two_sample_critical_value


def test_params_validation():
    with pytest.raises(ParameterError):
        TG(math.inf)
    with pytest.raises(ParameterError):
        TG(math.nan)
    with pytest.raises(ParameterError):
        TG(0.0, -math.inf)
    with pytest.raises(ParameterError):
        TG(0.0, math.nan)
    assert TG(0.0, math.inf).kappa is None
    assert not TG(0.0).truncated and TG(0.0, 1.0).truncated


def test_exp_race_state():
    s = ExpRaceState.from_params(TG(math.log(2.0), 0.0))
    assert s.rate == pytest.approx(2.0)
    assert s.offset == pytest.approx(1.0)
    assert ExpRaceState.from_params(TG(0.0)).offset == 0.0


def test_logaddexp_matches_numpy():
    for a, b in [(0.0, 0.0), (-800.0, -801.0), (30.0, -30.0), (-math.inf, 2.0)]:
        assert logaddexp(a, b) == pytest.approx(np.logaddexp(a, b), rel=1e-15, abs=0.0)


def test_standard_gumbel_mean():
    g = sample_tg_exp(TG(0.0), RandomStream(11), size=10**6)
    se = g.std(ddof=1) / math.sqrt(g.size)
    assert abs(g.mean() - EULER_GAMMA) < 3 * se
    assert EULER_GAMMA == pytest.approx(0.5772156649, abs=1e-10)


def test_hard_truncation_at_zero():
    g = sample_tg_exp(TG(0.0, 0.0), RandomStream(1), size=10**5)
    assert np.all(g <= 0.0)
    u = RandomStream(2).uniform(10**5)
    u = u[u > 0]
    assert np.all(sample_tg_invcdf(TG(0.0, 0.0), u) <= 0.0)


def test_hard_truncation_deep_kappa():
    # kappa far below mu: the draw sits just under kappa and must never exceed it
    p = TG(50.0, -700.0)
    g = sample_tg_exp(p, RandomStream(3), size=10**4)
    assert np.all(g <= -700.0)


def test_cdf_at_zero_with_location_log2():
    g = sample_tg_exp(TG(math.log(2.0)), RandomStream(5), size=10**6)
    p = np.mean(g <= 0.0)
    target = math.exp(-2.0)
    se = math.sqrt(target * (1 - target) / g.size)
    assert abs(p - target) < 3 * se
    assert tg_cdf(0.0, TG(math.log(2.0))) == pytest.approx(0.1353352832, abs=1e-10)


def test_invcdf_examples():
    assert sample_tg_invcdf(TG(0.0), math.exp(-1.0)) == pytest.approx(0.0, abs=1e-15)
    assert sample_tg_invcdf(TG(0.0), 0.5) == pytest.approx(-math.log(math.log(2.0)), abs=1e-15)
    assert sample_tg_invcdf(TG(0.0), 0.5) == pytest.approx(0.3665, abs=1e-4)
    near = [sample_tg_invcdf(TG(0.0, 0.0), 1 - 10.0**-k) for k in (2, 6, 12)]
    assert all(v < 0 for v in near)
    assert near[0] < near[1] < near[2]
    assert near[2] > -1e-11


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
def test_invcdf_domain(u):
    with pytest.raises(ParameterError):
        sample_tg_invcdf(TG(0.0), u)


def test_cdf_examples():
    assert tg_cdf(1.3, TG(0.2, 1.3)) == 1.0
    assert tg_cdf(2.0, TG(0.2, 1.3)) == 1.0
    assert tg_cdf(0.7, TG(0.7)) == pytest.approx(math.exp(-1.0), rel=1e-15)
    # exp(-(1/gamma) P(B) e^{-G}) at g = log gamma + G
    gamma, pb, G = 0.3, 0.25, 0.8
    val = tg_cdf(math.log(gamma) + G, TG(math.log(pb)))
    assert val == pytest.approx(math.exp(-(1 / gamma) * pb * math.exp(-G)), rel=1e-14)


@pytest.mark.parametrize("mu", [-2.0, 0.0, 2.0])
@pytest.mark.parametrize("kappa", [-1.0, 0.0, 1.0, None])
@pytest.mark.parametrize("u", [0.01, 0.5, 0.99])
def test_cdf_quantile_round_trip(mu, kappa, u):
    p = TG(mu, kappa)
    assert tg_cdf(sample_tg_invcdf(p, u), p) == pytest.approx(u, rel=1e-10)


@pytest.mark.parametrize("mu,kappa", [(0.0, None), (2.0, -1.0), (-2.0, 1.0)])
def test_two_samplers_agree(mu, kappa):
    n = 20_000
    p = TG(mu, kappa)
    a = sample_tg_exp(p, RandomStream(7).split(0), size=n)
    u = RandomStream(7).split(1).uniform(n)
    b = sample_tg_invcdf(p, u[u > 0])
    ks = stats.ks_2samp(a, b).statistic
    assert ks < ks_two_sample_critical_value(n, b.size)


def test_scalar_and_vector_draws_match():
    p = TG(0.3, 0.1)
    vec = sample_tg_exp(p, RandomStream(9), size=5)
    rng = RandomStream(9)
    sca = [sample_tg_exp(p, rng) for _ in range(5)]
    np.testing.assert_array_equal(vec, sca)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(min_value=1e-6, max_value=1.0), min_size=2, max_size=30),
    st.integers(min_value=0, max_value=2**32),
    st.sampled_from(["exp", "invcdf"]),
)
def test_chain_strictly_decreasing(masses, seed, sampler):
    g = tg_chain([math.log(m) for m in masses], RandomStream(seed), 20, sampler)
    assert g.shape == (20, len(masses))
    assert np.all(np.diff(g, axis=1) < 0.0)


def test_chain_errors():
    with pytest.raises(ParameterError):
        tg_chain([], RandomStream(0), 3)
    with pytest.raises(ParameterError):
        tg_chain([0.0], RandomStream(0), 3, sampler="nope")
