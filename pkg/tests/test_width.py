import math

import numpy as np
import pytest

from conftest import FAMILY_CASES, FAMILY_IDS, family
from unimodal_astar.gumbel import ParameterError
from unimodal_astar.measures import staircase_family, truncated_gaussian_family, worst_case_family, UniformRatio
from unimodal_astar.width import (
    WidthFunction,
    f_term,
    g_term,
    gamma_tilde,
    h_functional,
    inf_h,
    numeric_width,
    staircase_width,
    superlevel_interval,
    v_template,
    width,
    width_integral,
    width_profile_csv,
    worst_case_width,
)


def test_gamma_tilde_examples():
    assert gamma_tilde(1.0) == 1.0
    assert gamma_tilde(2.0) == pytest.approx(0.2928932, abs=1e-7)
    assert gamma_tilde(100.0) >= 1.0 / 200.0
    for r in [1.5, 10.0, 1e3, 1e8, 1e15]:
        assert gamma_tilde(r) == pytest.approx(1.0 - math.sqrt(1.0 - 1.0 / r), rel=1e-6)
        assert gamma_tilde(r) >= 1.0 / (2.0 * r)
    with pytest.raises(ParameterError):
        gamma_tilde(0.9)


def test_superlevel_examples():
    t = worst_case_family(8.0)
    assert superlevel_interval(t, 0.0) == (0.0, 1.0)
    gt = t.gt
    for g in [gt * 1.01, 0.3, 0.7, 1.0]:
        a, b = superlevel_interval(t, g)
        assert a == 0.0
        assert b == pytest.approx((gt / g) ** 2, abs=1e-12)
    with pytest.raises(ParameterError):
        superlevel_interval(t, 1.5)


def test_superlevel_at_one_is_argmax_set():
    s = staircase_family(4.0, 4)
    a, b = superlevel_interval(s, 1.0)
    assert (a, b) == (s.lows[-1], s.highs[-1])
    assert a <= s.mode <= b
    g = truncated_gaussian_family(8.0)
    a, b = superlevel_interval(g, 1.0)
    assert b - a < 1e-7 and a <= g.mode <= b


@pytest.mark.parametrize("r_max", [1.0, 2.0, 8.0, 64.0, 1024.0])
def test_worst_case_closed_form(r_max):
    t = worst_case_family(r_max)
    num, closed = numeric_width(t), worst_case_width(r_max)
    gt = gamma_tilde(r_max)
    for g in np.linspace(0.0, 1.0, 1001):
        expect = 1.0 if g <= gt else (gt / g) ** 2
        assert closed(g) == pytest.approx(expect, abs=1e-15)
        assert abs(num(g) - expect) <= 1e-6


def test_v_template_matches_worst_case_width():
    for r in [1.0, 3.0, 64.0]:
        w = worst_case_width(r)
        for g in np.linspace(0.0, 1.0, 101):
            assert v_template(g, gamma_tilde(r)) == w(g)


@pytest.mark.parametrize("name,r_max", FAMILY_CASES, ids=FAMILY_IDS)
def test_integral_identity(name, r_max):
    t = family(name, r_max)
    assert abs(width_integral(t) - 1.0 / r_max) <= 1e-6


@pytest.mark.parametrize("name,r_max", FAMILY_CASES, ids=FAMILY_IDS)
def test_monotone_and_nested(name, r_max):
    t = family(name, r_max)
    rng = np.random.default_rng(7)
    pairs = np.sort(rng.random((1000, 2)), axis=1)
    for g1, g2 in pairs:
        assert width(t, g2) <= width(t, g1) + 1e-12
    for g1, g2 in pairs[:200]:
        a1, b1 = superlevel_interval(t, g1)
        a2, b2 = superlevel_interval(t, g2)
        assert a1 <= a2 and b2 <= b1
    assert width(t, 0.0) >= 1.0 / r_max


def test_worst_case_integral_r2():
    assert width_integral(worst_case_family(2.0)) == pytest.approx(0.5, abs=1e-6)
    gt = gamma_tilde(2.0)
    assert 2 * gt - gt * gt == pytest.approx(0.5, abs=1e-15)


def test_uniform_widths():
    w = numeric_width(UniformRatio())
    assert all(w(g) == 1.0 for g in np.linspace(0, 1, 11))
    assert width_integral(w) == pytest.approx(1.0, abs=1e-12)


def test_staircase_exact_widths():
    s = staircase_family(4.0, 4)
    w = staircase_width(s)
    expect = {0.1: 0.4, 0.25: 0.4, 0.26: 0.3, 0.5: 0.3, 0.6: 0.2, 0.75: 0.2, 0.9: 0.1, 1.0: 0.1}
    for g, v in expect.items():
        assert w(g) == pytest.approx(v, abs=1e-15)
        assert numeric_width(s)(g) == pytest.approx(v, abs=1e-15)
    assert w.kind == "closed-form-staircase"


def test_h_examples():
    one = numeric_width(UniformRatio())
    assert h_functional(1.0, one) == 0.0
    w2 = worst_case_width(2.0)
    gt = gamma_tilde(2.0)
    assert h_functional(gt, w2) == pytest.approx(2 * math.log(1 / gt), rel=1e-14)
    assert h_functional(gt, w2) == pytest.approx(2.4559, abs=1e-4)
    for g in [0.01, 0.3, 1.0]:
        assert h_functional(g, w2) >= g_term(g)
    zero = WidthFunction(lambda g: 0.0, 1.0, "numeric")
    assert h_functional(0.5, zero) == math.inf
    assert f_term(0.5, zero) == math.inf
    with pytest.raises(ParameterError):
        h_functional(0.0, w2)


def test_inf_h_examples():
    g, v = inf_h(numeric_width(UniformRatio()))
    assert v == pytest.approx(0.0, abs=1e-12) and g == pytest.approx(1.0)
    for r in [2.0, 8.0, 64.0, 1024.0]:
        w = worst_case_width(r)
        g, v = inf_h(w)
        assert v <= h_functional(gamma_tilde(r), w) + 1e-12
    with pytest.raises(ParameterError):
        inf_h(w, grid_size=50)


@pytest.mark.parametrize("name,r_max", FAMILY_CASES, ids=FAMILY_IDS)
def test_worst_case_dominance(name, r_max):
    _, worst = inf_h(worst_case_width(r_max))
    _, own = inf_h(numeric_width(family(name, r_max)))
    assert worst >= own - 1e-9


def test_profile_csv():
    text = width_profile_csv(worst_case_width(2.0), [0.25, 0.5, 1.0])
    lines = text.strip().split("\n")
    assert lines[0] == "gamma,width,f,g,h"
    g, w, f, gg, h = (float(v) for v in lines[2].split(","))
    assert w == pytest.approx((gamma_tilde(2.0) / 0.5) ** 2, rel=1e-15)
    assert h == pytest.approx(f + gg, rel=1e-15)
    assert lines[3].split(",")[3] == "0"
