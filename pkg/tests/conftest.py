from unimodal_astar.measures import (
    PiecewiseLinearTarget,
    StaircaseTarget,
    TargetProposalPair,
    WorstCaseTarget,
    make_family,
)

BUILTIN = ["uniform-ratio", "worst-case", "triangle", "truncated-gaussian", "staircase"]
NONTRIVIAL = ["worst-case", "triangle", "truncated-gaussian", "staircase"]


FAMILY_CASES = [(n, r) for r in (1.0, 2.0, 8.0, 64.0) for n in BUILTIN if n != "uniform-ratio" or r == 1.0]
FAMILY_IDS = [f"{n}-r{r:g}" for n, r in FAMILY_CASES]


def family(name, r_max):
    """Built-in family at ``r_max``; the uniform ratio exists only at r_max = 1."""
    if name == "uniform-ratio":
        return make_family(name)
    return make_family(name, r_max=r_max)


def families_at(r_max, names=BUILTIN):
    return [family(n, r_max) for n in names if n != "uniform-ratio" or r_max == 1.0]


def x_breakpoints(target):
    """Points in [0, 1] where the ratio has a kink or a jump."""
    if isinstance(target, PiecewiseLinearTarget):
        return list(target.xs)
    if isinstance(target, StaircaseTarget):
        return sorted(set(target.lows) | set(target.highs))
    if isinstance(target, WorstCaseTarget):
        return [target.gt2]
    return []


def uniform_pair(target):
    """``target`` written as a pair against the uniform proposal on [0, 1]."""
    return TargetProposalPair(
        q_density=lambda x: target.ratio(x) if 0.0 <= x <= 1.0 else 0.0,
        p_density=lambda x: 1.0 if 0.0 <= x <= 1.0 else 0.0,
        p_cdf=lambda x: min(max(x, 0.0), 1.0),
        p_quantile=lambda z: z,
        q_cdf=lambda x: float(target.q_cdf(min(max(x, 0.0), 1.0))),
        x_max=target.mode,
        support=(0.0, 1.0),
    )


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
