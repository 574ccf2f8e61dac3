"""Exact A* sampling for one-dimensional targets whose density ratio is unimodal.

The run loop has a compiled (Cython) kernel and a pure-Python fallback; the
fallback is selected automatically when the extension is not built, or
explicitly with ``UNIMODAL_ASTAR_BACKEND=python``.
"""
from .gumbel import (
    ExpRaceState,
    ParameterError,
    TruncatedGumbelParams,
    sample_tg_exp,
    sample_tg_invcdf,
    tg_cdf,
)
from .measures import (
    FAMILIES,
    StandardizedTarget,
    TargetProposalPair,
    make_family,
    ratio,
    renyi_inf,
    standardize,
    staircase_family,
    triangle_family,
    truncated_gaussian_family,
    worst_case_family,
)
from .rng import RandomStream
from .sampler import BACKEND, RunTrace, exactness_check, run, run_batch, step
from .width import (
    WidthFunction,
    gamma_tilde,
    h_functional,
    inf_h,
    numeric_width,
    superlevel_interval,
    width,
    width_integral,
    worst_case_width,
)

__version__ = "0.1.0"
