"""Monte Carlo checks of the A* runtime bounds.

Every experiment returns a :class:`BoundReport` whose rows pair an empirical
mean and its standard error with a theoretical bound. A row is a violation
only if the bound is breached by more than three standard errors (Wilson
intervals for frequencies). Rows marked informational are never violations.

Replica ``i`` of the sampler runs for family ``f`` at the ``k``-th ``r_max``
always draws from ``RandomStream(seed).split(k).split(i)``, so reports are
identical for any number of workers.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .gumbel import ParameterError, tg_chain
from .measures import WorstCaseTarget, make_family
from .rng import RandomStream
from .sampler import BACKEND, ks_two_sample_critical_value, run_batch
from .width import inf_h, numeric_width, width, worst_case_width

__all__ = [
    "ALPHA",
    "ExperimentConfig",
    "BoundRow",
    "BoundReport",
    "n0_constant",
    "k0_constant",
    "wilson_interval",
    "experiment_zn",
    "experiment_markov_tail",
    "experiment_N",
    "experiment_K",
    "experiment_T",
    "experiment_mean_neg_gumbel",
    "singlelog_gap",
    "experiment_singlelog",
    "CSV_COLUMNS",
    "clear_batch_cache",
    "runtime_bound",
    "tight_runtime_bound",
    "reports_json",
]

ALPHA = 1.0 / math.log(4.0 / 3.0)
SIGMAS = 3.0

CSV_COLUMNS = [
    "experiment", "family", "r_max", "quantity", "index_name", "index", "count",
    "mean", "se", "lower_bound", "bound", "slack", "violation", "informational", "aux",
]


@dataclass
class ExperimentConfig:
    family: str = "worst-case"
    family_params: dict = field(default_factory=dict)
    r_max_values: list = field(default_factory=lambda: [8.0])
    gamma_grid: list = field(default_factory=lambda: [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    replications: int = 10_000
    seed: int = 0
    max_steps: Optional[int] = None
    workers: int = 1
    zn_cap: int = 15
    markov_gamma: float = 0.5
    mass_sequence: list = field(default_factory=lambda: [1.0, 0.75, 0.5625, 0.421875])
    mean_neg_replications: int = 100_000

    def __post_init__(self):
        if self.replications < 100:
            raise ParameterError("replications must be >= 100")
        grid = [float(g) for g in self.gamma_grid]
        if any(not 0.0 < g <= 1.0 for g in grid) or grid != sorted(grid):
            raise ParameterError("gamma grid must be sorted ascending within (0, 1]")
        self.gamma_grid = grid
        self.r_max_values = [float(r) for r in self.r_max_values]
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")

    def target(self, r_max: float):
        return make_family(self.family, r_max=r_max, **self.family_params)


@dataclass
class BoundRow:
    experiment: str
    family: str
    r_max: float
    quantity: str
    index_name: str = ""
    index: float = math.nan
    count: int = 0
    mean: float = math.nan
    se: float = math.nan
    lower_bound: Optional[float] = None
    bound: Optional[float] = None
    violation: bool = False
    informational: bool = False
    aux: str = ""

    @property
    def slack(self) -> Optional[float]:
        return None if self.bound is None else self.bound - self.mean

    def as_csv(self) -> list[str]:
        vals = asdict(self)
        vals["slack"] = self.slack
        return [_cell(vals[c]) for c in CSV_COLUMNS]


@dataclass
class BoundReport:
    """Rows of one experiment plus censoring counts and run metadata."""

    experiment: str
    rows: list = field(default_factory=list)
    censoring: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def violations(self) -> list:
        return [r for r in self.rows if r.violation]

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(CSV_COLUMNS)
        for row in self.rows:
            out.writerow(row.as_csv())
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "experiment": self.experiment,
            "rows": len(self.rows),
            "violations": [f"{r.quantity}@{r.index_name}={_cell(r.index)} (r_max={_cell(r.r_max)})" for r in self.violations],
            "censoring": self.censoring,
            "metadata": self.metadata,
        }


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else format(float(v), ".17g")
    return str(v)


def _mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _upper_violation(mean, se, bound) -> bool:
    se = 0.0 if math.isnan(se) else se
    return bool(mean - SIGMAS * se > bound)


def _lower_violation(mean, se, bound) -> bool:
    se = 0.0 if math.isnan(se) else se
    return bool(mean + SIGMAS * se < bound)


def wilson_interval(successes: int, n: int, z: float = SIGMAS) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def n0_constant(w: float) -> int:
    """``ceil(log w / log(3/4)) + 1``."""
    return math.ceil(math.log(w) / math.log(0.75)) + 1


def k0_constant(gamma: float, w: float) -> int:
    """``ceil((log(1/gamma) + log(1/w) + 2) / log(4/3))``."""
    return math.ceil((-math.log(gamma) - math.log(w) + 2.0) / math.log(4.0 / 3.0))


_BATCH_CACHE: dict = {}


def clear_batch_cache() -> None:
    _BATCH_CACHE.clear()


def _batch(cfg: ExperimentConfig, k: int):
    """Shared sampler replicas for the ``k``-th ``r_max`` of ``cfg``."""
    key = (
        cfg.family, tuple(sorted(cfg.family_params.items())), cfg.r_max_values[k], k,
        cfg.seed, cfg.replications, tuple(cfg.gamma_grid), cfg.zn_cap, cfg.max_steps,
    )
    if key not in _BATCH_CACHE:
        if len(_BATCH_CACHE) >= 4:
            _BATCH_CACHE.pop(next(iter(_BATCH_CACHE)))
        target = cfg.target(cfg.r_max_values[k])
        res = run_batch(
            target, cfg.replications, RandomStream(cfg.seed).split(k), cfg.gamma_grid,
            max_steps=cfg.max_steps, zn_cap=cfg.zn_cap, workers=cfg.workers,
        )
        _BATCH_CACHE[key] = (target, res)
    return _BATCH_CACHE[key]


def _meta(start) -> dict:
    return {"backend": BACKEND, "wall_seconds": round(time.perf_counter() - start, 3)}


def experiment_zn(cfg: ExperimentConfig) -> BoundReport:
    """Interval masses ``Z_n``: ``(1/2)^(n-1) <= E[Z_n] <= (3/4)^(n-1)``.

    The checked rows follow the bound process past termination (the quantity
    the inequality is about). Rows with masses frozen at termination are
    reported as informational.
    """
    start = time.perf_counter()
    rep = BoundReport("zn")
    for k, r_max in enumerate(cfg.r_max_values):
        target, res = _batch(cfg, k)
        ok = ~res.degenerate
        rep.censoring[f"r_max={_cell(r_max)}:degenerate"] = int((~ok).sum())
        frozen = res.frozen_Z()
        for n in range(1, cfg.zn_cap + 1):
            mean, se = _mean_se(res.Z[ok, n - 1])
            lo, hi = 0.5 ** (n - 1), 0.75 ** (n - 1)
            active = int((res.T[ok] >= n).sum())
            rep.rows.append(BoundRow(
                "zn", target.name, r_max, "E[Z_n]", "n", n, int(ok.sum()), mean, se, lo, hi,
                violation=_upper_violation(mean, se, hi) or _lower_violation(mean, se, lo),
                aux=f"active={active}",
            ))
            fmean, fse = _mean_se(frozen[ok, n - 1])
            rep.rows.append(BoundRow(
                "zn", target.name, r_max, "E[Z_n] frozen", "n", n, int(ok.sum()), fmean, fse, lo, hi,
                informational=True, aux=f"active={active}",
            ))
    rep.metadata = _meta(start)
    return rep


def experiment_markov_tail(cfg: ExperimentConfig, gamma: Optional[float] = None) -> BoundReport:
    """Exceedance ``P(Z_n >= w(gamma)) <= (3/4)^(n-1) / w(gamma)``."""
    start = time.perf_counter()
    gamma = cfg.markov_gamma if gamma is None else gamma
    rep = BoundReport("markov_tail")
    for k, r_max in enumerate(cfg.r_max_values):
        target, res = _batch(cfg, k)
        ok = ~res.degenerate
        w = width(target, gamma)
        z = res.Z[ok]
        for n in range(1, cfg.zn_cap + 1):
            hits = int((z[:, n - 1] >= w).sum())
            total = z.shape[0]
            p = hits / total
            lo, hi = wilson_interval(hits, total)
            bound = 0.75 ** (n - 1) / w if w > 0 else math.inf
            vacuous = bound >= 1.0
            rep.rows.append(BoundRow(
                "markov_tail", target.name, r_max, "P(Z_n >= w)", "n", n, total, p,
                math.sqrt(p * (1 - p) / total), None, bound,
                violation=(not vacuous) and lo > bound,
                informational=vacuous,
                aux=f"gamma={_cell(gamma)};w={_cell(w)};wilson=[{_cell(lo)},{_cell(hi)}]" + (";vacuous" if vacuous else ""),
            ))
    rep.metadata = _meta(start)
    return rep


def _width_rows(rep, exp, target, r_max, gamma, w_num):
    # closed-form cross-check for the worst-case family
    if isinstance(target, WorstCaseTarget):
        w_closed = worst_case_width(r_max)(gamma)
        rep.rows.append(BoundRow(
            exp, target.name, r_max, "w numeric vs closed", "gamma", gamma, 1, w_num, 0.0, None, w_closed,
            violation=abs(w_num - w_closed) > 1e-6,
        ))


def experiment_N(cfg: ExperimentConfig) -> BoundReport:
    """Hitting times: ``E[N(gamma)] <= alpha log(1/w(gamma)) + 6``.

    Means use runs that reached ``S(gamma)`` before terminating; runs that did
    not are counted in ``censoring`` and in an informational row that treats
    them as hitting at ``T``.
    """
    start = time.perf_counter()
    rep = BoundReport("N")
    for k, r_max in enumerate(cfg.r_max_values):
        target, res = _batch(cfg, k)
        ok = ~res.degenerate
        rep.censoring[f"r_max={_cell(r_max)}:degenerate"] = int((~ok).sum())
        for j, gamma in enumerate(cfg.gamma_grid):
            w = width(target, gamma)
            bound = ALPHA * -math.log(w) + 6.0 if w > 0 else math.inf
            n_col = res.N[ok, j]
            hit = n_col > 0
            rep.censoring[f"r_max={_cell(r_max)}:gamma={_cell(gamma)}:not_hit"] = int((~hit).sum())
            mean, se = _mean_se(n_col[hit])
            rep.rows.append(BoundRow(
                "N", target.name, r_max, "E[N(gamma)]", "gamma", gamma, int(hit.sum()), mean, se, None, bound,
                violation=_upper_violation(mean, se, bound),
                aux=f"w={_cell(w)};N0={n0_constant(w) if w > 0 else ''}",
            ))
            cens = np.where(hit, n_col, res.T[ok])
            cmean, cse = _mean_se(cens)
            rep.rows.append(BoundRow(
                "N", target.name, r_max, "E[N(gamma)] censored at T", "gamma", gamma, int(ok.sum()), cmean, cse,
                None, bound, informational=True,
            ))
            _width_rows(rep, "N", target, r_max, gamma, w)
    rep.metadata = _meta(start)
    return rep


def experiment_K(cfg: ExperimentConfig) -> BoundReport:
    """Residual steps: ``E[K(gamma)] <= alpha (log(1/gamma) + log(1/w(gamma))) + 16``."""
    start = time.perf_counter()
    rep = BoundReport("K")
    for k, r_max in enumerate(cfg.r_max_values):
        target, res = _batch(cfg, k)
        ok = ~res.degenerate
        K = res.K
        for j, gamma in enumerate(cfg.gamma_grid):
            w = width(target, gamma)
            bound = ALPHA * (-math.log(gamma) - math.log(w)) + 16.0 if w > 0 else math.inf
            hit = ok & (res.N[:, j] > 0)
            rep.censoring[f"r_max={_cell(r_max)}:gamma={_cell(gamma)}:not_hit"] = int((ok & ~hit).sum())
            mean, se = _mean_se(K[hit, j])
            rep.rows.append(BoundRow(
                "K", target.name, r_max, "E[K(gamma)]", "gamma", gamma, int(hit.sum()), mean, se, None, bound,
                violation=_upper_violation(mean, se, bound),
                aux=f"w={_cell(w)};K0={k0_constant(gamma, w) if w > 0 else ''}",
            ))
    rep.metadata = _meta(start)
    return rep


def runtime_bound(r_max: float) -> float:
    """``4 alpha log r_max + 4 alpha log 2 + 22`` , the checked runtime bound."""
    return 4.0 * ALPHA * math.log(r_max) + 4.0 * ALPHA * math.log(2.0) + 22.0


def tight_runtime_bound(r_max: float) -> float:
    """``2 alpha log r_max + 2 alpha log 2 + 22`` , a tighter variant reported for information."""
    return 2.0 * ALPHA * math.log(r_max) + 2.0 * ALPHA * math.log(2.0) + 22.0


def _slope(x, y, se):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    se = np.nan_to_num(np.asarray(se, float))
    xc = x - x.mean()
    sxx = float((xc * xc).sum())
    slope = float((xc * (y - y.mean())).sum() / sxx)
    slope_se = float(math.sqrt(((xc / sxx) ** 2 * se**2).sum()))
    return slope, slope_se


def experiment_T(cfg: ExperimentConfig) -> BoundReport:
    """Total steps against the runtime bounds, per ``r_max``, and the slope in ``log r_max``."""
    start = time.perf_counter()
    rep = BoundReport("T")
    xs, ys, ses = [], [], []
    for k, r_max in enumerate(cfg.r_max_values):
        target, res = _batch(cfg, k)
        ok = ~res.degenerate
        rep.censoring[f"r_max={_cell(r_max)}:degenerate"] = int((~ok).sum())
        mean, se = _mean_se(res.T[ok])
        bound = runtime_bound(r_max)
        rep.rows.append(BoundRow(
            "T", target.name, r_max, "E[T]", "r_max", r_max, int(ok.sum()), mean, se, None, bound,
            violation=_upper_violation(mean, se, bound),
        ))
        rep.rows.append(BoundRow(
            "T", target.name, r_max, "E[T] vs 2 alpha constant", "r_max", r_max, int(ok.sum()), mean, se, None,
            tight_runtime_bound(r_max), informational=True,
        ))
        w = numeric_width(target)
        g_star, h_star = inf_h(w)
        cor = 2.0 * ALPHA * h_star + 22.0
        rep.rows.append(BoundRow(
            "T", target.name, r_max, "E[T] vs 2 alpha inf h + 22", "gamma", g_star, int(ok.sum()), mean, se,
            None, cor, violation=_upper_violation(mean, se, cor), aux=f"h={_cell(h_star)}",
        ))
        wg = w(g_star)
        if wg > 0:
            tight = ALPHA * (-2.0 * math.log(wg) - math.log(g_star)) + 22.0
            rep.rows.append(BoundRow(
                "T", target.name, r_max, "E[T] vs N+K bound sum", "gamma", g_star, int(ok.sum()), mean, se,
                None, tight, informational=True,
            ))
        xs.append(math.log(r_max))
        ys.append(mean)
        ses.append(se)
    if len(xs) >= 2 and len(set(xs)) >= 2:
        slope, slope_se = _slope(xs, ys, ses)
        rep.rows.append(BoundRow(
            "T", cfg.family, math.nan, "slope dE[T]/dlog r_max", "", math.nan, len(xs), slope, slope_se, None,
            4.0 * ALPHA, violation=_upper_violation(slope, slope_se, 4.0 * ALPHA),
        ))
    rep.metadata = _meta(start)
    return rep


def experiment_mean_neg_gumbel(mass_sequence: Sequence[float], R: int, seed: int) -> BoundReport:
    """``E[exp(-G_N)] = sum_n 1/P(B_n)`` for a fixed mass sequence.

    The chain is simulated with both truncated-Gumbel samplers; their final
    values are also compared by a two-sample KS test.
    """
    start = time.perf_counter()
    masses = [float(m) for m in mass_sequence]
    if not masses:
        raise ParameterError("mass sequence must be non-empty")
    if any(not 0.0 < m <= 1.0 for m in masses):
        raise ParameterError("masses must lie in (0, 1]")
    target = sum(1.0 / m for m in masses)
    logs = [math.log(m) for m in masses]
    rep = BoundReport("mean_neg_gumbel")
    root = RandomStream(seed)
    finals = {}
    for j, sampler in enumerate(("exp", "invcdf")):
        g = tg_chain(logs, root.split(j), R, sampler)
        finals[sampler] = g[:, -1]
        mean, se = _mean_se(np.exp(-g[:, -1]))
        rep.rows.append(BoundRow(
            "mean_neg_gumbel", sampler, math.nan, "E[exp(-G_N)]", "N", len(masses), R, mean, se, target, target,
            violation=_upper_violation(mean, se, target) or _lower_violation(mean, se, target),
        ))
        strictly = bool(np.all(np.diff(g, axis=1) < 0.0))
        rep.rows.append(BoundRow(
            "mean_neg_gumbel", sampler, math.nan, "chain strictly decreasing", "N", len(masses), R,
            float(strictly), 0.0, 1.0, None, violation=not strictly,
        ))
    ks = float(stats.ks_2samp(finals["exp"], finals["invcdf"]).statistic)
    crit = ks_two_sample_critical_value(R, R)
    rep.rows.append(BoundRow(
        "mean_neg_gumbel", "exp-vs-invcdf", math.nan, "KS(G_N)", "N", len(masses), R, ks, 0.0, None, crit,
        violation=ks > crit,
    ))
    rep.metadata = _meta(start)
    return rep


def singlelog_gap(gamma: float, w: float) -> float:
    """``log(N0 + 4) - (log(1/w) + 2)``; the inequality holds when this is <= 0."""
    return math.log(n0_constant(w) + 4) - (-math.log(w) + 2.0)


def experiment_singlelog(num: int = 2000) -> BoundReport:
    """Numerical check of ``log(1/g) + log(N0 + 4) <= log(1/g) + log(1/w) + 2`` for w in [1e-9, 1]."""
    ws = np.logspace(-9.0, 0.0, num)
    gaps = [singlelog_gap(1.0, float(w)) for w in ws]
    worst = int(np.argmax(gaps))
    rep = BoundReport("singlelog")
    rep.rows.append(BoundRow(
        "singlelog", "", math.nan, "max log(N0+4) - log(1/w) - 2", "w", float(ws[worst]), num, gaps[worst], 0.0,
        None, 0.0, violation=gaps[worst] > 0.0,
    ))
    return rep


def reports_json(reports, cfg: Optional[ExperimentConfig] = None) -> str:
    data = {
        "config": None if cfg is None else asdict(cfg),
        "seed": None if cfg is None else cfg.seed,
        "alpha": ALPHA,
        "violation": any(r.violations for r in reports),
        "experiments": [r.summary() for r in reports],
    }
    return json.dumps(data, indent=2, default=str)
