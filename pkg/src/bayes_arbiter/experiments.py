"""Seed-pinned replication experiments with CSV tables and SVG ribbons.

Four bundled experiments:

* fig1    - consistency sweep: spread of log BF10 across replicas drawn
            under the point null and under the alternative's prior
            predictive, per sample size.
* fig2    - mixture-weight concentration: posterior mean/median of the
            weight over replicated Poisson datasets, per Beta(a0, a0)
            prior and sample size.
* fig3    - fig2 plus the posterior probability of the Poisson model from
            the shared-improper Bayes factor (and the printed-formula
            column for comparison; their gap is logged, never asserted).
* lindley - log BF01 against n at a fixed test statistic.

Every experiment is a pure function of (config, seed): identical inputs
produce byte-identical CSV/SVG artifacts, whether run serially or on a
thread pool (results are buffered by task index before aggregation).
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import CountDataset
from .evidence import (
    NormalSummary,
    log_bf01_lindley,
    log_bf10_normal,
    log_bf12_printed,
    log_bf12_shared_improper,
    posterior_prob_from_log_bf,
)
from .mixture import McmcConfig, MixtureSpec, run_gibbs
from .rng import Rng, RngSeed

logger = logging.getLogger(__name__)

EXPERIMENTS = ("fig1", "fig2", "fig3", "lindley")

CSV_HEADERS = {
    "fig1": ("experiment", "hypothesis", "n", "replica", "log_bf10"),
    "fig2": ("a0", "n", "replica", "post_mean_alpha", "post_median_alpha"),
    "fig3": (
        "a0",
        "n",
        "replica",
        "post_mean_alpha",
        "post_median_alpha",
        "post_prob_m1_shared",
        "post_prob_m1_printed",
    ),
    "lindley": ("t", "n", "log_bf01"),
}

# stream-derivation labels (RngSeed.child path roots)
_PATH_FIG1 = 1
_PATH_MIX_DATA = 2
_PATH_MIX_CHAIN = 3


def _fmt(v) -> str:
    return f"{v:.10g}" if isinstance(v, float) else str(v)


def worker_count() -> int:
    """Worker cap from BAYES_ARBITER_THREADS; 0 or unset means auto."""
    raw = os.environ.get("BAYES_ARBITER_THREADS", "0")
    try:
        k = int(raw)
    except ValueError:
        k = 0
    if k <= 0:
        return min(os.cpu_count() or 1, 4)
    return k


def _map_indexed(fn, tasks: list) -> list:
    """Order-preserving map over tasks, threaded when allowed."""
    workers = worker_count()
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_grid: tuple[int, ...]
    replicas: int = 20
    a0_list: tuple[float, ...] = (0.1, 0.5, 1.0)
    lambda_true: float = 4.0
    mcmc: McmcConfig = McmcConfig()
    seed: RngSeed = RngSeed(0)
    output_dir: Path | None = None
    ribbon_quantiles: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    t: float = 1.96

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if len(self.n_grid) == 0 or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be non-empty and strictly ascending")
        if any(n < 1 for n in self.n_grid):
            raise ValueError("n_grid entries must be positive")
        if self.replicas < 1:
            raise ValueError("replicas must be at least 1")
        if any(a <= 0.0 for a in self.a0_list):
            raise ValueError("a0 values must be positive")
        if self.lambda_true <= 0.0:
            raise ValueError("lambda_true must be positive")
        if self.t < 0.0:
            raise ValueError("t must be non-negative")
        qs = self.ribbon_quantiles
        if len(qs) < 2 or any(b <= a for a, b in zip(qs, qs[1:])) or qs[0] < 0 or qs[-1] > 1:
            raise ValueError("ribbon_quantiles must be ascending within [0, 1]")


def desk_scale_config(experiment: str, seed: RngSeed, **overrides) -> ExperimentConfig:
    """Default desk-scale settings per experiment (full scale is a flag away)."""
    if experiment == "fig1":
        base = dict(n_grid=(10, 100, 1000), replicas=250)
    elif experiment in ("fig2", "fig3"):
        base = dict(n_grid=(1, 2, 5, 10, 20, 50, 100, 200, 500, 1000), replicas=20)
    else:
        base = dict(n_grid=(10, 100, 1000, 10_000, 100_000, 1_000_000), replicas=1)
    base.update(overrides)
    return ExperimentConfig(experiment=experiment, seed=seed, **base)


@dataclass(frozen=True)
class RibbonRow:
    condition: str
    series: str
    n: int
    quantile: str
    value: float


@dataclass(frozen=True)
class RibbonTable:
    rows: tuple[RibbonRow, ...]

    def conditions(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r.condition, None)
        return list(seen)

    def series(self, condition: str) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rows:
            if r.condition == condition:
                seen.setdefault(r.series, None)
        return list(seen)

    def quantile_values(self, condition: str, series: str, quantile: str) -> list[tuple[int, float]]:
        out = [
            (r.n, r.value)
            for r in self.rows
            if r.condition == condition and r.series == series and r.quantile == quantile
        ]
        return sorted(out)


@dataclass(frozen=True)
class ExperimentResult:
    experiment: str
    table: RibbonTable
    csv_header: tuple[str, ...]
    csv_rows: tuple[tuple, ...]
    artifacts: tuple[Path, ...] = ()
    n_resimulated: int = 0


def _quantile_label(q: float) -> str:
    if q == 0.0:
        return "min"
    if q == 1.0:
        return "max"
    return f"q{int(round(q * 100))}"


def _ribbon_rows(condition: str, series: str, n: int, samples, quantiles) -> list[RibbonRow]:
    arr = np.asarray(samples, dtype=float)
    return [
        RibbonRow(condition, series, n, _quantile_label(q), float(np.quantile(arr, q)))
        for q in quantiles
    ]


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _ribbon_svg_for_condition(config, table: RibbonTable, condition: str, title: str, y_label: str) -> str:
    from .svg import Band, Line, ribbon_plot_svg

    qs = config.ribbon_quantiles
    lo_label, hi_label = _quantile_label(qs[0]), _quantile_label(qs[-1])
    palette = ("#87ceeb", "#d0d0d0", "#e88080", "#a0d890")
    line_colors = ("#1f3a5f", "#555555", "#8c1f1f", "#2f6f2f")
    bands, lines = [], []
    xs: list[int] = []
    for i, series in enumerate(table.series(condition)):
        lo = table.quantile_values(condition, series, lo_label)
        hi = table.quantile_values(condition, series, hi_label)
        xs = [n for n, _ in lo]
        bands.append(
            Band(
                label=f"{series} {lo_label}-{hi_label}",
                low=tuple(v for _, v in lo),
                high=tuple(v for _, v in hi),
                color=palette[i % len(palette)],
            )
        )
        mid = table.quantile_values(condition, series, "q50")
        if mid:
            lines.append(
                Line(
                    label=f"{series} q50",
                    values=tuple(v for _, v in mid),
                    color=line_colors[i % len(line_colors)],
                    dasharray="" if i == 0 else "5,3",
                )
            )
    return ribbon_plot_svg(xs, bands, lines, title=title, y_label=y_label)


# ----------------------------------------------------------------------
# fig1: Bayes factor consistency sweep


def run_fig1(config: ExperimentConfig) -> ExperimentResult:
    """Spread of log BF10 under both hypotheses across replicated means.

    Null replicas draw xbar ~ N(0, 1/n); alternative replicas draw
    mu ~ N(0,1) then xbar ~ N(mu, 1/n) (the prior predictive).
    """
    if config.experiment != "fig1":
        raise ValueError("config.experiment must be 'fig1'")

    def one_cell(task):
        hyp_idx, n_idx = task
        n = config.n_grid[n_idx]
        out = np.empty(config.replicas)
        for r in range(config.replicas):
            rng = Rng(config.seed.child(_PATH_FIG1, hyp_idx, n_idx, r))
            if hyp_idx == 0:
                xbar = rng.normal(0.0, 1.0 / math.sqrt(n))
            else:
                mu = rng.normal()
                xbar = rng.normal(mu, 1.0 / math.sqrt(n))
            out[r] = log_bf10_normal(NormalSummary(n, xbar)).log_bf
        return out

    tasks = [(h, i) for h in (0, 1) for i in range(len(config.n_grid))]
    cells = _map_indexed(one_cell, tasks)

    csv_rows: list[tuple] = []
    ribbon: list[RibbonRow] = []
    for (hyp_idx, n_idx), values in zip(tasks, cells):
        hyp = "H0" if hyp_idx == 0 else "H1"
        n = config.n_grid[n_idx]
        for r, v in enumerate(values):
            csv_rows.append(("fig1", hyp, n, r, float(v)))
        ribbon.extend(_ribbon_rows(hyp, "log_bf10", n, values, config.ribbon_quantiles))

    table = RibbonTable(tuple(ribbon))
    artifacts = _emit(config, table, csv_rows, y_label="log BF10")
    return ExperimentResult("fig1", table, CSV_HEADERS["fig1"], tuple(csv_rows), artifacts)


# ----------------------------------------------------------------------
# fig2 / fig3: mixture-weight concentration


@dataclass(frozen=True)
class _MixOutcome:
    a0: float
    n: int
    replica: int
    post_mean: float
    post_median: float
    values: tuple[int, ...] = field(repr=False, default=())
    attempts: int = 0


def _mixture_replica(config: ExperimentConfig, task) -> _MixOutcome:
    a0_idx, n_idx, replica = task
    a0 = config.a0_list[a0_idx]
    n = config.n_grid[n_idx]
    attempt = 0
    while True:
        data_rng = Rng(config.seed.child(_PATH_MIX_DATA, a0_idx, n_idx, replica, attempt))
        values = data_rng.poisson(config.lambda_true, size=n)
        if values.sum() >= 1:
            break
        attempt += 1
    data = CountDataset(values)
    chain = run_gibbs(
        data,
        MixtureSpec(a0),
        config.mcmc,
        config.seed.child(_PATH_MIX_CHAIN, a0_idx, n_idx, replica, attempt),
    )
    return _MixOutcome(
        a0=a0,
        n=n,
        replica=replica,
        post_mean=float(chain.alpha_draws.mean()),
        post_median=float(np.median(chain.alpha_draws)),
        values=tuple(int(v) for v in values),
        attempts=attempt,
    )


def _run_mixture_sweep(config: ExperimentConfig) -> list[_MixOutcome]:
    tasks = [
        (a, i, r)
        for a in range(len(config.a0_list))
        for i in range(len(config.n_grid))
        for r in range(config.replicas)
    ]
    return _map_indexed(lambda t: _mixture_replica(config, t), tasks)


def _mixture_ribbons(config, outcomes, series_of) -> list[RibbonRow]:
    rows: list[RibbonRow] = []
    for a0 in config.a0_list:
        cond = f"a0_{a0:.10g}"
        for n in config.n_grid:
            cell = [o for o in outcomes if o.a0 == a0 and o.n == n]
            for series, extract in series_of.items():
                rows.extend(
                    _ribbon_rows(cond, series, n, [extract(o) for o in cell], config.ribbon_quantiles)
                )
    return rows


def run_fig2(config: ExperimentConfig) -> ExperimentResult:
    """Posterior mean/median of the mixture weight over Poisson replicas."""
    if config.experiment != "fig2":
        raise ValueError("config.experiment must be 'fig2'")
    outcomes = _run_mixture_sweep(config)
    csv_rows = [
        (o.a0, o.n, o.replica, o.post_mean, o.post_median) for o in outcomes
    ]
    ribbon = _mixture_ribbons(
        config,
        outcomes,
        {
            "post_mean_alpha": lambda o: o.post_mean,
            "post_median_alpha": lambda o: o.post_median,
        },
    )
    table = RibbonTable(tuple(ribbon))
    artifacts = _emit(config, table, csv_rows, y_label="mixture weight")
    return ExperimentResult(
        "fig2",
        table,
        CSV_HEADERS["fig2"],
        tuple(csv_rows),
        artifacts,
        n_resimulated=sum(o.attempts for o in outcomes),
    )


def run_fig3(config: ExperimentConfig) -> ExperimentResult:
    """fig2 columns plus the posterior probability of the Poisson model.

    The shared-improper route is the comparison column; the printed
    formula is emitted alongside and its divergence logged.
    """
    if config.experiment != "fig3":
        raise ValueError("config.experiment must be 'fig3'")
    outcomes = _run_mixture_sweep(config)

    csv_rows = []
    gaps = []
    prob_shared: dict[tuple[float, int], list[float]] = {}
    prob_printed: dict[tuple[float, int], list[float]] = {}
    for o in outcomes:
        data = CountDataset(np.array(o.values))
        shared = log_bf12_shared_improper(data).log_bf
        printed = log_bf12_printed(data).log_bf
        p_shared = posterior_prob_from_log_bf(shared)
        p_printed = posterior_prob_from_log_bf(printed)
        gaps.append(printed - shared)
        prob_shared.setdefault((o.a0, o.n), []).append(p_shared)
        prob_printed.setdefault((o.a0, o.n), []).append(p_printed)
        csv_rows.append(
            (o.a0, o.n, o.replica, o.post_mean, o.post_median, p_shared, p_printed)
        )

    gaps_arr = np.asarray(gaps)
    logger.info(
        "printed-formula vs shared-improper log BF12 gap over %d replicas: "
        "median %.6g, min %.6g, max %.6g (columns emitted side by side)",
        gaps_arr.size,
        float(np.median(gaps_arr)),
        float(gaps_arr.min()),
        float(gaps_arr.max()),
    )

    ribbon = _mixture_ribbons(
        config,
        outcomes,
        {
            "post_mean_alpha": lambda o: o.post_mean,
            "post_median_alpha": lambda o: o.post_median,
        },
    )
    for (a0, n), vals in prob_shared.items():
        ribbon.extend(
            _ribbon_rows(f"a0_{a0:.10g}", "post_prob_m1_shared", n, vals, config.ribbon_quantiles)
        )
    for (a0, n), vals in prob_printed.items():
        ribbon.extend(
            _ribbon_rows(f"a0_{a0:.10g}", "post_prob_m1_printed", n, vals, config.ribbon_quantiles)
        )
    table = RibbonTable(tuple(ribbon))
    artifacts = _emit(config, table, csv_rows, y_label="weight / model probability")
    return ExperimentResult(
        "fig3",
        table,
        CSV_HEADERS["fig3"],
        tuple(csv_rows),
        artifacts,
        n_resimulated=sum(o.attempts for o in outcomes),
    )


# ----------------------------------------------------------------------
# lindley: fixed test statistic against growing n


def run_lindley(
    t: float,
    n_grid,
    output_dir: Path | None = None,
) -> ExperimentResult:
    """log BF01 at a fixed test statistic across sample sizes."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    ns = [int(n) for n in n_grid]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
        raise ValueError("n_grid must be non-empty, positive, strictly ascending")
    csv_rows = [(float(t), n, log_bf01_lindley(n, t).log_bf) for n in ns]
    ribbon = tuple(
        RibbonRow(f"t_{t:.10g}", "log_bf01", n, "q50", v) for (_, n, v) in csv_rows
    )
    table = RibbonTable(ribbon)
    artifacts: tuple[Path, ...] = ()
    if output_dir is not None:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        csv_path = output_dir / "lindley.csv"
        _write_csv(csv_path, CSV_HEADERS["lindley"], csv_rows)
        from .svg import Line, ribbon_plot_svg

        svg_path = output_dir / f"lindley_t_{t:.10g}.svg"
        _write_text(
            svg_path,
            ribbon_plot_svg(
                ns,
                bands=[],
                lines=[Line("log_bf01", tuple(v for _, _, v in csv_rows))],
                title=f"log BF01 at fixed t = {t:.10g}",
                y_label="log BF01",
            ),
        )
        artifacts = (csv_path, svg_path)
    return ExperimentResult("lindley", table, CSV_HEADERS["lindley"], tuple(csv_rows), artifacts)


# ----------------------------------------------------------------------
# artifact emission


def _emit(config: ExperimentConfig, table: RibbonTable, csv_rows, y_label: str) -> tuple[Path, ...]:
    if config.output_dir is None:
        return ()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    csv_path = out / f"{config.experiment}.csv"
    _write_csv(csv_path, CSV_HEADERS[config.experiment], csv_rows)
    paths.append(csv_path)
    for cond in table.conditions():
        svg_path = out / f"{config.experiment}_{cond}.svg"
        _write_text(
            svg_path,
            _ribbon_svg_for_condition(
                config, table, cond, title=f"{config.experiment} {cond}", y_label=y_label
            ),
        )
        paths.append(svg_path)
    return tuple(paths)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Dispatch on config.experiment."""
    if config.experiment == "fig1":
        return run_fig1(config)
    if config.experiment == "fig2":
        return run_fig2(config)
    if config.experiment == "fig3":
        return run_fig3(config)
    return run_lindley(config.t, config.n_grid, config.output_dir)
