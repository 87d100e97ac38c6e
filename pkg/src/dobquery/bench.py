"""Experiment harness: estimated-vs-actual cost correlation and the
optimal/worst and optimal/median ordering ratios.

Every ordering of every query gets an estimate from the cost model and
an actual cost from execution; the actual cost of a run is the inferred
fact count plus the extensional access count. Reports are deterministic
under fixed seeds; wall-clock times are carried in the in-memory report
for diagnostics but kept out of the CSV rows so the files are
reproducible bit for bit.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

from .costmodel import JoinStrategy, default_strategies
from .executor import execute
from .model import DobError
from .optimizer import exhaustive_orderings, optimize
from .stats import SamplingConfig, build_catalog


class BenchError(DobError):
    pass


@dataclass
class OrderingRow:
    base_id: str
    query_id: str
    ordering_index: int
    order: tuple[int, ...]
    estimated_cost: float
    actual_cost: int
    wall_clock: float = field(compare=False, default=0.0)


@dataclass
class RatioRow:
    base_id: str
    query_id: str
    optimal_cost: int
    worst_cost: int
    median_cost: int
    opt_worst_ratio: float
    opt_median_ratio: float


@dataclass
class ExperimentReport:
    rows: list[OrderingRow]
    correlation: float | None = None
    log_correlation: float | None = None
    ratios: list[RatioRow] = field(default_factory=list)

    @property
    def estimate_vector(self) -> list[float]:
        return [r.estimated_cost for r in self.rows]

    @property
    def actual_vector(self) -> list[float]:
        return [float(r.actual_cost) for r in self.rows]


def pearson(xs, ys) -> float | None:
    """Sample Pearson correlation; None when either vector is constant."""
    xs = list(xs)
    ys = list(ys)
    if len(xs) != len(ys) or len(xs) < 2:
        raise BenchError("correlation needs two equal-length vectors")
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def _median_low(values) -> int:
    """Lower middle element of an even-length list (deterministic)."""
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def _evaluate_orderings(base, query, catalog, strategies):
    """(plan, estimate, actual, wall_clock) per ordering of one query."""
    out = []
    for plan, estimate in exhaustive_orderings(query, catalog, strategies):
        t0 = time.perf_counter()
        report = execute(base, plan)
        elapsed = time.perf_counter() - t0
        out.append((plan, estimate, report.actual_cost, elapsed))
    return out


def _catalogs_for(bases, config, catalogs):
    if catalogs is not None:
        return list(catalogs)
    return [build_catalog(base, config) for base in bases]


def run_correlation(
    bases,
    queries,
    config: SamplingConfig,
    strategies=None,
    *,
    catalogs=None,
) -> ExperimentReport:
    """Estimated vs actual cost over every ordering of every query.

    `queries[i]` is the workload for `bases[i]`. A constant estimate or
    actual vector makes the correlation undefined (reported as None).
    """
    strategies = tuple(strategies) if strategies is not None else default_strategies()
    cats = _catalogs_for(bases, config, catalogs)
    rows: list[OrderingRow] = []
    for b, (base, catalog) in enumerate(zip(bases, cats)):
        for q, query in enumerate(queries[b]):
            evaluated = _evaluate_orderings(base, query, catalog, strategies)
            for i, (plan, estimate, actual, elapsed) in enumerate(evaluated):
                rows.append(
                    OrderingRow(
                        base_id=f"base{b}",
                        query_id=f"base{b}/{query.head.predicate}",
                        ordering_index=i,
                        order=plan.order,
                        estimated_cost=estimate.cost,
                        actual_cost=actual,
                        wall_clock=elapsed,
                    )
                )
    report = ExperimentReport(rows)
    report.correlation = pearson(report.estimate_vector, report.actual_vector)
    # Costs span orders of magnitude; the log-scale correlation is the
    # robust companion number (scatter plots of these pairs are log-log).
    report.log_correlation = pearson(
        [math.log1p(x) for x in report.estimate_vector],
        [math.log1p(y) for y in report.actual_vector],
    )
    return report


def run_ratio(
    bases,
    queries,
    config: SamplingConfig,
    strategies=None,
    *,
    catalogs=None,
) -> ExperimentReport:
    """Optimizer plan cost against the worst and median ordering costs."""
    strategies = tuple(strategies) if strategies is not None else default_strategies()
    cats = _catalogs_for(bases, config, catalogs)
    rows: list[OrderingRow] = []
    ratios: list[RatioRow] = []
    for b, (base, catalog) in enumerate(zip(bases, cats)):
        for q, query in enumerate(queries[b]):
            evaluated = _evaluate_orderings(base, query, catalog, strategies)
            actuals = [actual for _p, _e, actual, _t in evaluated]
            qid = f"base{b}/{query.head.predicate}"
            for i, (plan, estimate, actual, elapsed) in enumerate(evaluated):
                rows.append(
                    OrderingRow(
                        base_id=f"base{b}",
                        query_id=qid,
                        ordering_index=i,
                        order=plan.order,
                        estimated_cost=estimate.cost,
                        actual_cost=actual,
                        wall_clock=elapsed,
                    )
                )
            chosen = optimize(query, catalog, strategies)
            optimal = execute(base, chosen).actual_cost
            worst = max(actuals)
            median = _median_low(actuals)
            ratios.append(
                RatioRow(
                    base_id=f"base{b}",
                    query_id=qid,
                    optimal_cost=optimal,
                    worst_cost=worst,
                    median_cost=median,
                    opt_worst_ratio=optimal / worst if worst else 1.0,
                    opt_median_ratio=optimal / median if median else 1.0,
                )
            )
    return ExperimentReport(rows, ratios=ratios)


def compare_strategy_sets(
    bases, queries, config: SamplingConfig, *, block_size: int = 32,
    catalogs=None,
) -> dict[str, float]:
    """Mean optimal/worst ratios of the nested-loop-only optimizer and the
    three-strategy optimizer against a common baseline.

    The baseline for both is the worst nested-loop ordering, so the
    comparison isolates what the larger strategy search space buys: a
    better chosen plan for the same query.
    """
    from .costmodel import JoinMethod

    nlj_only = (JoinStrategy(JoinMethod.NESTED_LOOP, block_size),)
    combined = default_strategies(block_size)
    cats = _catalogs_for(bases, config, catalogs)
    nlj_ratios: list[float] = []
    combined_ratios: list[float] = []
    for base, catalog, workload in zip(bases, cats, queries):
        for query in workload:
            evaluated = _evaluate_orderings(base, query, catalog, nlj_only)
            worst = max(actual for _p, _e, actual, _t in evaluated)
            opt_nlj = execute(base, optimize(query, catalog, nlj_only)).actual_cost
            opt_all = execute(base, optimize(query, catalog, combined)).actual_cost
            nlj_ratios.append(opt_nlj / worst if worst else 1.0)
            combined_ratios.append(opt_all / worst if worst else 1.0)
    return {
        "nlj_mean_ratio": sum(nlj_ratios) / len(nlj_ratios),
        "combined_mean_ratio": sum(combined_ratios) / len(combined_ratios),
    }


def write_correlation_csv(report: ExperimentReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["base", "query", "ordering_index", "ordering",
             "estimated_cost", "actual_cost"]
        )
        for r in report.rows:
            writer.writerow(
                [r.base_id, r.query_id, r.ordering_index,
                 " ".join(map(str, r.order)), repr(r.estimated_cost),
                 r.actual_cost]
            )


def write_ratio_csv(report: ExperimentReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["base", "query", "optimal_cost", "worst_cost", "median_cost",
             "opt_worst_ratio", "opt_median_ratio"]
        )
        for r in report.ratios:
            writer.writerow(
                [r.base_id, r.query_id, r.optimal_cost, r.worst_cost,
                 r.median_cost, repr(r.opt_worst_ratio),
                 repr(r.opt_median_ratio)]
            )
