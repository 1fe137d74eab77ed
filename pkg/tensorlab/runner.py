"""
Experiment runner

One handler per subcommand turns an ExperimentConfig into TrialRecords.
Independent trials run on a fixed-size thread pool and are merged in
trial order, so the report does not depend on ``--jobs``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Sequence, Tuple, TypeVar

import numpy as np

from tensorlab.config import get_settings
from tensorlab.errors import ContractViolationError, InstanceTooLargeError
from tensorlab.models import (
    ExperimentConfig,
    ExperimentReport,
    ReportSummary,
    SolverParams,
    Subcommand,
    TrialRecord,
    WalkKind,
)
from tensorlab.services import free_combinatorics as fc
from tensorlab.services import lps
from tensorlab.services.linalg import adjoint_closure, haar_family, random_psd
from tensorlab.services.logging import get_logger
from tensorlab.services.tensor_norms import (
    QuadraticForm,
    haagerup_check,
    min_tensor_norm,
    psd_ascent,
    szarek_moment,
)
from tensorlab.utils import PerformanceMonitor, stream_rng, timing_decorator

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

HandlerResult = Tuple[List[TrialRecord], Dict[str, float], Dict[str, Any]]

CROSS_VALIDATION_TOL = 1e-3
LPS_REGRESSION_MARGIN = 0.15


class ExperimentRunner:
    """Dispatches experiments and assembles their reports"""

    def __init__(self):
        self._handlers: Dict[Subcommand, Callable[[ExperimentConfig], HandlerResult]] = {
            Subcommand.NORM: self._run_norm,
            Subcommand.RANDCHECK: self._run_randcheck,
            Subcommand.SZAREK: self._run_szarek,
            Subcommand.WALKS: self._run_walks,
            Subcommand.ABSORB: self._run_absorb,
            Subcommand.LPS: self._run_lps,
            Subcommand.CN: self._run_cn,
        }

    @timing_decorator
    def run(self, config: ExperimentConfig) -> ExperimentReport:
        """
        Run one experiment

        Args:
            config: Validated configuration

        Returns:
            ExperimentReport; ``report.ok`` is False when a record broke
            its contract
        """
        logger.info("experiment_started", subcommand=config.subcommand.value, seed=config.seed,
                    trials=config.trials, jobs=config.jobs)

        records, bounds, extras = self._handlers[config.subcommand](config)
        summary = self._summarize(records, bounds)

        for record in records:
            if not record.passed:
                logger.error("contract_violation", subcommand=config.subcommand.value,
                             trial=record.trial, m=record.m, note=record.note)

        logger.info("experiment_finished", subcommand=config.subcommand.value,
                    records=summary.records, violations=len(summary.violations))
        return ExperimentReport(config=config, records=records, summary=summary, extras=extras)

    # ------------------------------------------------------------------
    # plumbing
    # ------------------------------------------------------------------

    def _map(self, fn: Callable[[T], R], items: Sequence[T], jobs: int) -> List[R]:
        """Ordered map over a bounded worker pool"""
        if jobs <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))

    def _trials(
        self, config: ExperimentConfig, fn: Callable[[int, np.random.Generator], List[TrialRecord]]
    ) -> List[TrialRecord]:
        """
        Run fn(trial, rng) for every trial on its own seed stream

        A ContractViolationError raised inside a trial marks that trial as
        failed without stopping the others.
        """

        def one(trial: int) -> List[TrialRecord]:
            rng = stream_rng(config.seed, trial)
            with PerformanceMonitor(f"{config.subcommand.value}[{trial}]") as monitor:
                try:
                    records = fn(trial, rng)
                except ContractViolationError as e:
                    logger.error("trial_failed", trial=trial, **e.to_dict())
                    records = [TrialRecord(trial=trial, seed_index=trial, passed=False, note=e.message)]
            if config.timings:
                elapsed = round(monitor.elapsed_ms, 3)
                records = [r.model_copy(update={"wall_ms": elapsed}) for r in records]
            return records

        merged: List[TrialRecord] = []
        for chunk in self._map(one, list(range(config.trials)), config.jobs):
            merged.extend(chunk)
        return merged

    @staticmethod
    def _solver_params(config: ExperimentConfig, rng: np.random.Generator) -> SolverParams:
        return SolverParams.from_settings(seed=int(rng.integers(2**63)), tol=config.tol)

    @staticmethod
    def _summarize(records: Iterable[TrialRecord], bounds: Dict[str, float]) -> ReportSummary:
        records = list(records)
        gaps = [r.gap for r in records if r.gap is not None]
        values = [r.value for r in records if r.value is not None]
        return ReportSummary(
            records=len(records),
            violations=sorted({r.trial for r in records if not r.passed}),
            min_gap=min(gaps) if gaps else None,
            max_gap=max(gaps) if gaps else None,
            mean_gap=math.fsum(gaps) / len(gaps) if gaps else None,
            min_value=min(values) if values else None,
            max_value=max(values) if values else None,
            bounds=bounds,
        )

    # ------------------------------------------------------------------
    # handlers
    # ------------------------------------------------------------------

    def _run_norm(self, config: ExperimentConfig) -> HandlerResult:
        tol = get_settings().CONTRACT_TOL
        lower = fc.free_norm(config.n)

        def trial_fn(trial: int, rng: np.random.Generator) -> List[TrialRecord]:
            family = haar_family(config.n, config.dim, rng)
            report = min_tensor_norm(QuadraticForm.of(family), self._solver_params(config, rng))
            notes = []
            if report.converged and report.gap < -tol:
                notes.append("value below 2 sqrt(n - 1)")
            if report.value > config.n + 1e-6:
                notes.append("value above n")
            return [TrialRecord(
                trial=trial, n=config.n, dim=config.dim, value=report.value, gap=report.gap,
                converged=report.converged, iterations=report.iterations, seed_index=trial,
                passed=not notes, note="; ".join(notes) or None,
            )]

        records = self._trials(config, trial_fn)
        return records, {"lower_2sqrt": lower, "upper_n": float(config.n)}, {}

    def _run_randcheck(self, config: ExperimentConfig) -> HandlerResult:
        tol = get_settings().CONTRACT_TOL
        dim2 = config.dim2 or config.dim

        def trial_fn(trial: int, rng: np.random.Generator) -> List[TrialRecord]:
            a = haar_family(config.n, config.dim, rng)
            b = haar_family(config.n, dim2, rng)
            params = self._solver_params(config, rng)
            check = haagerup_check(a, b, params)

            closed = adjoint_closure(a)
            ascent = psd_ascent(closed, seed=rng)
            norm = min_tensor_norm(QuadraticForm.of(closed), params)
            diff = abs(ascent.value - norm.value)

            notes = []
            if check.converged and check.slack < -tol:
                notes.append("negative Haagerup slack")
            if norm.converged and diff > CROSS_VALIDATION_TOL:
                notes.append("PSD form disagrees with the tensor norm")
            return [TrialRecord(
                trial=trial, n=config.n, dim=config.dim, value=check.lhs, gap=check.slack,
                converged=check.converged and norm.converged, iterations=check.iterations,
                seed_index=trial, passed=not notes, note="; ".join(notes) or None,
                details={"haagerup_rhs": check.rhs, "psd_sup": ascent.value,
                         "closure_norm": norm.value, "psd_abs_diff": diff},
            )]

        records = self._trials(config, trial_fn)
        return records, {"slack_floor": -tol}, {"dim2": dim2}

    def _run_szarek(self, config: ExperimentConfig) -> HandlerResult:

        def trial_fn(trial: int, rng: np.random.Generator) -> List[TrialRecord]:
            family = haar_family(config.n, config.dim, rng)
            t = random_psd(config.dim, rng)
            out = []
            previous_root = 0.0
            for m in range(1, config.m_max + 1):
                moment = szarek_moment(family, t, m)
                root = moment.root(m)
                notes = []
                if moment.lhs < moment.count * (1 - 1e-9) - 1e-6:
                    notes.append("moment below pattern count")
                if root < previous_root - 1e-9:
                    notes.append("moment roots decreased")
                previous_root = root
                out.append(TrialRecord(
                    trial=trial, n=config.n, dim=config.dim, m=m, value=moment.lhs,
                    gap=moment.lhs - moment.count, count=moment.count, seed_index=trial,
                    passed=not notes, note="; ".join(notes) or None,
                ))
            return out

        records = self._trials(config, trial_fn)
        return records, {"lower_2sqrt": fc.free_norm(config.n)}, {}

    def _run_walks(self, config: ExperimentConfig) -> HandlerResult:
        if config.kind is WalkKind.TREE:
            counts = fc.tree_return_counts(config.degree, config.steps)
            reference = fc.kesten_norm(config.degree)
            size = config.degree
        else:
            counts = fc.identity_pattern_counts(config.gens, config.steps)
            reference = fc.free_norm(config.gens)
            size = config.gens

        records = []
        for m, count in enumerate(counts):
            value = math.sqrt(fc.growth_estimate(counts[: m + 1])) if m >= 1 else None
            passed = count > 0 and (m == 0 or count >= counts[m - 1])
            records.append(TrialRecord(
                trial=m, n=size, m=m, value=value,
                gap=value - reference if value is not None else None,
                count=count, seed_index=0, passed=passed,
                note=None if passed else "counts not positive and nondecreasing",
            ))

        bounds = {"reference_norm": reference}
        if len(counts) >= 2:
            bounds["sqrt_ratio"] = math.sqrt(fc.growth_estimate(counts))
            bounds["sqrt_root"] = math.sqrt(fc.root_estimate(counts))
        return records, bounds, {"kind": config.kind.value}

    def _run_absorb(self, config: ExperimentConfig) -> HandlerResult:
        limit = get_settings().ABSORPTION_LIMIT
        if config.n ** (2 * config.m_max) > limit:
            raise InstanceTooLargeError(
                "absorption enumeration refused", {"n": config.n, "m_max": config.m_max, "limit": limit}
            )

        def trial_fn(trial: int, rng: np.random.Generator) -> List[TrialRecord]:
            family = haar_family(config.n, config.dim, rng)
            out = []
            for m in range(1, config.m_max + 1):
                result = fc.moment_absorption_check(family, m)
                out.append(TrialRecord(
                    trial=trial, n=config.n, dim=config.dim, m=m, value=result.moment,
                    gap=result.moment - result.count, count=result.count, seed_index=trial,
                    passed=result.holds, note=None if result.holds else "moment differs from count",
                ))
            return out

        return self._trials(config, trial_fn), {}, {}

    def _run_lps(self, config: ExperimentConfig) -> HandlerResult:
        tower = lps.build_lps_tower(config.prime, config.degree_cutoff)
        bound = fc.free_norm(tower.n)
        even = set(lps.so3_degrees(config.degree_cutoff))
        degrees = list(range(1, config.degree_cutoff + 1))
        values = self._map(lambda m: lps.rho_block_norm(tower, m), degrees, config.jobs)

        records = []
        running_max = 0.0
        for m, value in zip(degrees, values):
            running_max = max(running_max, value)
            passed = value <= bound + 1e-6
            notes = [] if m in even else ["spin block"]
            if not passed:
                notes.append("block norm above 2 sqrt(p)")
            records.append(TrialRecord(
                trial=m, n=tower.n, dim=m + 1, m=m, value=value, gap=value - bound,
                seed_index=0, passed=passed, note="; ".join(notes) or None,
            ))

        # the sup over m tends to 2 sqrt(p); a maximum far below it means the tower is wrong
        floor = bound - LPS_REGRESSION_MARGIN
        bounds = {"ramanujan_bound": bound, "running_max": running_max, "regression_floor": floor}
        extras = {
            "so3_degrees": sorted(even),
            "regression_held": running_max >= floor,
            "tower": lps.export_tower(tower),
        }
        return records, bounds, extras

    def _run_cn(self, config: ExperimentConfig) -> HandlerResult:
        cap = get_settings().CROSS_DEGREE_CUTOFF
        cutoff = min(config.degree_cutoff, cap)
        if cutoff < config.degree_cutoff:
            logger.warning("degree_cutoff_clipped", requested=config.degree_cutoff, cutoff=cutoff,
                           setting="TENSORLAB_CROSS_DEGREE_CUTOFF")
        tower = lps.build_lps_tower(config.prime, cutoff)
        bound = fc.free_norm(tower.n)
        pairs = [(m, mp) for m in range(cutoff + 1) for mp in range(cutoff + 1)]
        params = SolverParams.from_settings(seed=config.seed, tol=config.tol)
        reports = self._map(lambda pair: lps.cross_tensor_report(tower, pair[0], pair[1], params), pairs, config.jobs)

        records = []
        for idx, ((m, mp), report) in enumerate(zip(pairs, reports)):
            if m == mp:
                passed = not report.converged or report.value >= bound - CROSS_VALIDATION_TOL
                notes = [] if passed else ["diagonal term below 2 sqrt(n - 1)"]
            else:
                passed = report.value <= bound + CROSS_VALIDATION_TOL
                notes = [] if (m - mp) % 2 == 0 else ["mixed parity pair"]
                if not passed:
                    notes.append("cross term above 2 sqrt(p)")
            records.append(TrialRecord(
                trial=idx, n=tower.n, dim=(m + 1) * (mp + 1), m=m, m_prime=mp, value=report.value,
                gap=report.value - bound, converged=report.converged, iterations=report.iterations,
                seed_index=0, passed=passed, note="; ".join(notes) or None,
            ))

        off_diagonal = [r.value for r in records if r.m != r.m_prime]
        bounds = {"ramanujan_bound": bound}
        if off_diagonal:
            bounds["sup_off_diagonal"] = max(off_diagonal)
        return records, bounds, {"cutoff": cutoff, "requested_cutoff": config.degree_cutoff}


experiment_runner = ExperimentRunner()


def run(config: ExperimentConfig) -> ExperimentReport:
    """Run one experiment with the shared runner"""
    return experiment_runner.run(config)
