"""
Capacity engine.

Each target is fitted on the training rows of the trace and scored on the
held-out tail by the squared correlation between prediction and target.
Capacities at or below the family's shuffle cutoff, scaled by the target's
coupling to the readout, are zeroed. Families are evaluated concurrently;
aggregation follows enumeration order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import ShapeMismatchError
from readout.trainer import LeastSquaresSolver
from reservoir.protocols import ReadoutTrace
from reservoir.rng import SHUFFLE, make_rng
from .models import MAX_SUPPORTED_DEGREE, CutoffConfig, FamilyResult, IpcBudget, IpcReport, TargetSpec
from .targets import build_targets, enumerate_targets, group_by_family, legendre_table

logger = logging.getLogger(__name__)

BOUND_TOL = 1e-6
_ZERO_VARIANCE = 1e-30


def capacity(f: np.ndarray, fhat: np.ndarray) -> float:
    """Squared correlation between target and prediction, in [0, 1]."""
    f = np.asarray(f, dtype=float)
    fhat = np.asarray(fhat, dtype=float)
    if f.shape != fhat.shape:
        raise ShapeMismatchError(f"target shape {f.shape} does not match prediction {fhat.shape}")
    value = _capacities(f[:, None], fhat[:, None])[0]
    return float(value)


def _capacities(F: np.ndarray, Fhat: np.ndarray) -> np.ndarray:
    """Column-wise squared correlations; zero-variance columns score 0."""
    Fc = F - F.mean(axis=0)
    Hc = Fhat - Fhat.mean(axis=0)
    var_f = np.einsum("ij,ij->j", Fc, Fc)
    var_h = np.einsum("ij,ij->j", Hc, Hc)
    cov = np.einsum("ij,ij->j", Fc, Hc)
    degenerate = (var_f <= _ZERO_VARIANCE) | (var_h <= _ZERO_VARIANCE)
    if np.any(degenerate):
        logger.warning(f"{int(np.count_nonzero(degenerate))} zero-variance capacity input(s) scored as 0")
    safe = np.where(degenerate, 1.0, var_f * var_h)
    values = np.where(degenerate, 0.0, cov ** 2 / safe)
    return np.clip(values, 0.0, 1.0)


@dataclass
class _ScoringContext:
    """Centered train/test design matrices and their input indices."""
    solver: LeastSquaresSolver
    X_test: np.ndarray
    train_rows: np.ndarray
    test_rows: np.ndarray
    inputs: np.ndarray
    table: np.ndarray

    def score_with_coupling(
        self, table: np.ndarray, specs: Sequence[TargetSpec]
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Held-out capacities and the fourth-moment coupling of each prediction/target pair."""
        F_train = build_targets(specs, table, self.train_rows)
        F_test = build_targets(specs, table, self.test_rows)
        W = self.solver.solve(F_train - F_train.mean(axis=0))
        Fhat = self.X_test @ W
        return _capacities(F_test, Fhat), _coupling(F_test, Fhat)


def _coupling(F: np.ndarray, Fhat: np.ndarray) -> np.ndarray:
    """Mean of the product of squared standardized columns.

    Equals 1 when prediction and target are independent. Targets sharing
    inputs with the readout nonlinearly spread their null capacity wider,
    and the cutoff applied to them is scaled by this factor.
    """
    Fc = F - F.mean(axis=0)
    Hc = Fhat - Fhat.mean(axis=0)
    sd_f = Fc.std(axis=0)
    sd_h = Hc.std(axis=0)
    degenerate = (sd_f <= _ZERO_VARIANCE) | (sd_h <= _ZERO_VARIANCE)
    Fz = Fc / np.where(degenerate, 1.0, sd_f)
    Hz = Hc / np.where(degenerate, 1.0, sd_h)
    values = np.mean(Fz ** 2 * Hz ** 2, axis=0)
    return np.where(degenerate, 1.0, values)


def _prepare(
    X: Union[ReadoutTrace, np.ndarray],
    inputs: Sequence[float],
    max_delay: int,
    max_degree: int,
    held_out_fraction: float,
) -> _ScoringContext:
    matrix = X.values if isinstance(X, ReadoutTrace) else np.asarray(X, dtype=float)
    u = np.asarray(inputs, dtype=float).ravel()
    if matrix.ndim != 2:
        raise ShapeMismatchError(f"trace must be 2-D, got shape {matrix.shape}")
    n_rows = matrix.shape[0]
    # Trace rows align with the tail of the input sequence (washout precedes them).
    offset = u.size - n_rows
    if offset < 0:
        raise ShapeMismatchError(f"{u.size} inputs cannot cover {n_rows} trace rows")
    first = max(0, max_delay - offset)
    usable = n_rows - first
    n_test = max(2, int(round(usable * held_out_fraction)))
    n_train = usable - n_test
    if n_train < 2:
        raise ShapeMismatchError(f"only {usable} rows left after delay {max_delay}")
    rows = offset + np.arange(first, n_rows)
    train, test = matrix[first:first + n_train], matrix[first + n_train:]
    means = train.mean(axis=0)
    return _ScoringContext(
        solver=LeastSquaresSolver(train - means),
        X_test=test - means,
        train_rows=rows[:n_train],
        test_rows=rows[n_train:],
        inputs=u,
        table=legendre_table(u, max_degree),
    )


def _null_capacities(
    context: _ScoringContext,
    specs: Sequence[TargetSpec],
    n_shuffles: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Coupling-normalized capacities of `specs` under shuffled inputs, shape (n_shuffles, len(specs))."""
    max_degree = max(k for spec in specs for k, _ in spec.terms)
    nulls = np.empty((n_shuffles, len(specs)))
    for i in range(n_shuffles):
        shuffled = legendre_table(rng.permutation(context.inputs), max_degree)
        scores, coupling = context.score_with_coupling(shuffled, specs)
        nulls[i] = scores / np.maximum(coupling, 1.0)
    return nulls


def _null_sample(targets: List[TargetSpec], size: int) -> List[TargetSpec]:
    """Up to `size` targets spread evenly over the family's enumeration."""
    if len(targets) <= size:
        return list(targets)
    picks = np.unique(np.linspace(0, len(targets) - 1, size).round().astype(int))
    return [targets[i] for i in picks]


def shuffle_cutoff(
    X: Union[ReadoutTrace, np.ndarray],
    spec: TargetSpec,
    inputs: Sequence[float],
    n_shuffles: int = 100,
    quantile: float = 0.999,
    rng: Optional[np.random.Generator] = None,
    held_out_fraction: float = 0.1,
) -> float:
    """Quantile of capacities for `spec` built from shuffled inputs."""
    config = CutoffConfig(n_shuffles=n_shuffles, quantile=quantile, held_out_fraction=held_out_fraction)
    if rng is None:
        rng = make_rng(config.seed, SHUFFLE)
    context = _prepare(X, inputs, spec.max_delay, spec.total_degree, config.held_out_fraction)
    nulls = _null_capacities(context, [spec], config.n_shuffles, rng)
    return float(np.quantile(nulls, config.quantile))


def _evaluate_family(
    context: _ScoringContext,
    family: Tuple[int, int],
    targets: List[TargetSpec],
    config: CutoffConfig,
    early_stop_window: int,
    rng: np.random.Generator,
) -> FamilyResult:
    # Pooled over a spread of the family's targets so the quantile is resolved
    # beyond the number of shuffles.
    sample = _null_sample(targets, config.null_targets_per_family)
    nulls = _null_capacities(context, sample, config.n_shuffles, rng)
    result = FamilyResult(family=family, cutoff=float(np.quantile(nulls.ravel(), config.quantile)))
    groups: Dict[int, List[TargetSpec]] = {}
    for target in targets:
        groups.setdefault(target.max_delay, []).append(target)
    empty_run = 0
    for max_delay in sorted(groups):
        batch = groups[max_delay]
        scores, coupling = context.score_with_coupling(context.table, batch)
        thresholds = result.cutoff * np.maximum(coupling, 1.0)
        survives = scores > thresholds
        scores = np.where(survives, scores, 0.0)
        margins = np.where(survives, scores / np.maximum(thresholds, _ZERO_VARIANCE), 0.0)
        result.targets.extend(batch)
        result.capacities.extend(float(s) for s in scores)
        result.margins.extend(float(m) for m in margins)
        empty_run = 0 if np.any(scores > 0.0) else empty_run + 1
        if empty_run >= early_stop_window:
            logger.debug(f"Family {family} stopped at max delay {max_delay}")
            break
    return result


def compute_ipc(
    X: Union[ReadoutTrace, np.ndarray],
    inputs: Sequence[float],
    budget: Optional[IpcBudget] = None,
    cutoff: Optional[CutoffConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> IpcReport:
    """Degree-resolved IPC of a trace driven by `inputs` (u ~ U([-1, 1])).

    `inputs` may be longer than the trace; its last rows(X) entries drive
    the recorded rows and earlier entries only serve as delayed history.
    """
    budget = budget or IpcBudget.default()
    cutoff = cutoff or CutoffConfig()
    if rng is None:
        rng = make_rng(cutoff.seed, SHUFFLE)
    context = _prepare(X, inputs, budget.max_delay, budget.max_total_degree, cutoff.held_out_fraction)
    families = group_by_family(enumerate_targets(budget))
    family_seeds = [int(s) for s in rng.integers(0, 2 ** 63, size=len(families))]
    logger.info(
        f"Computing IPC: {sum(len(t) for t in families.values())} targets in {len(families)} families, "
        f"{context.train_rows.size} train / {context.test_rows.size} held-out rows"
    )
    with ThreadPoolExecutor(max_workers=cutoff.max_workers) as pool:
        futures = [
            pool.submit(
                _evaluate_family, context, family, targets, cutoff, budget.early_stop_window,
                np.random.Generator(np.random.Philox(seed)),
            )
            for (family, targets), seed in zip(families.items(), family_seeds)
        ]
        results = [future.result() for future in futures]
    _enforce_rank_bound(results, context.solver.rank)
    return _aggregate(results, context.solver.n_cols)


def _enforce_rank_bound(results: List[FamilyResult], rank: int) -> None:
    """Zero the least significant survivors while the total exceeds the readout rank."""
    total = sum(sum(r.capacities) for r in results)
    if total <= rank + BOUND_TOL:
        return
    survivors = sorted(
        (result.margins[i], n, i)
        for n, result in enumerate(results)
        for i, value in enumerate(result.capacities)
        if value > 0.0
    )
    dropped = 0
    for _, n, i in survivors:
        if total <= rank + BOUND_TOL:
            break
        total -= results[n].capacities[i]
        results[n].capacities[i] = 0.0
        results[n].margins[i] = 0.0
        dropped += 1
    logger.warning(f"Dropped {dropped} marginal target(s) to keep IPC total within readout rank {rank}")


def _aggregate(results: List[FamilyResult], readout_dimension: int) -> IpcReport:
    per_degree = np.zeros(MAX_SUPPORTED_DEGREE)
    per_family: Dict[str, float] = {}
    family_cutoffs: Dict[str, float] = {}
    evaluated = surviving = 0
    for result in results:
        degree, n_terms = result.family
        family_cutoffs[f"{degree}:{n_terms}"] = result.cutoff
        for target, value in zip(result.targets, result.capacities):
            per_degree[degree - 1] += value
            per_family[target.signature] = per_family.get(target.signature, 0.0) + value
        evaluated += len(result.capacities)
        surviving += result.n_surviving
    report = IpcReport(
        per_degree=tuple(float(v) for v in per_degree),
        cutoff_value=max(family_cutoffs.values(), default=0.0),
        n_targets_evaluated=evaluated,
        n_targets_surviving=surviving,
        readout_dimension=readout_dimension,
        family_cutoffs=family_cutoffs,
        per_family=per_family,
    )
    logger.info(
        f"IPC linear={report.linear:.3f} nonlinear={report.nonlinear:.3f} total={report.total:.3f} "
        f"({surviving}/{evaluated} targets above cutoff)"
    )
    return report
