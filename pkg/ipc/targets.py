"""
Legendre delay-product targets.

A target of total degree D is a product of l_k(u_{t-d}) over terms with
distinct delays. Enumeration order is (D, number of terms, delays, degrees),
delays listed in decreasing order.
"""

import itertools
import logging
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from errors import InputRangeError
from .models import IpcBudget, TargetSpec

logger = logging.getLogger(__name__)


def legendre(n: int, x):
    """l_n(x) by l_{n+1} = ((2n+1) x l_n - n l_{n-1}) / (n+1)."""
    if n < 0:
        raise InputRangeError(f"Legendre degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    previous, current = np.ones_like(x), x
    if n == 0:
        return previous if previous.ndim else float(previous)
    for k in range(1, n):
        previous, current = current, ((2 * k + 1) * x * current - k * previous) / (k + 1)
    return current if current.ndim else float(current)


def legendre_table(inputs: Sequence[float], max_degree: int) -> np.ndarray:
    """(max_degree + 1, N) array with row k = l_k(inputs)."""
    u = np.asarray(inputs, dtype=float)
    table = np.empty((max_degree + 1, u.size))
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = u
    for k in range(1, max_degree):
        table[k + 1] = ((2 * k + 1) * u * table[k] - k * table[k - 1]) / (k + 1)
    return table


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Ordered tuples of `parts` positive integers summing to `total`."""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


def targets_for_family(degree: int, n_terms: int, max_delay: int) -> List[TargetSpec]:
    """All targets of one (degree, term count) family with delays <= max_delay."""
    targets = []
    for delays in itertools.combinations(range(max_delay, -1, -1), n_terms):
        for degrees in _compositions(degree, n_terms):
            targets.append(TargetSpec(tuple(zip(degrees, delays))))
    targets.sort(key=lambda t: (tuple(d for _, d in t.terms), tuple(k for k, _ in t.terms)))
    return targets


def enumerate_targets(budget: IpcBudget) -> List[TargetSpec]:
    """Complete duplicate-free target list for every degree up to the budget."""
    targets = []
    for degree in range(1, budget.max_total_degree + 1):
        cap = budget.delay_cap(degree)
        for n_terms in range(1, degree + 1):
            targets.extend(targets_for_family(degree, n_terms, cap))
    return targets


def group_by_family(targets: Sequence[TargetSpec]) -> Dict[Tuple[int, int], List[TargetSpec]]:
    """Families in first-seen order."""
    families: Dict[Tuple[int, int], List[TargetSpec]] = {}
    for target in targets:
        families.setdefault(target.family, []).append(target)
    return families


def build_targets(
    specs: Sequence[TargetSpec],
    table: np.ndarray,
    rows: np.ndarray,
) -> np.ndarray:
    """(len(rows), len(specs)) matrix of target values at input indices `rows`."""
    rows = np.asarray(rows)
    out = np.ones((rows.size, len(specs)))
    for j, spec in enumerate(specs):
        for k, d in spec.terms:
            out[:, j] *= table[k, rows - d]
    return out
