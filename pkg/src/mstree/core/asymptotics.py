"""Strong-law limits of tree profiles and seeded Monte Carlo checks."""

import logging
import math
from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from mstree.core.spectra import harmonic, principal_eigenvector
from mstree.core.tree import (
    InvalidParameterError,
    build_from_permutation,
    check_branching,
    degree_profile,
    gap_profile,
)
from mstree.utils.rng import derive_seed, random_permutation

logger = logging.getLogger(__name__)

CLT_M = range(3, 27)


@dataclass(frozen=True)
class LimitProfile:
    """Almost-sure limits of gap and node counts divided by n."""

    m: int
    v: tuple[float, ...]
    v_star: tuple[float, ...]
    leaf_fraction: float
    node_fraction: float
    protected_fraction: float
    protected_fraction_stated: float
    full_fraction: float
    degree_from_gaps: tuple[float, ...]


@dataclass(frozen=True)
class ConvergenceReport:
    """Trial-averaged profiles compared with their limits."""

    m: int
    n: int
    trials: int
    seed: int
    mean_gap_fractions: tuple[float, ...]
    mean_degree_fractions: tuple[float, ...]
    gap_deviation: float
    degree_deviation: float
    gap_component_deviations: tuple[float, ...]
    degree_component_deviations: tuple[float, ...]
    mean_leaf_fraction: float
    mean_node_fraction: float
    mean_protected_fraction: float
    protected_deviation: float
    protected_deviation_stated: float


@dataclass(frozen=True)
class CltProbe:
    """Sample moments of (D_n^(k) - n v*_k) / sqrt(n) across trials.

    Moments that need more trials than were run are None.
    """

    m: int
    n: int
    trials: int
    seed: int
    outdegree: int
    mean: float
    variance: float | None
    skewness: float | None
    excess_kurtosis: float | None

    @property
    def moments_available(self) -> bool:
        return None not in (self.variance, self.skewness, self.excess_kurtosis)


def limit_profile(m: int) -> LimitProfile:
    """Evaluate every limiting fraction for branching factor m."""
    check_branching(m)
    scale = harmonic(m) - 1.0
    leaf = (m - 1) / (2 * (m + 1) * scale)
    full = 1.0 / (m * (m + 1) * scale)
    node = 1.0 / (2 * scale)
    v = principal_eigenvector(m).v
    return LimitProfile(
        m=m,
        v=v,
        v_star=(leaf,) + (full,) * m,
        leaf_fraction=leaf,
        node_fraction=node,
        protected_fraction=node - leaf,
        protected_fraction_stated=1.0 / (2 * (m + 1) * scale),
        full_fraction=full,
        degree_from_gaps=tuple(v[m - i - 1] / (m - i) for i in range(1, m)),
    )


def _trial_counts(
    args: tuple[int, int, int],
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Gap and degree counts of one tree built from a seeded permutation."""
    m, n, seed = args
    tree = build_from_permutation(m, random_permutation(n, seed))
    return gap_profile(tree).counts, degree_profile(tree).counts


def _run_trials(
    m: int, n: int, trials: int, seed: int, workers: int,
) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Yield per-trial counts in trial order, serially or in a pool."""
    jobs = [(m, n, derive_seed(seed, t)) for t in range(trials)]
    if workers <= 1:
        for index, job in enumerate(jobs):
            logger.debug("Trial %d/%d (m=%d, n=%d)", index + 1, trials, m, n)
            yield _trial_counts(job)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_trial_counts, jobs)


def _check_experiment(m: int, n: int, trials: int) -> None:
    check_branching(m)
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")


def monte_carlo(
    m: int, n: int, trials: int, seed: int, workers: int = 1,
) -> ConvergenceReport:
    """Average X/n and D/n over independent trees and compare with limits."""
    _check_experiment(m, n, trials)
    logger.info(
        "Monte Carlo m=%d n=%d trials=%d seed=%d", m, n, trials, seed,
    )
    gaps, degrees = [], []
    for gap_counts, degree_counts in _run_trials(m, n, trials, seed, workers):
        gaps.append(gap_counts)
        degrees.append(degree_counts)

    gap_means = (np.array(gaps, dtype=np.float64) / n).mean(axis=0)
    degree_means = (np.array(degrees, dtype=np.float64) / n).mean(axis=0)
    limits = limit_profile(m)
    gap_dev = np.abs(gap_means - np.array(limits.v))
    degree_dev = np.abs(degree_means - np.array(limits.v_star))
    leaf_mean = float(degree_means[0])
    node_mean = float(degree_means.sum())
    protected_mean = node_mean - leaf_mean

    return ConvergenceReport(
        m=m,
        n=n,
        trials=trials,
        seed=seed,
        mean_gap_fractions=tuple(gap_means.tolist()),
        mean_degree_fractions=tuple(degree_means.tolist()),
        gap_deviation=float(gap_dev.max()),
        degree_deviation=float(degree_dev.max()),
        gap_component_deviations=tuple(gap_dev.tolist()),
        degree_component_deviations=tuple(degree_dev.tolist()),
        mean_leaf_fraction=leaf_mean,
        mean_node_fraction=node_mean,
        mean_protected_fraction=protected_mean,
        protected_deviation=abs(protected_mean - limits.protected_fraction),
        protected_deviation_stated=abs(
            protected_mean - limits.protected_fraction_stated
        ),
    )


def clt_probe(
    m: int,
    n: int,
    trials: int,
    seed: int,
    outdegree: int = 0,
    workers: int = 1,
) -> CltProbe:
    """Loose normality probe for one standardized outdegree count."""
    _check_experiment(m, n, trials)
    if m not in CLT_M:
        raise InvalidParameterError(
            f"The Gaussian probe covers m in 3..26, got {m}"
        )
    if not 0 <= outdegree <= m:
        raise InvalidParameterError(
            f"outdegree must be in 0..{m}, got {outdegree}"
        )
    centre = n * limit_profile(m).v_star[outdegree]
    root_n = math.sqrt(n)
    z = np.array(
        [
            (degrees[outdegree] - centre) / root_n
            for _, degrees in _run_trials(m, n, trials, seed, workers)
        ]
    )
    return CltProbe(
        m=m,
        n=n,
        trials=trials,
        seed=seed,
        outdegree=outdegree,
        mean=float(z.mean()),
        variance=float(z.var(ddof=1)) if trials >= 2 else None,
        skewness=float(stats.skew(z, bias=False)) if trials >= 3 else None,
        excess_kurtosis=(
            float(stats.kurtosis(z, fisher=True, bias=False))
            if trials >= 4
            else None
        ),
    )
