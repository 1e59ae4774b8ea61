"""Spectrum of the transposed replacement matrix and the limit-law regime."""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from mstree.core.tree import InvalidParameterError, check_branching
from mstree.core.urn import replacement_matrix

logger = logging.getLogger(__name__)

SUPPORTED_M = range(2, 65)
PRINCIPAL_TOLERANCE = 1e-9


class EigenSolverError(RuntimeError):
    """Raised when the dense eigensolver fails or returns a bad spectrum."""


class Regime(Enum):
    """Limit law of the normalized color counts."""

    GAUSSIAN = "Gaussian"
    NON_GAUSSIAN = "NonGaussian"


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues of A^T sorted by descending real part."""

    m: int
    eigenvalues: tuple[complex, ...]
    lambda1: float
    lambda2_re: float
    regime: Regime


@dataclass(frozen=True)
class PrincipalVector:
    """Limiting gap fractions; v[i - 1] belongs to color i."""

    m: int
    v: tuple[float, ...]


@dataclass(frozen=True)
class UrnConditions:
    """Conditions for the urn central limit theorem."""

    m: int
    tenable: bool
    balanced: bool
    row_sum: int
    finite_second_moments: bool
    simple_principal: bool
    positive_left_eigenvector: bool
    small_second_eigenvalue: bool

    @property
    def gaussian_limit(self) -> bool:
        return all(
            (
                self.tenable,
                self.balanced,
                self.finite_second_moments,
                self.simple_principal,
                self.positive_left_eigenvector,
                self.small_second_eigenvalue,
            )
        )


def harmonic(m: int) -> float:
    """The m-th harmonic number, summed with exact float rounding."""
    if m < 1:
        raise InvalidParameterError(f"Harmonic index must be >= 1, got {m}")
    return math.fsum(1.0 / i for i in range(1, m + 1))


def principal_eigenvector(m: int) -> PrincipalVector:
    """Closed-form fixed point of A^T, normalized over all 2m-2 colors."""
    check_branching(m)
    if m == 2:
        return PrincipalVector(m=2, v=(1 / 3, 2 / 3))
    scale = harmonic(m) - 1.0
    normalizer = m * (m + 1) * scale
    internal = [i / normalizer for i in range(1, m + 1)]
    leaves = [1.0 / ((j + 2) * scale) for j in range(1, m - 1)]
    return PrincipalVector(m=m, v=tuple(internal + leaves))


def _check_supported(m: int) -> None:
    if m not in SUPPORTED_M:
        raise InvalidParameterError(
            f"Spectral analysis supports m in 2..64, got {m}"
        )


def eigen_spectrum(m: int) -> SpectralReport:
    """All eigenvalues of A^T with the principal root checked at 1.

    Raises:
        InvalidParameterError: If m is outside 2..64.
        EigenSolverError: If LAPACK fails or the Perron root is not 1.
    """
    _check_supported(m)
    transposed = replacement_matrix(m).as_array().T.astype(np.float64)
    try:
        values = np.linalg.eigvals(transposed)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"Eigensolver failed for m={m}: {exc}") from exc

    ordered = sorted(
        (complex(z) for z in values),
        key=lambda z: (-z.real, -z.imag),
    )
    lambda1 = ordered[0]
    if abs(lambda1 - 1.0) > PRINCIPAL_TOLERANCE:
        raise EigenSolverError(
            f"Principal eigenvalue for m={m} is {lambda1}, expected 1"
        )
    lambda2_re = ordered[1].real
    logger.debug("m=%d: lambda2 = %s", m, ordered[1])
    return SpectralReport(
        m=m,
        eigenvalues=tuple(ordered),
        lambda1=lambda1.real,
        lambda2_re=lambda2_re,
        regime=Regime.GAUSSIAN if lambda2_re < 0.5 else Regime.NON_GAUSSIAN,
    )


def regime(m: int) -> Regime:
    """Gaussian iff Re lambda2 < 1/2."""
    return eigen_spectrum(m).regime


def critical_m(m_max: int = 64) -> int | None:
    """Smallest m whose normalized counts leave the Gaussian regime."""
    for m in range(2, m_max + 1):
        if regime(m) is Regime.NON_GAUSSIAN:
            return m
    return None


def extended_urn_conditions(m: int) -> UrnConditions:
    """Check the urn against the hypotheses of the Gaussian limit theorem.

    Tenability holds when every negative entry sits on the diagonal and
    removes exactly the balls that share one node (color i for i <= m,
    color m+j with j+1 gaps), since those balls always come in such groups.
    """
    _check_supported(m)
    matrix = replacement_matrix(m)
    entries = matrix.as_array()
    group = list(range(1, m + 1)) + [j + 1 for j in range(1, m - 1)]
    off_diagonal = entries - np.diag(np.diag(entries))
    tenable = bool(
        (off_diagonal >= 0).all()
        and all(
            entries[r, r] in (0, -group[r]) for r in range(matrix.size)
        )
    )
    row_sums = entries.sum(axis=1)
    spectrum = eigen_spectrum(m)
    simple = abs(spectrum.eigenvalues[1] - 1.0) > PRINCIPAL_TOLERANCE
    v = np.array(principal_eigenvector(m).v)
    return UrnConditions(
        m=m,
        tenable=tenable,
        balanced=bool((row_sums == row_sums[0]).all()),
        row_sum=int(row_sums[0]),
        finite_second_moments=True,
        simple_principal=simple,
        positive_left_eigenvector=bool((v > 0).all()),
        small_second_eigenvalue=spectrum.lambda2_re < 0.5 * spectrum.lambda1,
    )
