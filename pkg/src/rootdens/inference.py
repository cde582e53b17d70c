"""Fisher information, covariance, confidence cone and chi-square criteria.

All statistics depend on state vectors only through squared scalar products,
so the c <-> -c ambiguity never matters and every result is invariant under
a common orthogonal change of basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import StateVector, check_compatible
from .errors import InvalidInputError
from .numerics import chi2_quantile, chi2_sf

StateLike = Union[StateVector, np.ndarray, list, tuple]

PIVOT_MIN = 1e-6


def _coeffs(c: StateLike) -> np.ndarray:
    if isinstance(c, StateVector):
        return c.coefficients
    arr = np.asarray(c, dtype=float).ravel()
    if abs(float(arr @ arr) - 1.0) > 1e-10:
        raise InvalidInputError(f"state vector must have unit norm, |c|^2 = {float(arr @ arr)!r}")
    return arr


def _pair(a: StateLike, b: StateLike) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        check_compatible(a, b)
    ca, cb = _coeffs(a), _coeffs(b)
    if ca.size != cb.size:
        raise InvalidInputError(f"state vectors have different lengths ({ca.size} vs {cb.size})")
    return ca, cb


def _positive_size(n, name="n") -> float:
    if not n > 0:
        raise InvalidInputError(f"{name} must be positive, got {n!r}")
    return float(n)


@dataclass(frozen=True)
class FisherInformation:
    """Information matrix over the s-1 free coefficients.

    ``pivot`` is the coefficient eliminated through the normalisation
    constraint and ``free`` lists the remaining indices in matrix order.
    """

    matrix: np.ndarray
    pivot: int
    free: tuple[int, ...]
    note: str = ""


def fisher_information(c: StateLike, n: float, pivot: int | None = None) -> FisherInformation:
    """I_ij = 4n (delta_ij + c_i c_j / c_p^2) over the free coefficients.

    The pivot defaults to index 0; if |c_0| < 1e-6 the largest coefficient
    takes its place.
    """
    c = _coeffs(c)
    n = _positive_size(n)
    note = ""
    if pivot is None:
        pivot = 0
        if abs(c[0]) < PIVOT_MIN:
            pivot = int(np.argmax(np.abs(c)))
            note = f"|c_0| < {PIVOT_MIN:g}; coefficient {pivot} used as the dependent one"
    elif abs(c[pivot]) < PIVOT_MIN:
        raise InvalidInputError(f"pivot coefficient c_{pivot} = {c[pivot]!r} is too small")
    free = tuple(i for i in range(c.size) if i != pivot)
    cf = c[list(free)]
    m = 4.0 * n * (np.eye(len(free)) + np.outer(cf, cf) / c[pivot] ** 2)
    return FisherInformation(m, pivot, free, note)


def covariance(c: StateLike, n: float) -> np.ndarray:
    """Asymptotic covariance (E - c c^T) / 4n of the estimated state vector."""
    c = _coeffs(c)
    n = _positive_size(n)
    return (np.eye(c.size) - np.outer(c, c)) / (4.0 * n)


@dataclass(frozen=True)
class ConfidenceCone:
    axis: StateVector | np.ndarray
    sin2_half_angle: float
    confidence: float

    @property
    def half_angle(self) -> float:
        return math.asin(math.sqrt(self.sin2_half_angle))

    def covers(self, c0: StateLike) -> bool:
        axis, c0 = _pair(self.axis, c0)
        return 1.0 - float(axis @ c0) ** 2 <= self.sin2_half_angle


def confidence_cone(c_hat: StateLike, n: float, alpha: float = 0.05) -> ConfidenceCone:
    """Directions within sin^2(theta) <= chi2_{s-1, alpha} / 4n of the estimate."""
    c = _coeffs(c_hat)
    n = _positive_size(n)
    if n < 1:
        raise InvalidInputError(f"sample size must be >= 1, got {n}")
    if c.size < 2:
        raise InvalidInputError("a cone needs at least two coefficients")
    q = chi2_quantile(c.size - 1, alpha)
    return ConfidenceCone(c_hat, min(1.0, q / (4.0 * n)), 1.0 - alpha)


@dataclass(frozen=True)
class TestReport:
    statistic: float
    df: int
    p_value: float
    reject_at: float
    verdict: bool

    __test__ = False  # not a pytest class

    def as_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "alpha": self.reject_at,
            "reject": self.verdict,
        }


def _report(statistic: float, df: int, alpha: float) -> TestReport:
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"significance must lie in (0, 1), got {alpha!r}")
    if df < 1:
        raise InvalidInputError("chi-square criteria need at least two coefficients (df >= 1)")
    statistic = max(float(statistic), 0.0)
    p = chi2_sf(df, statistic)
    return TestReport(statistic, int(df), p, float(alpha), p < alpha)


def chi2_goodness(c_hat: StateLike, c0: StateLike, n: float, alpha: float = 0.05) -> TestReport:
    """4n (1 - (c_hat, c0)^2), chi-square with s-1 degrees of freedom under H0."""
    a, b = _pair(c_hat, c0)
    n = _positive_size(n)
    r = float(a @ b)
    return _report(4.0 * n * (1.0 - r * r), a.size - 1, alpha)


def chi2_goodness_sum(c_hat: StateLike, c0: StateLike, n: float) -> float:
    """Asymptotically equivalent form 4n sum (c_i - c0_i)^2, signs aligned first."""
    a, b = _pair(c_hat, c0)
    if a @ b < 0:
        b = -b
    return 4.0 * _positive_size(n) * float(np.sum((a - b) ** 2))


def chi2_histogram_form(counts, probs) -> float:
    """4 [n - (sum sqrt(n_i p_i))^2]: the goodness statistic in a histogram basis."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if counts.shape != probs.shape or np.any(counts < 0) or np.any(probs < 0):
        raise InvalidInputError("counts and probabilities must be non-negative and of equal length")
    n = counts.sum()
    return 4.0 * (n - float(np.sum(np.sqrt(counts * probs))) ** 2)


def chi2_homogeneity(c1: StateLike, c2: StateLike, n1: float, n2: float, alpha: float = 0.05) -> TestReport:
    """4 n1 n2 / (n1 + n2) (1 - (c1, c2)^2) for two samples from one population."""
    a, b = _pair(c1, c2)
    n1, n2 = _positive_size(n1, "n1"), _positive_size(n2, "n2")
    r = float(a @ b)
    return _report(4.0 * n1 * n2 / (n1 + n2) * (1.0 - r * r), a.size - 1, alpha)


def chi2_homogeneity_sum(c1: StateLike, c2: StateLike, n1: float, n2: float) -> float:
    """4 n1 n2 / (n1 + n2) sum (c1_i - c2_i)^2 with signs aligned."""
    a, b = _pair(c1, c2)
    if a @ b < 0:
        b = -b
    n1, n2 = _positive_size(n1, "n1"), _positive_size(n2, "n2")
    return 4.0 * n1 * n2 / (n1 + n2) * float(np.sum((a - b) ** 2))


def chi2_homogeneity_counts(counts1, counts2) -> float:
    """Classical two-sample histogram statistic n1 n2 sum (f1 - f2)^2 / (f1 + f2)."""
    k1 = np.asarray(counts1, dtype=float)
    k2 = np.asarray(counts2, dtype=float)
    if k1.shape != k2.shape:
        raise InvalidInputError("count vectors differ in length")
    n1, n2 = k1.sum(), k2.sum()
    f1, f2 = k1 / n1, k2 / n2
    both = (f1 + f2) > 0
    return float(n1 * n2 * np.sum((f1[both] - f2[both]) ** 2 / (f1[both] + f2[both])))


def chi2_standard(counts, expected, alpha: float = 0.05) -> TestReport:
    """Pearson's sum (n_i - e_i)^2 / e_i with s-1 degrees of freedom."""
    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(expected, dtype=float)
    if counts.shape != expected.shape:
        raise InvalidInputError("counts and expected counts differ in length")
    if np.any(expected <= 0):
        raise InvalidInputError("every expected count must be positive")
    if not math.isclose(counts.sum(), expected.sum(), rel_tol=1e-9):
        raise InvalidInputError(f"counts sum to {counts.sum()} but expected counts to {expected.sum()}")
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return _report(stat, counts.size - 1, alpha)


# --- binomial case (s = 2) ------------------------------------------------------------


def binomial_root_stat(n1: float, n2: float, p1: float, p2: float) -> float:
    """2 (sqrt(n1 p2) - sqrt(n2 p1)), approximately N(0, 1)."""
    return 2.0 * (math.sqrt(n1 * p2) - math.sqrt(n2 * p1))


def binomial_classic_stat(n1: float, n: float, p1: float, p2: float) -> float:
    """De Moivre-Laplace statistic (n1 - n p1) / sqrt(n p1 p2)."""
    return (n1 - n * p1) / math.sqrt(n * p1 * p2)


def _phi(t: float) -> float:
    return 0.5 * (1.0 + math.erf(t / math.sqrt(2.0)))


def binomial_normal_distance(kind: str, n: int, p1: float) -> float:
    """Kolmogorov distance sup_t |F(t) - Phi(t)| of a binomial statistic.

    F is the exact distribution of the statistic over n1 = 0..n, enumerated
    with binomial weights; both one-sided limits at every atom are checked.
    """
    if kind not in ("root", "classic"):
        raise InvalidInputError(f"kind must be 'root' or 'classic', got {kind!r}")
    if not 0.0 < p1 < 1.0 or n < 1:
        raise InvalidInputError("need n >= 1 and 0 < p1 < 1")
    p2 = 1.0 - p1
    atoms = []
    for n1 in range(n + 1):
        w = math.comb(n, n1) * p1**n1 * p2 ** (n - n1)
        t = binomial_root_stat(n1, n - n1, p1, p2) if kind == "root" else binomial_classic_stat(n1, n, p1, p2)
        atoms.append((t, w))
    atoms.sort()
    cdf = 0.0
    dist = 0.0
    for t, w in atoms:
        phi = _phi(t)
        dist = max(dist, abs(cdf - phi))
        cdf += w
        dist = max(dist, abs(cdf - phi))
    return dist
