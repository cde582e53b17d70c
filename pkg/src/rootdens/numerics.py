"""Numerical kernels: symmetric eigensolver, chi-square distribution,
trapezoid quadrature and a reproducible random stream.

Everything here is deliberately small and self-contained so that results
are reproducible at the algorithm level, independent of the BLAS or RNG
shipped with a particular numpy build.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import InvalidInputError

SYMMETRY_RTOL = 1e-12
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def as_symmetric(m, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate a square symmetric matrix and return it as a float array.

    The returned array is exactly symmetrised, ``(m + m.T) / 2``.
    """
    a = np.array(m, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidInputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    scale = float(np.max(np.abs(a))) or 1.0
    asym = float(np.max(np.abs(a - a.T)))
    if asym > rtol * scale:
        raise InvalidInputError(
            f"matrix is not symmetric: max |m - m.T| = {asym:.3e} exceeds {rtol:g} relative"
        )
    return 0.5 * (a + a.T)


def _round_robin(n: int) -> list[list[tuple[int, int]]]:
    """Circle-method schedule: n - 1 rounds (n even) of disjoint pairs covering every pair once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                pairs.append((min(p, q), max(p, q)))
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def eigen_sym(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Pairs are visited in round-robin order: each round holds disjoint (p, q)
    pairs whose rotations commute, so a round is applied as one orthogonal
    matrix.  A sweep covers every off-diagonal pair exactly once.  Returns
    ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in descending
    order and the matching orthonormal eigenvectors stored as columns.
    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``1e-12 * ||m||_F`` or after 100 sweeps.
    """
    a = as_symmetric(m)
    n = a.shape[0]
    v = np.eye(n)
    total = float(np.linalg.norm(a))
    if n == 1 or total == 0.0:
        return np.diag(a).copy(), v
    threshold = JACOBI_TOL * total
    upper = np.triu_indices(n, 1)
    schedule = [(np.array([p for p, _ in r]), np.array([q for _, q in r])) for r in _round_robin(n)]

    for _ in range(JACOBI_MAX_SWEEPS):
        # summed directly; ||a||^2 - ||diag||^2 cancels catastrophically
        off = math.sqrt(2.0 * float(np.sum(a[upper] ** 2)))
        if off <= threshold:
            break
        for p, q in schedule:
            apq = a[p, q]
            app, aqq = a[p, p], a[q, q]
            g = 100.0 * np.abs(apq)
            # below rounding of both diagonal entries
            tiny = (np.abs(app) + g == np.abs(app)) & (np.abs(aqq) + g == np.abs(aqq))
            active = (apq != 0.0) & ~tiny
            if not active.any():
                a[p, q] = a[q, p] = 0.0
                continue
            # t = tan of the smaller rotation angle
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                theta = np.where(active, (aqq - app) / (2.0 * np.where(active, apq, 1.0)), 0.0)
            big = np.abs(theta) > 1e150
            safe = np.where(big, 0.0, theta)
            t = np.where(
                big,
                0.5 / np.where(big, theta, 1.0),
                np.where(safe >= 0, 1.0, -1.0) / (np.abs(safe) + np.sqrt(safe * safe + 1.0)),
            )
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            sn = t * c
            rot = np.eye(n)
            rot[p, p] = c
            rot[q, q] = c
            rot[p, q] = sn
            rot[q, p] = -sn
            a = rot.T @ a @ rot
            a[p, q] = a[q, p] = 0.0
            v = v @ rot

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


# --- chi-square distribution -------------------------------------------------

_GAMMA_EPS = 1e-16
_GAMMA_ITMAX = 100_000
_TINY = 1e-300


def _gamma_series(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x) by its power series (x < a + 1)."""
    ap = a
    term = total = 1.0 / a
    for _ in range(_GAMMA_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cfrac(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) by modified Lentz (x >= a + 1)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_ITMAX):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def _check_df(df) -> float:
    if int(df) != df or df < 1:
        raise InvalidInputError(f"degrees of freedom must be a positive integer, got {df!r}")
    return float(df)


def chi2_cdf(df: int, x: float) -> float:
    """P(chi2_df <= x), the regularized lower incomplete gamma P(df/2, x/2)."""
    k = _check_df(df)
    if x < 0 or math.isnan(x):
        raise InvalidInputError(f"chi-square argument must be >= 0, got {x!r}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    a, h = 0.5 * k, 0.5 * x
    if h < a + 1.0:
        return min(1.0, _gamma_series(a, h))
    return max(0.0, 1.0 - _gamma_cfrac(a, h))


def chi2_sf(df: int, x: float) -> float:
    """Upper tail P(chi2_df > x), computed directly to keep precision for small tails."""
    k = _check_df(df)
    if x < 0 or math.isnan(x):
        raise InvalidInputError(f"chi-square argument must be >= 0, got {x!r}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    a, h = 0.5 * k, 0.5 * x
    if h < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, h))
    return min(1.0, _gamma_cfrac(a, h))


def chi2_quantile(df: int, alpha: float) -> float:
    """Upper quantile: the x with P(chi2_df > x) = alpha.

    Bisection on ``[0, df + 40 sqrt(df)]``; the bracket is widened if the
    requested tail is even smaller than the bracket allows.
    """
    k = _check_df(df)
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"significance must lie in (0, 1), got {alpha!r}")
    lo, hi = 0.0, k + 40.0 * math.sqrt(k)
    while chi2_sf(df, hi) > alpha:
        lo, hi = hi, 2.0 * hi
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if chi2_sf(df, mid) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- quadrature ---------------------------------------------------------------


def integrate(f: Callable, a: float, b: float, m: int) -> float:
    """Composite trapezoid rule with ``m`` panels on ``[a, b]``.

    ``f`` may be vectorised (called once on the whole abscissa array) or
    scalar; scalar callables are detected and evaluated point by point.
    """
    if not a < b:
        raise InvalidInputError(f"integration bounds must satisfy a < b, got [{a}, {b}]")
    if int(m) != m or m < 1:
        raise InvalidInputError(f"panel count must be a positive integer, got {m!r}")
    x = np.linspace(a, b, int(m) + 1)
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        y = np.array([float(f(float(t))) for t in x])
    bad = ~np.isfinite(y)
    if bad.any():
        where = float(x[np.argmax(bad)])
        raise InvalidInputError(f"integrand is not finite at x = {where!r}")
    h = (b - a) / m
    return float(h * (y.sum() - 0.5 * (y[0] + y[-1])))


# --- random stream --------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(x) -> np.ndarray:
    """SplitMix64 finaliser (Steele, Lea & Flood 2014) applied elementwise.

    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27; z *= 0x94D049BB133111EB;
    z ^= z >> 31.  All arithmetic is modulo 2**64.
    """
    z = np.array(x, dtype=np.uint64, ndmin=1)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class RandomStream:
    """Counter-based SplitMix64 stream.

    The i-th 64-bit output (i = 1, 2, ...) is
    ``splitmix64(seed + i * 0x9E3779B97F4A7C15 mod 2**64)``, which is exactly
    the sequence of the reference SplitMix64 generator seeded with ``seed``.
    Uniform variates take the top 53 bits: ``((z >> 11) + 0.5) / 2**53``, so
    they lie strictly inside (0, 1).

    A stream is single-owner mutable state; give every task its own stream.
    """

    def __init__(self, seed: int):
        if int(seed) != seed or seed < 0:
            raise InvalidInputError(f"seed must be a non-negative integer, got {seed!r}")
        self.seed = int(seed) & _MASK64
        self.counter = 0

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, counter={self.counter})"

    def next_uint64(self, size: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + 1 + size, dtype=np.uint64)
        self.counter += size
        with np.errstate(over="ignore"):
            states = np.uint64(self.seed) + idx * _GOLDEN_GAMMA
        return splitmix64(states)

    def uniform(self, size: int | None = None):
        k = 1 if size is None else int(size)
        z = self.next_uint64(k)
        u = ((z >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53
        return float(u[0]) if size is None else u

    def normal(self, size: int | None = None):
        """Standard normal variates by Box-Muller.

        Uniforms are consumed in pairs (u1, u2); each pair yields
        ``sqrt(-2 ln u1) cos(2 pi u2)`` followed by the matching sine variate.
        A request for an odd count discards the last sine variate.
        """
        k = 1 if size is None else int(size)
        pairs = (k + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log(u[:, 0]))
        theta = 2.0 * np.pi * u[:, 1]
        z = np.column_stack((r * np.cos(theta), r * np.sin(theta))).ravel()[:k]
        return float(z[0]) if size is None else z


def draw_normal(stream: RandomStream) -> float:
    """One standard normal variate (consumes two uniforms)."""
    return stream.normal()
