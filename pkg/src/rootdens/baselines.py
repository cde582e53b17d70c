"""Reference estimators and the L1 discrepancy used to compare them.

* Gaussian kernel estimator with bandwidth h = sd * n^(-1/5).
* Orthogonal-series estimator b_i = mean phi_i(x_k), p = sum b_i phi_i.  It is
  returned unclipped; negative lobes are part of what is being compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import IDENTITY, AffineTransform, BasisSpec
from .errors import DegenerateSampleError, InvalidInputError
from .numerics import integrate

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_KERNEL_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class DensityCurve:
    """Density values on a strictly increasing grid (values may be negative)."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if g.size != v.size:
            raise InvalidInputError(f"grid has {g.size} points but values has {v.size}")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise InvalidInputError("grid must be strictly increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def mass(self) -> float:
        return float(np.trapezoid(self.values, self.grid))


def _finite_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise InvalidInputError("sample must be non-empty and finite")
    return x


def kernel_bandwidth(sample) -> float:
    """sd(ddof=1) * n^(-1/5)."""
    x = _finite_sample(sample)
    if x.size < 2:
        raise DegenerateSampleError("kernel bandwidth needs at least two points")
    h = float(np.std(x, ddof=1)) * x.size ** -0.2
    if h == 0.0:
        raise DegenerateSampleError("sample deviation is zero; kernel bandwidth vanishes")
    return h


def kernel_density(sample, x, bandwidth: float | None = None):
    """(1 / n h) sum_k K((x - x_k) / h) with a standard normal K."""
    data = _finite_sample(sample)
    h = kernel_bandwidth(data) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise InvalidInputError(f"bandwidth must be positive, got {h!r}")
    scalar = np.ndim(x) == 0
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(pts.size)
    for lo in range(0, pts.size, _KERNEL_CHUNK):
        u = (pts[lo : lo + _KERNEL_CHUNK, None] - data[None, :]) / h
        out[lo : lo + _KERNEL_CHUNK] = np.exp(-0.5 * u * u).sum(axis=1)
    out /= data.size * h * _SQRT_2PI
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def chentsov_coefficients(sample, s: int, transform: AffineTransform = IDENTITY) -> np.ndarray:
    """b_i = (1/n) sum_k phi_i(z_k) with z = transform.forward(x)."""
    x = _finite_sample(sample)
    if int(s) != s or s < 1:
        raise InvalidInputError(f"harmonic count must be a positive integer, got {s!r}")
    return BasisSpec.hermite(int(s), transform).evaluate(x).mean(axis=1)


def chentsov_density(sample, s: int, x, transform: AffineTransform = IDENTITY):
    """sum_i b_i phi_i(z) / scale, in data units and not clipped at zero."""
    b = chentsov_coefficients(sample, s, transform)
    scalar = np.ndim(x) == 0
    phi = BasisSpec.hermite(int(s), transform).evaluate(np.atleast_1d(x))
    vals = (b @ phi) * transform.jacobian
    return float(vals[0]) if scalar else vals.reshape(np.shape(x))


def l1_discrepancy(
    estimate: Callable, truth: Callable, support: tuple[float, float], panels: int = 4000
) -> float:
    """Trapezoid approximation of the integral of |estimate - truth| over ``support``."""
    a, b = support
    return integrate(lambda t: np.abs(np.asarray(estimate(t)) - np.asarray(truth(t))), float(a), float(b), panels)
