"""Choosing the number of harmonics.

The mean squared error of an s-term estimate is modelled as

    F(s) = (s - 1) / 4n + Q(s),   Q(s) = sum_{i >= s} c_i^2,

the first term being statistical noise and the second truncation error.  Q is
estimated from a single fit at a generous order ``s_max`` and smoothed by a
power law ``Q = f / s^r`` fitted on log-log axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import HISTOGRAM
from .errors import InvalidInputError
from .solver import FitConfig, FitReport, fit


@dataclass(frozen=True)
class TailModel:
    """Power-law tail ``Q(s) = f / s**r`` fitted over ``fit_range`` (inclusive).

    ``residual`` is the RMS of the log-log regression.
    """

    f: float
    r: float
    fit_range: tuple[int, int]
    residual: float

    def __post_init__(self):
        if not self.f > 0:
            raise InvalidInputError(f"tail amplitude must be positive, got {self.f!r}")

    def q(self, s):
        return self.f / np.asarray(s, dtype=float) ** self.r


def tail_energy(coeffs, s: int) -> float:
    """Q(s) = sum of c_i^2 for i = s .. s_max - 1."""
    c = np.asarray(coeffs, dtype=float)
    if not 0 <= s <= c.size:
        raise InvalidInputError(f"cut {s} outside 0..{c.size}")
    return float(np.sum(c[s:] ** 2))


def tail_curve(coeffs) -> np.ndarray:
    """Q(s) for s = 0 .. s_max as one array."""
    c2 = np.asarray(coeffs, dtype=float) ** 2
    return np.concatenate((np.cumsum(c2[::-1])[::-1], [0.0]))


def fit_tail(coeffs, fit_range: tuple[int, int] | None = None, cuts=None) -> TailModel:
    """Least-squares line ln Q = ln f - r ln s over the cuts in ``fit_range``.

    Cuts where Q vanishes are dropped; at least two must remain.
    The default range is ``[max(1, s_max // 4), s_max]``.  An explicit
    sequence of ``cuts`` overrides the range.
    """
    c = np.asarray(coeffs, dtype=float)
    s_max = c.size
    q = tail_curve(c)
    if cuts is not None:
        candidates = sorted({int(v) for v in cuts})
        if any(not 1 <= v <= s_max for v in candidates):
            raise InvalidInputError(f"cuts must lie in 1..{s_max}")
        lo, hi = (candidates[0], candidates[-1]) if candidates else (1, 0)
    else:
        lo, hi = fit_range if fit_range is not None else (max(1, s_max // 4), s_max)
        lo, hi = max(1, int(lo)), min(s_max, int(hi))
        candidates = range(lo, hi + 1)
    used = np.array([s for s in candidates if q[s] > 0.0])
    if used.size < 2:
        raise InvalidInputError(f"need two cuts with Q(s) > 0 in [{lo}, {hi}] to fit a tail")
    design = np.column_stack((np.ones(used.size), -np.log(used)))
    y = np.log(q[used])
    (log_f, r), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ np.array([log_f, r])
    return TailModel(math.exp(log_f), float(r), (int(used[0]), int(used[-1])), float(np.sqrt(np.mean(resid**2))))


def risk(s, n: float, model: TailModel):
    """Expected squared L2 error of the psi function: (s - 1)/4n + f/s^r."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 1):
        raise InvalidInputError("harmonic count must be >= 1")
    val = (s_arr - 1.0) / (4.0 * n) + model.q(s_arr)
    return float(val) if np.ndim(s) == 0 else val


def optimal_s(n: float, model: TailModel, s_max: int | None = None) -> int:
    """Integer minimiser of the risk near s* = (4 r f n)^(1/(r+1)).

    The risk is convex in s for r > 0, so the best integer is floor or ceil of
    s*; both are tried.  A non-decaying tail (r <= 0) gives ``s_max``.
    """
    if model.r <= 0:
        if s_max is None:
            raise InvalidInputError("tail does not decay (r <= 0); cannot place an optimum")
        return int(s_max)
    star = (4.0 * model.r * model.f * n) ** (1.0 / (model.r + 1.0))
    hi = s_max if s_max is not None else math.inf
    candidates = {int(min(max(1, v), hi)) for v in (math.floor(star), math.ceil(star))}
    return min(sorted(candidates), key=lambda s: risk(s, n, model))


def threshold_rule(coeffs, n: float, window: int = 3) -> int:
    """Smallest s after which ``window`` consecutive c_i^2 are all <= 1/4n.

    A run is required so that isolated zeros from symmetry do not stop the
    expansion early.  Returns s_max when no such run exists.
    """
    if window < 1:
        raise InvalidInputError(f"window must be >= 1, got {window}")
    c2 = np.asarray(coeffs, dtype=float) ** 2
    below = c2 <= 1.0 / (4.0 * n)
    for s in range(1, c2.size - window + 1):
        if below[s : s + window].all():
            return s
    return int(c2.size)


@dataclass(frozen=True)
class Selection:
    """Outcome of :func:`select_harmonics`; ``coefficients`` come from the fit at s_max."""

    s_opt: int
    report: FitReport
    tail: TailModel
    coefficients: np.ndarray
    n: int

    def risk_curve(self) -> tuple[np.ndarray, np.ndarray]:
        s = np.arange(1, self.coefficients.size + 1)
        return s, risk(s, self.n, self.tail)

    def rectified_tail(self) -> tuple[np.ndarray, np.ndarray]:
        """(ln s, ln Q(s)) for the cuts where Q > 0."""
        q = tail_curve(self.coefficients)
        s = np.array([k for k in range(1, self.coefficients.size + 1) if q[k] > 0])
        return np.log(s), np.log(q[s])


def select_harmonics(
    sample,
    s_max: int = 24,
    config: FitConfig = FitConfig(),
    fit_range: tuple[int, int] | None = None,
) -> Selection:
    """Fit at ``s_max``, model the tail, pick the min-risk order and refit there.

    Coefficients of the exploratory fit are reused for every candidate s
    rather than refitting at each order.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if config.basis == HISTOGRAM:
        raise InvalidInputError("harmonic selection needs a basis ordered by complexity (hermite)")
    if s_max < 2 or s_max > x.size / 2:
        raise InvalidInputError(f"s_max must lie in 2..n/2 = {x.size // 2}, got {s_max}")
    explore = fit(x, s_max, config)
    coeffs = explore.state.coefficients
    tail = fit_tail(coeffs, fit_range)
    s_opt = optimal_s(x.size, tail, s_max)
    report = explore if s_opt == s_max else fit(x, s_opt, config)
    return Selection(s_opt, report, tail, np.array(coeffs), int(x.size))
