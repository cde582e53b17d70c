"""Monte Carlo comparison of the root, kernel and series estimators on
Gaussian mixtures, plus the contraction profile of the iteration.

Trial seeds are split from a master seed with SplitMix64 so that any single
(mixture, trial) cell can be re-run in isolation:

    seed(master, m, t) = splitmix64(master + (1 + m * 2**32 + t) * 0x9E3779B97F4A7C15)
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .baselines import chentsov_density, kernel_density, l1_discrepancy
from .core import StateVector
from .errors import InvalidInputError, RootDensError
from .numerics import RandomStream, splitmix64
from .selection import select_harmonics
from .solver import FitConfig, contraction_spectrum, critical_alpha, density_eval, fit, optimal_alpha

log = logging.getLogger(__name__)

ESTIMATORS = ("root", "kernel", "series")
PANELS_PER_UNIT = 200
_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class MixtureSpec:
    """Gaussian mixture with unit-deviation components."""

    means: tuple[float, ...]
    weights: tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        m = tuple(float(v) for v in self.means)
        w = tuple(float(v) for v in self.weights)
        if not m or len(m) != len(w):
            raise InvalidInputError("means and weights must be non-empty and of equal length")
        if any(v <= 0 for v in w) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise InvalidInputError(f"weights must be positive and sum to 1, got {w}")
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "weights", w)
        if not self.name:
            object.__setattr__(self, "name", "mix(" + ",".join(f"{a:g}:{b:g}" for a, b in zip(m, w)) + ")")

    def support(self) -> tuple[float, float]:
        """Integration range for the discrepancy: +-(max|mean| + 8)."""
        half = max(abs(v) for v in self.means) + 8.0
        return -half, half


TABLE1_MIXTURES = (
    MixtureSpec((0.0, 3.0), (0.7, 0.3), "m1"),
    MixtureSpec((0.0, 3.0), (0.5, 0.5), "m2"),
    MixtureSpec((0.0, 3.0, -3.0), (0.5, 0.25, 0.25), "m3"),
)

# Published mean (sd) discrepancies, n = 200, 100 trials.
PUBLISHED_TABLE1 = {
    "m1": {"root": (0.0978, 0.033), "kernel": (0.136, None), "series": (0.151, None)},
    "m2": {"root": (0.106, 0.035), "kernel": (0.143, None), "series": (0.147, None)},
    "m3": {"root": (0.119, 0.030), "kernel": (0.147, None), "series": (0.169, None)},
}


def mixture_pdf(spec: MixtureSpec, x):
    """sum_i w_i N(x; mu_i, 1)."""
    scalar = np.ndim(x) == 0
    t = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(t.shape)
    for mu, w in zip(spec.means, spec.weights):
        out += w * np.exp(-0.5 * (t - mu) ** 2)
    out /= math.sqrt(2.0 * math.pi)
    return float(out[0]) if scalar else out


def sample_mixture(spec: MixtureSpec, n: int, stream: RandomStream) -> np.ndarray:
    """n component uniforms are drawn first, then n normal deviates."""
    if int(n) != n or n < 1:
        raise InvalidInputError(f"sample size must be a positive integer, got {n!r}")
    u = stream.uniform(int(n))
    cum = np.cumsum(spec.weights)
    cum[-1] = 1.0
    comp = np.searchsorted(cum, u, side="right")
    comp = np.minimum(comp, len(spec.means) - 1)
    return np.asarray(spec.means)[comp] + stream.normal(int(n))


def sample_state(state: StateVector, n: int, stream: RandomStream, batch: int | None = None) -> np.ndarray:
    """Draw n points from the density psi^2 of ``state`` by rejection.

    The envelope is N(0, sigma^2) in basis coordinates with sigma = sqrt(s) + 1,
    which has heavier tails than any s-term Hermite density.  The bound M is
    1.1 times the largest density ratio on a fine grid.
    """
    if int(n) != n or n < 1:
        raise InvalidInputError(f"sample size must be a positive integer, got {n!r}")
    basis = state.basis
    if basis.kind != "hermite":
        raise InvalidInputError("sample_state supports the hermite basis only")
    sigma = math.sqrt(state.s) + 1.0
    grid = np.linspace(-12.0 * sigma, 12.0 * sigma, 20001)
    p = (state.coefficients @ basis.evaluate(basis.affine.backward(grid))) ** 2
    g = np.exp(-0.5 * (grid / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
    bound = 1.1 * float(np.max(p / g))
    out: list[np.ndarray] = []
    have = 0
    size = batch or max(64, 2 * int(n))
    while have < n:
        z = sigma * stream.normal(size)
        u = stream.uniform(size)
        pz = (state.coefficients @ basis.evaluate(basis.affine.backward(z))) ** 2
        gz = np.exp(-0.5 * (z / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
        keep = z[u * bound * gz < pz]
        out.append(keep)
        have += keep.size
    return basis.affine.backward(np.concatenate(out)[: int(n)])


def trial_seed(master: int, mixture_idx: int, trial: int) -> int:
    """Independent per-cell seed; see the module docstring for the rule."""
    if min(master, mixture_idx, trial) < 0:
        raise InvalidInputError("seeds and indices must be non-negative")
    counter = (1 + (mixture_idx << 32) + trial) & _MASK64
    state = (int(master) + counter * _GOLDEN) & _MASK64
    return int(splitmix64(state)[0])


@dataclass(frozen=True)
class TrialRow:
    mixture: str
    estimator: str
    trial: int
    delta: float


@dataclass(frozen=True)
class BenchResult:
    """Aggregate of one (mixture, estimator) cell over its successful trials."""

    mixture: str
    estimator: str
    mean: float
    sd: float
    trials: int
    failures: int
    seed: int
    runtime: float
    nonconverged: int = 0


@dataclass
class Table1Run:
    results: list[BenchResult]
    rows: list[TrialRow]
    config: dict = field(default_factory=dict)

    def cell(self, mixture: str, estimator: str) -> BenchResult:
        for r in self.results:
            if r.mixture == mixture and r.estimator == estimator:
                return r
        raise KeyError((mixture, estimator))


def _deltas_for_trial(spec: MixtureSpec, x: np.ndarray, s: int, auto_s: bool, s_max: int):
    if auto_s:
        report = select_harmonics(x, s_max=s_max).report
    else:
        report = fit(x, s, FitConfig())
    state = report.state
    affine = state.basis.affine
    lo, hi = spec.support()
    panels = int(PANELS_PER_UNIT * (hi - lo))

    def truth(t):
        return mixture_pdf(spec, t)

    deltas = {
        "root": l1_discrepancy(lambda t: density_eval(state, t), truth, (lo, hi), panels),
        "kernel": l1_discrepancy(lambda t: kernel_density(x, t), truth, (lo, hi), panels),
        "series": l1_discrepancy(lambda t: chentsov_density(x, state.s, t, affine), truth, (lo, hi), panels),
    }
    return deltas, report.converged


def run_table1(
    trials: int = 100,
    n: int = 200,
    seed: int = 0,
    s: int = 9,
    auto_s: bool = False,
    s_max: int = 24,
    mixtures: tuple[MixtureSpec, ...] = TABLE1_MIXTURES,
) -> Table1Run:
    """Discrepancy of each estimator over ``trials`` samples of size ``n`` per mixture.

    A trial whose fit raises is logged, counted as a failure and excluded
    from every estimator's aggregate, so all three use the same samples.
    """
    if trials < 1 or n < 2:
        raise InvalidInputError("need trials >= 1 and n >= 2")
    results: list[BenchResult] = []
    rows: list[TrialRow] = []
    for m_idx, spec in enumerate(mixtures):
        start = time.perf_counter()
        per: dict[str, list[float]] = {e: [] for e in ESTIMATORS}
        failures = 0
        nonconv = 0
        for t in range(trials):
            stream = RandomStream(trial_seed(seed, m_idx, t))
            x = sample_mixture(spec, n, stream)
            try:
                deltas, ok = _deltas_for_trial(spec, x, s, auto_s, s_max)
            except RootDensError as exc:
                log.warning("mixture %s trial %d failed: %s", spec.name, t, exc)
                failures += 1
                continue
            nonconv += not ok
            for e in ESTIMATORS:
                per[e].append(deltas[e])
                rows.append(TrialRow(spec.name, e, t, deltas[e]))
        elapsed = time.perf_counter() - start
        for e in ESTIMATORS:
            d = np.asarray(per[e])
            mean = float(d.mean()) if d.size else float("nan")
            sd = float(d.std(ddof=1)) if d.size > 1 else 0.0
            results.append(BenchResult(spec.name, e, mean, sd, int(d.size), failures, seed, elapsed, nonconv))
    config = {
        "trials": trials,
        "n": n,
        "seed": seed,
        "s": s,
        "auto_s": auto_s,
        "s_max": s_max,
        "supports": {spec.name: list(spec.support()) for spec in mixtures},
    }
    return Table1Run(results, rows, config)


@dataclass(frozen=True)
class ConvergenceProfile:
    alphas: np.ndarray
    lambda_min: np.ndarray
    alpha_opt: float
    alpha_crit: float
    r_extremes: tuple[float, float]
    n: int

    def pairs(self) -> list[tuple[float, float]]:
        return [(float(a), float(v)) for a, v in zip(self.alphas, self.lambda_min)]


def convergence_profile(sample, s: int, alphas=None, config: FitConfig = FitConfig()) -> ConvergenceProfile:
    """lambda_min(alpha) from the extreme eigenvalues of R at the fitted solution."""
    report = fit(sample, s, config)
    r_min, r_max = report.r_extremes
    n = report.n
    a = np.linspace(0.0, 1.0, 201) if alphas is None else np.asarray(alphas, dtype=float).ravel()
    lam = np.array([float(np.min(contraction_spectrum(v, [max(r_min, 0.0), r_max], n))) for v in a])
    return ConvergenceProfile(a, lam, optimal_alpha(max(r_min, 0.0), r_max, n), critical_alpha(r_max, n), (r_min, r_max), n)


# --- output -----------------------------------------------------------------------


def write_rows_csv(rows: list[TrialRow], path) -> None:
    """Columns mixture, estimator, trial, delta; floats written with repr for exactness."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mixture", "estimator", "trial", "delta"])
        for r in rows:
            w.writerow([r.mixture, r.estimator, r.trial, repr(r.delta)])


def write_profile_csv(profile: ConvergenceProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "lambda_min"])
        for a, v in profile.pairs():
            w.writerow([repr(a), repr(v)])


def summary_dict(run: Table1Run) -> dict:
    cells = []
    for r in run.results:
        ref = PUBLISHED_TABLE1.get(r.mixture, {}).get(r.estimator)
        d = asdict(r)
        d["published_mean"] = ref[0] if ref else None
        d["published_sd"] = ref[1] if ref else None
        cells.append(d)
    return {"config": run.config, "cells": cells}


def write_summary_json(run: Table1Run, path) -> None:
    Path(path).write_text(json.dumps(summary_dict(run), indent=2, sort_keys=True) + "\n")
