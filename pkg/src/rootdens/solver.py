"""Maximum-likelihood fit of the state vector.

The likelihood equation for a real psi function is the fixed point

    c_i = (1/n) sum_k phi_i(x_k) / psi(x_k),

which is solved by the relaxed iteration

    c <- alpha c + (1 - alpha) (1/n) sum_k phi(x_k) / psi(x_k)

followed by renormalisation.  Near the solution the error is multiplied by
``A = alpha E - (1 - alpha) R / n`` where ``R_ij = sum_k phi_i phi_j / p(x_k)``;
the worst-case shrinkage of the squared error is the smallest eigenvalue of
``E - A^T A`` which depends only on the extreme eigenvalues of R.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from . import numerics
from .basis import (
    HERMITE,
    HISTOGRAM,
    IDENTITY,
    AffineTransform,
    BasisSpec,
    bin_counts,
    equal_width_edges,
    standardize,
)
from .core import StateVector, fix_sign
from .errors import InvalidInputError, NonContractingError

log = logging.getLogger(__name__)

FLOOR_WARN_FRACTION = 0.10


@dataclass(frozen=True)
class FitConfig:
    """Options for :func:`fit`.

    ``alpha="auto"`` recomputes the maximin iteration parameter from the
    current R matrix at every step.  ``initial=None`` picks the ground state
    for the Hermite basis and the square-root histogram for the histogram
    basis.  ``affine`` overrides the automatic standardisation, which is
    useful when several samples must share one coordinate frame.
    """

    basis: Literal["hermite", "histogram"] = HERMITE
    alpha: Union[Literal["auto"], float] = "auto"
    max_iterations: int = 200
    tolerance: float = 1e-8
    density_floor: float = 1e-12
    initial: Literal["ground_state", "histogram_seeded", None] = None
    standardize: bool = True
    affine: AffineTransform | None = None

    def __post_init__(self):
        if self.alpha != "auto" and not 0.0 < float(self.alpha) < 1.0:
            raise InvalidInputError(f"fixed alpha must lie in (0, 1), got {self.alpha!r}")
        if self.basis not in (HERMITE, HISTOGRAM):
            raise InvalidInputError(f"unknown basis {self.basis!r}")
        if self.initial not in ("ground_state", "histogram_seeded", None):
            raise InvalidInputError(f"unknown initial state {self.initial!r}")
        if self.max_iterations < 1 or self.tolerance <= 0 or self.density_floor <= 0:
            raise InvalidInputError("max_iterations, tolerance and density_floor must be positive")


@dataclass(frozen=True)
class FitReport:
    state: StateVector
    n: int
    iterations: int
    converged: bool
    alpha_used: float
    alpha_opt: float
    alpha_crit: float
    lambda_min: float
    r_extremes: tuple[float, float]
    loglik: float
    residual: float
    loglik_trace: tuple[float, ...] = ()
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def diagnostics(self) -> dict:
        return {
            "n": self.n,
            "iterations": self.iterations,
            "converged": self.converged,
            "alpha_used": self.alpha_used,
            "alpha_opt": self.alpha_opt,
            "alpha_crit": self.alpha_crit,
            "lambda_min": self.lambda_min,
            "r_min": self.r_extremes[0],
            "r_max": self.r_extremes[1],
            "loglik": self.loglik,
            "residual": self.residual,
            "warnings": list(self.warnings),
        }


def _sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise InvalidInputError("sample is empty")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("sample contains non-finite values")
    return x


def _clamp_psi(psi: np.ndarray, density_floor: float) -> tuple[np.ndarray, int]:
    """Keep |psi| >= sqrt(floor), preserving sign; returns the number clamped."""
    floor = math.sqrt(density_floor)
    small = np.abs(psi) < floor
    if small.any():
        psi = np.where(small, np.where(psi < 0, -floor, floor), psi)
    return psi, int(small.sum())


def psi_eval(state: StateVector, x):
    """psi(x) = sum_i c_i phi_i(z), z the standardised abscissa (no Jacobian)."""
    vals = state.coefficients @ state.basis.evaluate(x)
    return vals if np.ndim(x) else float(vals[0])


def density_eval(state: StateVector, x):
    """p(x) = psi(x)^2 / scale, a density in data units."""
    vals = (state.coefficients @ state.basis.evaluate(x)) ** 2 * state.basis.affine.jacobian
    return vals if np.ndim(x) else float(vals[0])


def _r_matrix(phi: np.ndarray, psi: np.ndarray, density_floor: float) -> tuple[np.ndarray, int]:
    p = psi * psi
    floored = p < density_floor
    p = np.maximum(p, density_floor)
    r = (phi / p) @ phi.T
    return 0.5 * (r + r.T), int(floored.sum())


def build_r(sample, state: StateVector, density_floor: float = 1e-12) -> np.ndarray:
    """R_ij = sum_k phi_i(x_k) phi_j(x_k) / p(x_k), densities floored at ``density_floor``."""
    x = _sample(sample)
    phi = state.basis.evaluate(x)
    psi = state.coefficients @ phi
    r, floored = _r_matrix(phi, psi, density_floor)
    if floored > FLOOR_WARN_FRACTION * x.size:
        log.warning("%d of %d points sit at the density floor; R is ill-conditioned", floored, x.size)
    return r


def _mean_ratio(phi: np.ndarray, c: np.ndarray, density_floor: float) -> tuple[np.ndarray, int]:
    psi, clamped = _clamp_psi(c @ phi, density_floor)
    return (phi / psi).mean(axis=1), clamped


def _step(c: np.ndarray, phi: np.ndarray, alpha: float, density_floor: float) -> np.ndarray:
    g, _ = _mean_ratio(phi, c, density_floor)
    new = alpha * c + (1.0 - alpha) * g
    return fix_sign(new / np.linalg.norm(new))


def iterate_step(state: StateVector, sample, alpha: float, density_floor: float = 1e-12) -> StateVector:
    """One relaxed fixed-point step followed by renormalisation and sign fixing."""
    if not 0.0 <= alpha < 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1), got {alpha!r}")
    x = _sample(sample)
    phi = state.basis.evaluate(x)
    return StateVector(_step(state.coefficients, phi, alpha, density_floor), state.basis)


def fixed_point_residual(sample, state: StateVector, density_floor: float = 1e-12) -> float:
    """max_i |(1/n) sum_k phi_i(x_k)/psi(x_k) - c_i|."""
    phi = state.basis.evaluate(_sample(sample))
    g, _ = _mean_ratio(phi, state.coefficients, density_floor)
    return float(np.max(np.abs(g - state.coefficients)))


def contraction_spectrum(alpha: float, r_eigs, n: float) -> np.ndarray:
    """Eigenvalues of the contracting matrix B = E - A^T A for each eigenvalue of R."""
    r = np.asarray(r_eigs, dtype=float) / n
    return 1.0 - alpha**2 + 2.0 * alpha * (1.0 - alpha) * r - (1.0 - alpha) ** 2 * r**2


def optimal_alpha(r_min: float, r_max: float, n: float) -> float:
    """Maximin iteration parameter D/(2n + D), D = r_max + r_min."""
    if r_max < r_min or r_min < 0:
        raise InvalidInputError(f"need r_max >= r_min >= 0, got ({r_min}, {r_max})")
    d = r_max + r_min
    return d / (2.0 * n + d)


def critical_alpha(r_max: float, n: float) -> float:
    """Stability threshold (xi - 1)/(xi + 1) with xi = r_max / n; 0 when xi <= 1."""
    if n <= 0:
        raise InvalidInputError(f"sample size must be positive, got {n}")
    xi = r_max / n
    return (xi - 1.0) / (xi + 1.0) if xi > 1.0 else 0.0


def iterations_for(k0: float, lambda_min: float) -> int:
    """Steps needed to shrink the error distance by a factor exp(k0)."""
    if lambda_min <= 0:
        raise NonContractingError(f"lambda_min = {lambda_min!r}: the iteration is not contracting")
    if k0 <= 0:
        return 0
    if lambda_min >= 1.0:
        return 1
    return max(1, math.ceil(-2.0 * k0 / math.log(1.0 - lambda_min)))


def loglik(sample, state: StateVector, density_floor: float = 1e-12) -> float:
    """sum_k ln p(x_k) with p in data units and floored at ``density_floor``."""
    p = np.atleast_1d(density_eval(state, _sample(sample)))
    return float(np.sum(np.log(np.maximum(p, density_floor))))


def _seed_from_histogram(x: np.ndarray, basis: BasisSpec) -> np.ndarray:
    """Project the square root of a histogram density onto the basis."""
    if basis.kind == HISTOGRAM:
        counts = bin_counts(basis.edges, x)
        return np.sqrt(counts / x.size)
    z = basis.affine.forward(x)
    bins = max(basis.size, int(math.ceil(math.sqrt(x.size))))
    edges, counts = equal_width_edges(z, bins)
    heights = np.sqrt(counts / (x.size * np.diff(edges)))
    coeffs = np.empty(basis.size)
    panels = 40 * (len(edges) - 1)
    for i in range(basis.size):
        def integrand(t, i=i):
            idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(counts) - 1)
            return basis.evaluate(basis.affine.backward(t))[i] * heights[idx]

        coeffs[i] = numerics.integrate(integrand, float(edges[0]), float(edges[-1]), panels)
    return coeffs


def make_basis(x: np.ndarray, s: int, config: FitConfig) -> tuple[BasisSpec, list[str]]:
    notes = []
    if config.basis == HISTOGRAM:
        edges, _ = equal_width_edges(x, s)
        if len(edges) - 1 < s:
            notes.append(f"rebinned from {s} to {len(edges) - 1} bins so that every bin is occupied")
        return BasisSpec.histogram(edges), notes
    if config.affine is not None:
        affine = config.affine
    elif config.standardize:
        affine, _ = standardize(x)
    else:
        affine = IDENTITY
    return BasisSpec.hermite(s, affine), notes


def fit(sample, s: int, config: FitConfig = FitConfig(), start: StateVector | None = None) -> FitReport:
    """Maximum-likelihood state vector for ``sample`` with ``s`` basis functions.

    Never raises on non-convergence; inspect ``report.converged``.
    """
    x = _sample(sample)
    n = x.size
    if int(s) != s or s < 1:
        raise InvalidInputError(f"harmonic count must be a positive integer, got {s!r}")
    if n <= s:
        raise InvalidInputError(f"need more points than harmonics (n={n}, s={s})")

    if start is not None:
        basis, notes = start.basis, []
        c = start.coefficients.copy()
    else:
        basis, notes = make_basis(x, int(s), config)
        initial = config.initial or ("histogram_seeded" if basis.kind == HISTOGRAM else "ground_state")
        if initial == "ground_state":
            c = np.zeros(basis.size)
            c[0] = 1.0
        else:
            c = fix_sign(_seed_from_histogram(x, basis))
            c /= np.linalg.norm(c)

    phi = basis.evaluate(x)
    floor = config.density_floor
    auto = config.alpha == "auto"
    alpha = float("nan") if auto else float(config.alpha)
    trace = []
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        if auto:
            psi = c @ phi
            r, _ = _r_matrix(phi, psi, floor)
            w, _ = numerics.eigen_sym(r)
            alpha = optimal_alpha(max(w[-1], 0.0), w[0], n)
        new = _step(c, phi, alpha, floor)
        delta = float(np.max(np.abs(new - c)))
        c = new
        p = (c @ phi) ** 2 * basis.affine.jacobian
        trace.append(float(np.sum(np.log(np.maximum(p, floor)))))
        if not np.isfinite(delta):
            notes.append("iteration produced non-finite coefficients")
            break
        if delta <= config.tolerance:
            converged = True
            break

    psi = c @ phi
    r, floored = _r_matrix(phi, psi, floor)
    w, _ = numerics.eigen_sym(r)
    r_min, r_max = float(w[-1]), float(w[0])
    g, _ = _mean_ratio(phi, c, floor)
    residual = float(np.max(np.abs(g - c)))
    if converged and residual > 10.0 * config.tolerance:
        converged = False
        notes.append(f"step converged but fixed-point residual {residual:.2e} exceeds 10 x tolerance")
    if floored > FLOOR_WARN_FRACTION * n:
        notes.append(f"ill-conditioned fit: {floored} of {n} points at the density floor")
    spectrum = contraction_spectrum(alpha, w, n)
    state = StateVector(c, basis)
    report = FitReport(
        state=state,
        n=n,
        iterations=iterations,
        converged=converged,
        alpha_used=float(alpha),
        alpha_opt=optimal_alpha(max(r_min, 0.0), r_max, n),
        alpha_crit=critical_alpha(r_max, n),
        lambda_min=float(np.min(spectrum)),
        r_extremes=(r_min, r_max),
        loglik=trace[-1] if trace else loglik(x, state, floor),
        residual=residual,
        loglik_trace=tuple(trace),
        warnings=tuple(notes),
    )
    if not converged:
        log.info("fit did not converge after %d iterations (s=%d, n=%d)", iterations, basis.size, n)
    return report
