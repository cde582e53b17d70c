"""Density matrices: pure states, mixtures and merging of homogeneous samples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec
from .core import StateVector, check_compatible, fix_sign
from .errors import IncompatibleStatesError, InvalidDensityMatrixError, InvalidInputError, TieError
from .numerics import as_symmetric, eigen_sym

TRACE_TOL = 1e-10
SPECTRUM_TOL = 1e-10
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Real symmetric, non-negative, unit-trace matrix (optionally tied to a basis)."""

    matrix: np.ndarray
    basis: BasisSpec | None = None

    def __post_init__(self):
        try:
            m = as_symmetric(self.matrix)
        except InvalidInputError as exc:
            raise InvalidDensityMatrixError(str(exc)) from exc
        if abs(np.trace(m) - 1.0) > TRACE_TOL:
            raise InvalidDensityMatrixError(f"trace is {np.trace(m)!r}, not 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.basis is not None and self.basis.size != m.shape[0]:
            raise InvalidInputError(f"matrix of order {m.shape[0]} for a basis of size {self.basis.size}")

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        """Tr(rho^2); equals 1 exactly for pure states."""
        return float(np.sum(self.matrix * self.matrix))


def _same_order(a: DensityMatrix, b) -> None:
    if a.order != np.shape(b)[0]:
        raise IncompatibleStatesError(f"orders differ: {a.order} vs {np.shape(b)[0]}")


def pure_state(c: StateVector | np.ndarray) -> DensityMatrix:
    """rho_ij = c_i c_j."""
    if isinstance(c, StateVector):
        return DensityMatrix(np.outer(c.coefficients, c.coefficients), c.basis)
    v = np.asarray(c, dtype=float).ravel()
    return DensityMatrix(np.outer(v, v))


def mix(rho1: DensityMatrix, rho2: DensityMatrix, n1: float, n2: float) -> DensityMatrix:
    """Sample-size weighted mixture (n1 rho1 + n2 rho2) / (n1 + n2)."""
    _same_order(rho1, rho2.matrix)
    if rho1.basis is not None and rho2.basis is not None and not rho1.basis.compatible(rho2.basis):
        raise IncompatibleStatesError("density matrices live in different bases")
    if n1 < 0 or n2 < 0 or n1 + n2 <= 0:
        raise InvalidInputError(f"weights must be non-negative with a positive sum, got {n1}, {n2}")
    m = (n1 * rho1.matrix + n2 * rho2.matrix) / (n1 + n2)
    return DensityMatrix(m, rho1.basis if rho1.basis is not None else rho2.basis)


def spectral(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Weights (descending) and eigenvector columns; p(x) = sum_i w_i psi_i(x)^2."""
    w, v = eigen_sym(rho.matrix)
    if w[-1] < -SPECTRUM_TOL:
        raise InvalidDensityMatrixError(f"negative eigenvalue {w[-1]!r}")
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    return w, v


def merge_states(c1: StateVector, c2: StateVector, n1: float, n2: float) -> tuple[StateVector, float]:
    """Principal component of the joint density matrix of two samples.

    Returns the merged state (sign aligned with ``c1``) and the weight of
    the second component, which measures the disagreement of the two
    estimates.
    """
    check_compatible(c1, c2)
    rho = mix(pure_state(c1), pure_state(c2), n1, n2)
    w, v = spectral(rho)
    if w[0] - w[1] < TIE_TOL:
        raise TieError("the two leading weights coincide; the merged state is not unique")
    top = v[:, 0]
    if top @ c1.coefficients < 0:
        top = -top
    return StateVector(top / np.linalg.norm(top), c1.basis), float(w[1])


def merge_weights(c1: StateVector, c2: StateVector, n1: float, n2: float) -> tuple[float, float]:
    """Closed-form eigenvalues (1 +- sqrt(1 - 4k)) / 2, k = n1 n2 (1 - r^2) / (n1 + n2)^2."""
    r = c1.overlap(c2)
    k = n1 * n2 * (1.0 - r * r) / (n1 + n2) ** 2
    root = np.sqrt(max(1.0 - 4.0 * k, 0.0))
    return 0.5 * (1.0 + root), 0.5 * (1.0 - root)


def expectation(rho: DensityMatrix, a) -> float:
    """Tr(rho A)."""
    a = np.asarray(a, dtype=float)
    if a.shape != rho.matrix.shape:
        raise IncompatibleStatesError(f"operator shape {a.shape} does not match order {rho.order}")
    return float(np.sum(rho.matrix * a.T))


def density_operator_eval(rho: DensityMatrix, basis: BasisSpec, x, x1):
    """rho(x, x1) = sum rho_ij phi_i(x1) phi_j(x) in data units.

    On the diagonal this is the probability density, so the affine
    Jacobian is applied exactly as for a pure state.
    """
    if basis.size != rho.order:
        raise IncompatibleStatesError(f"basis size {basis.size} does not match order {rho.order}")
    scalar = np.ndim(x) == 0 and np.ndim(x1) == 0
    fx = basis.evaluate(np.atleast_1d(x))
    fx1 = basis.evaluate(np.atleast_1d(x1))
    vals = np.einsum("ik,ij,jk->k", fx1, rho.matrix, fx) * basis.affine.jacobian
    return float(vals[0]) if scalar else vals


def principal_state(rho: DensityMatrix) -> StateVector:
    """Leading eigenvector of ``rho`` as a state vector (requires a basis)."""
    if rho.basis is None:
        raise InvalidInputError("density matrix carries no basis")
    _, v = spectral(rho)
    return StateVector(fix_sign(v[:, 0]), rho.basis)
