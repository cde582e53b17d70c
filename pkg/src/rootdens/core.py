"""The state vector: unit-norm coefficients of a psi-function expansion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec
from .errors import IncompatibleStatesError, InvalidInputError

NORM_TOL = 1e-10


def fix_sign(c: np.ndarray) -> np.ndarray:
    """Flip ``c`` so that its first non-negligible coefficient is positive.

    c and -c describe the same density; downstream statistics only use
    squared scalar products, so this choice is purely cosmetic.
    """
    c = np.asarray(c, dtype=float)
    nz = np.flatnonzero(np.abs(c) > 1e-14 * max(1.0, float(np.max(np.abs(c)))))
    if nz.size and c[nz[0]] < 0:
        return -c
    return c


@dataclass(frozen=True, eq=False)
class StateVector:
    """Coefficients ``c_0 .. c_{s-1}`` with ``sum c_i^2 = 1`` in a given basis."""

    coefficients: np.ndarray
    basis: BasisSpec

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float, copy=True).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        if c.size != self.basis.size:
            raise InvalidInputError(f"{c.size} coefficients for a basis of size {self.basis.size}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("state vector has non-finite coefficients")
        if abs(float(c @ c) - 1.0) > NORM_TOL:
            raise InvalidInputError(f"state vector is not unit norm: |c|^2 = {float(c @ c)!r}")

    @classmethod
    def from_raw(cls, coefficients, basis: BasisSpec) -> "StateVector":
        """Normalise and sign-fix arbitrary (non-zero) coefficients."""
        c = np.asarray(coefficients, dtype=float).ravel()
        norm = float(np.linalg.norm(c))
        if norm == 0.0 or not np.isfinite(norm):
            raise InvalidInputError("cannot normalise a zero or non-finite vector")
        return cls(fix_sign(c / norm), basis)

    @classmethod
    def ground(cls, basis: BasisSpec) -> "StateVector":
        c = np.zeros(basis.size)
        c[0] = 1.0
        return cls(c, basis)

    @property
    def s(self) -> int:
        return self.coefficients.size

    def with_coefficients(self, coefficients) -> "StateVector":
        return StateVector.from_raw(coefficients, self.basis)

    def overlap(self, other: "StateVector") -> float:
        """Scalar product (c, c') after checking both live in the same basis."""
        check_compatible(self, other)
        return float(self.coefficients @ other.coefficients)

    def __repr__(self) -> str:
        coeffs = np.array2string(self.coefficients, precision=4, separator=", ")
        return f"StateVector(s={self.s}, basis={self.basis.kind}, c={coeffs})"


def check_compatible(a: StateVector, b: StateVector) -> None:
    if not a.basis.compatible(b.basis):
        raise IncompatibleStatesError(
            f"state vectors live in different bases: {a.basis!r} vs {b.basis!r}"
        )
