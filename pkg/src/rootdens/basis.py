"""Orthonormal function families used to expand the psi function.

Two families are provided:

* Chebyshev-Hermite functions (harmonic-oscillator eigenfunctions), applied
  after an affine standardisation of the data;
* histogram indicator functions, ``1/sqrt(width)`` on each bin.

Also here: equal-width binning, the unitary DFT matrix and frequency-truncation
smoothing of histogram state vectors.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DegenerateSampleError, DegenerateSmoothingError, InvalidInputError

if TYPE_CHECKING:
    from .core import StateVector

HERMITE = "hermite"
HISTOGRAM = "histogram"
_PI_M14 = math.pi**-0.25


@dataclass(frozen=True)
class AffineTransform:
    """``z = (x - shift) / scale``; densities pick up a factor ``1/scale``."""

    shift: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.shift) and math.isfinite(self.scale)) or self.scale <= 0:
            raise InvalidInputError(f"affine transform needs finite shift and scale > 0, got {self}")

    def forward(self, x):
        return (np.asarray(x, dtype=float) - self.shift) / self.scale

    def backward(self, z):
        return np.asarray(z, dtype=float) * self.scale + self.shift

    @property
    def jacobian(self) -> float:
        return 1.0 / self.scale

    def is_identity(self) -> bool:
        return self.shift == 0.0 and self.scale == 1.0


IDENTITY = AffineTransform()


@dataclass(frozen=True)
class BasisSpec:
    """An evaluable orthonormal family of ``size`` functions.

    For ``kind="histogram"`` the bin ``edges`` are given in data units and the
    affine transform must be the identity.
    """

    kind: str
    size: int
    edges: tuple[float, ...] | None = None
    affine: AffineTransform = IDENTITY

    def __post_init__(self):
        if self.kind not in (HERMITE, HISTOGRAM):
            raise InvalidInputError(f"unknown basis kind {self.kind!r}")
        if int(self.size) != self.size or self.size < 1:
            raise InvalidInputError(f"basis size must be a positive integer, got {self.size!r}")
        if self.kind == HISTOGRAM:
            if self.edges is None or len(self.edges) != self.size + 1:
                raise InvalidInputError("histogram basis needs size + 1 edges")
            e = np.asarray(self.edges, dtype=float)
            if not np.all(np.isfinite(e)) or np.any(np.diff(e) <= 0):
                raise InvalidInputError("histogram edges must be finite and strictly increasing")
            if not self.affine.is_identity():
                raise InvalidInputError("histogram basis is defined in data units; affine must be identity")
        elif self.edges is not None:
            raise InvalidInputError("hermite basis takes no edges")

    @classmethod
    def hermite(cls, size: int, affine: AffineTransform = IDENTITY) -> "BasisSpec":
        return cls(HERMITE, int(size), None, affine)

    @classmethod
    def histogram(cls, edges: Sequence[float]) -> "BasisSpec":
        edges = tuple(float(e) for e in edges)
        return cls(HISTOGRAM, len(edges) - 1, edges, IDENTITY)

    def with_size(self, size: int) -> "BasisSpec":
        if self.kind == HISTOGRAM:
            raise InvalidInputError("cannot resize a histogram basis; rebin instead")
        return dataclasses.replace(self, size=int(size))

    def evaluate(self, x) -> np.ndarray:
        """Matrix ``phi[i, k] = phi_i(z_k)`` with ``z = affine.forward(x)``.

        No density Jacobian is applied here.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == HERMITE:
            return hermite_matrix(self.size, self.affine.forward(x))
        return histogram_matrix(self.edges, x)

    def compatible(self, other: "BasisSpec", rtol: float = 1e-12) -> bool:
        if self.kind != other.kind or self.size != other.size:
            return False
        if self.kind == HISTOGRAM:
            return bool(np.allclose(self.edges, other.edges, rtol=rtol, atol=0.0))
        a, b = self.affine, other.affine
        return math.isclose(a.shift, b.shift, rel_tol=rtol, abs_tol=rtol) and math.isclose(
            a.scale, b.scale, rel_tol=rtol
        )


# --- Chebyshev-Hermite ---------------------------------------------------------


def hermite_poly(k: int, x):
    """Physicists' Hermite polynomial H_k(x) via H_{k+1} = 2x H_k - 2k H_{k-1}."""
    if k < 0:
        raise InvalidInputError(f"degree must be >= 0, got {k}")
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), 2.0 * x
    if k == 0:
        return h_prev if x.ndim else float(h_prev)
    for j in range(1, k):
        h_prev, h = h, 2.0 * x * h - 2.0 * j * h_prev
    return h if x.ndim else float(h)


def hermite_matrix(s: int, z) -> np.ndarray:
    """Rows phi_0 .. phi_{s-1} evaluated at every point of ``z``.

    Uses the normalised recurrence
    phi_{k+1} = z sqrt(2/(k+1)) phi_k - sqrt(k/(k+1)) phi_{k-1},
    which never forms 2^k k! and stays finite for large k.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty((s, z.size))
    out[0] = _PI_M14 * np.exp(-0.5 * z * z)
    if s > 1:
        out[1] = math.sqrt(2.0) * z * out[0]
    for k in range(1, s - 1):
        out[k + 1] = z * math.sqrt(2.0 / (k + 1)) * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_fn(k: int, x):
    """Normalised Chebyshev-Hermite function phi_k(x)."""
    if k < 0:
        raise InvalidInputError(f"degree must be >= 0, got {k}")
    x_arr = np.asarray(x, dtype=float)
    vals = hermite_matrix(k + 1, x_arr.ravel())[k]
    return vals.reshape(x_arr.shape) if x_arr.ndim else float(vals[0])


# --- histogram ---------------------------------------------------------------------


def bin_index(edges, x) -> np.ndarray:
    """Bin of each point: left-closed, right-open, last bin right-closed; -1 outside."""
    e = np.asarray(edges, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    idx = np.searchsorted(e, x, side="right") - 1
    idx[x == e[-1]] = len(e) - 2
    idx[(x < e[0]) | (x > e[-1])] = -1
    return idx


def histogram_matrix(edges, x) -> np.ndarray:
    e = np.asarray(edges, dtype=float)
    s = len(e) - 1
    idx = bin_index(e, x)
    out = np.zeros((s, idx.size))
    inside = idx >= 0
    out[idx[inside], np.nonzero(inside)[0]] = 1.0 / np.sqrt(np.diff(e))[idx[inside]]
    return out


def histogram_fn(i: int, x, spec: BasisSpec):
    """phi_i(x) for a histogram basis; zero outside bin i and outside the edges."""
    if spec.kind != HISTOGRAM:
        raise InvalidInputError("histogram_fn needs a histogram basis")
    if not 0 <= i < spec.size:
        raise InvalidInputError(f"bin index {i} outside 0..{spec.size - 1}")
    x_arr = np.asarray(x, dtype=float)
    vals = histogram_matrix(spec.edges, x_arr.ravel())[i]
    return vals.reshape(x_arr.shape) if x_arr.ndim else float(vals[0])


def bin_counts(edges, x) -> np.ndarray:
    idx = bin_index(edges, x)
    return np.bincount(idx[idx >= 0], minlength=len(edges) - 1)


def equal_width_edges(sample, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width edges between sample min and max, with every bin occupied.

    Starts at ``bins`` and reduces the bin count until no bin is empty.
    Returns ``(edges, counts)``.
    """
    x = np.asarray(sample, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        raise DegenerateSampleError("cannot bin a sample whose points are all equal")
    for s in range(int(bins), 0, -1):
        edges = np.linspace(lo, hi, s + 1)
        counts = bin_counts(edges, x)
        if np.all(counts > 0):
            return edges, counts
    raise AssertionError("unreachable: a single bin always holds every point")


# --- standardisation -------------------------------------------------------------


def standardize(sample) -> tuple[AffineTransform, np.ndarray]:
    """Shift to zero mean and scale to unit deviation (denominator n)."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 2:
        raise DegenerateSampleError(f"need at least 2 points to standardise, got {x.size}")
    mean = float(x.mean())
    dev = float(np.sqrt(np.mean((x - mean) ** 2)))
    if dev == 0.0 or not math.isfinite(dev):
        raise DegenerateSampleError("sample deviation is zero: all points are equal")
    t = AffineTransform(mean, dev)
    return t, t.forward(x)


# --- unitary smoothing ------------------------------------------------------------


def dft_unitary(s: int) -> np.ndarray:
    """U[k, l] = exp(2 pi i k l / s) / sqrt(s)."""
    if s < 1:
        raise InvalidInputError(f"order must be >= 1, got {s}")
    k = np.arange(s)
    return np.exp(2j * np.pi * np.outer(k, k) / s) / math.sqrt(s)


def frequency_order(s: int) -> list[int]:
    """Frequencies from lowest to highest, conjugate pairs adjacent: 0, 1, s-1, 2, s-2, ..."""
    order = [0]
    for f in range(1, s // 2 + 1):
        order.append(f)
        if s - f != f:
            order.append(s - f)
    return order


def smooth_histogram(state: "StateVector", keep: int) -> "StateVector":
    """Low-pass a histogram state vector in the DFT representation.

    Keeps the ``keep`` lowest frequencies (see :func:`frequency_order`),
    transforms back and renormalises.  When ``keep`` splits a conjugate
    pair, the real part of the back-transform is taken, which is the same
    as keeping half of that pair.
    """
    c = np.asarray(state.coefficients, dtype=float)
    s = c.size
    if not 1 <= keep <= s:
        raise InvalidInputError(f"keep must lie in 1..{s}, got {keep}")
    u = dft_unitary(s)
    spectrum = u @ c
    mask = np.zeros(s, dtype=bool)
    mask[frequency_order(s)[:keep]] = True
    spectrum[~mask] = 0.0
    smoothed = (u.conj().T @ spectrum).real
    norm = float(np.linalg.norm(smoothed))
    if norm < 1e-14:
        raise DegenerateSmoothingError("truncated spectrum is zero; keep more harmonics")
    return state.with_coefficients(smoothed / norm)
