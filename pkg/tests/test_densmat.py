import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rootdens.basis import AffineTransform, BasisSpec
from rootdens.core import StateVector
from rootdens.densmat import (
    DensityMatrix,
    density_operator_eval,
    expectation,
    merge_states,
    merge_weights,
    mix,
    principal_state,
    pure_state,
    spectral,
)
from rootdens.errors import IncompatibleStatesError, InvalidDensityMatrixError, InvalidInputError, TieError
from rootdens.numerics import integrate
from rootdens.solver import density_eval

B4 = BasisSpec.hermite(4)


def sv(v, basis=B4):
    return StateVector.from_raw(v, basis)


vectors = st.lists(st.floats(-1, 1), min_size=4, max_size=4).filter(lambda v: np.linalg.norm(v) > 0.1)


def test_pure_state_example():
    rho = pure_state(np.array([1.0, 0.0]))
    assert np.array_equal(rho.matrix, [[1.0, 0.0], [0.0, 0.0]])


@given(vectors)
def test_pure_state_idempotent(v):
    rho = pure_state(sv(v))
    assert np.max(np.abs(rho.matrix @ rho.matrix - rho.matrix)) < 1e-12
    assert abs(np.trace(rho.matrix) - 1.0) < 1e-12
    assert rho.purity() == pytest.approx(1.0)


def test_validation():
    with pytest.raises(InvalidDensityMatrixError):
        DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(InvalidDensityMatrixError):
        DensityMatrix(np.eye(2))
    with pytest.raises(InvalidDensityMatrixError):
        spectral(DensityMatrix(np.array([[1.5, 0.0], [0.0, -0.5]])))


def test_mix_examples():
    rho = pure_state(sv([1, 2, 0, 1]))
    assert np.allclose(mix(rho, rho, 3, 7).matrix, rho.matrix)
    a, b = pure_state(sv([1, 0, 0, 0])), pure_state(sv([0, 1, 0, 0]))
    m = mix(a, b, 10, 10)
    w, _ = spectral(m)
    assert np.allclose(w, [0.5, 0.5, 0.0, 0.0], atol=1e-12)
    assert np.trace(m.matrix) == pytest.approx(1.0)
    assert m.purity() < 1.0


def test_mix_order_and_basis_mismatch():
    with pytest.raises(IncompatibleStatesError):
        mix(pure_state(np.array([1.0, 0.0])), pure_state(np.array([1.0, 0.0, 0.0])), 1, 1)
    other = BasisSpec.hermite(4, AffineTransform(2.0, 1.0))
    with pytest.raises(IncompatibleStatesError):
        mix(pure_state(sv([1, 0, 0, 0])), pure_state(sv([1, 0, 0, 0], other)), 1, 1)


def test_spectral_pure():
    w, v = spectral(pure_state(sv([0.3, 0.4, 0.5, 0.1])))
    assert np.allclose(w, [1, 0, 0, 0], atol=1e-12)


@given(vectors, vectors, st.integers(1, 1000), st.integers(1, 1000))
def test_mixture_weights_closed_form(v1, v2, n1, n2):
    c1, c2 = sv(v1), sv(v2)
    w, _ = spectral(mix(pure_state(c1), pure_state(c2), n1, n2))
    l1, l2 = merge_weights(c1, c2, n1, n2)
    assert w[0] == pytest.approx(l1, abs=1e-10)
    assert w[1] == pytest.approx(l2, abs=1e-10)
    assert abs(w.sum() - 1.0) < 1e-10 and np.all(w >= -1e-10)


def test_merge_identical():
    c = sv([0.9, 0.3, -0.2, 0.1])
    m, lam2 = merge_states(c, c, 100, 300)
    assert np.allclose(m.coefficients, c.coefficients, atol=1e-12)
    assert abs(lam2) < 1e-12


def test_merge_orthogonal_equal_weights_is_tie():
    with pytest.raises(TieError):
        merge_states(sv([1, 0, 0, 0]), sv([0, 1, 0, 0]), 50, 50)


def test_merge_sign_aligned_to_first():
    c1 = sv([0.9, 0.3, -0.2, 0.1])
    c2 = StateVector(-sv([0.88, 0.32, -0.21, 0.1]).coefficients, B4)
    m, _ = merge_states(c1, c2, 10, 10)
    assert m.coefficients @ c1.coefficients > 0


def test_merge_near_parallel_is_weighted_average():
    g = np.random.default_rng(1)
    c1 = sv([0.9, 0.3, -0.2, 0.1])
    c2 = sv(c1.coefficients + 0.01 * g.normal(size=4))
    n1, n2 = 300, 700
    m, _ = merge_states(c1, c2, n1, n2)
    combo = (n1 * c1.coefficients + n2 * c2.coefficients) / (n1 + n2)
    combo /= np.linalg.norm(combo)
    angle = math.acos(min(1.0, abs(m.coefficients @ combo)))
    assert angle < 1e-3


def test_merge_rejects_mismatched_bases():
    with pytest.raises(IncompatibleStatesError):
        merge_states(sv([1, 0, 0, 0]), StateVector.ground(BasisSpec.hermite(3)), 1, 1)


def test_expectation_examples():
    rho = mix(pure_state(np.array([1.0, 0.0])), pure_state(np.array([0.0, 1.0])), 3, 7)
    assert expectation(rho, np.eye(2)) == pytest.approx(1.0)
    assert expectation(rho, np.diag([2.0, 4.0])) == pytest.approx(3.4)
    c = sv([0.3, -0.2, 0.5, 0.1])
    p = pure_state(c)
    assert expectation(p, p.matrix) == pytest.approx(1.0)
    with pytest.raises(IncompatibleStatesError):
        expectation(p, np.eye(3))


def test_density_operator_diagonal_is_density():
    t = AffineTransform(1.5, 2.0)
    b = BasisSpec.hermite(4, t)
    c = sv([0.7, -0.3, 0.5, 0.2], b)
    rho = pure_state(c)
    x = np.linspace(-6, 9, 31)
    assert np.allclose(density_operator_eval(rho, b, x, x), density_eval(c, x), atol=1e-14)


def test_density_operator_symmetric_and_normalised():
    c1, c2 = sv([0.7, -0.3, 0.5, 0.2]), sv([0.2, 0.9, 0.1, -0.3])
    rho = mix(pure_state(c1), pure_state(c2), 2, 5)
    assert density_operator_eval(rho, B4, 0.3, -1.2) == pytest.approx(density_operator_eval(rho, B4, -1.2, 0.3))
    mass = integrate(lambda x: density_operator_eval(rho, B4, x, x), -14, 14, 6000)
    assert abs(mass - 1.0) < 1e-6
    assert np.all(density_operator_eval(rho, B4, np.linspace(-5, 5, 101), np.linspace(-5, 5, 101)) >= -1e-10)


def test_principal_state():
    c = sv([0.1, 0.9, -0.3, 0.2])
    assert np.allclose(principal_state(pure_state(c)).coefficients, c.coefficients, atol=1e-12)
    with pytest.raises(InvalidInputError):
        principal_state(pure_state(np.array([1.0, 0.0])))


def test_merge_matches_pooled_fit():
    from rootdens.bench import sample_state
    from rootdens.numerics import RandomStream
    from rootdens.solver import FitConfig, fit

    truth = StateVector.from_raw([0.9, 0.3, 0.2, 0.2, 0.1], BasisSpec.hermite(5))
    raw = FitConfig(standardize=False)
    stream = RandomStream(90)
    merged, pooled = [], []
    for _ in range(100):
        xa, xb = sample_state(truth, 400, stream), sample_state(truth, 400, stream)
        m, _ = merge_states(fit(xa, 5, raw).state, fit(xb, 5, raw).state, 400, 400)
        p = fit(np.concatenate((xa, xb)), 5, raw).state
        merged.append(1 - (m.coefficients @ truth.coefficients) ** 2)
        pooled.append(1 - (p.coefficients @ truth.coefficients) ** 2)
    assert 0.9 < np.mean(merged) / np.mean(pooled) < 1.1
