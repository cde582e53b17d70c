import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rootdens.basis import AffineTransform, BasisSpec
from rootdens.core import StateVector
from rootdens.errors import IncompatibleStatesError, InvalidInputError
from rootdens.inference import (
    binomial_classic_stat,
    binomial_normal_distance,
    binomial_root_stat,
    chi2_goodness,
    chi2_goodness_sum,
    chi2_histogram_form,
    chi2_homogeneity,
    chi2_homogeneity_counts,
    chi2_homogeneity_sum,
    chi2_standard,
    confidence_cone,
    covariance,
    fisher_information,
)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


unit_vectors = st.lists(st.floats(-1, 1), min_size=2, max_size=7).filter(lambda v: np.linalg.norm(v) > 0.1).map(unit)


# --- Fisher information and covariance ---


def test_fisher_two_coefficients():
    c = unit([0.6, 0.8])
    f = fisher_information(c, 50)
    assert f.matrix.shape == (1, 1)
    assert f.matrix[0, 0] == pytest.approx(4 * 50 / c[0] ** 2)


def test_fisher_ground_state():
    f = fisher_information(unit([1, 0, 0, 0]), 10)
    assert np.allclose(f.matrix, 40 * np.eye(3))
    assert f.pivot == 0 and f.free == (1, 2, 3)


def test_fisher_pivot_when_c0_vanishes():
    f = fisher_information(unit([0.0, 0.6, 0.8]), 10)
    assert f.pivot == 2
    assert "dependent" in f.note
    with pytest.raises(InvalidInputError):
        fisher_information(unit([0.0, 0.6, 0.8]), 10, pivot=0)


def test_covariance_examples():
    c = unit([1, 1])
    sigma = covariance(c, 100)
    assert np.allclose(sigma, np.array([[0.5, -0.5], [-0.5, 0.5]]) / 400, atol=1e-16)
    assert np.allclose(sigma @ c, 0.0, atol=1e-16)


@given(unit_vectors, st.integers(1, 10_000))
def test_covariance_spectrum_and_projector(c, n):
    sigma = covariance(c, n)
    w = np.sort(np.linalg.eigvalsh(sigma))
    assert abs(w[0]) < 1e-10
    assert np.allclose(w[1:], 1 / (4 * n), atol=1e-10)
    p = 4 * n * sigma
    assert np.max(np.abs(p @ p - p)) < 1e-10


@given(unit_vectors.filter(lambda c: abs(c[0]) > 0.2), st.integers(1, 1000))
def test_fisher_inverts_reduced_covariance(c, n):
    f = fisher_information(c, n)
    sigma = covariance(c, n)[np.ix_(f.free, f.free)]
    assert np.max(np.abs(f.matrix @ sigma - np.eye(len(f.free)))) < 1e-10


def test_fisher_quadrature_s3():
    from rootdens.basis import hermite_matrix

    g = np.random.default_rng(3)
    c = unit(g.normal(size=3))
    c = c if c[0] > 0 else -c
    z = np.linspace(-14, 14, 28001)
    phi = hermite_matrix(3, z)

    def dens(theta):
        c0 = math.sqrt(1 - np.sum(theta**2))
        return (np.concatenate(([c0], theta)) @ phi) ** 2

    theta = c[1:]
    h = 1e-6
    grads = []
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        grads.append((dens(theta + e) - dens(theta - e)) / (2 * h))
    p = dens(theta)
    ok = p > 1e-14 * p.max()
    num = np.array([[np.trapezoid(np.where(ok, gi * gj / np.where(ok, p, 1), 0), z) for gj in grads] for gi in grads])
    assert np.max(np.abs(num - fisher_information(c, 1).matrix)) < 1e-4


# --- cone ---


def test_cone_example():
    cone = confidence_cone(unit([1, 0]), 100, 0.05)
    assert cone.sin2_half_angle == pytest.approx(3.841458820694124 / 400, abs=1e-10)
    assert cone.confidence == 0.95


def test_cone_degenerate_as_alpha_to_one():
    c = unit([1, 2, 3])
    cone = confidence_cone(c, 100, 1 - 1e-12)
    assert cone.sin2_half_angle < 1e-10
    assert cone.covers(c)
    assert not cone.covers(unit([1, 2, 3.1]))


def test_cone_caps_at_one():
    assert confidence_cone(unit([1, 1, 1, 1, 1]), 1, 0.05).sin2_half_angle == 1.0


def test_cone_half_angle():
    cone = confidence_cone(unit([1, 0, 0]), 100, 0.05)
    assert math.sin(cone.half_angle) ** 2 == pytest.approx(cone.sin2_half_angle)


# --- goodness of fit ---


def test_goodness_identical_is_zero():
    c = unit([1, 2, 3])
    r = chi2_goodness(c, c, 100)
    assert r.statistic == pytest.approx(0.0, abs=1e-12)
    assert r.p_value == pytest.approx(1.0)
    assert not r.verdict


def test_goodness_orthogonal_is_4n():
    r = chi2_goodness(unit([1, 0, 0]), unit([0, 1, 0]), 75)
    assert r.statistic == 300.0
    assert r.df == 2
    assert r.p_value < 1e-60 and r.verdict


def test_report_consistent_with_cdf():
    r = chi2_goodness(unit([1, 0.2, 0.1]), unit([1, 0, 0]), 200, alpha=0.1)
    assert r.p_value == pytest.approx(stats.chi2.sf(r.statistic, 2), rel=1e-9)
    assert r.verdict == (r.p_value < 0.1)
    assert r.as_dict()["alpha"] == 0.1


def test_goodness_histogram_form():
    counts = np.array([30, 70])
    probs = np.array([0.5, 0.5])
    c_hat = np.sqrt(counts / 100)
    c0 = np.sqrt(probs)
    assert chi2_goodness(c_hat, c0, 100).statistic == pytest.approx(chi2_histogram_form(counts, probs), abs=1e-10)


def test_goodness_sum_form_agrees_near_truth():
    c0 = unit([1, 0.3, -0.2, 0.1])
    c = unit(c0 + np.array([0.0, 0.01, 0.005, -0.01]))
    a = chi2_goodness(c, c0, 500).statistic
    b = chi2_goodness_sum(c, -c0, 500)
    assert abs(a - b) / a < 0.01


def test_goodness_rejects_mixed_bases():
    a = StateVector.ground(BasisSpec.hermite(3))
    b = StateVector.ground(BasisSpec.hermite(3, AffineTransform(1.0, 1.0)))
    with pytest.raises(IncompatibleStatesError):
        chi2_goodness(a, b, 10)


def test_goodness_rejects_non_unit():
    with pytest.raises(InvalidInputError):
        chi2_goodness([1.0, 1.0], [1.0, 0.0], 10)


# --- homogeneity ---


def test_homogeneity_examples():
    c = unit([3, 1, 2])
    assert chi2_homogeneity(c, c, 40, 60).statistic == pytest.approx(0.0, abs=1e-12)
    r = chi2_homogeneity(unit([1, 0]), unit([0, 1]), 80, 80)
    assert r.statistic == 160.0


def test_homogeneity_sum_and_product_forms():
    g = np.random.default_rng(5)
    for _ in range(20):
        c1 = unit(g.normal(size=5))
        c2 = unit(c1 + 0.02 * g.normal(size=5))
        assert c1 @ c2 > 0.99
        a = chi2_homogeneity(c1, c2, 300, 500).statistic
        b = chi2_homogeneity_sum(c1, c2, 300, 500)
        assert abs(a - b) / a < 0.01


def test_homogeneity_counts_form():
    k1, k2 = np.array([10, 30, 60]), np.array([20, 20, 60])
    expected = 0.0
    n1, n2 = 100, 100
    for a, b in zip(k1, k2):
        expected += (a / n1 - b / n2) ** 2 / (a / n1 + b / n2)
    assert chi2_homogeneity_counts(k1, k2) == pytest.approx(n1 * n2 * expected)


@given(unit_vectors, st.data())
def test_statistics_rotation_invariant(c1, data):
    k = c1.size
    c2 = unit(data.draw(st.lists(st.floats(-1, 1), min_size=k, max_size=k).filter(lambda v: np.linalg.norm(v) > 0.1)))
    seed = data.draw(st.integers(0, 2**31))
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(k, k)))
    a = chi2_goodness(c1, c2, 100).statistic
    b = chi2_goodness(q @ c1, q @ c2, 100).statistic
    assert abs(a - b) < 1e-9
    a = chi2_homogeneity(c1, c2, 70, 30).statistic
    b = chi2_homogeneity(q @ c1, q @ c2, 70, 30).statistic
    assert abs(a - b) < 1e-9
    assert 0 <= chi2_goodness(c1, c2, 100).statistic <= 400 + 1e-9


# --- standard chi-square ---


def test_standard_examples():
    assert chi2_standard([50, 50], [50, 50]).statistic == 0.0
    assert chi2_standard([30, 70], [50, 50]).statistic == pytest.approx(16.0)
    with pytest.raises(InvalidInputError):
        chi2_standard([1, 1], [0, 2])


def test_standard_and_root_agree_for_large_n():
    g = np.random.default_rng(8)
    probs = np.array([0.1, 0.2, 0.3, 0.4])
    n = 10_000
    counts = g.multinomial(n, probs)
    pearson = chi2_standard(counts, n * probs).statistic
    root = chi2_histogram_form(counts, probs)
    assert abs(pearson - root) <= 10 * max(pearson, 1.0) ** 2 / n + 0.05 * pearson


# --- binomial ---


def test_binomial_examples():
    assert binomial_classic_stat(30, 100, 0.3, 0.7) == 0.0
    assert binomial_root_stat(50, 50, 0.5, 0.5) == 0.0


def test_binomial_distance_brute_force():
    # independent enumeration with scipy
    n, p = 20, 0.3
    for kind in ("root", "classic"):
        k = np.arange(n + 1)
        if kind == "root":
            t = 2 * (np.sqrt(k * (1 - p)) - np.sqrt((n - k) * p))
        else:
            t = (k - n * p) / np.sqrt(n * p * (1 - p))
        cdf = stats.binom.cdf(k, n, p)
        left = np.concatenate(([0.0], cdf[:-1]))
        d = max(np.max(np.abs(cdf - stats.norm.cdf(t))), np.max(np.abs(left - stats.norm.cdf(t))))
        assert binomial_normal_distance(kind, n, p) == pytest.approx(d, abs=1e-12)


def test_binomial_distance_input_checks():
    with pytest.raises(InvalidInputError):
        binomial_normal_distance("other", 10, 0.3)
    with pytest.raises(InvalidInputError):
        binomial_normal_distance("root", 10, 1.0)
