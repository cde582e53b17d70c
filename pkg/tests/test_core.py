import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rootdens.basis import AffineTransform, BasisSpec
from rootdens.core import StateVector, check_compatible, fix_sign
from rootdens.errors import IncompatibleStatesError, InvalidInputError

B3 = BasisSpec.hermite(3)


def test_state_requires_unit_norm():
    with pytest.raises(InvalidInputError):
        StateVector(np.array([1.0, 1.0, 0.0]), B3)


def test_state_requires_matching_size():
    with pytest.raises(InvalidInputError):
        StateVector(np.array([1.0, 0.0]), B3)


def test_state_is_read_only_copy():
    c = np.array([1.0, 0.0, 0.0])
    s = StateVector(c, B3)
    c[0] = 5.0
    assert s.coefficients[0] == 1.0
    with pytest.raises(ValueError):
        s.coefficients[0] = 2.0


def test_fix_sign():
    assert list(fix_sign(np.array([0.0, -0.6, 0.8]))) == [0.0, 0.6, -0.8]
    assert list(fix_sign(np.array([0.6, -0.8]))) == [0.6, -0.8]


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_from_raw_normalises_and_fixes_sign(v):
    s = StateVector.from_raw(v, B3)
    assert abs(s.coefficients @ s.coefficients - 1.0) < 1e-12
    first = s.coefficients[np.abs(s.coefficients) > 1e-12 * np.max(np.abs(s.coefficients))][0]
    assert first > 0


def test_from_raw_rejects_zero():
    with pytest.raises(InvalidInputError):
        StateVector.from_raw([0.0, 0.0, 0.0], B3)


def test_overlap_and_compatibility():
    a = StateVector.ground(B3)
    b = StateVector.from_raw([1.0, 1.0, 0.0], B3)
    assert a.overlap(b) == pytest.approx(2**-0.5)
    other = StateVector.ground(BasisSpec.hermite(3, AffineTransform(0.0, 2.0)))
    with pytest.raises(IncompatibleStatesError):
        a.overlap(other)
    with pytest.raises(IncompatibleStatesError):
        check_compatible(a, StateVector.ground(BasisSpec.hermite(4)))


def test_repr_mentions_size():
    assert "s=3" in repr(StateVector.ground(B3))
