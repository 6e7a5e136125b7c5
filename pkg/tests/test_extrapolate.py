import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracdtn.errors import ConvergenceError
from fracdtn.extrapolate import check_settled, richardson, richardson_table


@given(st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 0.9))
def test_removes_prescribed_powers_exactly(f0, c1, c2, p):
    h = np.array([0.1, 0.05, 0.025])
    vals = f0 + c1 * h**p + c2 * h**2
    lim, w = richardson(vals, h, [p, 2.0])
    assert lim == pytest.approx(f0, abs=1e-9 * (1 + abs(c1) + abs(c2)))
    assert w.sum() == pytest.approx(1.0)


def test_vector_values_and_table():
    h = np.array([0.4, 0.2, 0.1, 0.05])
    vals = np.array([[1 + t**0.5, 2 - t] for t in h])
    table = richardson_table(vals, h, [0.5, 1.0, 1.5])
    assert np.allclose(table[-1], [1, 2], atol=1e-12)
    assert len(table) == 4


def test_too_few_exponents():
    with pytest.raises(ValueError):
        richardson([1.0, 2.0, 3.0], [1.0, 0.5, 0.25], [1.0])


def test_check_settled_reports_distances():
    assert check_settled([np.array([1.0]), np.array([1.0 + 1e-9])], 1e-6) < 1e-8
    with pytest.raises(ConvergenceError, match="did not settle"):
        check_settled([np.array([1.0]), np.array([2.0])], 1e-6)
