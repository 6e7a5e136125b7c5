import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cases import random_hpd
from fracdtn.errors import ConfigError, SectorialityError, SingularOperatorError
from fracdtn.operator import MeasureSpaceModel, SectorialOperator
from fracdtn.sectorial import (
    DEFAULT_SCHEDULE,
    frac_power_vertex0,
    regularize,
    strong_resolvent_gap,
    vertex0_exponents,
)
from fracdtn.semigroup import frac_power_spectral


def op(M, model=None):
    return SectorialOperator.certify(np.asarray(M), model)


def test_regularize_zero_operator():
    An = regularize(op(np.zeros((3, 3))), n=2)
    assert np.array_equal(An.matrix, 0.5 * np.eye(3))


def test_regularize_uses_v_gram():
    model = MeasureSpaceModel(np.ones(2), np.array([1.0, 4.0]))
    An = regularize(op(np.zeros((2, 2)), model), model, 4)
    assert np.allclose(An.matrix, np.diag([0.25, 1.0]))
    assert An.mu >= 0.25 - 1e-12


def test_regularize_bad_index():
    with pytest.raises(ValueError):
        regularize(op(np.eye(2)), n=0)


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_regularized_coercivity(seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((4, 4))
    # vertex 0: positive semidefinite with e_0 in the kernel
    H = B @ B.T
    H[:, 0] = H[0, :] = 0
    A = op(H)
    mus = []
    for n in (1, 10, 100, 1000):
        An = regularize(A, n=n)
        assert An.mu >= 1.0 / n - 1e-12
        mus.append(An.mu)
    assert all(a >= b - 1e-12 for a, b in zip(mus, mus[1:]))
    assert np.abs(regularize(A, n=10**8).matrix - A.matrix).max() <= 1.1e-8


def test_regularized_converges_entrywise():
    A = op(np.diag([0.0, 1.0]))
    diffs = [np.abs(regularize(A, n=n).matrix - A.matrix).max() for n in (1, 10, 100)]
    assert diffs == pytest.approx([1.0, 0.1, 0.01])


def test_exponent_sets():
    assert vertex0_exponents(0.5, 3) == [0.5, 1.0, 1.5]
    assert vertex0_exponents(0.25, 4) == [0.25, 1.0, 1.25, 2.0]
    assert vertex0_exponents(0.5, 3, "resolvent") == [0.5, 1.0, 1.5]
    assert vertex0_exponents(0.25, 4, "resolvent") == [0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ValueError):
        vertex0_exponents(0.5, 3, "bogus")


def test_half_example_short_schedule():
    A = op(np.diag([0.0, 1.0]))
    res = frac_power_vertex0(A, 0.5, np.ones(2), (10, 100, 1000))
    assert np.abs(res.resolvent - np.diag([1.0, 0.5])).max() <= 1e-4
    assert np.allclose(res.power_x, [0.0, 1.0], atol=1e-3)


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_diagonal_zero_eigenvalue_limit(s):
    lam = np.array([0.0, 1.0, 4.0])
    res = frac_power_vertex0(op(np.diag(lam)), s, np.ones(3))
    assert np.abs(res.resolvent - np.diag(1 / (1 + lam**s))).max() <= 1e-4


def test_nondiagonal_vertex0():
    rng = np.random.default_rng(4)
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    lam = np.array([0.0, 0.5, 2.0, 3.0])
    A = op(Q @ np.diag(lam) @ Q.T)
    res = frac_power_vertex0(A, 0.4, np.ones(4))
    ref = Q @ np.diag(1 / (1 + lam**0.4)) @ Q.T
    assert np.abs(res.resolvent - ref).max() <= 1e-4


def test_coercive_matches_spectral(lap32):
    x = np.random.default_rng(1).standard_normal(32)
    for s in (0.25, 0.75):
        res = frac_power_vertex0(lap32, s, x)
        ref = frac_power_spectral(lap32, s, x)
        assert np.linalg.norm(res.power_x - ref) <= 1e-6 * np.linalg.norm(ref)
        assert res.gap <= 1e-14  # constant sequence: extrapolants agree to rounding


def test_coercive_forced_regularization_converges():
    A = random_hpd(6, 1.0, 10.0, seed=2)
    x = np.ones(6)
    res = frac_power_vertex0(A, 0.5, x, regularize_coercive=True)
    ref = frac_power_spectral(A, 0.5, x)
    assert np.linalg.norm(res.power_x - ref) <= 1e-5 * np.linalg.norm(ref)


def test_schedule_validation():
    A = op(np.diag([0.0, 1.0]))
    with pytest.raises(ConfigError):
        frac_power_vertex0(A, 0.5, np.ones(2), (10,))
    with pytest.raises(ConfigError):
        frac_power_vertex0(A, 0.5, np.ones(2), (10, 10, 100))


def test_imaginary_axis_rejected():
    with pytest.raises(SectorialityError):
        op(np.diag([1j, -1j]))


def test_singular_limit_reported():
    # a huge eigenvalue makes I + A**s numerically unbounded: R is near singular
    A = op(np.diag([0.0, 1e30]))
    with pytest.raises(SingularOperatorError, match="tractable"):
        frac_power_vertex0(A, 0.9, np.ones(2), (10, 100))


def test_gap_coercive_immediately_small(lap32):
    assert np.all(strong_resolvent_gap(lap32, 0.5) <= 1e-8)


def test_gap_zero_vector():
    assert np.all(strong_resolvent_gap(op(np.diag([0.0, 1.0])), 0.5, 1.0, x=np.zeros(2)) == 0)


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75])
def test_gap_matches_scalar_branch(s):
    # the zero eigenvalue moves to 1/n; its resolvent entry is 1 / (1 + n**-s)
    sched = np.array(DEFAULT_SCHEDULE, dtype=float)
    gaps = strong_resolvent_gap(op(np.diag([0.0, 1.0])), s)
    f = 1 / (1 + sched**-s)
    assert np.all(np.diff(gaps) < 0)
    assert gaps == pytest.approx(np.abs(np.diff(f)), rel=1e-8)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_gap_order_tends_to_s(s):
    sched = tuple(10**k for k in range(1, 7))
    gaps = strong_resolvent_gap(op(np.diag([0.0, 1.0])), s, schedule=sched)
    orders = -np.diff(np.log10(gaps))  # per decade of n
    assert np.all(np.diff(orders) > 0) and np.all(orders < s)
    assert orders[-1] == pytest.approx(s, rel=0.15)


def test_gap_rejects_bad_shift():
    with pytest.raises(ValueError):
        strong_resolvent_gap(op(np.eye(2)), 0.5, z=-1.0)


def test_default_schedule():
    assert DEFAULT_SCHEDULE == (10, 100, 1000, 10000)


def test_regularized_powers_converge_to_principal_branch():
    from fracdtn.semigroup import frac_power_balakrishnan

    lam = np.array([0.0, 0.5, 3.0])
    A = op(np.diag(lam))
    s = 0.6
    errs = [np.abs(frac_power_balakrishnan(regularize(A, n=n), s, np.eye(3)) - np.diag(lam**s)).max()
            for n in (10, 100, 1000)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] == pytest.approx(1000.0**-s, rel=1e-3)  # the 0**s = 0 branch dominates
