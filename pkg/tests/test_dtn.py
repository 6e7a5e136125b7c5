import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cases import random_hpd
from fracdtn.dtn import (
    ExtensionSystem,
    dirichlet_energy_identity,
    dtn_matrix,
    solution_ws_norm,
    solve_dirichlet,
    solve_neumann,
    stability_constant,
    trace_norm,
    verify_dtn_isomorphism,
)
from fracdtn.extension import bessel_normalized, c_s, s_normal_derivative
from fracdtn.operator import MeasureSpaceModel, SectorialOperator, duality_pairing
from fracdtn.semigroup import frac_power_spectral, semigroup_apply
from fracdtn.sobolev import GradedMesh


def op(M, model=None):
    return SectorialOperator.certify(np.asarray(M), model)


def mesh_for(A, s, N=256):
    return GradedMesh.for_operator(A, s, N)


def test_zero_data_give_zero_solutions(cd16):
    mesh = mesh_for(cd16, 0.4, 64)
    d = solve_dirichlet(cd16, 0.4, np.zeros(16), mesh)
    n = solve_neumann(cd16, 0.4, np.zeros(16), mesh)
    assert not np.any(d.u.values) and not np.any(d.s_normal)
    assert not np.any(n.u.values) and not np.any(n.trace)
    assert dirichlet_energy_identity(d) == 0.0


@settings(max_examples=15)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_dirichlet_linear_in_data(a, b):
    A = random_hpd(6, 1.0, 20.0, seed=3)
    mesh = mesh_for(A, 0.3, 48)
    sys = ExtensionSystem(A, 0.3, mesh)
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal(6), rng.standard_normal(6)
    u = lambda v: solve_dirichlet(A, 0.3, v, mesh, system=sys).u.values
    assert np.allclose(u(a * x + b * y), a * u(x) + b * u(y), atol=1e-12 * (abs(a) + abs(b) + 1))


@pytest.mark.parametrize("lam,s", [(0.5, 0.25), (1.0, 0.5), (10.0, 0.75)])
def test_scalar_nodes_follow_bessel_profile(lam, s):
    A = op([[lam]])
    mesh = mesh_for(A, s, 512)
    sol = solve_dirichlet(A, s, [1.0], mesh)
    ref = bessel_normalized(lam, s, mesh.nodes)
    assert np.abs(sol.u.values[:, 0] - ref).max() <= 1e-3


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_identity_operator_dtn_is_c_s(s):
    A = op(np.eye(3))
    D = dtn_matrix(A, s, mesh_for(A, s, 512))
    assert np.abs(D - c_s(s) * np.eye(3)).max() <= 1e-3 * c_s(s)


def test_half_trace_evolution_is_semigroup(lap32):
    rng = np.random.default_rng(7)
    x = rng.standard_normal(32)
    mesh = mesh_for(lap32, 0.5, 512)
    sol = solve_dirichlet(lap32, 0.5, x, mesh)
    sq = frac_power_spectral(lap32, 0.5, np.eye(32))
    for j in (0, 40, 200, 400):
        t = mesh.nodes[j]
        w, Q = np.linalg.eigh(sq.real)
        ref = Q @ (np.exp(-t * w) * (Q.T @ x))
        assert np.linalg.norm(sol.u.values[j] - ref) <= 1e-3 * np.linalg.norm(x)


def test_nonsymmetric_dtn_matches_s_normal_derivative(cd16):
    s = 0.4
    rng = np.random.default_rng(8)
    x = rng.standard_normal(16)
    D = dtn_matrix(cd16, s, mesh_for(cd16, s, 512))
    ref = s_normal_derivative(cd16, s, x)
    assert np.linalg.norm(D @ x - ref) <= 1e-2 * np.linalg.norm(ref)


def test_discrete_energy_identity(cd16):
    rng = np.random.default_rng(9)
    x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    for s in (0.2, 0.5, 0.8):
        sol = solve_dirichlet(cd16, s, x, mesh_for(cd16, s, 128))
        assert dirichlet_energy_identity(sol) <= 1e-6


def test_dtn_matrix_is_accretive(cd16):
    for s in (0.25, 0.75):
        D = dtn_matrix(cd16, s, mesh_for(cd16, s, 128))
        assert np.linalg.eigvalsh(0.5 * (D + D.conj().T)).min() > 0


def test_neumann_inverts_dirichlet(lap32):
    s = 0.35
    mesh = mesh_for(lap32, s, 128)
    sys = ExtensionSystem(lap32, s, mesh)
    rng = np.random.default_rng(10)
    x = rng.standard_normal(32)
    d = solve_dirichlet(lap32, s, x, mesh, system=sys)
    n = solve_neumann(lap32, s, d.s_normal, mesh, system=sys)
    assert np.linalg.norm(n.trace - x) <= 1e-9 * np.linalg.norm(x)
    assert np.allclose(n.u.values, d.u.values, atol=1e-9)


def test_supplied_system_must_match(lap32, cd16):
    mesh = mesh_for(lap32, 0.5, 16)
    sys = ExtensionSystem(lap32, 0.5, mesh)
    with pytest.raises(ValueError):
        solve_dirichlet(lap32, 0.4, np.ones(32), mesh, system=sys)


def test_noncoercive_operator_rejected():
    with pytest.raises(ValueError, match="coercive"):
        ExtensionSystem(op(np.diag([0.0, 1.0])), 0.5, GradedMesh(1.0, 4))


def test_isomorphism_identity_norms():
    A = op(np.eye(4))
    rep = verify_dtn_isomorphism(A, 0.5, mesh_for(A, 0.5, 256))
    assert rep.norm_dtn == pytest.approx(1.0, rel=1e-3)
    assert rep.norm_dtn_inv == pytest.approx(1.0, rel=1e-3)
    assert rep.bound_holds


def test_isomorphism_weighted_model():
    model = MeasureSpaceModel(np.array([0.5, 1.0, 2.0]), np.array([1.0, 4.0, 16.0]))
    # diag(m) is the Riesz map V -> V'; its s-power has weighted norm 1 both ways
    A = op(np.diag(model.m), model)
    s = 0.3
    rep = verify_dtn_isomorphism(A, s, mesh_for(A, s, 256))
    assert rep.norm_dtn / c_s(s) == pytest.approx(1.0, rel=1e-2)
    assert rep.norm_dtn_inv * c_s(s) == pytest.approx(1.0, rel=1e-2)
    assert rep.norm_dtn_unweighted / c_s(s) == pytest.approx(16.0**s, rel=1e-2)
    assert rep.bound_holds


def test_stability_constant_is_mesh_independent(lap32):
    s = 0.4
    consts = []
    for N in (64, 128, 256):
        sys = ExtensionSystem(lap32, s, mesh_for(lap32, s, N))
        consts.append(min(1.0, lap32.mu) * stability_constant(sys))
    assert max(consts) / min(consts) <= 1.1


def test_neumann_solution_bounded_by_data(lap32):
    s = 0.6
    mesh = mesh_for(lap32, s, 128)
    rep = verify_dtn_isomorphism(lap32, s, mesh)
    rng = np.random.default_rng(11)
    y = rng.standard_normal(32)
    sol = solve_neumann(lap32, s, y, mesh)
    from fracdtn.operator import SpaceTag, weighted_norm

    ynorm = weighted_norm(y, SpaceTag.interp_hvdual(s), lap32.model)
    # solution_ws_norm uses the midpoint rule, the ratio the exact Gram
    assert solution_ws_norm(sol) <= rep.stability_ratio * ynorm * (1 + 1e-3)
    assert trace_norm(sol) <= rep.norm_dtn_inv * ynorm * (1 + 1e-9)


def test_dtn_deterministic(cd16):
    mesh = mesh_for(cd16, 0.3, 64)
    assert np.array_equal(dtn_matrix(cd16, 0.3, mesh), dtn_matrix(cd16, 0.3, mesh))


def test_one_cell_extraction_agrees_at_half(lap32):
    mesh = mesh_for(lap32, 0.5, 512)
    D1 = dtn_matrix(lap32, 0.5, mesh)
    D2 = dtn_matrix(lap32, 0.5, mesh, extraction="one_cell")
    assert np.linalg.norm(D1 - D2) <= 1e-2 * np.linalg.norm(D1)
    x = np.ones(32)
    sol = solve_dirichlet(lap32, 0.5, x, mesh, extraction="one_cell")
    assert np.allclose(sol.s_normal, D2 @ x)


def test_energy_pairing_is_real_positive(cd16):
    sol = solve_dirichlet(cd16, 0.5, np.ones(16), mesh_for(cd16, 0.5, 64))
    p = duality_pairing(sol.s_normal, sol.trace, sol.u.model)
    assert p.real > 0
    with pytest.raises(ValueError):
        solve_dirichlet(cd16, 0.5, np.ones(16), mesh_for(cd16, 0.5, 8), extraction="bogus")


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_isomorphism_identity_scaled_norms(s):
    A = op(np.eye(3))
    rep = verify_dtn_isomorphism(A, s, mesh_for(A, s, 512))
    assert rep.norm_dtn == pytest.approx(c_s(s), rel=1e-3)
    assert rep.norm_dtn_inv == pytest.approx(1 / c_s(s), rel=1e-3)


def test_isomorphism_condition_stable_under_refinement(cd16):
    s = 0.45
    conds = [verify_dtn_isomorphism(cd16, s, mesh_for(cd16, s, N)).condition for N in (64, 128, 256)]
    assert all(np.isfinite(conds))
    assert max(conds) / min(conds) <= 1.05


def test_energy_identity_identity_operator():
    A = op(np.eye(4))
    sol = solve_dirichlet(A, 0.3, np.eye(4)[0], mesh_for(A, 0.3, 512))
    assert dirichlet_energy_identity(sol) <= 1e-3


def test_weak_form_against_every_test_function(cd16):
    # b_s(u, v) = <y, v(0)> for all discrete v with v(T) = 0
    from fracdtn.sobolev import GridFunction, bs_form

    s = 0.35
    mesh = mesh_for(cd16, s, 64)
    rng = np.random.default_rng(12)
    sol = solve_dirichlet(cd16, s, rng.standard_normal(16), mesh)
    for _ in range(5):
        vals = rng.standard_normal((65, 16)) + 1j * rng.standard_normal((65, 16))
        vals[-1] = 0
        v = GridFunction(mesh, vals, cd16.model)
        lhs = bs_form(sol.u, v, cd16, s)
        rhs = duality_pairing(sol.s_normal, v.values[0], cd16.model)
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(vals) * np.linalg.norm(sol.u.values)
