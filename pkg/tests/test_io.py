import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracdtn.errors import ParseError, SectorialityError
from fracdtn.io import (
    builtin_matrix,
    ingest_operator,
    parse_builtin,
    read_dense_csv,
    read_matrix_market,
    write_dense_csv,
    write_matrix_market,
)


def test_dirichlet_laplacian_example():
    A, model = ingest_operator("builtin:dirichlet_laplacian_1d:n=4,h=0.2")
    h = 0.2
    M = A.matrix.real
    assert np.allclose(M, (2 * np.eye(4) - np.eye(4, k=1) - np.eye(4, k=-1)) / h**2)
    assert A.is_hermitian and A.mu > 0
    k = np.arange(1, 5)
    assert np.allclose(np.linalg.eigvalsh(M), 4 / h**2 * np.sin(k * np.pi / 10) ** 2)
    assert np.allclose(model.sigma, h) and np.all(model.m == 1)


def test_laplacian_2d_spectrum():
    A, model = ingest_operator("builtin:dirichlet_laplacian_2d:n=3")
    h = 0.25
    ev1 = 4 / h**2 * np.sin(np.arange(1, 4) * np.pi / 8) ** 2
    ref = np.sort(np.add.outer(ev1, ev1).ravel())
    assert np.allclose(np.linalg.eigvalsh(A.matrix.real), ref)
    assert np.allclose(model.sigma, h * h)


def test_scaled_laplacian_spectrum():
    A, _ = ingest_operator("builtin:scaled_laplacian_1d:n=32")
    ev = np.linalg.eigvalsh(A.matrix.real)
    assert ev[0] == pytest.approx(1.0) and ev[-1] == pytest.approx(100.0)


def test_identity_via_csv(tmp_path):
    p = tmp_path / "eye.csv"
    p.write_text("# identity\n1,0,0\n0,1,0\n0,0,1\n")
    A, model = ingest_operator(str(p))
    assert np.array_equal(A.matrix, np.eye(3))
    assert np.all(model.sigma == 1) and np.all(model.m == 1)


def test_complex_csv_entries():
    M = read_dense_csv("2+1i, 0\n0, 3-0.5j\n")
    assert M[0, 0] == 2 + 1j and M[1, 1] == 3 - 0.5j
    back = read_dense_csv(write_dense_csv(M))
    assert np.array_equal(back, M)


@settings(max_examples=25)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_dense_csv_round_trip(n, seed):
    M = np.random.default_rng(seed).standard_normal((n, n))
    assert np.array_equal(read_dense_csv(write_dense_csv(M)), M)


def test_matrix_market_symmetric_round_trip(tmp_path):
    A, _ = ingest_operator("builtin:dirichlet_laplacian_1d:n=6")
    p1, p2 = tmp_path / "a.mtx", tmp_path / "b.mtx"
    write_matrix_market(p1, A.matrix)
    assert "symmetric" in p1.read_text().splitlines()[0]
    B, _ = ingest_operator(str(p1))
    assert np.array_equal(B.matrix, A.matrix)
    write_matrix_market(p2, B.matrix)
    assert p1.read_bytes() == p2.read_bytes()


@settings(max_examples=15)
@given(seed=st.integers(0, 2**32 - 1))
def test_matrix_market_bit_exact(tmp_path_factory, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((5, 5))
    M = B + B.T
    p = tmp_path_factory.mktemp("mm") / "m.mtx"
    write_matrix_market(p, M)
    assert np.array_equal(read_matrix_market(p), M)


def test_parse_errors_carry_location(tmp_path):
    with pytest.raises(ParseError, match="line 2, column 2"):
        read_dense_csv("1,2\n3,abc\n")
    with pytest.raises(ParseError, match="row 2"):
        read_dense_csv("1,2\n3\n")
    with pytest.raises(ParseError, match="not square"):
        read_dense_csv("1,2\n3,4\n5,6\n")
    bad = tmp_path / "bad.csv"
    bad.write_text("1,x\n")
    with pytest.raises(ParseError, match="bad.csv"):
        ingest_operator(str(bad))
    mm = tmp_path / "bad.mtx"
    mm.write_text("not a matrix market file\n")
    with pytest.raises(ParseError, match="bad.mtx"):
        ingest_operator(str(mm))


def test_builtin_errors():
    with pytest.raises(ParseError, match="unknown builtin operator"):
        parse_builtin("builtin:nope")
    with pytest.raises(ParseError, match="unknown builtin parameters"):
        ingest_operator("builtin:identity:n=3,q=1")
    with pytest.raises(ParseError, match="required"):
        ingest_operator("builtin:identity")
    with pytest.raises(ParseError, match="integer"):
        ingest_operator("builtin:identity:n=two")
    with pytest.raises(ParseError, match="key=value"):
        parse_builtin("builtin:identity:n")
    with pytest.raises(ParseError, match="infer"):
        ingest_operator("matrix.bin")


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        ingest_operator(str(tmp_path / "missing.csv"))


def test_certification_failure_propagates(tmp_path):
    p = tmp_path / "rot.csv"
    p.write_text("0,-1\n1,0\n")
    with pytest.raises(SectorialityError):
        ingest_operator(str(p))


def test_model_overrides():
    A, model = builtin_matrix("diag", values="1;2;3", sigma="0.5", m="1;2;4")
    assert np.allclose(model.sigma, 0.5) and np.allclose(model.m, [1, 2, 4])
    with pytest.raises(ParseError, match="entries"):
        builtin_matrix("diag", values="1;2;3", m="1;2")
    op, model = ingest_operator("builtin:diag:values=0;1;4")
    assert op.mu == 0 and op.theta == 0


def test_convection_diffusion_certified():
    A, _ = ingest_operator("builtin:convection_diffusion_1d:n=16,nu=0.01,b=0.05")
    assert not A.is_hermitian and A.coercive and A.theta < np.pi / 2
