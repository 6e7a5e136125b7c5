"""Operator ingestion: Matrix Market files, dense CSV and built-in test operators.

Every path returns a certified :class:`SectorialOperator` together with its
measure-space model.  Built-ins are named ``builtin:NAME[:key=value,...]``;
list-valued parameters separate entries with ``;``.

Built-in operators
------------------
``dirichlet_laplacian_1d``  n, h=1/(n+1)       (2, -1)/h**2 tridiagonal, sigma = h
``dirichlet_laplacian_2d``  n, h=1/(n+1)       5-point stencil on an n x n grid, sigma = h**2
``scaled_laplacian_1d``     n, lo=1, hi=100    1D Laplacian mapped affinely onto [lo, hi]
``convection_diffusion_1d`` n, nu=1, b=1, shift=1   nu*Lap + b*centred d/dx + shift, unit weights
``identity``                n
``diag``                    values             diagonal matrix

Any built-in accepts ``sigma`` and ``m`` (scalar or ``;`` list) to override the model.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import ParseError
from .operator import MeasureSpaceModel, SectorialOperator

__all__ = ["FORMATS", "BUILTINS", "ingest_operator", "parse_builtin", "builtin_matrix",
           "read_dense_csv", "write_dense_csv", "read_matrix_market", "write_matrix_market"]

FORMATS = ("MatrixMarket", "DenseCSV", "Builtin")


def _lap1d(n, h):
    return (2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / h**2


def _int(params, key, default=None):
    if key not in params:
        if default is None:
            raise ParseError(f"builtin parameter '{key}' is required")
        return default
    try:
        v = int(params[key])
    except ValueError:
        raise ParseError(f"builtin parameter '{key}' must be an integer, got {params[key]!r}") from None
    if v < 1:
        raise ParseError(f"builtin parameter '{key}' must be positive")
    return v


def _float(params, key, default):
    if key not in params:
        return default
    try:
        return float(params[key])
    except ValueError:
        raise ParseError(f"builtin parameter '{key}' must be a number, got {params[key]!r}") from None


def _floats(text, key):
    try:
        return np.array([float(v) for v in str(text).split(";") if v.strip()])
    except ValueError:
        raise ParseError(f"builtin parameter '{key}' must be a ';'-separated list of numbers") from None


def _b_dirichlet_laplacian_1d(p):
    n = _int(p, "n")
    h = _float(p, "h", 1.0 / (n + 1))
    return _lap1d(n, h), np.full(n, h)


def _b_dirichlet_laplacian_2d(p):
    n = _int(p, "n")
    h = _float(p, "h", 1.0 / (n + 1))
    L = _lap1d(n, h)
    I = np.eye(n)
    return np.kron(L, I) + np.kron(I, L), np.full(n * n, h * h)


def _b_scaled_laplacian_1d(p):
    n = _int(p, "n")
    lo, hi = _float(p, "lo", 1.0), _float(p, "hi", 100.0)
    if not 0 < lo < hi:
        raise ParseError("scaled_laplacian_1d needs 0 < lo < hi")
    L = _lap1d(n, 1.0 / (n + 1))
    ev = np.linalg.eigvalsh(L)
    if n == 1:
        return np.array([[lo]]), np.ones(1)
    return lo * np.eye(n) + (L - ev[0] * np.eye(n)) * (hi - lo) / (ev[-1] - ev[0]), np.ones(n)


def _b_convection_diffusion_1d(p):
    n = _int(p, "n")
    h = 1.0 / (n + 1)
    nu, b, shift = _float(p, "nu", 1.0), _float(p, "b", 1.0), _float(p, "shift", 1.0)
    D = (np.eye(n, k=1) - np.eye(n, k=-1)) / (2 * h)
    return nu * _lap1d(n, h) + b * D + shift * np.eye(n), np.ones(n)


def _b_identity(p):
    n = _int(p, "n")
    return np.eye(n), np.ones(n)


def _b_diag(p):
    if "values" not in p:
        raise ParseError("builtin parameter 'values' is required")
    v = _floats(p["values"], "values")
    if v.size == 0:
        raise ParseError("diag needs at least one value")
    return np.diag(v), np.ones(v.size)


BUILTINS = {
    "dirichlet_laplacian_1d": _b_dirichlet_laplacian_1d,
    "dirichlet_laplacian_2d": _b_dirichlet_laplacian_2d,
    "scaled_laplacian_1d": _b_scaled_laplacian_1d,
    "convection_diffusion_1d": _b_convection_diffusion_1d,
    "identity": _b_identity,
    "diag": _b_diag,
}


def parse_builtin(spec: str):
    """``builtin:NAME:k=v,k=v`` (the ``builtin:`` prefix is optional) -> ``(name, params)``."""
    body = spec[len("builtin:"):] if spec.startswith("builtin:") else spec
    name, _, rest = body.partition(":")
    name = name.strip()
    if name not in BUILTINS:
        raise ParseError(f"unknown builtin operator {name!r}; available: {', '.join(sorted(BUILTINS))}")
    params = {}
    for item in filter(None, (x.strip() for x in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq or not key.strip():
            raise ParseError(f"builtin parameter {item!r} is not of the form key=value")
        params[key.strip()] = val.strip()
    return name, params


def builtin_matrix(name: str, **params):
    """Matrix and default model of a built-in operator."""
    params = {k: str(v) for k, v in params.items()}
    if name not in BUILTINS:
        raise ParseError(f"unknown builtin operator {name!r}")
    known = {"n", "h", "lo", "hi", "nu", "b", "shift", "values", "sigma", "m"}
    bad = sorted(set(params) - known)
    if bad:
        raise ParseError(f"unknown builtin parameters: {', '.join(bad)}")
    A, sigma = BUILTINS[name](params)
    m = np.ones(A.shape[0])
    for key, default in (("sigma", sigma), ("m", m)):
        if key in params:
            v = _floats(params[key], key)
            if v.size == 1:
                v = np.full(A.shape[0], v[0])
            if v.size != A.shape[0]:
                raise ParseError(f"'{key}' has {v.size} entries, operator has {A.shape[0]} rows")
            if key == "sigma":
                sigma = v
            else:
                m = v
    return A, MeasureSpaceModel(sigma, m)


def _parse_complex(cell, where):
    text = cell.strip().replace(" ", "")
    if text.endswith("i"):
        text = text[:-1] + "j"
    try:
        z = complex(text)
    except ValueError:
        raise ParseError(f"{where}: cannot parse {cell!r} as a number") from None
    return z


def read_dense_csv(text: str) -> np.ndarray:
    """Square matrix from CSV rows; ``#`` lines are comments, entries may be complex (``1+2j``)."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = next(csv.reader([line]))
        rows.append([_parse_complex(c, f"line {lineno}, column {k + 1}") for k, c in enumerate(cells)])
    if not rows:
        raise ParseError("CSV holds no matrix rows")
    width = len(rows[0])
    for k, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"row {k + 1} has {len(r)} entries, expected {width}")
    M = np.array(rows, dtype=complex)
    if M.shape[0] != M.shape[1]:
        raise ParseError(f"matrix is {M.shape[0]}x{M.shape[1]}, not square")
    return M.real.copy() if np.all(M.imag == 0) else M


def write_dense_csv(M) -> str:
    M = np.asarray(M)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in M:
        if np.iscomplexobj(M):
            w.writerow([repr(complex(z)).strip("()") for z in row])
        else:
            w.writerow([repr(float(z)) for z in row])
    return buf.getvalue()


def read_matrix_market(path) -> np.ndarray:
    try:
        M = scipy.io.mmread(str(path))
    except Exception as exc:  # scipy raises ValueError/OSError with line information
        raise ParseError(f"{path}: not a readable Matrix Market file ({exc})") from exc
    M = M.toarray() if sp.issparse(M) else np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParseError(f"{path}: matrix is {M.shape}, not square")
    return M


def write_matrix_market(path, M, *, symmetry=None):
    """Coordinate-format output with 17 significant digits, so doubles round-trip exactly.

    ``symmetry`` defaults to ``"symmetric"`` for exactly symmetric real input.
    """
    M = np.asarray(M)
    if np.iscomplexobj(M) and np.all(M.imag == 0):
        M = M.real
    if symmetry is None:
        symmetry = "symmetric" if (not np.iscomplexobj(M) and np.array_equal(M, M.T)) else "general"
    scipy.io.mmwrite(str(path), sp.coo_matrix(M), symmetry=symmetry, precision=17)


def _infer_format(spec: str):
    if spec.startswith("builtin:"):
        return "Builtin"
    suffix = Path(spec).suffix.lower()
    if suffix in (".mtx", ".mm"):
        return "MatrixMarket"
    if suffix in (".csv", ".txt"):
        return "DenseCSV"
    raise ParseError(f"cannot infer the format of {spec!r}; use a .mtx/.csv file or builtin:NAME")


def ingest_operator(spec: str, fmt: str | None = None, model: MeasureSpaceModel | None = None):
    """Load and certify an operator; returns ``(SectorialOperator, MeasureSpaceModel)``.

    File formats get the unit model unless ``model`` is given.  Certification
    failures propagate as :class:`~fracdtn.errors.SectorialityError`.
    """
    fmt = fmt or _infer_format(spec)
    if fmt not in FORMATS:
        raise ParseError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if fmt == "Builtin":
        name, params = parse_builtin(spec)
        M, default_model = builtin_matrix(name, **params)
    elif fmt == "MatrixMarket":
        M = read_matrix_market(spec)
        default_model = MeasureSpaceModel.unit(M.shape[0])
    else:
        try:
            text = Path(spec).read_text()
        except OSError as exc:
            raise ParseError(f"{spec}: {exc.strerror}") from exc
        try:
            M = read_dense_csv(text)
        except ParseError as exc:
            raise ParseError(f"{spec}: {exc}") from None
        default_model = MeasureSpaceModel.unit(M.shape[0])
    model = model or default_model
    if model.n != M.shape[0]:
        raise ParseError(f"model has {model.n} points, operator has {M.shape[0]} rows")
    return SectorialOperator.certify(M, model), model
