"""Semigroup ``exp(-rA)``, resolvents and two routes to ``A**s``.

The spectral route diagonalizes ``A``; the integral route evaluates

    A**(-a) x = 1/Gamma(a) * int_0^inf r**a exp(-rA) x dr/r

with a :class:`~fracdtn.quadrature.QuadratureRule` and recovers
``A**s x = A (A**-(1-s) x)``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import SingularOperatorError, SpectralError
from .operator import SectorialOperator
from .quadrature import QuadratureRule, default_rule

__all__ = [
    "expm",
    "semigroup_apply",
    "semigroup_sum",
    "frac_power_spectral",
    "negative_power",
    "frac_power_balakrishnan",
    "resolvent_apply",
    "EIGVEC_COND_CAP",
]

EIGVEC_COND_CAP = 1e8
# nodes whose bound falls this far below the largest contribution are skipped
NODE_CUTOFF = 1e-20

# Pade [13/13] coefficients and the 1-norm threshold for double precision
# (Higham 2005).
_B13 = np.array([
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
    33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
])
_THETA13 = 5.371920351148152


def _pade13(X):
    """Diagonal Pade approximant of exp on a (batched) matrix with small norm."""
    b = _B13
    eye = np.broadcast_to(np.eye(X.shape[-1], dtype=X.dtype), X.shape)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
             + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * eye)
    V = X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * eye
    return np.linalg.solve(V - U, V + U)


def expm(X):
    """Matrix exponential by scaling and squaring with the degree-13 Pade approximant.

    Accepts a single matrix or a stack ``(..., n, n)``; each matrix in a stack
    gets its own scaling exponent.
    """
    X = np.asarray(X)
    if not np.iscomplexobj(X):
        X = X.astype(float)
    single = X.ndim == 2
    if single:
        X = X[None]
    norms = np.abs(X).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        sq = np.where(norms > _THETA13, np.ceil(np.log2(norms / _THETA13)), 0).astype(int)
    E = _pade13(X / (2.0 ** sq)[:, None, None])
    for j in range(1, int(sq.max(initial=0)) + 1):
        idx = sq >= j
        E[idx] = E[idx] @ E[idx]
    return E[0] if single else E


def _as_columns(A: SectorialOperator, x):
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != A.n:
        raise ValueError(f"vector has length {x.shape[0]}, operator dimension is {A.n}")
    return x


def semigroup_apply(A: SectorialOperator, r: float, x) -> np.ndarray:
    """``exp(-rA) x``; eigendecomposition when ``A`` is H-self-adjoint, Pade otherwise."""
    if r < 0:
        raise ValueError("semigroup time must be nonnegative")
    x = _as_columns(A, x)
    if r == 0:
        return x.copy()
    if A.is_hermitian:
        lam, Q = A.h_eigh()
        rs = np.sqrt(A.model.sigma)
        y = Q.conj().T @ (rs.reshape((-1,) + (1,) * (x.ndim - 1)) * x)
        y = np.exp(-r * lam).reshape((-1,) + (1,) * (x.ndim - 1)) * y
        return (Q @ y) / rs.reshape((-1,) + (1,) * (x.ndim - 1))
    return expm(-r * A.matrix) @ x


def semigroup_sum(A: SectorialOperator, r, coeffs, x) -> np.ndarray:
    """``sum_k coeffs[..., k] exp(-r_k A) x`` for a node set ``r``.

    ``coeffs`` has shape ``(K,)`` or ``(T, K)``; the result has shape of ``x``
    or ``(T,) + x.shape`` respectively.  Nodes whose contribution is bounded
    below ``NODE_CUTOFF`` times the largest one are dropped, using
    ``|exp(-rA)|_{L(H)} <= exp(-r omega)`` with ``omega`` the H-coercivity.
    """
    x = _as_columns(A, x)
    r = np.asarray(r, dtype=float)
    C = np.atleast_2d(np.asarray(coeffs))
    omega = A.h_coercivity
    if omega > 0:
        with np.errstate(over="ignore", under="ignore"):
            bound = np.abs(C).max(axis=0) * np.exp(-r * omega)
        keep = bound >= NODE_CUTOFF * bound.max()
    else:
        keep = np.abs(C).max(axis=0) > 0
    r, C = r[keep], C[:, keep]

    if A.is_hermitian:
        lam, Q = A.h_eigh()
        rs = np.sqrt(A.model.sigma)
        xs = x.reshape(A.n, -1)
        y = Q.conj().T @ (rs[:, None] * xs)
        with np.errstate(under="ignore"):
            g = C @ np.exp(-np.outer(r, lam))  # (T, n)
        out = np.einsum("ij,tj,jk->tik", Q, g, y) / rs[None, :, None]
        out = out.reshape((C.shape[0],) + x.shape)
    else:
        E = expm(-r[:, None, None] * A.matrix[None])
        EX = np.einsum("kij,j...->ki...", E, x)
        out = np.tensordot(C, EX, axes=(1, 0))
    return out[0] if np.ndim(coeffs) == 1 else out


def _eig(A: SectorialOperator):
    if "eig" not in A._cache:
        if A.is_hermitian:
            lam, Q = A.h_eigh()
            rs = np.sqrt(A.model.sigma)
            P = Q / rs[:, None]
            Pinv = Q.conj().T * rs[None, :]
            A._cache["eig"] = (lam.astype(complex), P, Pinv)
        else:
            lam, P = np.linalg.eig(A.matrix)
            cond = np.linalg.cond(P)
            if not cond < EIGVEC_COND_CAP:
                raise SpectralError(
                    f"eigenvector matrix condition number {cond:.2e} exceeds {EIGVEC_COND_CAP:.0e}; "
                    "use frac_power_balakrishnan for this operator"
                )
            A._cache["eig"] = (lam, P, np.linalg.inv(P))
    return A._cache["eig"]


def spectral_function(A: SectorialOperator, f, x) -> np.ndarray:
    """``f(A) x`` through the eigendecomposition of ``A``."""
    x = _as_columns(A, x)
    lam, P, Pinv = _eig(A)
    fl = f(lam).reshape((-1,) + (1,) * (x.ndim - 1))
    out = P @ (fl * (Pinv @ x))
    return out


def _principal_power(lam, s):
    lam = np.asarray(lam, dtype=complex)
    out = np.zeros_like(lam)
    nz = np.abs(lam) > 0
    out[nz] = np.exp(s * np.log(lam[nz]))
    return out


def frac_power_spectral(A: SectorialOperator, s: float, x) -> np.ndarray:
    """``A**s x`` from ``P diag(lam**s) P^-1`` with the principal branch and ``0**s = 0``."""
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    lam = _eig(A)[0]
    scale = max(1.0, np.abs(lam).max())
    if np.any(lam.real < -1e-10 * scale):
        raise SpectralError("operator has eigenvalues in the open left half-plane")
    return spectral_function(A, lambda l: _principal_power(l, s), x)


def _require_invertible(A: SectorialOperator):
    if A.h_coercivity > 0:
        return
    lam = np.linalg.eigvals(A.matrix)
    if np.min(lam.real) <= 1e-14 * max(1.0, np.abs(lam).max()):
        raise SingularOperatorError(
            "operator is not invertible (spectrum reaches 0); the semigroup integral diverges"
        )


def negative_power(A: SectorialOperator, a: float, x, rule: QuadratureRule | None = None):
    """``A**(-a) x = 1/Gamma(a) sum_k w_k r_k**a exp(-r_k A) x`` for ``a`` in (0, 1]."""
    if not 0 < a <= 1:
        raise ValueError("exponent must lie in (0, 1]")
    _require_invertible(A)
    rule = rule or default_rule()
    r = rule.nodes
    coeffs = rule.weights * np.exp(a * np.log(r)) / gamma_fn(a)
    return semigroup_sum(A, r, coeffs, x)


def frac_power_balakrishnan(A: SectorialOperator, s: float, x, rule: QuadratureRule | None = None):
    """``A**s x`` as ``A (A**-(1-s) x)``, the negative power from the semigroup integral."""
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    y = negative_power(A, 1.0 - s, x, rule)
    return A.matrix @ y


def resolvent_apply(A: SectorialOperator, z: complex, x) -> np.ndarray:
    """``(zI + A)^{-1} x`` by a direct solve."""
    x = _as_columns(A, x)
    K = z * np.eye(A.n) + A.matrix
    cond = np.linalg.cond(K)
    if not cond < 1e14:
        raise SingularOperatorError(f"zI + A is numerically singular (condition {cond:.2e}) at z={z}")
    return np.linalg.solve(K, x)
