"""Galerkin Dirichlet and Neumann problems for the s-harmonic extension.

The trial space is continuous piecewise-linear in ``t`` on a graded mesh,
tensor ``C^n`` in space, with ``u(T) = 0`` at the truncation point.  The
Dirichlet problem fixes ``u(0) = x`` and tests against functions vanishing
at 0; the Neumann problem leaves ``u(0)`` free and loads ``<y, v(0)>_H``.

With node-major unknowns the stiffness operator is

    S = K (x) I + M (x) A,

``K, M`` the exact weighted P1 matrices.  The discrete Neumann datum of a
Dirichlet solution is read off the first block row of ``S u``, which is the
discrete form of ``b_s(u, v) = <y, v(0)>`` and is exact at the discrete level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularOperatorError
from .operator import SectorialOperator, SpaceTag, duality_pairing, weighted_norm
from .sobolev import (
    GradedMesh,
    GridFunction,
    bs_form,
    discrete_s_normal,
    weighted_fem_matrices,
    ws_norm,
)

__all__ = [
    "ExtensionSolution",
    "ExtensionSystem",
    "solve_dirichlet",
    "solve_neumann",
    "dtn_matrix",
    "IsomorphismReport",
    "verify_dtn_isomorphism",
    "dirichlet_energy_identity",
    "trace_constant",
    "stability_constant",
]

EXTRACTIONS = ("flux", "one_cell")


@dataclass(frozen=True)
class ExtensionSolution:
    u: GridFunction
    trace: np.ndarray
    s_normal: np.ndarray
    energy: complex
    s: float
    extraction: str = "flux"


class ExtensionSystem:
    """Assembled and factorized extension system for one ``(A, s, mesh)``.

    Factorizations are built lazily and reused for every right-hand side.
    """

    def __init__(self, A: SectorialOperator, s: float, mesh: GradedMesh):
        if not 0 < s < 1:
            raise ValueError("s must lie in (0, 1)")
        if not A.coercive:
            raise ValueError("Galerkin extension solves need a coercive operator (mu > 0)")
        self.A, self.s, self.mesh = A, s, mesh
        self.n = A.n
        Am = A.matrix
        self._real = bool(np.all(Am.imag == 0))
        dtype = float if self._real else complex
        K, M = weighted_fem_matrices(mesh, s)
        self.K, self.M = K, M
        Amat = sp.csr_matrix(Am.real if self._real else Am)
        self.S = (sp.kron(K, sp.identity(self.n)) + sp.kron(M, Amat)).astype(dtype).tocsc()
        self._lu = {}

    def _block(self, j0, j1):
        return slice(j0 * self.n, j1 * self.n)

    def _factor(self, kind):
        if kind not in self._lu:
            N = self.mesh.N
            rows = self._block(1, N) if kind == "dirichlet" else self._block(0, N)
            sub = self.S[rows, rows].tocsc()
            try:
                self._lu[kind] = spla.splu(sub, permc_spec="NATURAL")
            except RuntimeError as exc:
                raise SingularOperatorError(f"{kind} stiffness system is singular: {exc}") from exc
        return self._lu[kind]

    def _solve(self, kind, rhs):
        lu = self._factor(kind)
        if self._real and np.iscomplexobj(rhs):
            out = lu.solve(np.ascontiguousarray(rhs.real)) + 1j * lu.solve(np.ascontiguousarray(rhs.imag))
        else:
            out = lu.solve(rhs)
        if not np.all(np.isfinite(out)):
            raise SingularOperatorError(f"{kind} solve produced non-finite values")
        return out

    def dirichlet_nodes(self, X):
        """Node values ``(N+1, n, k)`` of the Dirichlet solutions with traces ``X[:, k]``."""
        X = np.asarray(X, dtype=complex).reshape(self.n, -1)
        N, n = self.mesh.N, self.n
        full = np.zeros(((N + 1) * n, X.shape[1]), dtype=complex)
        full[:n] = X
        if N > 1:
            rhs = -(self.S[self._block(1, N), self._block(0, 1)] @ X)
            full[self._block(1, N)] = self._solve("dirichlet", rhs)
        return full.reshape(N + 1, n, -1)

    def neumann_nodes(self, Y):
        """Node values of the Neumann solutions with data ``Y[:, k]``."""
        Y = np.asarray(Y, dtype=complex).reshape(self.n, -1)
        N, n = self.mesh.N, self.n
        rhs = np.zeros((N * n, Y.shape[1]), dtype=complex)
        rhs[:n] = Y
        full = np.zeros(((N + 1) * n, Y.shape[1]), dtype=complex)
        full[: N * n] = self._solve("neumann", rhs)
        return full.reshape(N + 1, n, -1)

    def flux(self, nodes):
        """First block row of ``S u``: the discrete ``-lim t**(1-2s) u'``."""
        N, n = self.mesh.N, self.n
        flat = nodes.reshape((N + 1) * n, -1)
        return self.S[self._block(0, 1), :] @ flat

    def dtn(self):
        """Discrete Dirichlet-to-Neumann matrix (Schur complement onto the trace)."""
        nodes = self.dirichlet_nodes(np.eye(self.n))
        return np.asarray(self.flux(nodes))


def _system(A, s, mesh, system):
    if system is not None:
        if system.A is not A or system.s != s or not system.mesh.same_as(mesh):
            raise ValueError("supplied system was assembled for a different problem")
        return system
    return ExtensionSystem(A, s, mesh)


def _solution(sys: ExtensionSystem, nodes, extraction, s_normal=None):
    u = GridFunction(sys.mesh, nodes, sys.A.model)
    if s_normal is None:
        if extraction == "flux":
            s_normal = np.asarray(sys.flux(nodes[:, :, None])).ravel()
        else:
            s_normal = discrete_s_normal(u, sys.s)
    energy = bs_form(u, u, sys.A, sys.s)
    return ExtensionSolution(u, u.trace, np.asarray(s_normal, dtype=complex), energy, sys.s, extraction)


def solve_dirichlet(A: SectorialOperator, s: float, x, mesh: GradedMesh, *,
                    extraction="flux", system=None) -> ExtensionSolution:
    """Discrete s-harmonic extension of the trace ``x``.

    ``extraction`` picks how the Neumann datum is read: ``"flux"`` (the
    discrete weak form, default) or ``"one_cell"`` (the near-origin
    expansion of :func:`~fracdtn.sobolev.discrete_s_normal`).
    """
    if extraction not in EXTRACTIONS:
        raise ValueError(f"extraction must be one of {EXTRACTIONS}")
    sys = _system(A, s, mesh, system)
    x = np.asarray(x, dtype=complex).ravel()
    nodes = sys.dirichlet_nodes(x)[:, :, 0]
    return _solution(sys, nodes, extraction)


def solve_neumann(A: SectorialOperator, s: float, y, mesh: GradedMesh, *,
                  system=None) -> ExtensionSolution:
    """Discrete s-harmonic function with ``b_s(u, v) = <y, v(0)>_H`` for all test ``v``."""
    sys = _system(A, s, mesh, system)
    y = np.asarray(y, dtype=complex).ravel()
    nodes = sys.neumann_nodes(y)[:, :, 0]
    return _solution(sys, nodes, "flux")


def dtn_matrix(A: SectorialOperator, s: float, mesh: GradedMesh, *, extraction="flux",
               system=None) -> np.ndarray:
    """Matrix of the discrete DtN map; column ``j`` is the Neumann datum of the extension of ``e_j``."""
    sys = _system(A, s, mesh, system)
    if extraction == "flux":
        return sys.dtn()
    nodes = sys.dirichlet_nodes(np.eye(A.n))
    t1 = mesh.nodes[1]
    return 2 * s * (nodes[0] - nodes[1]) / t1 ** (2 * s)


def dirichlet_energy_identity(sol: ExtensionSolution) -> float:
    """``|b_s(u, u) - <y, u(0)>| / |b_s(u, u)|``, with ``0/0 := 0``."""
    pairing = duality_pairing(sol.s_normal, sol.trace, sol.u.model)
    num = abs(sol.energy - pairing)
    den = abs(sol.energy)
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return num / den


def _weighted_op_norm(D, w_in, w_out):
    # sup |D f|_{w_out} / |f|_{w_in} for diagonal weights
    return float(np.linalg.norm(np.sqrt(w_out)[:, None] * D / np.sqrt(w_in)[None, :], 2))


def _scalar_trace_gram(Kw, Mw, m_i):
    # min { U^* (Kw + m Mw) U : U_0 = 1, U_N = 0 }
    Q = (Kw + m_i * Mw).tocsc()
    N = Q.shape[0] - 1
    if N == 1:
        return float(Q[0, 0])
    inner = Q[1:N, 1:N]
    coup = Q[1:N, 0].toarray().ravel()
    z = spla.spsolve(inner.tocsc(), coup)
    return float(Q[0, 0] - coup @ z)


def trace_constant(mesh: GradedMesh, s: float, model) -> float:
    """Smallest ``c`` with ``|v(0)|_{[H,V]_s} <= c |v|_{W_{1-s}(H,V)}`` on the discrete space.

    The ``W_{1-s}`` norm here is integrated exactly (the weight ``t**(1-2s)``
    of the stiffness system), so coercivity of ``b_s`` holds without
    quadrature error and the inverse bound is exact at the discrete level.
    """
    Kw, Mw = weighted_fem_matrices(mesh, s)
    best = 0.0
    cache = {}
    for m_i in model.m:
        if m_i not in cache:
            cache[m_i] = m_i**s / _scalar_trace_gram(Kw, Mw, m_i)
        best = max(best, cache[m_i])
    return math.sqrt(best)


def stability_constant(sys: ExtensionSystem) -> float:
    """``sup_y |u_y|_{W_{1-s}(H,V)} / |y|_{[H,V']_s}`` over discrete Neumann solutions."""
    A, s, mesh = sys.A, sys.s, sys.mesh
    sig, m = A.model.sigma, A.model.m
    nodes = sys.neumann_nodes(np.eye(A.n))  # (N+1, n, n): nodes[:, i, j] comp i of u_{e_j}
    Kw, Mw = sys.K, sys.M  # exact W_{1-s} Gram, as in trace_constant
    G = np.zeros((A.n, A.n), dtype=complex)
    for i in range(A.n):
        Ui = nodes[:, i, :]
        G += sig[i] * (Ui.conj().T @ (Kw @ Ui) + m[i] * (Ui.conj().T @ (Mw @ Ui)))
    wd = sig * m ** (-s)
    Gn = G / np.sqrt(wd)[:, None] / np.sqrt(wd)[None, :]
    lam_max = np.linalg.eigvalsh(0.5 * (Gn + Gn.conj().T))[-1]
    return math.sqrt(max(lam_max, 0.0))


@dataclass
class IsomorphismReport:
    s: float
    N: int
    norm_dtn: float
    norm_dtn_inv: float
    norm_dtn_unweighted: float
    norm_dtn_inv_unweighted: float
    trace_const: float
    mu_b: float
    inverse_bound: float
    stability_ratio: float
    stability_const: float
    bound_holds: bool = field(default=False)

    @property
    def condition(self) -> float:
        return self.norm_dtn * self.norm_dtn_inv

    def rows(self):
        return [(k, v) for k, v in self.__dict__.items()] + [("condition", self.condition)]


def verify_dtn_isomorphism(A: SectorialOperator, s: float, mesh: GradedMesh, *, system=None):
    """Norms of the discrete DtN map between ``[H,V]_s`` and ``[H,V']_s``.

    Reports ``|D_s|``, ``|D_s^-1|``, the discrete trace constant ``c``, the
    stability ratio ``sup |u|_W / |y|`` of the Neumann problem and its
    rescaling ``mu_b * ratio`` (the constant multiplying ``1/mu``), and checks
    ``|D_s^-1| <= c**2 / mu_b`` with ``mu_b = min(1, mu)`` the coercivity of
    ``b_s`` in ``W_{1-s}(H, V)``.
    """
    sys = _system(A, s, mesh, system)
    D = sys.dtn()
    Dinv = np.linalg.inv(D)
    model = A.model
    w_in = model.weights(SpaceTag.interp_hv(s))
    w_out = model.weights(SpaceTag.interp_hvdual(s))
    nd = _weighted_op_norm(D, w_in, w_out)
    ndi = _weighted_op_norm(Dinv, w_out, w_in)
    c = trace_constant(mesh, s, model)
    mu_b = min(1.0, A.mu)
    ratio = stability_constant(sys)
    return IsomorphismReport(
        s=s, N=mesh.N,
        norm_dtn=nd, norm_dtn_inv=ndi,
        norm_dtn_unweighted=float(np.linalg.norm(D, 2)),
        norm_dtn_inv_unweighted=float(np.linalg.norm(Dinv, 2)),
        trace_const=c, mu_b=mu_b, inverse_bound=c * c / mu_b,
        stability_ratio=ratio, stability_const=mu_b * ratio,
        bound_holds=bool(ndi <= c * c / mu_b * (1 + 1e-10)),
    )


def solution_ws_norm(sol: ExtensionSolution) -> float:
    """``|u|_{W_{1-s}(H,V)}`` of an extension solution."""
    return ws_norm(sol.u, 1.0 - sol.s)


def trace_norm(sol: ExtensionSolution) -> float:
    return weighted_norm(sol.trace, SpaceTag.interp_hv(sol.s), sol.u.model)
