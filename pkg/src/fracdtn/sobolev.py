"""Discrete weighted Sobolev spaces on a truncated graded half-line.

Functions live on ``0 = t_0 < ... < t_N = T`` with ``t_j = T (j/N)**gamma``
and are continuous piecewise linear in ``t`` with values in ``C^n``.  The
degenerate weight ``t**(1-2s)`` of the extension problem is integrated
against element polynomials in closed form; the ``W_s`` norms use the cheaper
trapezoid/midpoint rule.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError
from .operator import MeasureSpaceModel, SectorialOperator

__all__ = [
    "GradedMesh",
    "GridFunction",
    "default_T",
    "default_gamma",
    "cell_moments",
    "weighted_fem_matrices",
    "ws_gram",
    "ws_norm",
    "bs_form",
    "discrete_s_normal",
    "integration_by_parts_residual",
]

# truncation length in units of the H decay length 1/sqrt(omega)
T_DECAY_LENGTHS = 10.0
GRADING_NUMERATOR = 1.5
_SERIES_TERMS = 60


def default_gamma(s: float) -> float:
    """Grading exponent ``max(1, 1.5/s)``.

    The extension behaves like ``x - y t**(2s)/(2s)`` near 0, which P1 elements
    resolve at full order once ``gamma > 1/s``.  Grading harder for ``s > 1/2``
    pushes the increments ``u(t_j) - x`` below rounding of ``x``.
    """
    return max(1.0, GRADING_NUMERATOR / s)


def default_T(A: SectorialOperator) -> float:
    omega = A.h_coercivity
    if not omega > 0:
        raise ValueError("default truncation needs an H-coercive operator")
    return T_DECAY_LENGTHS / math.sqrt(omega)


@dataclass(frozen=True)
class GradedMesh:
    """Nodes ``t_j = T (j/N)**gamma``, ``j = 0..N``."""

    T: float
    N: int
    gamma: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("truncation time T must be positive")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("cell count N must be a positive integer")
        if not self.gamma >= 1:
            raise ValueError("grading exponent must be >= 1")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "gamma", float(self.gamma))
        t = self.T * (np.arange(self.N + 1) / self.N) ** self.gamma
        t[-1] = self.T
        t.setflags(write=False)
        object.__setattr__(self, "_nodes", t)

    @classmethod
    def for_operator(cls, A: SectorialOperator, s: float, N: int, T=None, gamma=None) -> "GradedMesh":
        return cls(default_T(A) if T is None else T, N, default_gamma(s) if gamma is None else gamma)

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self._nodes)

    def same_as(self, other: "GradedMesh") -> bool:
        return self.N == other.N and np.array_equal(self.nodes, other.nodes)


@dataclass(frozen=True)
class GridFunction:
    """Values ``u(t_j)`` in ``C^n`` on a mesh; row ``j`` is ``u(t_j)``."""

    mesh: GradedMesh
    values: np.ndarray
    model: MeasureSpaceModel

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.mesh.N + 1:
            raise DimensionError(f"{v.shape[0]} value rows for a mesh with {self.mesh.N + 1} nodes")
        if v.shape[1] != self.model.n:
            raise DimensionError(f"values have {v.shape[1]} components, model has n={self.model.n}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, mesh: GradedMesh, f, model: MeasureSpaceModel) -> "GridFunction":
        """Evaluate ``f(t) -> (len(t), n)`` (or ``(len(t),)`` for n = 1) on the nodes."""
        vals = np.asarray(f(mesh.nodes))
        return cls(mesh, vals.reshape(mesh.N + 1, -1), model)

    @property
    def trace(self) -> np.ndarray:
        return self.values[0].copy()

    def __add__(self, other):
        self._check_compatible(other)
        return GridFunction(self.mesh, self.values + other.values, self.model)

    def __sub__(self, other):
        self._check_compatible(other)
        return GridFunction(self.mesh, self.values - other.values, self.model)

    def __mul__(self, c):
        return GridFunction(self.mesh, c * self.values, self.model)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if not self.mesh.same_as(other.mesh):
            raise DimensionError("grid functions live on different meshes")
        if self.model.n != other.model.n:
            raise DimensionError("grid functions have different dimensions")

    def to_csv(self, fh=None) -> str | None:
        """Write ``t, Re u_1, Im u_1, ...`` with ``#`` comment lines carrying mesh and model."""
        buf = io.StringIO()
        buf.write(f"# mesh T={self.mesh.T!r} N={self.mesh.N} gamma={self.mesh.gamma!r}\n")
        buf.write("# sigma=" + " ".join(repr(float(x)) for x in self.model.sigma) + "\n")
        buf.write("# m=" + " ".join(repr(float(x)) for x in self.model.m) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        header = ["t"]
        for i in range(1, self.model.n + 1):
            header += [f"Re u_{i}", f"Im u_{i}"]
        w.writerow(header)
        for t, row in zip(self.mesh.nodes, self.values):
            cells = [repr(float(t))]
            for z in row:
                cells += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow(cells)
        text = buf.getvalue()
        if fh is None:
            return text
        fh.write(text)
        return None

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        meta, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("mesh"):
                    for item in body.split()[1:]:
                        k, v = item.split("=")
                        meta[k] = float(v)
                elif "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = np.array([float(x) for x in v.split()])
            elif line.strip():
                rows.append(line)
        data = list(csv.reader(rows))
        if not data or data[0][0] != "t":
            raise ValueError("grid function CSV lacks the 't, Re u_1, Im u_1, ...' header")
        arr = np.array(data[1:], dtype=float)
        n = (arr.shape[1] - 1) // 2
        if "T" in meta:
            mesh = GradedMesh(meta["T"], int(meta["N"]), meta["gamma"])
            if not np.array_equal(mesh.nodes, arr[:, 0]):
                raise ValueError("node column does not match the recorded mesh parameters")
        else:
            raise ValueError("grid function CSV lacks the '# mesh ...' line")
        sigma = meta.get("sigma", np.ones(n))
        m = meta.get("m", np.ones(n))
        vals = arr[:, 1::2] + 1j * arr[:, 2::2]
        return cls(mesh, vals, MeasureSpaceModel(sigma, m))


# ---------------------------------------------------------------------------
# closed-form cell integrals of the degenerate weight


def cell_moments(a, b, q, kmax=2):
    """``I_k = int_a^b (t - a)**k t**q dt`` for ``k = 0..kmax``, ``q > -1``.

    Cells touching or close to the origin (``a < 2 (b - a)``) use power-rule
    antiderivatives directly; the rest expand ``(a + h xi)**q`` in the
    binomial series in ``rho = h/a <= 1/2`` to avoid cancellation in
    ``b**p - a**p``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    h = b - a
    out = np.empty((kmax + 1,) + a.shape)
    near = a < 2 * h

    if np.any(near):
        an, bn = a[near], b[near]
        P = [(bn ** (i + q + 1) - an ** (i + q + 1)) / (i + q + 1) for i in range(kmax + 1)]
        for k in range(kmax + 1):
            acc = np.zeros_like(an)
            for i in range(k + 1):
                acc += math.comb(k, i) * (-an) ** (k - i) * P[i]
            out[k, near] = acc

    far = ~near
    if np.any(far):
        af, hf = a[far], h[far]
        rho = hf / af
        coef = 1.0
        terms = np.zeros((kmax + 1,) + af.shape)
        rpow = np.ones_like(af)
        for mm in range(_SERIES_TERMS):
            for k in range(kmax + 1):
                terms[k] += coef * rpow / (k + mm + 1)
            coef *= (q - mm) / (mm + 1)
            rpow = rpow * rho
            if coef == 0:
                break
        for k in range(kmax + 1):
            out[k, far] = hf ** (k + 1) * af**q * terms[k]
    return out


def weighted_fem_matrices(mesh: GradedMesh, s: float):
    """Exact P1 stiffness and mass matrices for the weight ``t**(1-2s)``.

    Returns sparse ``(K, M)`` with ``K_ij = int phi_i' phi_j' w`` and
    ``M_ij = int phi_i phi_j w``.
    """
    t = mesh.nodes
    a, b = t[:-1], t[1:]
    h = b - a
    I0, I1, I2 = cell_moments(a, b, 1.0 - 2.0 * s)
    k_cell = I0 / h**2
    m_rr = I2 / h**2
    m_lr = I1 / h - m_rr
    m_ll = I0 - 2 * I1 / h + m_rr
    N = mesh.N
    main_k = np.zeros(N + 1)
    main_k[:-1] += k_cell
    main_k[1:] += k_cell
    main_m = np.zeros(N + 1)
    main_m[:-1] += m_ll
    main_m[1:] += m_rr
    K = sp.diags([-k_cell, main_k, -k_cell], [-1, 0, 1], format="csr")
    M = sp.diags([m_lr, main_m, m_lr], [-1, 0, 1], format="csr")
    return K, M


def _midpoint_weights(mesh: GradedMesh, s: float):
    t = mesh.nodes
    h = np.diff(t)
    mid = 0.5 * (t[:-1] + t[1:])
    return h, mid ** (2 * s - 1)


def ws_gram(mesh: GradedMesh, s: float):
    """Scalar matrices ``(Kw, Mw)`` of the discrete ``W_s`` norm.

    For a grid function with component columns ``U_i``,
    ``|u|^2 = sum_i sigma_i (U_i^* Kw U_i + m_i U_i^* Mw U_i)``.  ``Mw`` is the
    lumped (trapezoid) mass, so it is diagonal.
    """
    h, wm = _midpoint_weights(mesh, s)
    N = mesh.N
    kc = wm / h
    main_k = np.zeros(N + 1)
    main_k[:-1] += kc
    main_k[1:] += kc
    lump = np.zeros(N + 1)
    lump[:-1] += 0.5 * h * wm
    lump[1:] += 0.5 * h * wm
    Kw = sp.diags([-kc, main_k, -kc], [-1, 0, 1], format="csr")
    Mw = sp.diags(lump, 0, format="csr")
    return Kw, Mw


def ws_norm(u: GridFunction, s: float) -> float:
    """Discrete ``W_s(H, V)`` norm: ``(int (|u|_V^2 + |u'|_H^2) t**(2s-1) dt)**(1/2)``.

    Each cell contributes its trapezoid value of ``|u|_V^2`` and the squared
    difference quotient, both times ``t**(2s-1)`` at the cell midpoint.  The
    cell terms are summed with ``math.fsum`` so the result does not depend on
    summation order.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    h, wm = _midpoint_weights(u.mesh, s)
    sig, m = u.model.sigma, u.model.m
    a2 = np.abs(u.values) ** 2
    du2 = np.abs(np.diff(u.values, axis=0)) ** 2
    val_terms = (h * wm)[:, None] * (sig * m)[None, :] * (a2[:-1] + a2[1:]) * 0.5
    der_terms = (wm / h)[:, None] * sig[None, :] * du2
    return math.sqrt(math.fsum(np.concatenate([val_terms.ravel(), der_terms.ravel()])))


def _matrix_of(A):
    return A.matrix if isinstance(A, SectorialOperator) else np.asarray(A, dtype=complex)


def bs_form(u: GridFunction, v: GridFunction, A, s: float) -> complex:
    """``b_s(u, v) = int (<u', v'>_H + <Au, v>_H) t**(1-2s) dt`` for P1 grid functions.

    Exact for piecewise-linear ``u, v`` on the truncated interval.
    """
    if not u.mesh.same_as(v.mesh):
        raise DimensionError("bs_form arguments live on different meshes")
    if u.model.n != v.model.n:
        raise DimensionError("bs_form arguments have different dimensions")
    K, M = weighted_fem_matrices(u.mesh, s)
    Am = _matrix_of(A)
    U = u.values
    R = K @ U + (M @ U) @ Am.T
    return complex(np.sum(np.conj(v.values) * R * u.model.sigma[None, :]))


def discrete_s_normal(u: GridFunction, s: float) -> np.ndarray:
    """One-cell s-normal derivative ``2s (u(t_0) - u(t_1)) / t_1**(2s)``.

    Exact for ``u(t) = x - y t**(2s) / (2s)`` near the origin.
    """
    if u.mesh.N < 1:
        raise ValueError("need at least two nodes")
    t1 = u.mesh.nodes[1]
    return 2 * s * (u.values[0] - u.values[1]) / t1 ** (2 * s)


def integration_by_parts_residual(w: GridFunction, v: GridFunction, s: float) -> float:
    """``|int <w', v> + int <w, v'> + <w(0), v(0)>|`` by discrete quadrature.

    Derivatives are second-order nodal finite differences and integrals the
    composite trapezoid rule, so for smooth samples vanishing at ``T`` the
    residual is ``O(h**2)``.  ``w`` is read in ``V'`` and ``v`` in ``V``; both
    pairings reduce to ``sum_i f_i conj(g_i) sigma_i``.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    if not w.mesh.same_as(v.mesh):
        raise DimensionError("integration by parts arguments live on different meshes")
    t = w.mesh.nodes
    sig = w.model.sigma
    W, Vv = w.values, v.values
    if w.mesh.N >= 2:
        dW = np.gradient(W, t, axis=0, edge_order=2)
        dV = np.gradient(Vv, t, axis=0, edge_order=2)
    else:
        dW = np.gradient(W, t, axis=0)
        dV = np.gradient(Vv, t, axis=0)
    f1 = np.sum(dW * np.conj(Vv) * sig, axis=1)
    f2 = np.sum(W * np.conj(dV) * sig, axis=1)
    integral = np.trapezoid(f1 + f2, t)
    boundary = np.sum(W[0] * np.conj(Vv[0]) * sig)
    return float(abs(integral + boundary))
