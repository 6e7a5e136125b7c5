"""Diagonal Gelfand-triple model and sectorial matrices over it.

The test universe is a finite measure space ``{0, ..., n-1}`` with point
masses ``sigma`` and a multiplier ``m >= 1``.  With ``H = l2(sigma)`` as pivot,

    V  = l2(m * sigma),   V' = l2(sigma / m),
    [H, V]_s = l2(m**s * sigma),   [H, V']_s = l2(m**-s * sigma).

Operators are plain complex matrices acting on coordinate vectors; every
inner product is taken in the weighted coordinates above.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, SectorialityError

__all__ = [
    "MeasureSpaceModel",
    "SpaceTag",
    "SectorialOperator",
    "weighted_norm",
    "duality_pairing",
    "certify_sectorial",
]

# certification defaults
SAMPLE_COUNT = 10_000
REAL_PART_TOL = 1e-10
_ANGLE_BISECTIONS = 60


def _check_s(s):
    if not 0.0 < s < 1.0:
        raise ValueError(f"interpolation parameter must lie in (0, 1), got {s!r}")


@dataclass(frozen=True)
class MeasureSpaceModel:
    """Point weights ``sigma > 0`` and multiplier ``m >= 1`` on ``n`` points."""

    sigma: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=float).ravel()
        m = np.array(self.m, dtype=float).ravel()
        if sigma.shape != m.shape or sigma.size == 0:
            raise DimensionError("sigma and m must be non-empty and of equal length")
        if not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
            raise ValueError("measure weights sigma must be finite and strictly positive")
        if not np.all(np.isfinite(m)) or np.any(m < 1):
            raise ValueError("multiplier m must be finite and >= 1")
        sigma.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "m", m)

    @classmethod
    def unit(cls, n: int) -> "MeasureSpaceModel":
        return cls(np.ones(n), np.ones(n))

    @property
    def n(self) -> int:
        return self.sigma.size

    def weights(self, tag: "SpaceTag") -> np.ndarray:
        """Combined point weights ``w_i * sigma_i`` of the space named by ``tag``."""
        return tag.multiplier(self.m) * self.sigma

    def check_vector(self, f) -> np.ndarray:
        f = np.asarray(f)
        if f.shape[0] != self.n:
            raise DimensionError(f"expected leading dimension {self.n}, got {f.shape[0]}")
        return f


@dataclass(frozen=True)
class SpaceTag:
    """One of H, V, V', [H,V]_s or [H,V']_s."""

    kind: str
    s: float | None = None

    _KINDS = ("H", "V", "Vdual", "InterpHV", "InterpHVdual")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown space {self.kind!r}")
        if self.kind.startswith("Interp"):
            if self.s is None:
                raise ValueError("interpolation spaces need a parameter s")
            _check_s(self.s)
        elif self.s is not None:
            raise ValueError(f"space {self.kind} takes no interpolation parameter")

    @classmethod
    def interp_hv(cls, s: float) -> "SpaceTag":
        return cls("InterpHV", s)

    @classmethod
    def interp_hvdual(cls, s: float) -> "SpaceTag":
        return cls("InterpHVdual", s)

    def multiplier(self, m: np.ndarray) -> np.ndarray:
        if self.kind == "H":
            return np.ones_like(m)
        if self.kind == "V":
            return m
        if self.kind == "Vdual":
            return 1.0 / m
        if self.kind == "InterpHV":
            return m**self.s
        return m ** (-self.s)

    def __str__(self):
        return self.kind if self.s is None else f"{self.kind}({self.s:g})"


SpaceTag.H = SpaceTag("H")
SpaceTag.V = SpaceTag("V")
SpaceTag.VDUAL = SpaceTag("Vdual")


def weighted_norm(f, tag: SpaceTag, model: MeasureSpaceModel) -> float:
    """Norm of ``f`` in the space ``tag`` of ``model``.

    ``f`` may also be an ``(n, k)`` array, in which case the norm of each
    column is returned.
    """
    f = model.check_vector(f)
    w = model.weights(tag)
    if f.ndim == 1:
        return float(np.sqrt(np.sum(np.abs(f) ** 2 * w)))
    return np.sqrt(np.einsum("i...,i->...", np.abs(f) ** 2, w))


def duality_pairing(f, g, model: MeasureSpaceModel) -> complex:
    """Antidual pairing ``<f, g>_{V',V} = sum f_i conj(g_i) sigma_i``.

    With H as pivot this is the H inner product whenever both arguments are
    read as elements of H.
    """
    f = model.check_vector(f)
    g = model.check_vector(g)
    if f.shape != g.shape:
        raise DimensionError("pairing arguments differ in shape")
    return complex(np.sum(f * np.conj(g) * model.sigma))


def _hermitian_part(B):
    return 0.5 * (B + B.conj().T)


def _sector_contains(B, theta, slack):
    # W(B) lies in the closed sector |arg z| <= theta iff both rotated
    # Hermitian parts are positive semidefinite.
    lo = np.linalg.eigvalsh(_hermitian_part(1j * np.exp(-1j * theta) * B))[0]
    hi = np.linalg.eigvalsh(_hermitian_part(-1j * np.exp(1j * theta) * B))[0]
    return min(lo, hi) >= -slack


def certify_sectorial(A, model: MeasureSpaceModel, *, samples=SAMPLE_COUNT, seed=0,
                      tol=REAL_PART_TOL):
    """Return form constants ``(M, mu, theta)`` of ``A`` over ``model``.

    ``M`` is the continuity constant with respect to the V norm (exact weighted
    operator norm), ``mu`` the V-coercivity constant from the generalized
    eigenproblem of the Hermitian part, clamped at 0, and ``theta`` an upper
    bound for the half-angle of the sector containing the H-numerical range.

    ``theta`` is located by bisection on the rotated Hermitian parts and then
    cross-checked against ``samples`` random points of the numerical range.

    Raises
    ------
    SectorialityError
        If the Hermitian part is not positive semidefinite (up to ``tol``)
        or the numerical range reaches the imaginary axis away from 0.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"operator must be a square matrix, got shape {A.shape}")
    if A.shape[0] != model.n:
        raise DimensionError(f"operator is {A.shape[0]}x{A.shape[0]} but model has n={model.n}")
    if not np.all(np.isfinite(A)):
        raise ValueError("operator has non-finite entries")

    sigma, m = model.sigma, model.m
    SA = sigma[:, None] * A
    # V-normalized coordinates: f = (sigma m)^{-1/2} a
    dv = 1.0 / np.sqrt(sigma * m)
    BV = dv[:, None] * SA * dv[None, :]
    M = float(np.linalg.norm(BV, 2))
    mu = float(np.linalg.eigvalsh(_hermitian_part(BV))[0])

    # H-normalized coordinates for the numerical range
    rs = np.sqrt(sigma)
    BH = rs[:, None] * A / rs[None, :]
    scale = max(1.0, float(np.linalg.norm(BH, 2)))
    slack = tol * scale
    re_min = float(np.linalg.eigvalsh(_hermitian_part(BH))[0])
    if re_min < -slack:
        raise SectorialityError(
            f"Hermitian part has eigenvalue {re_min:.3e} < 0; numerical range leaves the right half-plane"
        )
    if _sector_contains(BH, 0.0, slack):
        theta = 0.0
    else:
        lo, hi = 0.0, 0.5 * np.pi
        for _ in range(_ANGLE_BISECTIONS):
            mid = 0.5 * (lo + hi)
            if _sector_contains(BH, mid, 0.0):
                hi = mid
            else:
                lo = mid
        theta = hi
        if theta > 0.5 * np.pi - 1e-6:
            raise SectorialityError(
                "numerical range touches the imaginary axis; no sector of half-angle < pi/2 contains it"
            )

    if samples:
        rng = np.random.default_rng(seed)
        n = A.shape[0]
        F = rng.standard_normal((n, samples)) + 1j * rng.standard_normal((n, samples))
        F /= np.linalg.norm(F, axis=0)
        q = np.einsum("ik,ij,jk->k", F.conj(), BH, F)
        if np.any(q.real < -slack):
            raise SectorialityError("sampled numerical range has negative real part")
        pos = q.real > slack
        if np.any(pos):
            sampled = float(np.max(np.arctan(np.abs(q.imag[pos]) / q.real[pos])))
            if sampled > theta + 1e-8:
                raise SectorialityError(
                    f"sampled sector angle {sampled:.6f} exceeds certified bound {theta:.6f}"
                )
    return M, max(mu, 0.0), float(theta)


@dataclass(frozen=True)
class SectorialOperator:
    """A square complex matrix over a measure-space model with certified constants.

    Build instances with :meth:`certify`; the raw constructor trusts its
    arguments.
    """

    matrix: np.ndarray
    model: MeasureSpaceModel
    M: float
    mu: float
    theta: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=complex)
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @classmethod
    def certify(cls, A, model: MeasureSpaceModel | None = None, **kwargs) -> "SectorialOperator":
        A = np.asarray(A, dtype=complex)
        if model is None:
            model = MeasureSpaceModel.unit(A.shape[0])
        M, mu, theta = certify_sectorial(A, model, **kwargs)
        return cls(A, model, M, mu, theta)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def coercive(self) -> bool:
        return self.mu > 0

    def h_similar(self) -> np.ndarray:
        """The matrix in H-orthonormal coordinates, ``S^{1/2} A S^{-1/2}``."""
        if "BH" not in self._cache:
            rs = np.sqrt(self.model.sigma)
            self._cache["BH"] = rs[:, None] * self.matrix / rs[None, :]
        return self._cache["BH"]

    @property
    def is_hermitian(self) -> bool:
        """Self-adjoint with respect to the H inner product."""
        if "herm" not in self._cache:
            B = self.h_similar()
            self._cache["herm"] = bool(
                np.linalg.norm(B - B.conj().T) <= 1e-13 * max(1.0, np.linalg.norm(B))
            )
        return self._cache["herm"]

    @property
    def h_coercivity(self) -> float:
        """Smallest ``omega`` with ``Re <Af, f>_H >= omega |f|_H^2``.

        Gives the decay bound ``|exp(-tA)|_{L(H)} <= exp(-omega t)``.
        """
        if "omega" not in self._cache:
            B = self.h_similar()
            self._cache["omega"] = float(np.linalg.eigvalsh(_hermitian_part(B))[0])
        return self._cache["omega"]

    def h_eigh(self):
        """Eigenpairs ``(lam, Q)`` of an H-self-adjoint operator in H-orthonormal coordinates."""
        if "eigh" not in self._cache:
            if not self.is_hermitian:
                raise ValueError("h_eigh requires an H-self-adjoint operator")
            B = self.h_similar()
            lam, Q = np.linalg.eigh(_hermitian_part(B))
            self._cache["eigh"] = (lam, Q)
        return self._cache["eigh"]

    def scaled(self, c: float) -> "SectorialOperator":
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return SectorialOperator(c * self.matrix, self.model, c * self.M, c * self.mu, self.theta)

    def __repr__(self):
        return (f"SectorialOperator(n={self.n}, M={self.M:.4g}, mu={self.mu:.4g}, "
                f"theta={self.theta:.4g}, hermitian={self.is_hermitian})")
