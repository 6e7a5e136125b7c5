"""Fractional powers when the form is only sectorial with vertex 0.

Adding ``(1/n) <u, v>_V`` to the form makes it coercive, so ``A_n**s`` is
available from the semigroup integral.  ``A**s`` is then recovered at the
resolvent level, ``R = lim (I + A_n**s)**-1``, by extrapolating over a
schedule of ``n`` values in ``h = 1/n``.

Two quantities can be extrapolated.  ``A_n**s`` itself has the short
expansion ``sum c_jk h**(k + j s)`` (``j`` in {0, 1}): a zero eigenvalue moves
to ``~ h`` and contributes ``h**s (1 + O(h))``, everything else is analytic
in ``h``.  The resolvent mixes all powers ``h**(k s)`` and converges more
slowly for small ``s``.  Both give the same ``R`` in the limit since
inversion is continuous at the invertible ``I + A**s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularOperatorError
from .extrapolate import richardson_table
from .operator import MeasureSpaceModel, SectorialOperator, weighted_norm, SpaceTag
from .quadrature import QuadratureRule
from .semigroup import frac_power_balakrishnan

__all__ = [
    "DEFAULT_SCHEDULE",
    "regularize",
    "vertex0_exponents",
    "Vertex0Result",
    "frac_power_vertex0",
    "strong_resolvent_gap",
]

DEFAULT_SCHEDULE = (10, 100, 1000, 10000)
RESOLVENT_COND_CAP = 1e12


def regularize(A: SectorialOperator, model: MeasureSpaceModel | None = None, n: int = 1) -> SectorialOperator:
    """``A_n = A + (1/n) diag(m)``, i.e. the form plus ``(1/n) <f, g>_V``; recertified."""
    if int(n) != n or n < 1:
        raise ValueError("regularization index n must be a positive integer")
    model = model or A.model
    if model.n != A.n:
        raise ValueError("model dimension does not match the operator")
    return SectorialOperator.certify(A.matrix + np.diag(model.m) / n, model)


TARGETS = ("power", "resolvent")


def vertex0_exponents(s: float, count: int, target: str = "power"):
    """Leading error powers of ``h = 1/n`` for the extrapolated quantity.

    ``"power"``: ``h**(k + j s)`` with ``j`` in {0, 1}.  ``"resolvent"``:
    ``(1 + h**s)**-1`` adds every ``h**(k + j s)``, ``j >= 0``.
    """
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")
    jmax = 1 if target == "power" else count
    ex = {round(k + j * s, 12) for k in range(count + 1) for j in range(jmax + 1)} - {0.0}
    return sorted(ex)[:count]


def _approximants(A, s, schedule, rule, regularize_coercive):
    # the constant sequence A_n = A when A is already coercive
    if A.coercive and not regularize_coercive:
        return [A] * len(schedule)
    return [regularize(A, A.model, n) for n in schedule]


def _power_matrix(B: SectorialOperator, s, rule):
    return frac_power_balakrishnan(B, s, np.eye(B.n), rule)


@dataclass(frozen=True)
class Vertex0Result:
    """Extrapolated resolvent ``R = (I + A**s)**-1`` and what it yields for ``x``."""

    resolvent: np.ndarray
    resolvent_x: np.ndarray
    power_x: np.ndarray
    schedule: tuple
    exponents: tuple
    table: tuple
    gap: float


def _check_schedule(schedule):
    sched = tuple(int(n) for n in schedule)
    if len(sched) < 2:
        raise ConfigError("schedule needs at least two n values for extrapolation")
    if any(n < 1 for n in sched) or len(set(sched)) != len(sched):
        raise ConfigError("schedule entries must be distinct positive integers")
    return tuple(sorted(sched))


def frac_power_vertex0(A: SectorialOperator, s: float, x, schedule=DEFAULT_SCHEDULE, *,
                       rule: QuadratureRule | None = None, target="power",
                       regularize_coercive=False) -> Vertex0Result:
    """``A**s x`` for a vertex-0 sectorial ``A`` through ``R = lim (I + A_n**s)**-1``.

    The matrices ``A_n**s`` (or the resolvents, with ``target="resolvent"``)
    are formed densely and extrapolated to ``h = 1/n -> 0`` by Richardson with
    the powers of :func:`vertex0_exponents`.  ``A**s x = R**-1 x - x`` is
    returned when ``R`` is numerically invertible.  ``gap`` is the relative
    spread of the two finest extrapolants of ``R``, an empirical accuracy
    estimate.  A coercive ``A`` needs no regularization and is used as is
    unless ``regularize_coercive`` is set.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    sched = _check_schedule(schedule)
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != A.n:
        raise ValueError(f"vector has length {x.shape[0]}, operator dimension is {A.n}")
    I = np.eye(A.n)
    Ps = np.array([_power_matrix(B, s, rule) for B in _approximants(A, s, sched, rule, regularize_coercive)])
    h = 1.0 / np.array(sched, dtype=float)
    exps = vertex0_exponents(s, len(sched) - 1, target)
    if target == "power":
        table = [np.linalg.inv(I + P) for P in richardson_table(Ps, h, exps)]
    else:
        table = richardson_table(np.array([np.linalg.inv(I + P) for P in Ps]), h, exps)
    R = table[-1]
    scale = max(np.linalg.norm(R), np.finfo(float).tiny)
    gap = float(np.linalg.norm(table[-1] - table[-2]) / scale)
    cond = np.linalg.cond(R)
    if not cond < RESOLVENT_COND_CAP:
        raise SingularOperatorError(
            f"limit resolvent has condition {cond:.2e}; x lies outside the range where A**s x is tractable"
        )
    Rx = R @ x
    return Vertex0Result(
        resolvent=R, resolvent_x=Rx, power_x=np.linalg.solve(R, x) - x,
        schedule=sched, exponents=tuple(exps), table=tuple(table), gap=gap,
    )


def strong_resolvent_gap(A: SectorialOperator, s: float, z: complex = 1.0, schedule=DEFAULT_SCHEDULE,
                         x=None, *, rule: QuadratureRule | None = None, regularize_coercive=False):
    """``|(z + A_n**s)**-1 x - (z + A_m**s)**-1 x|_H`` for consecutive ``n, m`` of the schedule.

    Without ``x`` the test set is the H-normalized unit vectors
    ``e_j / sqrt(sigma_j)`` and each entry is the largest gap over that set.
    """
    if not np.real(z) > 0:
        raise ValueError("shift z must have positive real part")
    sched = _check_schedule(schedule)
    model = A.model
    if x is None:
        X = np.diag(1 / np.sqrt(model.sigma)).astype(complex)
    else:
        X = np.asarray(x, dtype=complex).reshape(A.n, -1)
    I = np.eye(A.n)
    sols = [np.linalg.solve(z * I + _power_matrix(B, s, rule), X)
            for B in _approximants(A, s, sched, rule, regularize_coercive)]
    gaps = []
    for a, b in zip(sols[:-1], sols[1:]):
        gaps.append(float(weighted_norm(a - b, SpaceTag.H, model).max()))
    return np.array(gaps)
